#pragma once

// Grid search over omega with an eigenvalue prefilter and class-disjoint
// cross-validation: each fold of seen classes is held out as pseudo-unseen
// classes while the model is trained on the remaining ones.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jfa/core.hpp"
#include "jfa/learn.hpp"

namespace jfa {

struct GridSpec {
  int exponent_lo = -5;
  int exponent_hi = 5;
  double base = 10.0;

  void validate() const;
};

struct GridCandidate {
  std::array<int, 4> exponents{};
  OmegaParams omega;
};

// Cartesian product of base^e, e in [lo, hi], over the four components, in
// lexicographic exponent order.
std::vector<GridCandidate> omega_grid(const GridSpec& spec);

struct PrefilterResult {
  bool keep = false;
  bool is_pd = false;
  bool preferred = false;  // eig_max in (1e3, 1e4]
  double eig_min = 0.0;
  double eig_max = 0.0;
};

// keep = PD and eig_min in (0, 1] and eig_max in (10, 1e6].
PrefilterResult eigen_prefilter(const OmegaParams& omega, const Matrix& W_probe);

// Partitions class ids into k disjoint folds of near-equal size (seeded shuffle,
// round-robin assignment, each fold sorted).
std::vector<std::vector<ClassId>> crossval_split(std::span<const ClassId> class_ids, std::size_t k, std::uint64_t seed);

struct CandidateRecord {
  std::size_t grid_index = 0;  // position in omega_grid order
  GridCandidate candidate;
  PrefilterResult prefilter;
  bool skipped = false;
  std::string note;  // why skipped
  std::vector<double> fold_accuracy;
  double cv_mean = 0.0;
  double cv_std = 0.0;  // sample std over folds
};

struct SelectionOptions {
  std::size_t folds = 4;
  std::size_t workers = 1;
  bool use_prefilter = true;
  std::uint64_t seed = 0;
  TrainConfig probe_config{.outer_iters = 1, .inner_iters = 10};
};

struct SelectionReport {
  std::vector<CandidateRecord> records;  // ranked: evaluated rows by cv_mean desc, then skipped rows
  std::optional<std::size_t> best;       // index into records
  double elapsed_seconds = 0.0;
};

// Ranks in place: higher cv_mean first, then larger eig_min, then grid order;
// skipped candidates last in grid order. Returns the index of the best
// evaluated record, if any.
std::optional<std::size_t> rank_records(std::vector<CandidateRecord>& records);

// Trains on all but one fold per round and measures zero-shot accuracy on the
// held-out classes. Returns per-fold accuracies.
std::vector<double> crossval_accuracy(const Dataset& data, const OmegaParams& omega, const TrainConfig& config,
                                      const std::vector<std::vector<ClassId>>& folds);

SelectionReport select_omega(const Dataset& data, const GridSpec& grid, const TrainConfig& train_config,
                             const SelectionOptions& options = {});

// Tab-separated, one row per candidate in ranked order. Contains no timing so
// reports are reproducible byte for byte.
void write_report(const SelectionReport& report, std::ostream& out);

}  // namespace jfa
