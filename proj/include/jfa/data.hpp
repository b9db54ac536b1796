#pragma once

// Line-oriented text formats (UTF-8, '#' starts a comment):
//
//   classes file    class_id <TAB> psi as comma-separated decimals
//   instances file  instance_id <TAB> class_id or '-' <TAB> phi
//   split file      "seen: 1,2,3" and "unseen: 4,5"
//
// Reals are written in the shortest decimal form that parses back to the
// same double, so saving and loading is lossless.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "jfa/core.hpp"

namespace jfa {

// Malformed text, reported with source name and line number.
class ParseError : public IoError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
};

inline constexpr const char* kClassesFile = "classes.tsv";
inline constexpr const char* kInstancesFile = "instances.tsv";
inline constexpr const char* kSplitFile = "split.txt";

std::string format_real(double v);
std::string format_reals(std::span<const double> v);
double parse_real(std::string_view text);
Vector parse_reals(std::string_view text);

Dataset load_dataset(const std::filesystem::path& classes, const std::filesystem::path& instances,
                     const std::filesystem::path& split);
Dataset load_dataset_dir(const std::filesystem::path& dir);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Stream-level pieces of the above. read_dataset validates the result.
Dataset read_dataset(std::istream& classes, std::istream& instances, std::istream& split,
                     const std::string& source_prefix = "");
void write_classes(const Dataset& d, std::ostream& out);
void write_instances(const Dataset& d, std::ostream& out);
void write_split(const Dataset& d, std::ostream& out);

// Versioned model file: header (format, d_t, d_s, omega, lambda, crc32 of the
// remaining text) followed by W row-major, one row per line.
inline constexpr int kModelFormatVersion = 1;
void write_model(const WeightModel& model, std::ostream& out);
WeightModel read_model(std::istream& in, const std::string& source = "<model>");
void save_model(const WeightModel& model, const std::filesystem::path& path);
WeightModel load_model(const std::filesystem::path& path);

// Throws ValidationError when the model and dataset disagree on dimensions.
void check_model_matches(const WeightModel& model, const Dataset& data);

struct SynthConfig {
  std::size_t n_seen = 20;
  std::size_t n_unseen = 5;
  std::size_t d_s = 8;
  std::size_t d_t = 16;
  std::size_t instances_per_class = 30;
  double attribute_scale = 1.0;
  double map_noise = 0.0;           // std of each class's deviation from the shared linear map
  double feature_noise = 0.05;      // std of per-instance noise
  double intra_class_spread = 0.05; // std of per-instance class spread
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthProblem {
  Dataset dataset;
  Matrix map;  // ground-truth d_t x d_s linear map
};

// Classes get ids 1..n, instances 1..N grouped by class. psi ~ U[0, scale]^d_s,
// map entries ~ N(0, 1/d_s), phi = (map + map_noise E_y) psi + spread noise + feature noise.
SynthProblem synth_generate_problem(const SynthConfig& config);
Dataset synth_generate(const SynthConfig& config);

enum class StandardizeMode { none, zscore_target, unit_norm_both };

StandardizeMode parse_standardize_mode(std::string_view name);
std::string_view standardize_mode_name(StandardizeMode mode);

// Statistics fitted on seen-class training instances, reusable on new data.
struct Standardization {
  StandardizeMode mode = StandardizeMode::none;
  Vector mean;  // zscore-target only
  Vector scale;
  std::vector<std::size_t> zero_variance_dims;  // replaced by unit variance
};

struct StandardizeResult {
  Dataset dataset;
  Standardization fit;
  std::size_t zero_vectors = 0;  // unit-norm-both: vectors left as-is
};

StandardizeResult standardize(const Dataset& dataset, StandardizeMode mode);
// Applies previously fitted statistics; returns the number of zero vectors skipped.
std::size_t apply_standardization(const Standardization& fit, Dataset& dataset);

// One row per instance: id, original phi, adapted z_t and z_s when matched
// against class `label`.
void export_adapted(const WeightModel& model, const Dataset& dataset, ClassId label, std::ostream& out);
void export_adapted(const WeightModel& model, const Dataset& dataset, ClassId label,
                    const std::filesystem::path& path);

}  // namespace jfa
