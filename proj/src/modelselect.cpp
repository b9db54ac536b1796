#include "jfa/modelselect.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "jfa/adapt.hpp"
#include "jfa/data.hpp"
#include "jfa/zsr.hpp"

namespace jfa {

void GridSpec::validate() const {
  if (exponent_lo > exponent_hi) throw ValidationError("grid needs exponent_lo <= exponent_hi");
  if (!(base > 0.0) || !std::isfinite(base)) throw ValidationError("grid base must be positive");
}

std::vector<GridCandidate> omega_grid(const GridSpec& spec) {
  spec.validate();
  std::vector<double> values;
  for (int e = spec.exponent_lo; e <= spec.exponent_hi; ++e) values.push_back(std::pow(spec.base, e));
  const int n = static_cast<int>(values.size());
  std::vector<GridCandidate> out;
  out.reserve(static_cast<std::size_t>(n) * n * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          GridCandidate g;
          g.exponents = {spec.exponent_lo + a, spec.exponent_lo + b, spec.exponent_lo + c, spec.exponent_lo + d};
          g.omega = OmegaParams(values[a], values[b], values[c], values[d]);
          out.push_back(g);
        }
  return out;
}

PrefilterResult eigen_prefilter(const OmegaParams& omega, const Matrix& W_probe) {
  const JointSystem sys = assemble_joint_system(W_probe, omega);
  PrefilterResult r;
  r.eig_min = sys.eig_min();
  r.eig_max = sys.eig_max();
  r.is_pd = sys.is_pd();
  r.keep = r.is_pd && r.eig_min > 0.0 && r.eig_min <= 1.0 && r.eig_max > 10.0 && r.eig_max <= 1e6;
  r.preferred = r.eig_max > 1e3 && r.eig_max <= 1e4;
  return r;
}

std::vector<std::vector<ClassId>> crossval_split(std::span<const ClassId> class_ids, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("cross-validation needs k >= 2");
  if (k > class_ids.size()) {
    throw ValidationError("cannot split " + std::to_string(class_ids.size()) + " classes into " + std::to_string(k) + " folds");
  }
  std::vector<ClassId> ids(class_ids.begin(), class_ids.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ValidationError("duplicate class id in fold split");
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<std::vector<ClassId>> folds(k);
  for (std::size_t i = 0; i < ids.size(); ++i) folds[i % k].push_back(ids[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<double> crossval_accuracy(const Dataset& data, const OmegaParams& omega, const TrainConfig& config,
                                      const std::vector<std::vector<ClassId>>& folds) {
  std::vector<double> acc;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<ClassId> train_classes;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train_classes.insert(train_classes.end(), folds[g].begin(), folds[g].end());
    const Dataset fold = data.restricted(train_classes, folds[f]);
    const TrainResult trained = train(fold, omega, config);
    const auto test = fold.test_instances();
    if (test.empty()) throw ValidationError("fold " + std::to_string(f) + " has no held-out instances");
    const auto predictions = predict_all(trained.model, fold.unseen_classes(), test);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) correct += predictions[i].predicted == *test[i].label ? 1 : 0;
    acc.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
  }
  return acc;
}

std::optional<std::size_t> rank_records(std::vector<CandidateRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const CandidateRecord& a, const CandidateRecord& b) {
    if (a.skipped != b.skipped) return !a.skipped;
    if (a.skipped) return a.grid_index < b.grid_index;
    if (a.cv_mean != b.cv_mean) return a.cv_mean > b.cv_mean;
    if (a.prefilter.eig_min != b.prefilter.eig_min) return a.prefilter.eig_min > b.prefilter.eig_min;
    return a.grid_index < b.grid_index;
  });
  if (records.empty() || records.front().skipped) return std::nullopt;
  return std::size_t{0};
}

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

CandidateRecord evaluate_candidate(const Dataset& data, const GridCandidate& cand, std::size_t index,
                                   const TrainConfig& train_config, const SelectionOptions& options,
                                   const std::vector<std::vector<ClassId>>& folds) {
  CandidateRecord rec;
  rec.grid_index = index;
  rec.candidate = cand;
  try {
    const TrainResult probe = train(data, cand.omega, options.probe_config);
    rec.prefilter = eigen_prefilter(cand.omega, probe.model.W);
    if (options.use_prefilter && !rec.prefilter.keep) {
      rec.skipped = true;
      rec.note = "prefilter";
      return rec;
    }
    rec.fold_accuracy = crossval_accuracy(data, cand.omega, train_config, folds);
    rec.cv_mean = mean_of(rec.fold_accuracy);
    rec.cv_std = sample_std(rec.fold_accuracy);
  } catch (const NumericalError& e) {
    rec.skipped = true;
    rec.note = "numerical";
  }
  return rec;
}

}  // namespace

SelectionReport select_omega(const Dataset& data, const GridSpec& grid, const TrainConfig& train_config,
                             const SelectionOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  data.validate();
  train_config.validate();
  options.probe_config.validate();
  if (data.seen.size() < options.folds) {
    throw ValidationError("grid search needs at least " + std::to_string(options.folds) + " seen classes");
  }
  const auto candidates = omega_grid(grid);
  const auto folds = crossval_split(data.seen, options.folds, options.seed);
  // Only the training part of the data takes part in selection.
  const Dataset seen_only = data.restricted(data.seen, {});

  std::vector<CandidateRecord> records(candidates.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= candidates.size()) return;
      try {
        records[i] = evaluate_candidate(seen_only, candidates[i], i, train_config, options, folds);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(candidates.size());
        return;
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, candidates.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  SelectionReport report;
  report.records = std::move(records);
  report.best = rank_records(report.records);
  report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_report(const SelectionReport& report, std::ostream& out) {
  out << "# rank\te1\te2\te3\te4\tw1\tw2\tw3\tw4\tcv_mean\tcv_std\teig_min\teig_max\tis_pd\tpreferred\tskipped\tbest\tnote\n";
  for (std::size_t r = 0; r < report.records.size(); ++r) {
    const auto& rec = report.records[r];
    const auto& e = rec.candidate.exponents;
    const auto& om = rec.candidate.omega;
    out << r + 1 << '\t' << e[0] << '\t' << e[1] << '\t' << e[2] << '\t' << e[3] << '\t' << format_real(om.w1()) << '\t'
        << format_real(om.w2()) << '\t' << format_real(om.w3()) << '\t' << format_real(om.w4()) << '\t';
    if (rec.skipped) {
      out << "nan\tnan\t";
    } else {
      out << format_real(rec.cv_mean) << '\t' << format_real(rec.cv_std) << '\t';
    }
    out << format_real(rec.prefilter.eig_min) << '\t' << format_real(rec.prefilter.eig_max) << '\t'
        << (rec.prefilter.is_pd ? 1 : 0) << '\t' << (rec.prefilter.preferred ? 1 : 0) << '\t' << (rec.skipped ? 1 : 0)
        << '\t' << (report.best && *report.best == r ? 1 : 0) << '\t' << (rec.note.empty() ? "-" : rec.note) << '\n';
  }
}

}  // namespace jfa
