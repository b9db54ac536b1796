#include "jfa/zsr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jfa {
namespace {

std::vector<ClassEmbedding> sorted_classes(std::span<const ClassEmbedding> classes) {
  std::vector<ClassEmbedding> out(classes.begin(), classes.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  return out;
}

void check_candidates(std::span<const ClassEmbedding> unseen, std::size_t d_s) {
  if (unseen.empty()) throw ValidationError("prediction needs at least one candidate class");
  for (const auto& c : unseen) {
    if (c.psi.size() != d_s) throw ValidationError("class " + std::to_string(c.label) + " dimension does not match the model");
  }
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_dev(std::span<const double> v, bool sample) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(sample ? v.size() - 1 : v.size()));
}

}  // namespace

ClassId argmax_label(std::span<const std::pair<ClassId, double>> scores) {
  if (scores.empty()) throw ValidationError("argmax over an empty score list");
  auto best = scores.begin();
  for (auto it = scores.begin() + 1; it != scores.end(); ++it) {
    if (it->second > best->second || (it->second == best->second && it->first < best->first)) best = it;
  }
  return best->first;
}

PredictionResult predict(const JointSystem& system, std::span<const ClassEmbedding> unseen,
                         const EmbeddedInstance& x) {
  check_candidates(unseen, system.d_s());
  if (x.phi.size() != system.d_t()) throw ValidationError("instance " + std::to_string(x.id) + " dimension does not match the model");
  if (!system.is_pd()) throw NumericalError("model's joint system is not positive definite");
  PredictionResult r;
  r.instance = x.id;
  for (const auto& c : sorted_classes(unseen)) {
    r.scores.emplace_back(c.label, similarity(system, assemble_pair(x.phi, c.psi, system.omega())));
  }
  r.predicted = argmax_label(r.scores);
  return r;
}

PredictionResult predict(const WeightModel& model, std::span<const ClassEmbedding> unseen, const EmbeddedInstance& x) {
  return predict(assemble_joint_system(model.W, model.omega), unseen, x);
}

std::vector<PredictionResult> predict_all(const WeightModel& model, std::span<const ClassEmbedding> unseen,
                                          std::span<const EmbeddedInstance> instances) {
  const JointSystem system = assemble_joint_system(model.W, model.omega);
  std::vector<PredictionResult> out;
  out.reserve(instances.size());
  for (const auto& x : instances) out.push_back(predict(system, unseen, x));
  return out;
}

PredictionResult predict_bilinear(const Matrix& W, std::span<const ClassEmbedding> unseen, const EmbeddedInstance& x) {
  check_candidates(unseen, W.cols());
  PredictionResult r;
  r.instance = x.id;
  for (const auto& c : sorted_classes(unseen)) r.scores.emplace_back(c.label, bilinear_limit(W, x.phi, c.psi));
  r.predicted = argmax_label(r.scores);
  return r;
}

MetricsReport evaluate(std::span<const PredictionResult> predictions, const std::map<InstanceId, ClassId>& truth) {
  if (predictions.empty()) throw ValidationError("cannot evaluate an empty prediction set");
  std::map<ClassId, ClassMetrics> per;
  std::size_t correct = 0;
  for (const auto& p : predictions) {
    const auto it = truth.find(p.instance);
    if (it == truth.end()) throw ValidationError("no ground truth for instance " + std::to_string(p.instance));
    auto& t = per[it->second];
    t.label = it->second;
    ++t.support;
    auto& q = per[p.predicted];
    q.label = p.predicted;
    ++q.predicted;
    if (p.predicted == it->second) {
      ++correct;
      ++per[p.predicted].correct;
    }
  }

  MetricsReport r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
  std::vector<double> precisions, recalls;
  for (auto& [label, m] : per) {
    if (m.predicted == 0) {
      m.precision = 0.0;
      m.precision_undefined = true;
    } else {
      m.precision = static_cast<double>(m.correct) / static_cast<double>(m.predicted);
    }
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(m.correct) / static_cast<double>(m.support);
    precisions.push_back(m.precision);
    if (m.support > 0) recalls.push_back(m.recall);
    r.per_class.push_back(m);
  }
  r.macro_precision = mean(precisions);
  r.macro_precision_std = std_dev(precisions, false);
  r.macro_recall = mean(recalls);
  r.macro_recall_std = std_dev(recalls, false);
  return r;
}

MetricsReport trial_average(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw ValidationError("trial average needs at least one report");
  const auto& first = reports.front();
  for (const auto& r : reports) {
    if (r.per_class.size() != first.per_class.size()) throw ValidationError("trial reports cover different class sets");
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
      if (r.per_class[c].label != first.per_class[c].label) throw ValidationError("trial reports cover different class sets");
    }
  }
  std::vector<double> acc, prec, rec;
  for (const auto& r : reports) {
    acc.push_back(r.accuracy);
    prec.push_back(r.macro_precision);
    rec.push_back(r.macro_recall);
  }
  MetricsReport out;
  out.trials = reports.size();
  out.accuracy = mean(acc);
  out.accuracy_std = std_dev(acc, true);
  out.macro_precision = mean(prec);
  out.macro_precision_std = std_dev(prec, true);
  out.macro_recall = mean(rec);
  out.macro_recall_std = std_dev(rec, true);
  out.per_class = first.per_class;
  const double n = static_cast<double>(reports.size());
  for (std::size_t c = 0; c < out.per_class.size(); ++c) {
    double p = 0.0, q = 0.0;
    bool undefined = false;
    for (const auto& r : reports) {
      p += r.per_class[c].precision;
      q += r.per_class[c].recall;
      undefined = undefined || r.per_class[c].precision_undefined;
    }
    out.per_class[c].precision = p / n;
    out.per_class[c].recall = q / n;
    out.per_class[c].precision_undefined = undefined;
  }
  return out;
}

}  // namespace jfa
