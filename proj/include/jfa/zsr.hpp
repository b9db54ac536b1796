#pragma once

#include <map>
#include <span>
#include <vector>

#include "jfa/adapt.hpp"
#include "jfa/core.hpp"

namespace jfa {

struct PredictionResult {
  InstanceId instance = 0;
  ClassId predicted = 0;
  std::vector<std::pair<ClassId, double>> scores;  // ascending class id
};

// Argmax over (label, score) pairs, smallest id on ties.
ClassId argmax_label(std::span<const std::pair<ClassId, double>> scores);

// Scores every candidate class with the adaptive similarity of the
// pre-factored system.
PredictionResult predict(const JointSystem& system, std::span<const ClassEmbedding> unseen,
                         const EmbeddedInstance& x);
// Assembles the system from the model; throws when it is not PD.
PredictionResult predict(const WeightModel& model, std::span<const ClassEmbedding> unseen,
                         const EmbeddedInstance& x);

std::vector<PredictionResult> predict_all(const WeightModel& model, std::span<const ClassEmbedding> unseen,
                                          std::span<const EmbeddedInstance> instances);

// Baseline scored with phi^T W psi.
PredictionResult predict_bilinear(const Matrix& W, std::span<const ClassEmbedding> unseen,
                                  const EmbeddedInstance& x);

struct ClassMetrics {
  ClassId label = 0;
  std::size_t support = 0;    // ground-truth instances
  std::size_t predicted = 0;  // predictions of this class
  std::size_t correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  bool precision_undefined = false;  // never predicted; precision reported as 0
};

struct MetricsReport {
  double accuracy = 0.0;
  double accuracy_std = 0.0;  // across trials; 0 for a single evaluation
  std::vector<ClassMetrics> per_class;  // ascending label
  double macro_precision = 0.0;
  double macro_precision_std = 0.0;  // across classes (population) or trials (sample)
  double macro_recall = 0.0;
  double macro_recall_std = 0.0;
  std::size_t trials = 1;
};

// `truth` maps instance id to ground-truth class. The class set is the union
// of ground-truth and predicted labels.
MetricsReport evaluate(std::span<const PredictionResult> predictions, const std::map<InstanceId, ClassId>& truth);

// Mean and sample standard deviation of accuracy and macro metrics across
// trials; per-class entries are averaged.
MetricsReport trial_average(std::span<const MetricsReport> reports);

}  // namespace jfa
