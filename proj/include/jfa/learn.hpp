#pragma once

// Latent structural SVM training of W with omega held fixed:
//
//   min_W  lambda/2 |W|_F^2 + sum_i xi_i
//   s.t.   f(x_i, y_i) - f(x_i, y) >= Delta(y_i, y) - xi_i   for all seen y
//
// f is the adaptive similarity. Because f is a max over latent (z_t, z_s) of
// a function affine in W, df/dW = z_t z_s^T at the maximizer.
//
// Each outer round fixes the latent maximizers of the ground-truth pairs
// (which turns the objective into a convex upper bound that is tight at the
// current W) and runs projected subgradient steps on that bound. The best
// iterate of the round is kept, so the recorded objective never increases.

#include <cstdint>
#include <span>
#include <vector>

#include "jfa/adapt.hpp"
#include "jfa/core.hpp"

namespace jfa {

enum class StepDecay {
  per_step,  // eta_t = eta_0 / (1 + t), t counts inner steps
  per_round  // eta_r = eta_0 / (1 + r), constant within an outer round
};

struct TrainConfig {
  double lambda = 1.0;
  std::size_t outer_iters = 100;
  std::size_t inner_iters = 25;
  // Initial step as a fraction of the PD radius (1 - pd_margin) * min(w13, w24),
  // per unit of the initial subgradient norm.
  double step_size = 0.5;
  StepDecay decay = StepDecay::per_round;
  // A round without improvement halves eta_0; this many in a row end training.
  std::size_t patience = 8;
  double pd_margin = 0.05;
  // 0 = full batch. Otherwise the subgradient uses a seeded random subset of
  // this size while acceptance still uses the full objective.
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

double zero_one_loss(ClassId y_true, ClassId y);

struct Violation {
  ClassId label = 0;        // loss-augmented argmax
  double slack = 0.0;       // max(0, Delta + f(label) - f(y_true))
  double score_true = 0.0;  // f(x, y_true)
  double score_label = 0.0; // f(x, label)
};

struct ScoredClass {
  ClassId label;
  double score;
};

// Loss-augmented inference over precomputed scores. Ties go to the smallest id.
Violation loss_augmented_argmax(std::span<const ScoredClass> scores, ClassId y_true);

Violation loss_augmented_argmax(const JointSystem& system, std::span<const double> phi, ClassId y_true,
                                std::span<const ClassEmbedding> seen);

// lambda/2 |W|_F^2 + sum of slacks over labeled instances, W taken from system.
double hinge_objective(const JointSystem& system, std::span<const EmbeddedInstance> instances,
                       std::span<const ClassEmbedding> seen, double lambda);

// z_t(y_hat) z_s(y_hat)^T - z_t(y_true) z_s(y_true)^T with closed-form maximizers.
Matrix subgradient_W(const JointSystem& system, std::span<const double> phi, std::span<const double> psi_hat,
                     std::span<const double> psi_true);

// Scales W so that delta_W <= (1 - margin) * min(w13, w24), leaving it alone if
// the bound already holds. The result assembles to a strictly diagonally
// dominant, hence positive-definite, H.
Matrix project_pd(const Matrix& W, const OmegaParams& omega, double pd_margin);

struct RoundDiagnostics {
  std::size_t round = 0;
  double objective = 0.0;
  double delta_w = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  bool is_pd = false;
  bool improved = false;
};

struct TrainResult {
  WeightModel model;
  TrainingState state;
  std::vector<RoundDiagnostics> rounds;
};

// Trains on the seen classes of `data`.
TrainResult train(const Dataset& data, const OmegaParams& omega, const TrainConfig& config);

}  // namespace jfa
