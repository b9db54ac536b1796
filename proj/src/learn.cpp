#include "jfa/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "jfa/kernels.hpp"

namespace jfa {

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be finite and nonnegative");
  if (patience < 1) throw ValidationError("patience must be >= 1");
  if (outer_iters < 1 || inner_iters < 1) throw ValidationError("outer_iters and inner_iters must be >= 1");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw ValidationError("step_size must be positive");
  if (!(pd_margin > 0.0 && pd_margin < 1.0)) throw ValidationError("pd_margin must lie in (0, 1)");
}

double zero_one_loss(ClassId y_true, ClassId y) { return y_true == y ? 0.0 : 1.0; }

Violation loss_augmented_argmax(std::span<const ScoredClass> scores, ClassId y_true) {
  if (scores.empty()) throw ValidationError("loss-augmented inference needs at least one class");
  const ScoredClass* best = nullptr;
  double best_value = -std::numeric_limits<double>::infinity();
  double score_true = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : scores) {
    if (s.label == y_true) score_true = s.score;
    const double value = zero_one_loss(y_true, s.label) + s.score;
    if (!best || value > best_value || (value == best_value && s.label < best->label)) {
      best = &s;
      best_value = value;
    }
  }
  if (std::isnan(score_true)) throw ValidationError("true class " + std::to_string(y_true) + " is not among the scored classes");
  Violation v;
  v.label = best->label;
  v.score_true = score_true;
  v.score_label = best->score;
  v.slack = std::max(0.0, best_value - score_true);
  return v;
}

Violation loss_augmented_argmax(const JointSystem& system, std::span<const double> phi, ClassId y_true,
                                std::span<const ClassEmbedding> seen) {
  if (seen.empty()) throw ValidationError("loss-augmented inference needs a non-empty seen set");
  std::vector<ScoredClass> scores;
  scores.reserve(seen.size());
  for (const auto& c : seen) scores.push_back({c.label, similarity(system, assemble_pair(phi, c.psi, system.omega()))});
  return loss_augmented_argmax(scores, y_true);
}

double hinge_objective(const JointSystem& system, std::span<const EmbeddedInstance> instances,
                       std::span<const ClassEmbedding> seen, double lambda) {
  double total = 0.5 * lambda * system.W().frobenius_sq();
  for (const auto& x : instances) {
    if (!x.label) throw ValidationError("hinge objective needs labeled instances");
    total += loss_augmented_argmax(system, x.phi, *x.label, seen).slack;
  }
  return total;
}

Matrix subgradient_W(const JointSystem& system, std::span<const double> phi, std::span<const double> psi_hat,
                     std::span<const double> psi_true) {
  Matrix g(system.d_t(), system.d_s());
  if (std::equal(psi_hat.begin(), psi_hat.end(), psi_true.begin(), psi_true.end())) return g;
  const AdaptedPair hat = adapt_closed_form(system, assemble_pair(phi, psi_hat, system.omega()));
  const AdaptedPair truth = adapt_closed_form(system, assemble_pair(phi, psi_true, system.omega()));
  kernels::rank1_update(1.0, hat.z_t, hat.z_s, g.values(), g.rows(), g.cols());
  kernels::rank1_update(-1.0, truth.z_t, truth.z_s, g.values(), g.rows(), g.cols());
  return g;
}

Matrix project_pd(const Matrix& W, const OmegaParams& omega, double pd_margin) {
  const double delta = row_col_l1_bound(W);
  const double bound = (1.0 - pd_margin) * std::min(omega.w13(), omega.w24());
  if (delta <= bound) return W;
  Matrix out = W;
  const double scale = bound / delta;
  for (double& v : out.values()) v *= scale;
  return out;
}

namespace {

struct Problem {
  std::vector<EmbeddedInstance> instances;  // sorted by id
  std::vector<ClassEmbedding> classes;      // sorted by label
  std::vector<std::size_t> truth;           // index into classes
};

// Latent maximizer of a ground-truth pair frozen at the start of a round:
// f(W') >= z_t^T W' z_s + offset, with equality at the round's starting W.
struct FrozenLatent {
  Vector z_t;
  Vector z_s;
  double offset = 0.0;
};

struct Pass {
  double objective = 0.0;
  std::vector<double> slacks;
};

Pass run_pass(const JointSystem& sys, const Problem& p, double lambda, const std::vector<FrozenLatent>* frozen,
              Matrix* grad, const std::vector<char>* in_batch, double batch_weight) {
  Pass pass;
  pass.slacks.resize(p.instances.size());
  pass.objective = 0.5 * lambda * sys.W().frobenius_sq();
  if (grad) {
    *grad = sys.W();
    for (double& v : grad->values()) v *= lambda;
  }

  const ClassBank bank(sys, p.classes);
  Vector scores(bank.size());
  for (std::size_t i = 0; i < p.instances.size(); ++i) {
    const ClassBank::Instance x = bank.prepare(p.instances[i].phi);
    bank.scores(x, scores);
    const std::size_t truth = p.truth[i];
    // Classes are sorted by id, so the first maximum is the smallest id.
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < bank.size(); ++c) {
      const double value = (c == truth ? 0.0 : 1.0) + scores[c];
      if (value > best_value) {
        best_value = value;
        best = c;
      }
    }

    const double lower =
        frozen ? bilinear_form(sys.W(), (*frozen)[i].z_t, (*frozen)[i].z_s) + (*frozen)[i].offset : scores[truth];
    const double slack = std::max(0.0, best_value - lower);
    pass.slacks[i] = slack;
    pass.objective += slack;

    if (!grad || (in_batch && !(*in_batch)[i])) continue;
    if (!frozen && best == truth) continue;
    const Vector zb = bank.maximizer(x, best);
    const std::span<const double> zbs(zb);
    kernels::rank1_update(batch_weight, zbs.first(sys.d_t()), zbs.last(sys.d_s()), grad->values(), grad->rows(),
                          grad->cols());
    if (frozen) {
      const auto& fz = (*frozen)[i];
      kernels::rank1_update(-batch_weight, fz.z_t, fz.z_s, grad->values(), grad->rows(), grad->cols());
    } else {
      const Vector zt = bank.maximizer(x, truth);
      const std::span<const double> zts(zt);
      kernels::rank1_update(-batch_weight, zts.first(sys.d_t()), zts.last(sys.d_s()), grad->values(), grad->rows(),
                            grad->cols());
    }
  }
  if (!std::isfinite(pass.objective)) throw NumericalError("training objective became non-finite");
  return pass;
}

std::vector<FrozenLatent> freeze_latents(const JointSystem& sys, const Problem& p) {
  std::vector<FrozenLatent> out(p.instances.size());
  for (std::size_t i = 0; i < p.instances.size(); ++i) {
    const AdaptedPair a = adapt_closed_form(sys, assemble_pair(p.instances[i].phi, p.classes[p.truth[i]].psi, sys.omega()));
    out[i].offset = a.objective - bilinear_form(sys.W(), a.z_t, a.z_s);
    out[i].z_t = a.z_t;
    out[i].z_s = a.z_s;
  }
  return out;
}

Problem make_problem(const Dataset& data) {
  Problem p;
  p.classes = data.seen_classes();
  std::sort(p.classes.begin(), p.classes.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  p.instances = data.training_instances();
  std::sort(p.instances.begin(), p.instances.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  p.truth.reserve(p.instances.size());
  for (const auto& x : p.instances) {
    const auto it = std::lower_bound(p.classes.begin(), p.classes.end(), *x.label,
                                     [](const ClassEmbedding& c, ClassId id) { return c.label < id; });
    p.truth.push_back(static_cast<std::size_t>(it - p.classes.begin()));
  }
  return p;
}

}  // namespace

TrainResult train(const Dataset& data, const OmegaParams& omega, const TrainConfig& config) {
  config.validate();
  data.validate();
  const Problem p = make_problem(data);
  if (p.classes.size() < 2) throw ValidationError("training needs at least two seen classes");
  if (p.instances.empty()) throw ValidationError("training needs at least one labeled seen-class instance");

  const std::size_t n = p.instances.size();
  const double radius = (1.0 - config.pd_margin) * std::min(omega.w13(), omega.w24());
  const bool stochastic = config.batch_size > 0 && config.batch_size < n;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  std::vector<char> in_batch(n, 1);

  Matrix W(data.d_t, data.d_s);
  JointSystem sys = assemble_joint_system(W, omega, SpectrumMode::gershgorin);
  Pass current = run_pass(sys, p, config.lambda, nullptr, nullptr, nullptr, 1.0);

  TrainResult result;
  result.state.objective_trace.emplace_back(0, current.objective);

  double eta0 = 0.0;
  std::size_t step = 0;
  std::size_t failures = 0;
  for (std::size_t round = 1; round <= config.outer_iters; ++round) {
    const std::vector<FrozenLatent> frozen = freeze_latents(sys, p);
    Matrix best_W = W;
    double best_value = current.objective;
    bool improved = false;

    Matrix Wc = W;
    JointSystem sys_c = sys;
    Matrix grad;
    for (std::size_t k = 0; k <= config.inner_iters; ++k) {
      const bool take_step = k < config.inner_iters;
      double weight = 1.0;
      if (take_step && stochastic) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::fill(in_batch.begin(), in_batch.end(), 0);
        for (std::size_t b = 0; b < config.batch_size; ++b) in_batch[order[b]] = 1;
        weight = static_cast<double>(n) / static_cast<double>(config.batch_size);
      }
      const Pass pass = run_pass(sys_c, p, config.lambda, &frozen, take_step ? &grad : nullptr,
                                 stochastic ? &in_batch : nullptr, weight);
      if (k > 0 && pass.objective < best_value) {
        best_value = pass.objective;
        best_W = Wc;
        improved = true;
      }
      if (!take_step) break;

      const double gnorm = std::sqrt(grad.frobenius_sq());
      if (gnorm == 0.0) break;
      if (eta0 == 0.0) eta0 = config.step_size * radius / gnorm;
      const double t = config.decay == StepDecay::per_step ? static_cast<double>(step) : static_cast<double>(round - 1);
      ++step;
      const double eta = eta0 / (1.0 + t);
      Matrix next = Wc;
      kernels::axpy(-eta, grad.values(), next.values());
      Wc = project_pd(next, omega, config.pd_margin);
      sys_c = assemble_joint_system(Wc, omega, SpectrumMode::gershgorin);
    }

    if (improved) {
      W = std::move(best_W);
      sys = assemble_joint_system(W, omega, SpectrumMode::gershgorin);
      current = run_pass(sys, p, config.lambda, nullptr, nullptr, nullptr, 1.0);
    }
    result.state.objective_trace.emplace_back(round, current.objective);

    const JointSystem exact = assemble_joint_system(W, omega, SpectrumMode::exact);
    result.rounds.push_back({round, current.objective, exact.delta_w(), exact.eig_min(), exact.eig_max(),
                             exact.is_pd(), improved});
    if (improved) {
      failures = 0;
    } else {
      eta0 *= 0.5;
      if (++failures >= config.patience) {
        result.state.converged = true;
        break;
      }
    }
  }

  result.state.slacks = std::move(current.slacks);
  result.model = WeightModel{std::move(W), omega, config.lambda};
  return result;
}

}  // namespace jfa
