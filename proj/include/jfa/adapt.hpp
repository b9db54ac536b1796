#pragma once

// Adaptive similarity between a target feature phi and a source vector psi:
//
//   f = max over (z_t, z_s) of  z_t^T W z_s - w1/2 |z_t - phi|^2 - w2/2 |z_s - psi|^2
//                               - w3/2 |z_t|^2 - w4/2 |z_s|^2
//
// With z = [z_t; z_s] the bracket equals -(1/2 z^T H z - z^T g + h), where
//
//   H = [ w13 I   -W    ]     g = [ w1 phi ]     h = w1/2 |phi|^2 + w2/2 |psi|^2
//       [ -W^T    w24 I ]         [ w2 psi ]
//
// so for positive-definite H the maximizer is z = H^{-1} g and
// f = 1/2 g^T H^{-1} g - h. H depends only on (W, omega): it is factored once
// per model and reused for every pair.

#include <optional>
#include <span>

#include "jfa/core.hpp"
#include "jfa/linalg.hpp"

namespace jfa {

enum class SpectrumMode {
  exact,      // full symmetric eigensolve of H
  gershgorin  // eig_min/eig_max are Gershgorin bounds; PD decided by Cholesky
};

enum class SolvePolicy {
  require_pd,           // refuse non-PD systems
  allow_pseudo_inverse  // diagnostics: fall back to H^+ and flag the result
};

class JointSystem {
 public:
  std::size_t d_t() const noexcept { return d_t_; }
  std::size_t d_s() const noexcept { return d_s_; }
  std::size_t dim() const noexcept { return d_t_ + d_s_; }
  const Matrix& W() const noexcept { return w_; }
  const OmegaParams& omega() const noexcept { return omega_; }
  const Matrix& H() const noexcept { return h_; }

  double delta_w() const noexcept { return delta_w_; }
  double eig_min() const noexcept { return eig_min_; }
  double eig_max() const noexcept { return eig_max_; }
  bool is_pd() const noexcept { return is_pd_; }
  bool is_diag_dominant() const noexcept { return is_diag_dominant_; }
  // False when eig_min/eig_max are bounds rather than computed eigenvalues.
  bool spectrum_exact() const noexcept { return spectrum_exact_; }
  bool has_cholesky() const noexcept { return cholesky_.has_value(); }

  // Solves H z = g. Throws NumericalError for non-PD systems unless the
  // policy allows the pseudo-inverse; `used_pinv` reports which path ran.
  Vector solve(std::span<const double> g, SolvePolicy policy = SolvePolicy::require_pd,
               bool* used_pinv = nullptr) const;

 private:
  friend JointSystem assemble_joint_system(const Matrix& W, const OmegaParams& omega, SpectrumMode mode);

  std::size_t d_t_ = 0;
  std::size_t d_s_ = 0;
  Matrix w_;
  OmegaParams omega_;
  Matrix h_;
  double delta_w_ = 0.0;
  double eig_min_ = 0.0;
  double eig_max_ = 0.0;
  bool is_pd_ = false;
  bool is_diag_dominant_ = false;
  bool spectrum_exact_ = true;
  std::optional<linalg::Cholesky> cholesky_;
  std::optional<linalg::SymmetricEigen> eigen_;  // only for systems without a Cholesky factor
};

JointSystem assemble_joint_system(const Matrix& W, const OmegaParams& omega,
                                  SpectrumMode mode = SpectrumMode::exact);

// Largest l1 norm over the rows and columns of W.
double row_col_l1_bound(const Matrix& W);

PairAssembly assemble_pair(std::span<const double> phi, std::span<const double> psi, const OmegaParams& omega);

AdaptedPair adapt_closed_form(const JointSystem& system, const PairAssembly& pair,
                              SolvePolicy policy = SolvePolicy::require_pd);

struct AlternatingOptions {
  DomainSpec domain;
  std::optional<Vector> init_z_s;  // defaults to psi
  double tol = 1e-10;
  std::size_t max_iter = 10000;
};

// Block coordinate ascent: z_t <- (w1 phi + W z_s) / w13, z_s <- (w2 psi + W^T z_t) / w24,
// each followed by projection onto its ball when bounded. Throws NumericalError
// when the iterates blow up; running out of iterations only clears `converged`.
AdaptedPair adapt_alternating(const Matrix& W, const OmegaParams& omega, std::span<const double> phi,
                              std::span<const double> psi, const AlternatingOptions& options = {});

double objective_value(const Matrix& W, const OmegaParams& omega, std::span<const double> phi,
                       std::span<const double> psi, std::span<const double> z_t, std::span<const double> z_s);

// 1/2 g^T H^{-1} g - h, one solve.
double similarity(const JointSystem& system, const PairAssembly& pair, SolvePolicy policy = SolvePolicy::require_pd);

// phi^T W psi, the large-w1/w2 limit of the adaptive similarity.
double bilinear_limit(const Matrix& W, std::span<const double> phi, std::span<const double> psi);

// Scores one target feature against many classes with n + C solves instead of
// n * C. Keeps a reference to `system`. Uses linearity: H^{-1} g = u + v_y with u = H^{-1} [w1 phi; 0] and
// v_y = H^{-1} [0; w2 psi_y]. Then
//   f(phi, y) = 1/2 (w1 phi^T u_t + 2 w2 psi_y^T u_s + w2 psi_y^T v_y,s) - h.
class ClassBank {
 public:
  ClassBank(const JointSystem& system, std::span<const ClassEmbedding> classes);

  std::size_t size() const noexcept { return labels_.size(); }
  ClassId label(std::size_t k) const noexcept { return labels_[k]; }
  const JointSystem& system() const noexcept { return *system_; }

  struct Instance {
    Vector u;           // H^{-1} [w1 phi; 0]
    double self = 0.0;  // w1 phi^T u_t
    double h_phi = 0.0; // w1/2 |phi|^2
  };
  Instance prepare(std::span<const double> phi) const;

  // Scores for every class, in bank order.
  void scores(const Instance& x, std::span<double> out) const;
  double score(const Instance& x, std::size_t k) const;
  // Closed-form maximizer z = u + v_k.
  Vector maximizer(const Instance& x, std::size_t k) const;

 private:
  const JointSystem* system_;
  std::vector<ClassId> labels_;
  Matrix scaled_psi_;  // row k: w2 psi_k
  Matrix v_;           // row k: v_k
  Vector self_;        // w2 psi_k^T v_k,s
  Vector h_psi_;       // w2/2 |psi_k|^2
};

// z_t^T W z_s.
double bilinear_form(const Matrix& W, std::span<const double> z_t, std::span<const double> z_s);

}  // namespace jfa
