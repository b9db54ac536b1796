#include "jfa/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jfa/kernels.hpp"

namespace jfa {
namespace {

constexpr double kDivergenceNorm = 1e150;

void check_matrix(const Matrix& W) {
  if (W.rows() == 0 || W.cols() == 0) throw ValidationError("weight matrix must be non-empty");
  if (!W.all_finite()) throw ValidationError("weight matrix has non-finite entries");
}

void check_pair_dims(const Matrix& W, std::span<const double> phi, std::span<const double> psi) {
  if (phi.size() != W.rows() || psi.size() != W.cols()) {
    throw ValidationError("dimension mismatch: W is " + std::to_string(W.rows()) + "x" + std::to_string(W.cols()) +
                          ", phi has " + std::to_string(phi.size()) + ", psi has " + std::to_string(psi.size()));
  }
}

// Projection onto {z : |z|^2 <= gamma}.
void project_ball(std::span<double> z, const std::optional<double>& gamma) {
  if (!gamma) return;
  const double norm_sq = kernels::sq_norm(z);
  if (norm_sq <= *gamma) return;
  const double scale = std::sqrt(*gamma / norm_sq);
  for (double& v : z) v *= scale;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Bracketed objective written with the assembled g and h:
// z_t^T W z_s - w13/2 |z_t|^2 - w24/2 |z_s|^2 + z^T g - h.
double objective_from_assembly(const JointSystem& system, const PairAssembly& pair, std::span<const double> z_t,
                               std::span<const double> z_s) {
  const auto& om = system.omega();
  const std::span<const double> g(pair.g);
  return bilinear_form(system.W(), z_t, z_s) - 0.5 * om.w13() * kernels::sq_norm(z_t) -
         0.5 * om.w24() * kernels::sq_norm(z_s) + kernels::dot(z_t, g.first(system.d_t())) +
         kernels::dot(z_s, g.last(system.d_s())) - pair.h;
}

}  // namespace

double row_col_l1_bound(const Matrix& W) {
  if (!W.all_finite()) throw ValidationError("weight matrix has non-finite entries");
  double best = 0.0;
  Vector col_sums(W.cols(), 0.0);
  for (std::size_t i = 0; i < W.rows(); ++i) {
    best = std::max(best, kernels::abs_sum(W.row(i)));
    kernels::abs_accumulate(W.row(i), col_sums);
  }
  for (double c : col_sums) best = std::max(best, c);
  return best;
}

JointSystem assemble_joint_system(const Matrix& W, const OmegaParams& omega, SpectrumMode mode) {
  check_matrix(W);
  if (!(omega.w13() > 0.0) || !(omega.w24() > 0.0)) throw ValidationError("omega requires w13 > 0 and w24 > 0");

  JointSystem sys;
  sys.d_t_ = W.rows();
  sys.d_s_ = W.cols();
  sys.w_ = W;
  sys.omega_ = omega;

  const std::size_t n = sys.dim();
  sys.h_ = Matrix(n, n);
  for (std::size_t i = 0; i < sys.d_t_; ++i) sys.h_(i, i) = omega.w13();
  for (std::size_t j = 0; j < sys.d_s_; ++j) sys.h_(sys.d_t_ + j, sys.d_t_ + j) = omega.w24();
  for (std::size_t i = 0; i < sys.d_t_; ++i) {
    for (std::size_t j = 0; j < sys.d_s_; ++j) {
      sys.h_(i, sys.d_t_ + j) = -W(i, j);
      sys.h_(sys.d_t_ + j, i) = -W(i, j);
    }
  }

  sys.delta_w_ = row_col_l1_bound(W);
  sys.is_diag_dominant_ = omega.w13() > sys.delta_w_ && omega.w24() > sys.delta_w_;
  sys.cholesky_ = linalg::Cholesky::factor(sys.h_);

  if (mode == SpectrumMode::exact) {
    if (sys.cholesky_) {
      const Vector ev = linalg::symmetric_eigenvalues(sys.h_);
      sys.eig_min_ = ev.front();
      sys.eig_max_ = ev.back();
    } else {
      sys.eigen_ = linalg::symmetric_eigen(sys.h_);
      sys.eig_min_ = sys.eigen_->values.front();
      sys.eig_max_ = sys.eigen_->values.back();
    }
    sys.is_pd_ = sys.eig_min_ > 0.0;
    sys.spectrum_exact_ = true;
  } else {
    // Every Gershgorin disc of H has radius at most delta_w.
    sys.eig_min_ = std::min(omega.w13(), omega.w24()) - sys.delta_w_;
    sys.eig_max_ = std::max(omega.w13(), omega.w24()) + sys.delta_w_;
    sys.is_pd_ = sys.cholesky_.has_value();
    sys.spectrum_exact_ = false;
    if (!sys.cholesky_) sys.eigen_ = linalg::symmetric_eigen(sys.h_);
  }
  return sys;
}

Vector JointSystem::solve(std::span<const double> g, SolvePolicy policy, bool* used_pinv) const {
  if (g.size() != dim()) throw ValidationError("right-hand side length does not match the joint system");
  if (used_pinv) *used_pinv = false;
  if (is_pd_ && cholesky_) return cholesky_->solve(g);
  if (policy != SolvePolicy::allow_pseudo_inverse) {
    if (is_pd_) throw NumericalError("Cholesky factorization of the joint system failed");
    throw NumericalError("joint system is not positive definite (eig_min=" + std::to_string(eig_min_) +
                         ", delta_W=" + std::to_string(delta_w_) + ")");
  }
  if (used_pinv) *used_pinv = true;
  if (!eigen_) return linalg::pseudo_inverse_solve(linalg::symmetric_eigen(h_), g);
  return linalg::pseudo_inverse_solve(*eigen_, g);
}

PairAssembly assemble_pair(std::span<const double> phi, std::span<const double> psi, const OmegaParams& omega) {
  PairAssembly pair;
  pair.g.resize(phi.size() + psi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) pair.g[i] = omega.w1() * phi[i];
  for (std::size_t j = 0; j < psi.size(); ++j) pair.g[phi.size() + j] = omega.w2() * psi[j];
  pair.h = 0.5 * omega.w1() * kernels::sq_norm(phi) + 0.5 * omega.w2() * kernels::sq_norm(psi);
  return pair;
}

AdaptedPair adapt_closed_form(const JointSystem& system, const PairAssembly& pair, SolvePolicy policy) {
  AdaptedPair out;
  out.z = system.solve(pair.g, policy, &out.used_pseudo_inverse);
  if (!all_finite(out.z)) throw NumericalError("closed-form solve produced non-finite values");
  out.z_t.assign(out.z.begin(), out.z.begin() + static_cast<std::ptrdiff_t>(system.d_t()));
  out.z_s.assign(out.z.begin() + static_cast<std::ptrdiff_t>(system.d_t()), out.z.end());
  out.objective = objective_from_assembly(system, pair, out.z_t, out.z_s);
  out.iterations = 1;
  return out;
}

AdaptedPair adapt_alternating(const Matrix& W, const OmegaParams& omega, std::span<const double> phi,
                              std::span<const double> psi, const AlternatingOptions& options) {
  check_matrix(W);
  check_pair_dims(W, phi, psi);
  options.domain.validate();
  if (!(omega.w13() > 0.0) || !(omega.w24() > 0.0)) throw ValidationError("omega requires w13 > 0 and w24 > 0");
  if (!(options.tol > 0.0)) throw ValidationError("alternating solver needs tol > 0");
  if (options.max_iter < 1) throw ValidationError("alternating solver needs max_iter >= 1");

  const std::size_t d_t = W.rows();
  const std::size_t d_s = W.cols();
  Vector z_s = options.init_z_s ? *options.init_z_s : Vector(psi.begin(), psi.end());
  if (z_s.size() != d_s) throw ValidationError("initial z_s has the wrong length");
  Vector z_t(phi.begin(), phi.end());
  Vector prev_t(d_t), prev_s(d_s);

  AdaptedPair out;
  out.converged = false;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    prev_t = z_t;
    prev_s = z_s;

    kernels::gemv(W.values(), d_t, d_s, z_s, z_t);
    for (std::size_t i = 0; i < d_t; ++i) z_t[i] = (omega.w1() * phi[i] + z_t[i]) / omega.w13();
    project_ball(z_t, options.domain.gamma_t);

    kernels::gemv_t(W.values(), d_t, d_s, z_t, z_s);
    for (std::size_t j = 0; j < d_s; ++j) z_s[j] = (omega.w2() * psi[j] + z_s[j]) / omega.w24();
    project_ball(z_s, options.domain.gamma_s);

    out.iterations = it;
    const double size = std::max(kernels::sq_norm(z_t), kernels::sq_norm(z_s));
    if (!all_finite(z_t) || !all_finite(z_s) || !(size < kDivergenceNorm)) {
      throw NumericalError("alternating optimization diverged after " + std::to_string(it) + " sweeps");
    }
    out.trace.push_back(objective_value(W, omega, phi, psi, z_t, z_s));
    if (std::max(max_abs_diff(z_t, prev_t), max_abs_diff(z_s, prev_s)) < options.tol) {
      out.converged = true;
      break;
    }
  }

  out.objective = out.trace.back();
  out.z = z_t;
  out.z.insert(out.z.end(), z_s.begin(), z_s.end());
  out.z_t = std::move(z_t);
  out.z_s = std::move(z_s);
  return out;
}

ClassBank::ClassBank(const JointSystem& system, std::span<const ClassEmbedding> classes)
    : system_(&system),
      scaled_psi_(classes.size(), system.d_s()),
      v_(classes.size(), system.dim()),
      self_(classes.size()),
      h_psi_(classes.size()) {
  const double w2 = system.omega().w2();
  const std::size_t d_t = system.d_t();
  Vector rhs(system.dim(), 0.0);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& psi = classes[k].psi;
    if (psi.size() != system.d_s()) throw ValidationError("class " + std::to_string(classes[k].label) + " has the wrong psi length");
    labels_.push_back(classes[k].label);
    auto row = scaled_psi_.row(k);
    for (std::size_t j = 0; j < psi.size(); ++j) row[j] = w2 * psi[j];
    std::copy(row.begin(), row.end(), rhs.begin() + static_cast<std::ptrdiff_t>(d_t));
    const Vector v = system.solve(rhs);
    std::copy(v.begin(), v.end(), v_.row(k).begin());
    self_[k] = kernels::dot(row, std::span<const double>(v).last(system.d_s()));
    h_psi_[k] = 0.5 * w2 * kernels::sq_norm(psi);
  }
}

ClassBank::Instance ClassBank::prepare(std::span<const double> phi) const {
  if (phi.size() != system_->d_t()) throw ValidationError("phi length does not match the joint system");
  const double w1 = system_->omega().w1();
  Vector rhs(system_->dim(), 0.0);
  for (std::size_t i = 0; i < phi.size(); ++i) rhs[i] = w1 * phi[i];
  Instance x;
  x.u = system_->solve(rhs);
  x.self = kernels::dot(std::span<const double>(rhs).first(phi.size()), std::span<const double>(x.u).first(phi.size()));
  x.h_phi = 0.5 * w1 * kernels::sq_norm(phi);
  return x;
}

void ClassBank::scores(const Instance& x, std::span<double> out) const {
  if (out.size() != size()) throw ValidationError("score buffer has the wrong length");
  const std::span<const double> u_s = std::span<const double>(x.u).last(system_->d_s());
  kernels::gemv(scaled_psi_.values(), size(), system_->d_s(), u_s, out);
  for (std::size_t k = 0; k < size(); ++k) out[k] = 0.5 * (x.self + 2.0 * out[k] + self_[k]) - x.h_phi - h_psi_[k];
}

double ClassBank::score(const Instance& x, std::size_t k) const {
  const std::span<const double> u_s = std::span<const double>(x.u).last(system_->d_s());
  return 0.5 * (x.self + 2.0 * kernels::dot(scaled_psi_.row(k), u_s) + self_[k]) - x.h_phi - h_psi_[k];
}

Vector ClassBank::maximizer(const Instance& x, std::size_t k) const {
  Vector z = x.u;
  kernels::axpy(1.0, v_.row(k), z);
  return z;
}

double bilinear_form(const Matrix& W, std::span<const double> z_t, std::span<const double> z_s) {
  if (z_t.size() != W.rows() || z_s.size() != W.cols()) throw ValidationError("bilinear form dimension mismatch");
  Vector wz(W.rows());
  kernels::gemv(W.values(), W.rows(), W.cols(), z_s, wz);
  return kernels::dot(z_t, wz);
}

double objective_value(const Matrix& W, const OmegaParams& omega, std::span<const double> phi,
                       std::span<const double> psi, std::span<const double> z_t, std::span<const double> z_s) {
  check_pair_dims(W, phi, psi);
  if (z_t.size() != phi.size() || z_s.size() != psi.size()) throw ValidationError("adapted feature length mismatch");
  return bilinear_form(W, z_t, z_s) - 0.5 * omega.w1() * kernels::sq_dist(z_t, phi) -
         0.5 * omega.w2() * kernels::sq_dist(z_s, psi) - 0.5 * omega.w3() * kernels::sq_norm(z_t) -
         0.5 * omega.w4() * kernels::sq_norm(z_s);
}

double similarity(const JointSystem& system, const PairAssembly& pair, SolvePolicy policy) {
  const Vector z = system.solve(pair.g, policy);
  return 0.5 * kernels::dot(pair.g, z) - pair.h;
}

double bilinear_limit(const Matrix& W, std::span<const double> phi, std::span<const double> psi) {
  check_pair_dims(W, phi, psi);
  return bilinear_form(W, phi, psi);
}

}  // namespace jfa
