#include "jfa/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "jfa/kernels.hpp"

namespace jfa::linalg {
namespace {

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

}  // namespace

std::optional<Cholesky> Cholesky::factor(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("cholesky needs a square matrix");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = l.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      const double s = a(i, j) - kernels::dot(li.first(j), l.row(j).first(j));
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  Cholesky c;
  c.upper_ = l.transposed();
  c.lower_ = std::move(l);
  return c;
}

Vector Cholesky::solve(std::span<const double> b) const {
  const std::size_t n = dim();
  if (b.size() != n) throw ValidationError("cholesky solve: right-hand side has wrong length");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (b[i] - kernels::dot(lower_.row(i).first(i), std::span<const double>(y).first(i))) / lower_(i, i);
  }
  Vector x(n);
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t tail = n - k - 1;
    x[k] = (y[k] - kernels::dot(upper_.row(k).last(tail), std::span<const double>(x).last(tail))) / upper_(k, k);
  }
  return x;
}

Vector symmetric_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(a), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return Vector(ev.data(), ev.data() + ev.size());
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(a));
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  SymmetricEigen out;
  const auto& ev = solver.eigenvalues();
  out.values.assign(ev.data(), ev.data() + ev.size());
  const auto& q = solver.eigenvectors();
  out.vectors = Matrix(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) out.vectors(i, j) = q(i, j);
  return out;
}

Vector pseudo_inverse_solve(const SymmetricEigen& eig, std::span<const double> b, double rel_tol) {
  const std::size_t n = eig.values.size();
  if (b.size() != n) throw ValidationError("pseudo-inverse solve: right-hand side has wrong length");
  double scale = 0.0;
  for (double v : eig.values) scale = std::max(scale, std::fabs(v));
  const double cutoff = rel_tol * scale;
  // x = Q diag(1/lambda) Q^T b over the retained spectrum.
  const Matrix qt = eig.vectors.transposed();
  Vector x(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (std::fabs(eig.values[k]) <= cutoff) continue;
    const double coeff = kernels::dot(qt.row(k), b) / eig.values[k];
    kernels::axpy(coeff, qt.row(k), x);
  }
  return x;
}

}  // namespace jfa::linalg
