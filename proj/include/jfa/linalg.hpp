#pragma once

#include <optional>

#include "jfa/core.hpp"

namespace jfa::linalg {

// Cholesky factor A = L L^T of a symmetric positive-definite matrix.
class Cholesky {
 public:
  // Returns nullopt when a non-positive pivot is met.
  static std::optional<Cholesky> factor(const Matrix& a);

  std::size_t dim() const noexcept { return lower_.rows(); }
  Vector solve(std::span<const double> b) const;
  const Matrix& lower() const noexcept { return lower_; }

 private:
  Matrix lower_;
  Matrix upper_;  // L^T, kept row-major for the back substitution
};

struct SymmetricEigen {
  Vector values;  // ascending
  Matrix vectors; // column k is the eigenvector of values[k]
};

Vector symmetric_eigenvalues(const Matrix& a);
SymmetricEigen symmetric_eigen(const Matrix& a);

// Minimum-norm solve with the Moore-Penrose pseudo-inverse from an eigen
// decomposition. Eigenvalues with |value| <= tol * max|value| are dropped.
Vector pseudo_inverse_solve(const SymmetricEigen& eig, std::span<const double> b, double rel_tol = 1e-12);

}  // namespace jfa::linalg
