#include <cmath>

#include "variants.hpp"

namespace jfa::kernels::scalar {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sq_dist(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double abs_sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

void abs_accumulate(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += std::fabs(x[i]);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot(a + i * cols, x, cols);
}

void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) axpy(x[i], a + i * cols, y, cols);
}

void rank1_update(double alpha, const double* u, const double* v, double* a, std::size_t rows,
                  std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) axpy(alpha * u[i], v, a + i * cols, cols);
}

constexpr KernelTable kTable{dot, sq_dist, abs_sum, abs_accumulate, axpy, gemv, gemv_t, rank1_update};

}  // namespace

const KernelTable& table() noexcept { return kTable; }

}  // namespace jfa::kernels::scalar
