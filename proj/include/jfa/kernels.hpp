#pragma once

// Dense double-precision kernels used by the solvers. Every routine has a
// scalar reference implementation and, where the host supports it, an
// AVX2/FMA variant. The variant is picked once at startup from CPUID and can
// be overridden for testing with set_backend().
//
// Matrices are row-major spans of rows*cols entries.

#include <cstddef>
#include <span>
#include <string_view>

namespace jfa::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sq_dist)(const double* x, const double* y, std::size_t n);
  double (*abs_sum)(const double* x, std::size_t n);
  void (*abs_accumulate)(const double* x, double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  void (*rank1_update)(double alpha, const double* u, const double* v, double* a, std::size_t rows,
                       std::size_t cols);
};

bool backend_available(Backend backend) noexcept;
Backend active_backend() noexcept;
std::string_view backend_name(Backend backend) noexcept;

// Throws std::invalid_argument when the backend is not compiled in or the CPU
// lacks the instructions.
void set_backend(Backend backend);

const KernelTable& table(Backend backend);
const KernelTable& active_table() noexcept;

// RAII override of the active backend, restores the previous one on exit.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend) : previous_(active_backend()) { set_backend(backend); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

// Checked front ends over the active table.

double dot(std::span<const double> x, std::span<const double> y);
double sq_norm(std::span<const double> x);
double sq_dist(std::span<const double> x, std::span<const double> y);
double abs_sum(std::span<const double> x);
void abs_accumulate(std::span<const double> x, std::span<double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);

// y = A x, A is rows x cols.
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<double> y);
// y = A^T x, A is rows x cols.
void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y);
// A += alpha u v^T, A is rows x cols.
void rank1_update(double alpha, std::span<const double> u, std::span<const double> v, std::span<double> a,
                  std::size_t rows, std::size_t cols);

}  // namespace jfa::kernels
