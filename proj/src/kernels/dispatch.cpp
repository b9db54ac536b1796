#include <atomic>
#include <stdexcept>
#include <string>

#include "variants.hpp"

namespace jfa::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(JFA_HAS_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() noexcept { return cpu_has_avx2() ? Backend::avx2 : Backend::scalar; }

std::atomic<Backend>& active() noexcept {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

void check_sizes(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("kernel size mismatch in ") + what);
}

}  // namespace

bool backend_available(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
  }
  return false;
}

Backend active_backend() noexcept { return active().load(std::memory_order_relaxed); }

std::string_view backend_name(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(backend)));
  }
  active().store(backend, std::memory_order_relaxed);
}

const KernelTable& table(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(backend)));
  }
#if defined(JFA_HAS_AVX2_KERNELS)
  if (backend == Backend::avx2) return avx2::table();
#endif
  return scalar::table();
}

const KernelTable& active_table() noexcept {
#if defined(JFA_HAS_AVX2_KERNELS)
  if (active_backend() == Backend::avx2) return avx2::table();
#endif
  return scalar::table();
}

double dot(std::span<const double> x, std::span<const double> y) {
  check_sizes(x.size() == y.size(), "dot");
  return active_table().dot(x.data(), y.data(), x.size());
}

double sq_norm(std::span<const double> x) { return active_table().dot(x.data(), x.data(), x.size()); }

double sq_dist(std::span<const double> x, std::span<const double> y) {
  check_sizes(x.size() == y.size(), "sq_dist");
  return active_table().sq_dist(x.data(), y.data(), x.size());
}

double abs_sum(std::span<const double> x) { return active_table().abs_sum(x.data(), x.size()); }

void abs_accumulate(std::span<const double> x, std::span<double> y) {
  check_sizes(x.size() == y.size(), "abs_accumulate");
  active_table().abs_accumulate(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size() == y.size(), "axpy");
  active_table().axpy(a, x.data(), y.data(), x.size());
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<double> y) {
  check_sizes(a.size() == rows * cols && x.size() == cols && y.size() == rows, "gemv");
  active_table().gemv(a.data(), rows, cols, x.data(), y.data());
}

void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) {
  check_sizes(a.size() == rows * cols && x.size() == rows && y.size() == cols, "gemv_t");
  active_table().gemv_t(a.data(), rows, cols, x.data(), y.data());
}

void rank1_update(double alpha, std::span<const double> u, std::span<const double> v, std::span<double> a,
                  std::size_t rows, std::size_t cols) {
  check_sizes(a.size() == rows * cols && u.size() == rows && v.size() == cols, "rank1_update");
  active_table().rank1_update(alpha, u.data(), v.data(), a.data(), rows, cols);
}

}  // namespace jfa::kernels
