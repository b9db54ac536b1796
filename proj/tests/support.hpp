#pragma once

// Test-side oracles. Nothing here calls into the library's solvers, so
// agreement with them is an independent check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jfa/core.hpp"

namespace jfa::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
  Vector vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }
  Matrix matrix(std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (double& x : m.values()) x = uniform(lo, hi);
    return m;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

using Dense = std::vector<std::vector<double>>;

inline double l1_bound(const Matrix& W) {
  double best = 0.0;
  for (std::size_t i = 0; i < W.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < W.cols(); ++j) s += std::abs(W(i, j));
    best = std::max(best, s);
  }
  for (std::size_t j = 0; j < W.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < W.rows(); ++i) s += std::abs(W(i, j));
    best = std::max(best, s);
  }
  return best;
}

inline Dense joint_matrix(const Matrix& W, double w13, double w24) {
  const std::size_t dt = W.rows(), ds = W.cols(), n = dt + ds;
  Dense H(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < dt; ++i) H[i][i] = w13;
  for (std::size_t j = 0; j < ds; ++j) H[dt + j][dt + j] = w24;
  for (std::size_t i = 0; i < dt; ++i)
    for (std::size_t j = 0; j < ds; ++j) H[i][dt + j] = H[dt + j][i] = -W(i, j);
  return H;
}

// Gaussian elimination with partial pivoting.
inline Vector gauss_solve(Dense a, Vector b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Cyclic Jacobi rotations; returns ascending eigenvalues.
inline Vector jacobi_eigenvalues(Dense a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  Vector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Penalized bilinear score evaluated term by term.
inline double direct_objective(const Matrix& W, const double w[4], const Vector& phi, const Vector& psi,
                               const Vector& zt, const Vector& zs) {
  double bil = 0.0;
  for (std::size_t i = 0; i < W.rows(); ++i)
    for (std::size_t j = 0; j < W.cols(); ++j) bil += zt[i] * W(i, j) * zs[j];
  double dt = 0.0, ds = 0.0, nt = 0.0, ns = 0.0;
  for (std::size_t i = 0; i < zt.size(); ++i) {
    dt += (zt[i] - phi[i]) * (zt[i] - phi[i]);
    nt += zt[i] * zt[i];
  }
  for (std::size_t j = 0; j < zs.size(); ++j) {
    ds += (zs[j] - psi[j]) * (zs[j] - psi[j]);
    ns += zs[j] * zs[j];
  }
  return bil - w[0] / 2 * dt - w[1] / 2 * ds - w[2] / 2 * nt - w[3] / 2 * ns;
}

struct OracleSolution {
  Vector zt, zs;
  double value = 0.0;
};

// Maximizer from the stationarity conditions, solved by elimination.
inline OracleSolution oracle_adapt(const Matrix& W, const double w[4], const Vector& phi, const Vector& psi) {
  const std::size_t dt = W.rows(), ds = W.cols();
  Vector g(dt + ds);
  for (std::size_t i = 0; i < dt; ++i) g[i] = w[0] * phi[i];
  for (std::size_t j = 0; j < ds; ++j) g[dt + j] = w[1] * psi[j];
  const Vector z = gauss_solve(joint_matrix(W, w[0] + w[2], w[1] + w[3]), g);
  OracleSolution s;
  s.zt.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(dt));
  s.zs.assign(z.begin() + static_cast<std::ptrdiff_t>(dt), z.end());
  s.value = direct_objective(W, w, phi, psi, s.zt, s.zs);
  return s;
}

// Random PD problem with w13 = w24 = factor * delta_W.
struct PdInstance {
  Matrix W;
  double w[4];
  Vector phi, psi;
  OmegaParams omega() const { return OmegaParams(w[0], w[1], w[2], w[3]); }
};

inline PdInstance random_pd_instance(Rng& rng, std::size_t dt, std::size_t ds, double factor = 1.01) {
  PdInstance p;
  p.W = rng.matrix(dt, ds);
  const double target = factor * l1_bound(p.W);
  const double a = rng.uniform(0.2, 1.0), b = rng.uniform(0.2, 1.0);
  p.w[0] = a * target;
  p.w[2] = target - p.w[0];
  p.w[1] = b * target;
  p.w[3] = target - p.w[1];
  p.phi = rng.vector(dt);
  p.psi = rng.vector(ds);
  return p;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("jfa_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Classes on the corners of a square, instances at psi-proportional
// features with a small deterministic jitter.
inline Dataset toy_dataset(std::size_t per_class = 4) {
  Dataset d;
  d.d_s = 2;
  d.d_t = 2;
  const double psis[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int c = 0; c < 4; ++c) d.classes.push_back({c + 1, {psis[c][0], psis[c][1]}});
  InstanceId id = 1;
  for (int c = 0; c < 4; ++c)
    for (std::size_t k = 0; k < per_class; ++k) {
      const double j = 0.02 * (static_cast<double>(k) - 1.5);
      d.instances.push_back({id++, c + 1, {psis[c][0] + j, psis[c][1] - j}});
    }
  d.seen = {1, 2};
  d.unseen = {3, 4};
  return d;
}

}  // namespace jfa::test
