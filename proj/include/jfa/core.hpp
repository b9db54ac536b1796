#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "jfa/errors.hpp"

namespace jfa {

using ClassId = std::int64_t;
using InstanceId = std::int64_t;
using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix transposed() const;
  bool all_finite() const noexcept;
  double frobenius_sq() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool all_finite(std::span<const double> x) noexcept;

struct ClassEmbedding {
  ClassId label = 0;
  Vector psi;  // source attribute embedding, length d_s

  friend bool operator==(const ClassEmbedding&, const ClassEmbedding&) = default;
};

struct EmbeddedInstance {
  InstanceId id = 0;
  std::optional<ClassId> label;  // absent for unlabeled test data
  Vector phi;                    // target feature embedding, length d_t

  friend bool operator==(const EmbeddedInstance&, const EmbeddedInstance&) = default;
};

// Labeled target instances, per-class source vectors and the seen/unseen
// class partition. seen and unseen are kept sorted.
struct Dataset {
  std::vector<ClassEmbedding> classes;
  std::vector<EmbeddedInstance> instances;
  std::vector<ClassId> seen;
  std::vector<ClassId> unseen;
  std::size_t d_s = 0;
  std::size_t d_t = 0;

  // Throws ValidationError naming the first violated invariant.
  void validate() const;

  const ClassEmbedding* find_class(ClassId label) const noexcept;
  bool is_seen(ClassId label) const noexcept;
  bool is_unseen(ClassId label) const noexcept;

  std::vector<ClassEmbedding> seen_classes() const;
  std::vector<ClassEmbedding> unseen_classes() const;
  // Instances whose label is a seen class.
  std::vector<EmbeddedInstance> training_instances() const;
  // Instances whose label is an unseen class or absent.
  std::vector<EmbeddedInstance> test_instances() const;

  // Keeps only instances and classes in `keep_seen` (as seen) and
  // `keep_unseen` (as unseen). Used for pseudo zero-shot folds.
  Dataset restricted(std::span<const ClassId> keep_seen, std::span<const ClassId> keep_unseen) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Displacement penalty weights. w13 = w1 + w3 and w24 = w2 + w4 must both be
// positive.
class OmegaParams {
 public:
  OmegaParams() = default;
  OmegaParams(double w1, double w2, double w3, double w4);

  double w1() const noexcept { return w_[0]; }
  double w2() const noexcept { return w_[1]; }
  double w3() const noexcept { return w_[2]; }
  double w4() const noexcept { return w_[3]; }
  double w13() const noexcept { return w_[0] + w_[2]; }
  double w24() const noexcept { return w_[1] + w_[3]; }

  friend bool operator==(const OmegaParams&, const OmegaParams&) = default;

 private:
  double w_[4] = {1.0, 1.0, 0.0, 0.0};
};

// Feasible domains {z : ||z||^2 <= gamma}; nullopt means unbounded.
struct DomainSpec {
  std::optional<double> gamma_s;
  std::optional<double> gamma_t;

  void validate() const;
};

struct WeightModel {
  Matrix W;  // d_t x d_s
  OmegaParams omega;
  double lambda = 1.0;

  std::size_t d_t() const noexcept { return W.rows(); }
  std::size_t d_s() const noexcept { return W.cols(); }

  friend bool operator==(const WeightModel&, const WeightModel&) = default;
};

struct PairAssembly {
  Vector g;  // [w1 * phi; w2 * psi]
  double h = 0.0;
};

struct AdaptedPair {
  Vector z_t;
  Vector z_s;
  Vector z;  // z_t followed by z_s
  double objective = 0.0;
  std::vector<double> trace;  // per-sweep objective, alternating solver only
  std::size_t iterations = 0;
  bool converged = true;
  bool used_pseudo_inverse = false;
};

struct TrainingState {
  std::vector<double> slacks;
  std::vector<std::pair<std::size_t, double>> objective_trace;
  bool converged = false;
};

}  // namespace jfa
