#include "jfa/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace jfa {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw ValidationError("matrix data size does not match its shape");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const noexcept { return jfa::all_finite(data_); }

double Matrix::frobenius_sq() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

bool all_finite(std::span<const double> x) noexcept {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

OmegaParams::OmegaParams(double w1, double w2, double w3, double w4) : w_{w1, w2, w3, w4} {
  for (double w : w_) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("omega components must be finite and nonnegative");
  }
  if (!(w13() > 0.0) || !(w24() > 0.0)) {
    throw ValidationError("omega requires w1+w3 > 0 and w2+w4 > 0 (got w13=" + std::to_string(w13()) +
                          ", w24=" + std::to_string(w24()) + ")");
  }
}

void DomainSpec::validate() const {
  if ((gamma_s && !(*gamma_s >= 0.0)) || (gamma_t && !(*gamma_t >= 0.0))) {
    throw ValidationError("domain bounds must be nonnegative");
  }
}

void Dataset::validate() const {
  if (d_s == 0 || d_t == 0) throw ValidationError("dataset dimensions must be positive");
  std::set<ClassId> labels;
  for (const auto& c : classes) {
    if (!labels.insert(c.label).second) throw ValidationError("duplicate class id " + std::to_string(c.label));
    if (c.psi.size() != d_s) {
      throw ValidationError("class " + std::to_string(c.label) + " has psi of length " +
                            std::to_string(c.psi.size()) + ", expected " + std::to_string(d_s));
    }
    if (!all_finite(c.psi)) throw ValidationError("class " + std::to_string(c.label) + " has non-finite psi");
  }
  if (!std::is_sorted(seen.begin(), seen.end()) || !std::is_sorted(unseen.begin(), unseen.end())) {
    throw ValidationError("seen/unseen lists must be sorted");
  }
  for (ClassId s : seen) {
    if (!labels.count(s)) throw ValidationError("seen class " + std::to_string(s) + " is not defined");
    if (std::binary_search(unseen.begin(), unseen.end(), s)) {
      throw ValidationError("class " + std::to_string(s) + " is listed as both seen and unseen");
    }
  }
  for (ClassId u : unseen) {
    if (!labels.count(u)) throw ValidationError("unseen class " + std::to_string(u) + " is not defined");
  }
  std::set<InstanceId> ids;
  for (const auto& x : instances) {
    if (!ids.insert(x.id).second) throw ValidationError("duplicate instance id " + std::to_string(x.id));
    if (x.phi.size() != d_t) {
      throw ValidationError("instance " + std::to_string(x.id) + " has phi of length " +
                            std::to_string(x.phi.size()) + ", expected " + std::to_string(d_t));
    }
    if (!all_finite(x.phi)) throw ValidationError("instance " + std::to_string(x.id) + " has non-finite phi");
    if (x.label && !labels.count(*x.label)) {
      throw ValidationError("instance " + std::to_string(x.id) + " references unknown class " +
                            std::to_string(*x.label));
    }
  }
}

const ClassEmbedding* Dataset::find_class(ClassId label) const noexcept {
  for (const auto& c : classes)
    if (c.label == label) return &c;
  return nullptr;
}

bool Dataset::is_seen(ClassId label) const noexcept { return std::binary_search(seen.begin(), seen.end(), label); }

bool Dataset::is_unseen(ClassId label) const noexcept {
  return std::binary_search(unseen.begin(), unseen.end(), label);
}

namespace {

std::vector<ClassEmbedding> pick_classes(const Dataset& d, std::span<const ClassId> ids) {
  std::vector<ClassEmbedding> out;
  out.reserve(ids.size());
  for (ClassId id : ids) {
    const ClassEmbedding* c = d.find_class(id);
    if (!c) throw ValidationError("class " + std::to_string(id) + " is not defined");
    out.push_back(*c);
  }
  return out;
}

}  // namespace

std::vector<ClassEmbedding> Dataset::seen_classes() const { return pick_classes(*this, seen); }

std::vector<ClassEmbedding> Dataset::unseen_classes() const { return pick_classes(*this, unseen); }

std::vector<EmbeddedInstance> Dataset::training_instances() const {
  std::vector<EmbeddedInstance> out;
  for (const auto& x : instances)
    if (x.label && is_seen(*x.label)) out.push_back(x);
  return out;
}

std::vector<EmbeddedInstance> Dataset::test_instances() const {
  std::vector<EmbeddedInstance> out;
  for (const auto& x : instances)
    if (!x.label || is_unseen(*x.label)) out.push_back(x);
  return out;
}

Dataset Dataset::restricted(std::span<const ClassId> keep_seen, std::span<const ClassId> keep_unseen) const {
  Dataset out;
  out.d_s = d_s;
  out.d_t = d_t;
  out.seen.assign(keep_seen.begin(), keep_seen.end());
  out.unseen.assign(keep_unseen.begin(), keep_unseen.end());
  std::sort(out.seen.begin(), out.seen.end());
  std::sort(out.unseen.begin(), out.unseen.end());
  for (const auto& c : classes) {
    if (out.is_seen(c.label) || out.is_unseen(c.label)) out.classes.push_back(c);
  }
  for (const auto& x : instances) {
    if (x.label && (out.is_seen(*x.label) || out.is_unseen(*x.label))) out.instances.push_back(x);
  }
  out.validate();
  return out;
}

}  // namespace jfa
