#include <algorithm>
#include <cfloat>
#include <cmath>

#include "jfa/data.hpp"
#include "jfa/kernels.hpp"

namespace jfa {
namespace {

// Returns false for a zero vector, which is left untouched.
bool normalize(Vector& v) {
  const double norm = std::sqrt(kernels::sq_norm(v));
  if (norm == 0.0) return false;
  // Already unit length up to rounding: leave the bits alone so the mode is idempotent.
  if (std::fabs(norm - 1.0) <= 4 * DBL_EPSILON) return true;
  for (double& x : v) x /= norm;
  return true;
}

}  // namespace

StandardizeMode parse_standardize_mode(std::string_view name) {
  if (name == "none") return StandardizeMode::none;
  if (name == "zscore-target") return StandardizeMode::zscore_target;
  if (name == "unit-norm-both") return StandardizeMode::unit_norm_both;
  throw ValidationError("unknown standardization mode '" + std::string(name) + "'");
}

std::string_view standardize_mode_name(StandardizeMode mode) {
  switch (mode) {
    case StandardizeMode::none:
      return "none";
    case StandardizeMode::zscore_target:
      return "zscore-target";
    case StandardizeMode::unit_norm_both:
      return "unit-norm-both";
  }
  return "none";
}

std::size_t apply_standardization(const Standardization& fit, Dataset& dataset) {
  std::size_t zero_vectors = 0;
  switch (fit.mode) {
    case StandardizeMode::none:
      break;
    case StandardizeMode::zscore_target:
      if (fit.mean.size() != dataset.d_t) throw ValidationError("standardization was fitted for a different d_t");
      for (auto& x : dataset.instances)
        for (std::size_t j = 0; j < dataset.d_t; ++j) x.phi[j] = (x.phi[j] - fit.mean[j]) / fit.scale[j];
      break;
    case StandardizeMode::unit_norm_both:
      for (auto& x : dataset.instances)
        if (!normalize(x.phi)) ++zero_vectors;
      for (auto& c : dataset.classes)
        if (!normalize(c.psi)) ++zero_vectors;
      break;
  }
  return zero_vectors;
}

StandardizeResult standardize(const Dataset& dataset, StandardizeMode mode) {
  if (dataset.instances.empty() && dataset.classes.empty()) throw ValidationError("cannot standardize an empty dataset");
  StandardizeResult out;
  out.dataset = dataset;
  out.fit.mode = mode;
  if (mode == StandardizeMode::zscore_target) {
    const auto train = dataset.training_instances();
    if (train.empty()) throw ValidationError("zscore-target needs seen-class training instances");
    const std::size_t d = dataset.d_t;
    out.fit.mean.assign(d, 0.0);
    out.fit.scale.assign(d, 0.0);
    const double n = static_cast<double>(train.size());
    for (const auto& x : train) kernels::axpy(1.0, x.phi, out.fit.mean);
    for (double& m : out.fit.mean) m /= n;
    for (const auto& x : train)
      for (std::size_t j = 0; j < d; ++j) out.fit.scale[j] += (x.phi[j] - out.fit.mean[j]) * (x.phi[j] - out.fit.mean[j]);
    for (std::size_t j = 0; j < d; ++j) {
      const double sd = std::sqrt(out.fit.scale[j] / n);
      // A constant column still picks up rounding noise from the mean.
      if (sd > 1e-12 * std::max(1.0, std::abs(out.fit.mean[j]))) {
        out.fit.scale[j] = sd;
      } else {
        out.fit.scale[j] = 1.0;
        out.fit.zero_variance_dims.push_back(j);
      }
    }
  }
  out.zero_vectors = apply_standardization(out.fit, out.dataset);
  return out;
}

}  // namespace jfa
