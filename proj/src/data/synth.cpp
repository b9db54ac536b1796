#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "jfa/data.hpp"
#include "jfa/kernels.hpp"

namespace jfa {

void SynthConfig::validate() const {
  if (n_seen < 1 || n_unseen < 1) throw ValidationError("synthetic data needs at least one seen and one unseen class");
  if (d_s < 1 || d_t < 1) throw ValidationError("synthetic dimensions must be >= 1");
  if (instances_per_class < 1) throw ValidationError("instances_per_class must be >= 1");
  if (!(attribute_scale > 0.0) || !std::isfinite(attribute_scale)) throw ValidationError("attribute_scale must be positive");
  if (!(map_noise >= 0.0) || !(feature_noise >= 0.0) || !(intra_class_spread >= 0.0) || !std::isfinite(map_noise) ||
      !std::isfinite(feature_noise) || !std::isfinite(intra_class_spread)) {
    throw ValidationError("noise levels must be finite and nonnegative");
  }
}

SynthProblem synth_generate_problem(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> attr(0.0, config.attribute_scale);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t n_classes = config.n_seen + config.n_unseen;
  const double map_scale = 1.0 / std::sqrt(static_cast<double>(config.d_s));

  SynthProblem out;
  Dataset& d = out.dataset;
  d.d_s = config.d_s;
  d.d_t = config.d_t;

  for (std::size_t c = 0; c < n_classes; ++c) {
    ClassEmbedding e;
    e.label = static_cast<ClassId>(c + 1);
    e.psi.resize(config.d_s);
    for (double& v : e.psi) v = attr(rng);
    d.classes.push_back(std::move(e));
  }

  out.map = Matrix(config.d_t, config.d_s);
  for (double& v : out.map.values()) v = normal(rng) * map_scale;

  InstanceId next_id = 1;
  for (const auto& c : d.classes) {
    Matrix class_map = out.map;
    if (config.map_noise > 0.0) {
      for (double& v : class_map.values()) v += config.map_noise * normal(rng) * map_scale;
    }
    Vector center(config.d_t);
    kernels::gemv(class_map.values(), config.d_t, config.d_s, c.psi, center);
    for (std::size_t k = 0; k < config.instances_per_class; ++k) {
      EmbeddedInstance x;
      x.id = next_id++;
      x.label = c.label;
      x.phi = center;
      for (double& v : x.phi) {
        const double spread = normal(rng);
        const double noise = normal(rng);
        v += config.intra_class_spread * spread + config.feature_noise * noise;
      }
      d.instances.push_back(std::move(x));
    }
  }

  std::vector<ClassId> labels(n_classes);
  std::iota(labels.begin(), labels.end(), ClassId{1});
  std::shuffle(labels.begin(), labels.end(), rng);
  d.seen.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(config.n_seen));
  d.unseen.assign(labels.begin() + static_cast<std::ptrdiff_t>(config.n_seen), labels.end());
  std::sort(d.seen.begin(), d.seen.end());
  std::sort(d.unseen.begin(), d.unseen.end());

  d.validate();
  return out;
}

Dataset synth_generate(const SynthConfig& config) { return synth_generate_problem(config).dataset; }

}  // namespace jfa
