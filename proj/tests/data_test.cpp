#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "jfa/adapt.hpp"
#include "jfa/data.hpp"
#include "support.hpp"

using namespace jfa;
using doctest::Approx;

namespace {

Dataset parse(const std::string& classes, const std::string& instances, const std::string& split) {
  std::istringstream c(classes), i(instances), s(split);
  return read_dataset(c, i, s);
}

const char* kClasses = "# toy\n1\t1,0\n2\t0,1\n";
const char* kInstances = "10\t1\t0.5,0.25,1\n11\t2\t-1,2,3e-2\n";
const char* kSplit = "seen: 1\nunseen: 2\n";

double sq(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

std::string text_of(const WeightModel& m) {
  std::ostringstream s;
  write_model(m, s);
  return s.str();
}

}  // namespace

TEST_CASE("real formatting round-trips") {
  test::Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const double v = rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-20, 20));
    CHECK(parse_real(format_real(v)) == v);
  }
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(-3.0) == "-3");
  CHECK(parse_reals("1, 2.5 ,-3") == Vector{1, 2.5, -3});
  CHECK_THROWS(parse_real("abc"));
  CHECK_THROWS(parse_real("nan"));
}

TEST_CASE("toy dataset loads") {
  const Dataset d = parse(kClasses, kInstances, kSplit);
  CHECK(d.d_s == 2);
  CHECK(d.d_t == 3);
  CHECK(d.classes.size() == 2);
  CHECK(d.instances.size() == 2);
  CHECK(d.instances[1].phi == Vector{-1, 2, 0.03});
  CHECK(d.seen == std::vector<ClassId>{1});
  CHECK(d.unseen == std::vector<ClassId>{2});
}

TEST_CASE("unlabeled instances use a dash") {
  const Dataset d = parse(kClasses, "5\t-\t1,2,3\n", kSplit);
  CHECK_FALSE(d.instances[0].label.has_value());
  std::ostringstream out;
  write_instances(d, out);
  const std::string s = out.str();
  CHECK(s.substr(s.rfind('\n', s.size() - 2) + 1) == "5\t-\t1,2,3\n");
}

TEST_CASE("loader errors") {
  SUBCASE("missing class") {
    CHECK_THROWS_WITH_AS(parse(kClasses, "1\t7\t1,2,3\n", kSplit), doctest::Contains("7"), ValidationError);
  }
  SUBCASE("class on both sides") { CHECK_THROWS_AS(parse(kClasses, kInstances, "seen: 1,2\nunseen: 2\n"), ValidationError); }
  SUBCASE("dimension mismatch names the line") {
    CHECK_THROWS_WITH_AS(parse(kClasses, "1\t1\t1,2,3\n2\t1\t1,2\n", kSplit), doctest::Contains(":2"), ValidationError);
  }
  SUBCASE("malformed number") { CHECK_THROWS_AS(parse(kClasses, "1\t1\t1,x,3\n", kSplit), ParseError); }
  SUBCASE("missing split line") { CHECK_THROWS_AS(parse(kClasses, kInstances, "seen: 1\n"), ParseError); }
  SUBCASE("missing directory") { CHECK_THROWS_AS(load_dataset_dir("/nonexistent/jfa/data"), IoError); }
}

TEST_CASE("dataset save and load are lossless") {
  const Dataset d = synth_generate(SynthConfig{.n_seen = 4, .n_unseen = 2, .d_s = 3, .d_t = 5, .instances_per_class = 3});
  test::TempDir dir("ds");
  save_dataset(d, dir.path());
  const Dataset back = load_dataset_dir(dir.path());
  CHECK(back == d);
  test::TempDir dir2("ds2");
  save_dataset(back, dir2.path());
  for (const char* f : {kClassesFile, kInstancesFile, kSplitFile}) CHECK(test::slurp(dir / f) == test::slurp(dir2 / f));
}

TEST_CASE("model round trip") {
  test::Rng rng(5);
  const WeightModel m{rng.matrix(4, 3, -1e3, 1e3), OmegaParams(0.1, 1e-5, 3, 1e5), 0.7};
  std::istringstream in(text_of(m));
  const WeightModel back = read_model(in);
  CHECK(back == m);
  CHECK(text_of(back) == text_of(m));

  test::TempDir dir("model");
  save_model(m, dir / "m.txt");
  CHECK(load_model(dir / "m.txt") == m);
  CHECK_THROWS_AS(load_model(dir / "absent.txt"), IoError);
}

TEST_CASE("model corruption is detected") {
  const WeightModel m{Matrix(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6}), OmegaParams(), 1.0};
  const std::string text = text_of(m);
  SUBCASE("truncated") {
    std::istringstream in(text.substr(0, text.rfind('\n', text.size() - 2) + 1));
    CHECK_THROWS_WITH_AS(read_model(in), doctest::Contains("checksum"), IoError);
  }
  SUBCASE("edited weight") {
    std::string t = text;
    t.replace(t.rfind('6'), 1, "7");
    std::istringstream in(t);
    CHECK_THROWS_WITH_AS(read_model(in), doctest::Contains("checksum"), IoError);
  }
  SUBCASE("unknown version") {
    std::string t = text;
    t.replace(t.find("format 1"), 8, "format 9");
    std::istringstream in(t);
    CHECK_THROWS_WITH_AS(read_model(in), doctest::Contains("version"), IoError);
  }
  SUBCASE("not a model") {
    std::istringstream in("hello\n");
    CHECK_THROWS_AS(read_model(in), ParseError);
  }
}

TEST_CASE("model and dataset dimensions must agree") {
  const Dataset d = test::toy_dataset();
  CHECK_NOTHROW(check_model_matches({Matrix(2, 2), OmegaParams(), 1.0}, d));
  CHECK_THROWS_AS(check_model_matches({Matrix(3, 2), OmegaParams(), 1.0}, d), ValidationError);
}

TEST_CASE("synthetic generator") {
  SynthConfig c;
  c.seed = 7;
  SUBCASE("deterministic bytes") {
    test::TempDir a("sa"), b("sb");
    save_dataset(synth_generate(c), a.path());
    save_dataset(synth_generate(c), b.path());
    for (const char* f : {kClassesFile, kInstancesFile, kSplitFile}) CHECK(test::slurp(a / f) == test::slurp(b / f));
    c.seed = 8;
    CHECK_FALSE(synth_generate(c) == synth_generate(SynthConfig{.seed = 7}));
  }
  SUBCASE("shape") {
    const Dataset d = synth_generate(c);
    CHECK_NOTHROW(d.validate());
    CHECK(d.seen.size() == 20);
    CHECK(d.unseen.size() == 5);
    CHECK(d.instances.size() == 25 * 30);
    CHECK(d.d_s == 8);
    CHECK(d.d_t == 16);
  }
  SUBCASE("noiseless limit") {
    c.feature_noise = 0;
    c.intra_class_spread = 0;
    const SynthProblem p = synth_generate_problem(c);
    for (const auto& x : p.dataset.instances) {
      const Vector& psi = p.dataset.find_class(*x.label)->psi;
      Vector expect(p.dataset.d_t, 0.0);
      for (std::size_t i = 0; i < expect.size(); ++i)
        for (std::size_t j = 0; j < psi.size(); ++j) expect[i] += p.map(i, j) * psi[j];
      CHECK(test::max_abs_diff(x.phi, expect) < 1e-12);
    }
  }
  SUBCASE("nearest centre under the true map classifies everything") {
    const SynthProblem p = synth_generate_problem(c);
    const Dataset& d = p.dataset;
    std::size_t correct = 0;
    for (const auto& x : d.instances) {
      ClassId best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& cl : d.classes) {
        double dist = 0.0;
        for (std::size_t i = 0; i < d.d_t; ++i) {
          double m = 0.0;
          for (std::size_t j = 0; j < d.d_s; ++j) m += p.map(i, j) * cl.psi[j];
          dist += (x.phi[i] - m) * (x.phi[i] - m);
        }
        if (dist < best_d) {
          best_d = dist;
          best = cl.label;
        }
      }
      correct += best == *x.label ? 1 : 0;
    }
    CHECK(correct == d.instances.size());
  }
  SUBCASE("invalid configs") {
    c.n_unseen = 0;
    CHECK_THROWS_AS(synth_generate(c), ValidationError);
    c = SynthConfig{};
    c.feature_noise = -1;
    CHECK_THROWS_AS(synth_generate(c), ValidationError);
  }
}

TEST_CASE("standardization") {
  Dataset d = synth_generate(SynthConfig{.n_seen = 5, .n_unseen = 2, .d_s = 3, .d_t = 4, .instances_per_class = 6, .seed = 2});
  SUBCASE("none") {
    const StandardizeResult r = standardize(d, StandardizeMode::none);
    CHECK(r.dataset == d);
  }
  SUBCASE("zscore on seen training data") {
    const StandardizeResult r = standardize(d, StandardizeMode::zscore_target);
    const auto train = r.dataset.training_instances();
    for (std::size_t j = 0; j < d.d_t; ++j) {
      double m = 0.0, v = 0.0;
      for (const auto& x : train) m += x.phi[j];
      m /= static_cast<double>(train.size());
      for (const auto& x : train) v += (x.phi[j] - m) * (x.phi[j] - m);
      v /= static_cast<double>(train.size());
      CHECK(std::abs(m) < 1e-12);
      CHECK(v == Approx(1.0).epsilon(1e-12));
    }
    CHECK(r.dataset.classes == d.classes);
  }
  SUBCASE("zero-variance dimension") {
    for (auto& x : d.instances) x.phi[2] = 4.0;
    const StandardizeResult r = standardize(d, StandardizeMode::zscore_target);
    CHECK(r.fit.zero_variance_dims == std::vector<std::size_t>{2});
    for (const auto& x : r.dataset.instances) CHECK(x.phi[2] == 0.0);
  }
  SUBCASE("unit norm both") {
    d.classes[0].psi.assign(3, 0.0);
    const StandardizeResult r = standardize(d, StandardizeMode::unit_norm_both);
    CHECK(r.zero_vectors == 1);
    CHECK(r.dataset.classes[0].psi == Vector(3, 0.0));
    for (const auto& x : r.dataset.instances) CHECK(std::sqrt(sq(x.phi)) == Approx(1.0).epsilon(1e-14));
    const StandardizeResult again = standardize(r.dataset, StandardizeMode::unit_norm_both);
    CHECK(again.dataset == r.dataset);
  }
  SUBCASE("mode names") {
    for (auto m : {StandardizeMode::none, StandardizeMode::zscore_target, StandardizeMode::unit_norm_both})
      CHECK(parse_standardize_mode(standardize_mode_name(m)) == m);
    CHECK_THROWS_AS(parse_standardize_mode("bogus"), ValidationError);
  }
}

TEST_CASE("export of adapted features") {
  SUBCASE("W = 0 exports phi unchanged") {
    const Dataset d = test::toy_dataset(2);
    std::ostringstream out;
    export_adapted({Matrix(2, 2), OmegaParams(1, 1, 0, 0), 1.0}, d, 3, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# class 3");
    std::getline(in, line);
    CHECK(line == "# instance_id\tphi\tz_t\tz_s");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      const auto t1 = line.find('\t'), t2 = line.find('\t', t1 + 1), t3 = line.find('\t', t2 + 1);
      CHECK(line.substr(t1 + 1, t2 - t1 - 1) == line.substr(t2 + 1, t3 - t2 - 1));
      ++rows;
    }
    CHECK(rows == d.instances.size());
  }
  SUBCASE("running example") {
    Dataset d;
    d.d_s = d.d_t = 1;
    d.classes = {{1, {1}}, {2, {0}}};
    d.instances = {{1, 1, {1}}};
    d.seen = {1};
    d.unseen = {2};
    std::ostringstream out;
    export_adapted({Matrix(1, 1, std::vector<double>{0.5}), OmegaParams(1, 1, 0, 0), 1.0}, d, 1, out);
    const std::string s = out.str();
    const std::string row = s.substr(s.rfind('\n', s.size() - 2) + 1);
    const auto f = row.find('\t'), g = row.find('\t', f + 1), h = row.find('\t', g + 1);
    CHECK(parse_real(row.substr(g + 1, h - g - 1)) == Approx(2.0).epsilon(1e-12));
    CHECK(parse_real(row.substr(h + 1)) == Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("empty dataset gives a header only") {
    Dataset d = test::toy_dataset(1);
    d.instances.clear();
    std::ostringstream out;
    export_adapted({Matrix(2, 2), OmegaParams(), 1.0}, d, 1, out);
    CHECK(out.str() == "# class 1\n# instance_id\tphi\tz_t\tz_s\n");
  }
  SUBCASE("unknown class") {
    std::ostringstream out;
    CHECK_THROWS_AS(export_adapted({Matrix(2, 2), OmegaParams(), 1.0}, test::toy_dataset(1), 9, out), ValidationError);
  }
}
