#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "jfa/learn.hpp"
#include "support.hpp"

using namespace jfa;
using doctest::Approx;

namespace {

Matrix scalar_w(double w) { return Matrix(1, 1, std::vector<double>{w}); }

// Slack sum by enumerating every (instance, class) similarity with the
// elimination oracle.
double oracle_hinge(const Matrix& W, const double w[4], const std::vector<EmbeddedInstance>& xs,
                    const std::vector<ClassEmbedding>& seen, double lambda) {
  double total = lambda / 2 * W.frobenius_sq();
  for (const auto& x : xs) {
    double f_true = 0.0;
    for (const auto& c : seen)
      if (c.label == *x.label) f_true = test::oracle_adapt(W, w, x.phi, c.psi).value;
    double worst = 0.0;
    for (const auto& c : seen) {
      const double loss = c.label == *x.label ? 0.0 : 1.0;
      worst = std::max(worst, loss + test::oracle_adapt(W, w, x.phi, c.psi).value - f_true);
    }
    total += worst;
  }
  return total;
}

// Two seen classes in 2-D with clearly separated features.
Dataset separated_pair() {
  Dataset d;
  d.d_s = d.d_t = 2;
  d.classes = {{1, {1, 0}}, {2, {0, 1}}};
  InstanceId id = 1;
  for (int k = 0; k < 6; ++k) {
    const double j = 0.05 * (k - 2.5);
    d.instances.push_back({id++, 1, {1 + j, j}});
    d.instances.push_back({id++, 2, {-j, 1 - j}});
  }
  d.seen = {1, 2};
  return d;
}

}  // namespace

TEST_CASE("zero-one loss") {
  CHECK(zero_one_loss(3, 3) == 0.0);
  CHECK(zero_one_loss(3, 5) == 1.0);
  for (ClassId y : {-4, 0, 17}) CHECK(zero_one_loss(y, y) == 0.0);
}

TEST_CASE("loss-augmented inference over scores") {
  SUBCASE("violated margin") {
    const ScoredClass s[] = {{1, 2.0}, {2, 1.5}};
    const Violation v = loss_augmented_argmax(s, 1);
    CHECK(v.label == 2);
    CHECK(v.slack == Approx(0.5).epsilon(1e-15));
    CHECK(v.score_true == 2.0);
    CHECK(v.score_label == 1.5);
  }
  SUBCASE("margin satisfied") {
    const ScoredClass s[] = {{1, 0.2}, {2, 3.0}, {3, 1.9}};
    const Violation v = loss_augmented_argmax(s, 2);
    CHECK(v.label == 2);
    CHECK(v.slack == 0.0);
  }
  SUBCASE("uniform scores pick the smallest rival") {
    const ScoredClass s[] = {{4, 0.7}, {7, 0.7}, {2, 0.7}, {9, 0.7}};
    const Violation v = loss_augmented_argmax(s, 2);
    CHECK(v.label == 4);
    CHECK(v.slack == 1.0);
  }
}

TEST_CASE("loss-augmented inference with a joint system") {
  const OmegaParams omega(100, 100, 0, 0);
  const JointSystem s = assemble_joint_system(scalar_w(50), omega);
  const std::vector<ClassEmbedding> seen = {{1, {1}}, {2, {-1}}};
  const Violation v = loss_augmented_argmax(s, Vector{1.0}, 1, seen);
  CHECK(v.label == 1);
  CHECK(v.slack == 0.0);
  const Violation w = loss_augmented_argmax(s, Vector{1.0}, 2, seen);
  CHECK(w.label == 1);
  CHECK(w.slack > 1.0);
}

TEST_CASE("hinge objective at W = 0") {
  const Dataset d = test::toy_dataset();
  const auto xs = d.training_instances();
  const auto seen = d.seen_classes();
  SUBCASE("all scores tie") {
    const JointSystem s = assemble_joint_system(Matrix(2, 2), OmegaParams(1, 1, 0, 0));
    CHECK(hinge_objective(s, xs, seen, 1.0) == Approx(static_cast<double>(xs.size())).epsilon(1e-14));
  }
  SUBCASE("general omega against enumeration") {
    const double w[4] = {2, 0.5, 1, 3};
    const JointSystem s = assemble_joint_system(Matrix(2, 2), OmegaParams(2, 0.5, 1, 3));
    CHECK(hinge_objective(s, xs, seen, 1.0) == Approx(oracle_hinge(Matrix(2, 2), w, xs, seen, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("hinge objective with nonzero W matches enumeration") {
  test::Rng rng(6);
  const Dataset d = test::toy_dataset();
  const Matrix W = rng.matrix(2, 2);
  const double w[4] = {3, 2, 0.5, 1};
  const JointSystem s = assemble_joint_system(W, OmegaParams(3, 2, 0.5, 1));
  CHECK(hinge_objective(s, d.training_instances(), d.seen_classes(), 0.7) ==
        Approx(oracle_hinge(W, w, d.training_instances(), d.seen_classes(), 0.7)).epsilon(1e-12));
}

TEST_CASE("hinge objective edge cases") {
  const Matrix W(2, 1, std::vector<double>{0.3, -0.4});
  const JointSystem s = assemble_joint_system(W, OmegaParams(1, 1, 0, 0));
  const std::vector<ClassEmbedding> seen = {{1, {1}}, {2, {-1}}};
  CHECK(hinge_objective(s, {}, seen, 2.0) == Approx(0.25).epsilon(1e-15));

  const JointSystem sep = assemble_joint_system(scalar_w(50), OmegaParams(100, 100, 0, 0));
  const std::vector<EmbeddedInstance> xs = {{1, 1, {1}}, {2, 2, {-1}}};
  CHECK(hinge_objective(sep, xs, seen, 0.0) == 0.0);
}

TEST_CASE("subgradient of the running example") {
  const OmegaParams omega(1, 1, 0, 0);
  const JointSystem s = assemble_joint_system(scalar_w(0.5), omega);
  // psi_hat = 1 gives (2, 2); psi_true = 0.4 gives (1.6, 1.2) by the 2x2 inverse.
  const double w[4] = {1, 1, 0, 0};
  const test::OracleSolution hat = test::oracle_adapt(scalar_w(0.5), w, {1}, {1});
  const test::OracleSolution tru = test::oracle_adapt(scalar_w(0.5), w, {1}, {0.4});
  CHECK(tru.zt[0] == Approx(1.6).epsilon(1e-12));
  CHECK(tru.zs[0] == Approx(1.2).epsilon(1e-12));
  const Matrix g = subgradient_W(s, Vector{1}, Vector{1}, Vector{0.4});
  CHECK(g(0, 0) == Approx(hat.zt[0] * hat.zs[0] - tru.zt[0] * tru.zs[0]).epsilon(1e-12));
  CHECK(g(0, 0) == Approx(4.0 - 1.92).epsilon(1e-12));
}

TEST_CASE("subgradient vanishes for an inactive constraint") {
  test::Rng rng(2);
  const test::PdInstance p = test::random_pd_instance(rng, 4, 3, 1.2);
  const JointSystem s = assemble_joint_system(p.W, p.omega());
  const Matrix g = subgradient_W(s, p.phi, p.psi, p.psi);
  for (double v : g.values()) CHECK(v == 0.0);
}

TEST_CASE("envelope gradient matches central differences") {
  test::Rng rng(17);
  const double eps = 1e-5;
  for (int k = 0; k < 10; ++k) {
    const test::PdInstance p = test::random_pd_instance(rng, 1 + rng.index(8), 1 + rng.index(8), 1.5);
    const OmegaParams o = p.omega();
    const PairAssembly pair = assemble_pair(p.phi, p.psi, o);
    const AdaptedPair z = adapt_closed_form(assemble_joint_system(p.W, o), pair);
    for (int e = 0; e < 5; ++e) {
      const std::size_t i = rng.index(p.W.rows()), j = rng.index(p.W.cols());
      Matrix plus = p.W, minus = p.W;
      plus(i, j) += eps;
      minus(i, j) -= eps;
      const double fd = (similarity(assemble_joint_system(plus, o), pair) -
                         similarity(assemble_joint_system(minus, o), pair)) /
                        (2 * eps);
      const double an = z.z_t[i] * z.z_s[j];
      CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("PD projection") {
  const Matrix W(2, 2, std::vector<double>{1, -2, 3, 0.5});
  CHECK(project_pd(W, OmegaParams(10, 10, 0, 0), 0.05) == W);
  const Matrix scaled = project_pd(W, OmegaParams(4, 4, 0, 0), 0.05);
  for (std::size_t k = 0; k < 4; ++k) CHECK(scaled.values()[k] == Approx(0.95 * W.values()[k]).epsilon(1e-15));
  CHECK(row_col_l1_bound(scaled) == Approx(3.8).epsilon(1e-15));
  CHECK(project_pd(Matrix(3, 2), OmegaParams(1e-3, 1e-3, 0, 0), 0.5) == Matrix(3, 2));

  test::Rng rng(40);
  for (int k = 0; k < 20; ++k) {
    const Matrix R = rng.matrix(5, 4, -5, 5);
    const OmegaParams o(rng.uniform(0.1, 3), rng.uniform(0.1, 3), 0, 0);
    const JointSystem s = assemble_joint_system(project_pd(R, o, 0.05), o);
    CHECK(s.is_pd());
    CHECK(s.is_diag_dominant());
  }
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.pd_margin = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.lambda = -1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.outer_iters = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("training rejects degenerate data") {
  Dataset d = separated_pair();
  d.seen = {1};
  d.unseen = {2};
  CHECK_THROWS_AS(train(d, OmegaParams(), TrainConfig{}), ValidationError);
  Dataset empty = separated_pair();
  empty.instances.clear();
  CHECK_THROWS_AS(train(empty, OmegaParams(), TrainConfig{}), ValidationError);
}

TEST_CASE("training on two separated classes halves the objective") {
  const Dataset d = separated_pair();
  const OmegaParams omega(10, 10, 1, 1);
  const TrainResult r = train(d, omega, TrainConfig{});
  const auto& trace = r.state.objective_trace;
  REQUIRE(trace.size() >= 2);
  CHECK(trace.front().first == 0);
  CHECK(trace.back().second <= 0.5 * trace.front().second);
  for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k].second <= trace[k - 1].second);
  for (const RoundDiagnostics& rd : r.rounds) CHECK(rd.is_pd);
  const JointSystem s = assemble_joint_system(r.model.W, omega);
  CHECK(hinge_objective(s, d.training_instances(), d.seen_classes(), 1.0) ==
        Approx(trace.back().second).epsilon(1e-10));
  CHECK(r.state.slacks.size() == d.instances.size());
}

TEST_CASE("training is deterministic and order invariant") {
  const Dataset d = test::toy_dataset(6);
  TrainConfig c;
  c.outer_iters = 15;
  const OmegaParams omega(5, 5, 1, 1);
  const TrainResult a = train(d, omega, c);
  const TrainResult b = train(d, omega, c);
  CHECK(a.model.W == b.model.W);
  Dataset shuffled = d;
  std::reverse(shuffled.instances.begin(), shuffled.instances.end());
  std::reverse(shuffled.classes.begin(), shuffled.classes.end());
  CHECK(train(shuffled, omega, c).model.W == a.model.W);

  c.batch_size = 3;
  c.seed = 9;
  CHECK(train(d, omega, c).model.W == train(d, omega, c).model.W);
}

TEST_CASE("large lambda keeps W small") {
  TrainConfig c;
  c.lambda = 1e6;
  const TrainResult r = train(separated_pair(), OmegaParams(10, 10, 1, 1), c);
  CHECK(std::sqrt(r.model.W.frobenius_sq()) <= 1e-2);
  CHECK(r.model.lambda == 1e6);
}
