#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "batchts/argmax_prob.hpp"
#include "batchts/normal.hpp"
#include "batchts/quadrature.hpp"
#include "batchts/rng.hpp"

using batchts::arm_max_probabilities;
using batchts::GaussianProfile;
using batchts::log_q_function;
using batchts::normal_pdf;
using batchts::prob_monte_carlo;
using batchts::prob_quadrature;
using batchts::prob_two_arms;
using batchts::ProbMethod;
using batchts::ProbVector;
using batchts::q_function;
using batchts::quadrature_error;
using batchts::RngStream;
using batchts::second_largest;

namespace {

// Frozen against a 60-digit arbitrary-precision computation.
constexpr double kQ1 = 0.15865525393145705141;
constexpr double kQ2 = 0.022750131948179207200;
constexpr double kLogQ6 = -20.736768949974705655;
constexpr double kLogQ40 = -804.60844201375378817;
constexpr double kLogQ100 = -5005.5242086942050886;

}  // namespace

TEST_CASE("q_function matches frozen reference values", "[argmax_prob]") {
  CHECK(q_function(0.0) == 0.5);
  CHECK(q_function(1.0) == Catch::Approx(kQ1).epsilon(1e-15));
  CHECK(q_function(2.0) == Catch::Approx(kQ2).epsilon(1e-15));
  for (double d : {0.3, 1.0, 2.7, 5.0}) {
    CHECK(q_function(d) + q_function(-d) == Catch::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("q_function respects the gaussian tail sandwich", "[argmax_prob]") {
  for (double d : {1.0, 2.0, 4.0, 6.0, 10.0}) {
    const double phi = normal_pdf(d);
    const double lower = (1.0 / d - 1.0 / (d * d * d)) * phi;
    const double upper = phi / d;
    const double q = q_function(d);
    CHECK(q >= lower);
    CHECK(q <= upper);
  }
}

TEST_CASE("log_q_function agrees with the direct log and stays smooth", "[argmax_prob]") {
  CHECK(log_q_function(6.0) == Catch::Approx(kLogQ6).epsilon(1e-13));
  CHECK(log_q_function(40.0) == Catch::Approx(kLogQ40).epsilon(1e-13));
  CHECK(log_q_function(100.0) == Catch::Approx(kLogQ100).epsilon(1e-13));
  for (double d : {-3.0, -0.5, 0.0, 0.5, 5.0, 20.0, 30.0, 35.9}) {
    CHECK(log_q_function(d) == Catch::Approx(std::log(q_function(d))).epsilon(1e-12));
  }
  // across the series handoff the two branches must agree while erfc still
  // has headroom (q(36.5) ~ 1e-291 is representable)
  for (double d : {35.5, 35.9, 36.0, 36.1, 36.5}) {
    CHECK(log_q_function(d) == Catch::Approx(std::log(q_function(d))).epsilon(1e-10));
  }
  CHECK(std::isfinite(log_q_function(1000.0)));
  CHECK(log_q_function(1000.0) < -400000.0);
}

TEST_CASE("two-arm closed form is exact in both scales", "[argmax_prob]") {
  GaussianProfile p{{1.0, 0.0}, {0.5, 0.5}};
  const ProbVector v = prob_two_arms(p);
  REQUIRE(v.probs.size() == 2);
  CHECK(v.method == ProbVector::Method::closed_form);
  CHECK(v.abs_error == 0.0);
  // (m0 - m1)/sqrt(v0 + v1) = 1, so the runner-up probability is exactly Q(1)
  CHECK(v.probs[1] == q_function(1.0));
  CHECK(v.probs[0] == q_function(-1.0));
  CHECK(v.probs[1] == Catch::Approx(kQ1).epsilon(1e-15));
  CHECK(v.log_probs[0] == log_q_function(-1.0));
  CHECK(v.log_probs[1] == log_q_function(1.0));

  GaussianProfile swapped{{0.0, 1.0}, {0.5, 0.5}};
  const ProbVector w = prob_two_arms(swapped);
  CHECK(w.probs[0] == v.probs[1]);
  CHECK(w.probs[1] == v.probs[0]);
}

TEST_CASE("closed form handles an extreme separation without underflow in logs", "[argmax_prob]") {
  GaussianProfile p{{50.0, 0.0}, {1.0, 1.0}};
  const ProbVector v = prob_two_arms(p);
  CHECK(v.probs[0] == 1.0);  // to double precision
  CHECK(std::isfinite(v.log_probs[1]));
  CHECK(v.log_probs[1] == Catch::Approx(log_q_function(50.0 / std::sqrt(2.0))));
}

TEST_CASE("quadrature agrees with the closed form on random two-arm profiles", "[argmax_prob]") {
  RngStream rng(2024, 0, RngStream::Purpose::monte_carlo);
  for (int trial = 0; trial < 30; ++trial) {
    GaussianProfile p;
    p.means = {6.0 * rng.uniform01() - 3.0, 6.0 * rng.uniform01() - 3.0};
    p.variances = {0.05 + 3.95 * rng.uniform01(), 0.05 + 3.95 * rng.uniform01()};
    const ProbVector cf = prob_two_arms(p);
    const ProbVector quad = prob_quadrature(p, 1e-11);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(quad.probs[i] - cf.probs[i]) < 1e-9);
    }
  }
}

TEST_CASE("quadrature matches frozen three- and four-arm oracles", "[argmax_prob]") {
  // frozen from a 60-digit computation with dense integration nodes
  GaussianProfile p3{{0.7, -0.3, 0.1}, {0.2, 1.0, 0.5}};
  const ProbVector v3 = prob_quadrature(p3);
  CHECK(v3.probs[0] == Catch::Approx(0.6444590008180672248).margin(2e-10));
  CHECK(v3.probs[1] == Catch::Approx(0.1528136093669786154).margin(2e-10));
  CHECK(v3.probs[2] == Catch::Approx(0.2027273898149541598).margin(2e-10));

  GaussianProfile p4{{0.9, 0.5, 0.0, -0.4}, {0.3, 0.7, 1.2, 0.4}};
  const ProbVector v4 = prob_quadrature(p4);
  CHECK(v4.probs[0] == Catch::Approx(0.5183916800044105622).margin(2e-10));
  CHECK(v4.probs[1] == Catch::Approx(0.2844803071826969122).margin(2e-10));
  CHECK(v4.probs[2] == Catch::Approx(0.1743837441313890189).margin(2e-10));
  CHECK(v4.probs[3] == Catch::Approx(0.0227442686815035067).margin(2e-10));
}

TEST_CASE("quadrature log path survives a profile whose mass hides mid-range", "[argmax_prob]") {
  // the losers' integrand peaks near x = 25, far from every mean; the linear
  // value (~4e-274) is representable but a naive grid misses it entirely
  GaussianProfile p{{50.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  const ProbVector v = prob_quadrature(p);
  CHECK(v.probs[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(std::isfinite(v.log_probs[1]));
  CHECK(std::isfinite(v.log_probs[2]));
  // frozen oracle: log p = -629.485186354631630678 for both losers
  CHECK(v.log_probs[1] == Catch::Approx(-629.4851863546316).epsilon(1e-6));
  CHECK(v.log_probs[2] == Catch::Approx(-629.4851863546316).epsilon(1e-6));
}

TEST_CASE("quadrature resolves a spike much narrower than the range", "[argmax_prob]") {
  GaussianProfile p{{5.0, 0.0, 0.0}, {1e-4, 1.0, 1.0}};
  const ProbVector v = prob_quadrature(p);
  CHECK(v.probs[0] > 0.999);
  double sum = 0.0;
  for (double q : v.probs) sum += q;
  CHECK(sum == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("quadrature probabilities sum to one on random profiles", "[argmax_prob]") {
  RngStream rng(77, 0, RngStream::Purpose::monte_carlo);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t arms = 2 + static_cast<std::size_t>(trial % 4);
    GaussianProfile p;
    for (std::size_t i = 0; i < arms; ++i) {
      p.means.push_back(4.0 * rng.uniform01() - 2.0);
      p.variances.push_back(0.1 + 1.9 * rng.uniform01());
    }
    const ProbVector v = prob_quadrature(p);
    double sum = 0.0;
    for (double q : v.probs) sum += q;
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    for (std::size_t i = 0; i < arms; ++i) {
      if (v.probs[i] > 1e-12) {
        CHECK(v.log_probs[i] == Catch::Approx(std::log(v.probs[i])).margin(1e-7));
      }
    }
  }
}

TEST_CASE("permuting a profile permutes the probabilities", "[argmax_prob]") {
  GaussianProfile p{{0.7, -0.3, 0.1}, {0.2, 1.0, 0.5}};
  GaussianProfile q{{0.1, 0.7, -0.3}, {0.5, 0.2, 1.0}};
  const ProbVector vp = prob_quadrature(p);
  const ProbVector vq = prob_quadrature(q);
  CHECK(vq.probs[0] == Catch::Approx(vp.probs[2]).margin(1e-12));
  CHECK(vq.probs[1] == Catch::Approx(vp.probs[0]).margin(1e-12));
  CHECK(vq.probs[2] == Catch::Approx(vp.probs[1]).margin(1e-12));
}

TEST_CASE("raising a mean raises that arm's probability", "[argmax_prob]") {
  GaussianProfile lo{{0.4, 0.0, -0.2}, {0.5, 0.5, 0.5}};
  GaussianProfile hi{{0.9, 0.0, -0.2}, {0.5, 0.5, 0.5}};
  CHECK(prob_quadrature(hi).probs[0] > prob_quadrature(lo).probs[0]);
}

TEST_CASE("monte carlo estimates agree with the closed form", "[argmax_prob]") {
  GaussianProfile p{{0.6, 0.0}, {1.0, 1.0}};
  const ProbVector cf = prob_two_arms(p);
  RngStream rng(555, 0, RngStream::Purpose::monte_carlo);
  const ProbVector mc = prob_monte_carlo(p, 200000, rng);
  CHECK(mc.method == ProbVector::Method::monte_carlo);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(mc.probs[i] - cf.probs[i]) < 4.0 * mc.abs_error + 1e-12);
  }
  double sum = 0.0;
  for (double q : mc.probs) sum += q;
  CHECK(sum == Catch::Approx(1.0).margin(1e-12));  // counts divide exactly
}

TEST_CASE("monte carlo with one sample is a one-hot vector", "[argmax_prob]") {
  GaussianProfile p{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  RngStream rng(9, 0, RngStream::Purpose::monte_carlo);
  const ProbVector mc = prob_monte_carlo(p, 1, rng);
  int ones = 0, zeros = 0;
  for (double q : mc.probs) {
    if (q == 1.0) ++ones;
    if (q == 0.0) ++zeros;
  }
  CHECK(ones == 1);
  CHECK(zeros == 2);
}

TEST_CASE("monte carlo is reproducible for a fixed stream", "[argmax_prob]") {
  GaussianProfile p{{0.3, 0.0, -0.1}, {1.0, 0.5, 2.0}};
  RngStream a(31, 4, RngStream::Purpose::monte_carlo);
  RngStream b(31, 4, RngStream::Purpose::monte_carlo);
  CHECK(prob_monte_carlo(p, 5000, a).probs == prob_monte_carlo(p, 5000, b).probs);
}

TEST_CASE("second_largest picks the runner-up by value", "[argmax_prob]") {
  CHECK(second_largest(std::vector<double>{0.5, 0.3, 0.2}) == 0.3);
  CHECK(second_largest(std::vector<double>{0.1, 0.2, 0.7}) == 0.2);
  CHECK(second_largest(std::vector<double>{0.5, 0.5}) == 0.5);
  CHECK_THROWS_AS(second_largest(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("the router honors explicit method choices", "[argmax_prob]") {
  GaussianProfile p2{{1.0, 0.0}, {1.0, 1.0}};
  GaussianProfile p3{{1.0, 0.0, -1.0}, {1.0, 1.0, 1.0}};
  ProbMethod def{};
  CHECK(arm_max_probabilities(p2, def).method == ProbVector::Method::closed_form);
  CHECK(arm_max_probabilities(p3, def).method == ProbVector::Method::quadrature);
  ProbMethod mc{};
  mc.kind = ProbMethod::Kind::monte_carlo;
  mc.mc_samples = 100;
  CHECK_THROWS_AS(arm_max_probabilities(p2, mc), std::invalid_argument);
  RngStream rng(1, 0, RngStream::Purpose::monte_carlo);
  CHECK(arm_max_probabilities(p2, mc, &rng).method == ProbVector::Method::monte_carlo);
  ProbMethod cf{};
  cf.kind = ProbMethod::Kind::closed_form;
  CHECK_THROWS_AS(arm_max_probabilities(p3, cf), std::invalid_argument);
}

TEST_CASE("profiles are validated before use", "[argmax_prob]") {
  CHECK_THROWS_AS(prob_quadrature({{1.0}, {1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(prob_quadrature({{1.0, 0.0}, {1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(prob_quadrature({{1.0, 0.0}, {1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(prob_quadrature({{1.0, 0.0}, {1.0, -1.0}}), std::invalid_argument);
  RngStream rng(1, 0, RngStream::Purpose::monte_carlo);
  CHECK_THROWS_AS(prob_monte_carlo({{1.0, 0.0}, {1.0, 1.0}}, 0, rng), std::invalid_argument);
}

TEST_CASE("the generic integrator is accurate on smooth functions", "[argmax_prob]") {
  const auto cubic = batchts::integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
  CHECK(cubic.value == Catch::Approx(1.0 / 3.0).epsilon(1e-13));
  const auto sine = batchts::integrate([](double x) { return std::sin(x); }, 0.0,
                                       std::numbers::pi, 1e-12);
  CHECK(sine.value == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("an impossible budget raises instead of returning garbage", "[argmax_prob]") {
  // highly oscillatory, one segment allowed: cannot possibly converge
  auto wiggle = [](double x) { return std::sin(500.0 * x); };
  CHECK_THROWS_AS(batchts::integrate(wiggle, 0.0, 10.0, 1e-14, 1), quadrature_error);
  try {
    batchts::integrate(wiggle, 0.0, 10.0, 1e-14, 1);
  } catch (const quadrature_error& e) {
    CHECK(e.error > 1e-14);  // the estimate/error pair rides along
  }
}
