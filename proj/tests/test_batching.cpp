#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "batchts/batching.hpp"

using batchts::BatchSchedule;
using batchts::growth_diagnostic;
using batchts::GrowthDiagnostic;
using batchts::ipase_batch_length;
using batchts::ipase_first_batch;
using batchts::ScheduleContext;

namespace {

// Expand a non-adaptive schedule into its endpoint sequence.
std::vector<std::int64_t> expand(BatchSchedule s, std::int64_t horizon,
                                 const std::vector<double>* probs = nullptr,
                                 const std::vector<double>* log_probs = nullptr) {
  s.reset();
  std::vector<std::int64_t> out;
  std::int64_t prev = 0, j = 0;
  while (prev < horizon) {
    ScheduleContext ctx;
    ctx.batch = ++j;
    ctx.prev_endpoint = prev;
    ctx.horizon = horizon;
    ctx.num_arms = 2;
    ctx.probs = probs;
    ctx.log_probs = log_probs;
    prev = s.next_endpoint(ctx);
    out.push_back(prev);
    REQUIRE(j < 100000);
  }
  return out;
}

}  // namespace

TEST_CASE("per-step batches close after every pull", "[batching]") {
  const auto eps = expand(BatchSchedule::per_step(), 5);
  CHECK(eps == std::vector<std::int64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("constant batches advance by the configured size", "[batching]") {
  const auto eps = expand(BatchSchedule::constant(100), 350);
  CHECK(eps == std::vector<std::int64_t>{100, 200, 300, 350});
}

TEST_CASE("polynomial endpoints follow ceil(j^p)", "[batching]") {
  const auto eps = expand(BatchSchedule::polynomial(2.0), 30);
  CHECK(eps == std::vector<std::int64_t>{1, 4, 9, 16, 25, 30});
  // p <= 1 collapses to consecutive integers instead of stalling
  const auto slow = expand(BatchSchedule::polynomial(0.5), 6);
  CHECK(slow == std::vector<std::int64_t>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("geometric endpoints are the deduplicated image of ceil(r^m)", "[batching]") {
  const auto eps = expand(BatchSchedule::geometric(2.0), 100);
  CHECK(eps == std::vector<std::int64_t>{2, 4, 8, 16, 32, 64, 100});
  const auto slow = expand(BatchSchedule::geometric(1.1), 50);
  std::int64_t prev = 0;
  for (std::int64_t t : slow) {
    CHECK(t > prev);
    prev = t;
  }
  CHECK(slow.back() == 50);
}

TEST_CASE("explicit schedules run their list then jump to the horizon", "[batching]") {
  const auto eps = expand(BatchSchedule::explicit_list({3, 9, 27}), 30);
  CHECK(eps == std::vector<std::int64_t>{3, 9, 27, 30});
  // horizon clipping mid-list
  const auto clipped = expand(BatchSchedule::explicit_list({3, 9, 27}), 10);
  CHECK(clipped == std::vector<std::int64_t>{3, 9, 10});
  CHECK_THROWS_AS(BatchSchedule::explicit_list({3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::explicit_list({}), std::invalid_argument);
}

TEST_CASE("factory validation rejects bad parameters", "[batching]") {
  CHECK_THROWS_AS(BatchSchedule::constant(0), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::polynomial(0.0), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::geometric(1.0), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::adversarial(nullptr), std::invalid_argument);
}

TEST_CASE("every schedule yields strictly increasing endpoints ending at the horizon", "[batching]") {
  const std::vector<double> probs{0.7, 0.3};
  const std::vector<double> log_probs{std::log(0.7), std::log(0.3)};
  std::vector<BatchSchedule> schedules{
      BatchSchedule::per_step(),      BatchSchedule::constant(7),
      BatchSchedule::polynomial(1.5), BatchSchedule::geometric(3.0),
      BatchSchedule::explicit_list({5, 50, 500}), BatchSchedule::ipase()};
  for (BatchSchedule& s : schedules) {
    const auto eps = expand(s, 1000, &probs, &log_probs);
    std::int64_t prev = 0;
    for (std::int64_t t : eps) {
      CHECK(t > prev);
      prev = t;
    }
    CHECK(eps.back() == 1000);
  }
}

TEST_CASE("the first adaptive batch pulls once per arm", "[batching]") {
  CHECK(ipase_first_batch(2) == 2);
  CHECK(ipase_first_batch(5) == 5);
  BatchSchedule s = BatchSchedule::ipase();
  ScheduleContext ctx;
  ctx.batch = 1;
  ctx.prev_endpoint = 0;
  ctx.horizon = 1000;
  ctx.num_arms = 3;
  CHECK(s.next_endpoint(ctx) == 3);  // no probabilities needed for batch 1
  ctx.horizon = 2;
  CHECK(s.next_endpoint(ctx) == 2);  // clipped
}

TEST_CASE("adaptive batch length is the floored reciprocal of the runner-up", "[batching]") {
  const auto len = [](double p2, std::int64_t remaining) {
    return ipase_batch_length(p2, std::log(p2), remaining);
  };
  CHECK(len(0.1, 1000000) == 10);
  CHECK(len(0.5, 1000000) == 2);
  CHECK(len(0.25, 1000000) == 4);
  CHECK(len(1.0 / 3.0, 1000000) == 3);
  CHECK(len(0.37, 1000000) == 2);
  CHECK(len(0.9, 1000000) == 1);  // floor(1/0.9) = 1
  CHECK(len(0.1, 7) == 7);        // clamped to the remaining budget
}

TEST_CASE("an astronomically unlikely runner-up sends the batch to the horizon", "[batching]") {
  // log p2 = -5000: exp underflows, the log-space guard must catch it first
  CHECK(ipase_batch_length(0.0, -5000.0, 1000000) == 1000000);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  CHECK(ipase_batch_length(0.0, neg_inf, 12345) == 12345);
  // exactly at the boundary p2 = 1/remaining the guard fires too
  CHECK(ipase_batch_length(0.01, std::log(0.01), 100) == 100);
}

TEST_CASE("adaptive scheduling without probabilities is a logic error", "[batching]") {
  BatchSchedule s = BatchSchedule::ipase();
  ScheduleContext ctx;
  ctx.batch = 2;
  ctx.prev_endpoint = 2;
  ctx.horizon = 100;
  ctx.num_arms = 2;
  CHECK_THROWS_AS(s.next_endpoint(ctx), std::logic_error);
}

TEST_CASE("a hook schedule sees boundary data and is sanity-checked", "[batching]") {
  std::vector<std::int64_t> seen_batches;
  BatchSchedule s = BatchSchedule::adversarial([&](const ScheduleContext& ctx) {
    seen_batches.push_back(ctx.batch);
    return ctx.prev_endpoint + 2;
  });
  const std::vector<double> probs{0.6, 0.4};
  const std::vector<double> log_probs{std::log(0.6), std::log(0.4)};
  const auto eps = expand(s, 7, &probs, &log_probs);
  CHECK(eps == std::vector<std::int64_t>{2, 4, 6, 7});
  CHECK(seen_batches == std::vector<std::int64_t>{1, 2, 3, 4});
  CHECK(s.wants_probs());

  BatchSchedule bad = BatchSchedule::adversarial(
      [](const ScheduleContext& ctx) { return ctx.prev_endpoint; });
  ScheduleContext ctx;
  ctx.batch = 1;
  ctx.prev_endpoint = 5;
  ctx.horizon = 100;
  CHECK_THROWS_AS(bad.next_endpoint(ctx), std::invalid_argument);
}

TEST_CASE("asking for a batch past the horizon is a logic error", "[batching]") {
  BatchSchedule s = BatchSchedule::per_step();
  ScheduleContext ctx;
  ctx.batch = 6;
  ctx.prev_endpoint = 5;
  ctx.horizon = 5;
  CHECK_THROWS_AS(s.next_endpoint(ctx), std::logic_error);
}

TEST_CASE("growth diagnostic classifies the canonical schedules", "[batching]") {
  const auto poly = expand(BatchSchedule::polynomial(2.0), 1000000);
  CHECK(growth_diagnostic(poly).verdict == GrowthDiagnostic::Verdict::subexponential);

  const auto steps = expand(BatchSchedule::per_step(), 2000);
  CHECK(growth_diagnostic(steps).verdict == GrowthDiagnostic::Verdict::subexponential);

  const auto geo = expand(BatchSchedule::geometric(2.0), 1 << 20);
  CHECK(growth_diagnostic(geo).verdict == GrowthDiagnostic::Verdict::violating);

  CHECK(growth_diagnostic(std::vector<std::int64_t>{5}).verdict ==
        GrowthDiagnostic::Verdict::inconclusive);
  CHECK(growth_diagnostic(std::vector<std::int64_t>{}).verdict ==
        GrowthDiagnostic::Verdict::inconclusive);
}

TEST_CASE("growth diagnostic ignores a horizon-clipped final batch", "[batching]") {
  // geometric growth cut short by the horizon: the tiny last difference must
  // not flip the verdict away from violating
  auto eps = expand(BatchSchedule::geometric(2.0), (1 << 20) + 3);
  CHECK(eps.back() - eps[eps.size() - 2] == 3);
  CHECK(growth_diagnostic(eps).verdict == GrowthDiagnostic::Verdict::violating);
}

TEST_CASE("growth exponents are log differences over log endpoints", "[batching]") {
  const std::vector<std::int64_t> eps{2, 6, 14};
  const auto d = growth_diagnostic(eps);
  REQUIRE(d.exponents.size() == 2);
  CHECK(d.exponents[0] == Catch::Approx(std::log(4.0) / std::log(2.0)));
  CHECK(d.exponents[1] == Catch::Approx(std::log(8.0) / std::log(6.0)));
}
