/*
 * Copyright 2026 The accelplug Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "accelplug/pipeline.hpp"
#include "accelplug/shared_region.hpp"

using namespace accelplug;

namespace {

// Stand-alone evaluation of the pipeline cost: stage times of a block of
// d/s units, first fill, steady state, drain.
double eq_total(double k1, double k2, double k3, double a, double d, double s) {
  const double b = d / s;
  const double n = k1 * b, c = a + k2 * b, u = k3 * b;
  const double fill = n + std::max(n, c);
  const double steady = (s - 2) * std::max(std::max(n, c), u);
  const double drain = std::max(c, u) + u;
  return fill + steady + drain;
}

BlockPlan exhaustive(const PipelineCostModel& m) {
  BlockPlan best{1, m.d, eq_total(m.k1, m.k2, m.k3, m.a, double(m.d), 1.0)};
  for (std::uint64_t s = 2; s <= m.d; ++s) {
    const double t = eq_total(m.k1, m.k2, m.k3, m.a, double(m.d), double(s));
    if (t < best.t) best = {s, (m.d + s - 1) / s, t};
  }
  return best;
}

PipelineCostModel random_model(std::mt19937_64& rng, std::uint64_t max_d) {
  std::uniform_real_distribution<double> k(0.001, 2.0), a(0.0, 1e5);
  std::uniform_int_distribution<std::uint64_t> d(10, max_d);
  return {k(rng), k(rng), k(rng), a(rng), d(rng)};
}

}  // namespace

TEST_CASE("total_time examples") {
  PipelineCostModel unit{1, 1, 1, 0, 50};
  CHECK(total_time(unit, 50) == doctest::Approx(52.0));

  PipelineCostModel m{0.1, 1.0, 0.2, 10.0, 100};
  const double b = 50.0;
  CHECK(total_time(m, 2) == doctest::Approx(0.1 * b + (10 + b) + (10 + b) + 0.2 * b));

  PipelineCostModel sssp{0.03, 0.51, 0.09, 84671, 1000000};
  CHECK(total_time(sssp, 100) == doctest::Approx(eq_total(0.03, 0.51, 0.09, 84671, 1e6, 100)).epsilon(1e-12));

  CHECK_THROWS_AS(total_time(unit, 0), ConfigError);
  CHECK_THROWS_AS(total_time(unit, 51), ConfigError);
}

TEST_CASE("total_time agrees with the stand-alone evaluator") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    auto m = random_model(rng, 1000);
    const std::uint64_t s = 1 + rng() % m.d;
    CHECK(total_time(m, s) == doctest::Approx(eq_total(m.k1, m.k2, m.k3, m.a, double(m.d), double(s))).epsilon(1e-12));
  }
}

TEST_CASE("optimal_block_size cases") {
  PipelineCostModel pr{0.02, 0.58, 0.1, 1970, 1000000};
  auto o = optimal_block_size(pr);
  CHECK(o.which == OptimumCase::Balanced);
  CHECK(o.b_opt == doctest::Approx(std::sqrt(1970.0 * 1e6 / 0.12)));
  CHECK(o.t_min == doctest::Approx(0.58 * 1e6 + 2 * std::sqrt(0.12 * 1970 * 1e6)));
  auto plan = integerize(pr, o.b_opt);
  auto brute = exhaustive(pr);
  CHECK(plan.t <= brute.t * 1.02);

  PipelineCostModel k1max{3, 1, 1, 2, 100};
  o = optimal_block_size(k1max);
  CHECK(o.which == OptimumCase::DownloadBound);
  CHECK(o.b_opt == doctest::Approx(1.0));
  CHECK(o.q == doctest::Approx(std::sqrt(200.0 / 4.0)));
  CHECK(o.t_min == doctest::Approx(304.0));
  CHECK(exhaustive(k1max).t == doctest::Approx(304.0));

  PipelineCostModel k3max{1, 1, 3, 2, 100};
  o = optimal_block_size(k3max);
  CHECK(o.which == OptimumCase::UploadBound);
  CHECK(o.t_min == doctest::Approx(2.0 * 4.0 / 2.0 + 300.0));
  CHECK(exhaustive(k3max).t == doctest::Approx(o.t_min));

  PipelineCostModel sym{0.5, 2.0, 0.5, 40, 1000};
  o = optimal_block_size(sym);
  CHECK(o.which == OptimumCase::Balanced);
  CHECK(o.b_opt == o.q);

  PipelineCostModel flat{0.5, 2.0, 0.5, 0, 1000};
  CHECK_THROWS_AS(optimal_block_size(flat), NoInteriorOptimum);
  auto choice = choose_block_count(flat);
  CHECK_FALSE(choice.closed_form);
  CHECK(choice.plan.t == doctest::Approx(exhaustive(flat).t));

  PipelineCostModel bad{0, 1, 1, 1, 10};
  CHECK_THROWS_AS(optimal_block_size(bad), ConfigError);
}

TEST_CASE("integerize") {
  PipelineCostModel m{0.2, 1.0, 0.3, 5.0, 100};
  auto p = integerize(m, 7.07);
  CHECK((p.s == 14 || p.s == 15));
  CHECK(p.t == std::min(total_time(m, 14), total_time(m, 15)));

  p = integerize(m, 1000.0);
  CHECK(p.s == 1);
  CHECK(p.b == 100);

  PipelineCostModel one{1, 1, 1, 1, 1};
  p = integerize(one, 0.3);
  CHECK(p.s == 1);
  CHECK(p.b == 1);

  PipelineCostModel k1lim{3, 1, 1, 0, 40};
  p = choose_block_count(k1lim).plan;
  CHECK(p.s == 40);
}

TEST_CASE("closed form stays near the exhaustive optimum") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 150; ++i) {
    auto m = random_model(rng, 3000);
    auto choice = choose_block_count(m);
    auto brute = exhaustive(m);
    CHECK(choice.plan.t <= brute.t * 1.02);
    auto serial = sweep_block_count_serial(m);
    auto par = sweep_block_count(m);
    CHECK(serial.s == brute.s);
    CHECK(par.s == brute.s);
    CHECK(par.t == serial.t);
    if (m.a > 0 && brute.s < m.d) CHECK(total_time(m, m.d) > brute.t);
  }
}

TEST_CASE("rotation") {
  RotationState r;
  CHECK(r.role_of(0) == Role::New);
  CHECK(r.role_of(1) == Role::Compute);
  CHECK(r.role_of(2) == Role::Upload);
  r.advance();
  CHECK(r.role_of(0) == Role::Compute);
  CHECK(r.role_of(1) == Role::Upload);
  CHECK(r.role_of(2) == Role::New);
  r.advance();
  r.advance();
  CHECK(r.role_of(0) == Role::New);
  CHECK(r.role_of(1) == Role::Compute);
  CHECK(r.role_of(2) == Role::Upload);
  CHECK(r.cycle_count() == 3);

  SharedRegion region(1, 4);
  region.buffer(0).content = std::vector<Message>{{1, 2.0}};
  region.buffer(1).content = std::vector<ApplyItem>{{3, std::nullopt}};
  std::array<std::uint64_t, 3> sums{};
  for (std::size_t i = 0; i < 3; ++i) sums[i] = checksum(region.buffer(i).content);
  const BlockContent* addr = &region.slot(Role::New).content;
  rotate(region);
  CHECK(&region.slot(Role::Compute).content == addr);
  for (std::size_t i = 0; i < 3; ++i) CHECK(checksum(region.buffer(i).content) == sums[i]);
  CHECK(region.copies() == 0);
}

TEST_CASE("schedule simulation") {
  CHECK(simulate_pipeline({}).span == 0.0);
  std::vector<StageTimes> one{{1, 2, 3}};
  CHECK(simulate_pipeline(one).span == 6.0);

  // equal blocks reproduce the closed expression for s >= 2
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const std::size_t s = 2 + rng() % 20;
    StageTimes st{double(rng() % 10 + 1), double(rng() % 10 + 1), double(rng() % 10 + 1)};
    std::vector<StageTimes> blocks(s, st);
    const double n = st.download, c = st.compute, u = st.upload;
    const double want = n + std::max(n, c) + double(s - 2) * std::max({n, c, u}) + std::max(c, u) + u;
    auto t = simulate_pipeline(blocks);
    CHECK(t.span == doctest::Approx(want));
    CHECK(t.download == doctest::Approx(n * double(s)));
  }

  // uneven blocks: the span is at least every stage's busy time
  for (int i = 0; i < 100; ++i) {
    std::vector<StageTimes> blocks(1 + rng() % 10);
    for (auto& b : blocks) b = {double(rng() % 9), double(rng() % 9), double(rng() % 9)};
    auto t = simulate_pipeline(blocks);
    CHECK(t.span >= std::max({t.download, t.compute, t.upload}));
    CHECK(t.span <= t.download + t.compute + t.upload);
  }
}
