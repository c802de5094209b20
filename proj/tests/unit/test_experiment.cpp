#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "gen.hpp"
#include "mzsim/analysis.hpp"
#include "mzsim/errors.hpp"
#include "mzsim/experiment.hpp"
#include "mzsim/rng.hpp"

using namespace mzsim;
constexpr double pi = std::numbers::pi;

namespace {

ExperimentConfig small(std::uint64_t photons = 2000) {
  auto c = reference_config();
  c.photon_count = photons;
  return c;
}

std::string field_of(const ExperimentConfig& c) {
  try {
    c.validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return {};
}

}  // namespace

TEST_CASE("config validation names the field") {
  auto c = reference_config();
  CHECK(field_of(c).empty());
  c.photon_count = 0;
  CHECK(field_of(c) == "photon_count");
  c = reference_config();
  c.source_rate = 0.0;
  CHECK(field_of(c) == "source_rate");
  c = reference_config();
  c.particle_frequency = -1.0;
  CHECK(field_of(c) == "particle_frequency");
  c = reference_config();
  c.bs2.frequency = -0.5;
  CHECK(field_of(c) == "bs2.frequency");
  c = reference_config();
  c.bs1.update_beta = NAN;
  CHECK(field_of(c) == "bs1.update_beta");
  c = reference_config();
  c.base_path_length = -1.0;
  CHECK(field_of(c) == "base_path_length");
  c = reference_config();
  c.delta = INFINITY;
  CHECK(field_of(c) == "delta");
  CHECK_THROWS_AS(run_mzi(c), ConfigError);
  CHECK_THROWS_AS(run_single_bs(c), ConfigError);
}

TEST_CASE("reference and tuned configs") {
  const auto r = reference_config();
  CHECK(r.photon_count == 100000);
  CHECK(r.master_seed == 42);
  CHECK(r.particle_frequency == 1.0);
  CHECK(r.period() == doctest::Approx(kTwoPi));
  const auto t = tuned_visibility_config();
  CHECK(t.bs1.update_alpha == -0.5);
  CHECK(t.bs1.update_beta == 0.0);
  CHECK(t.bs2.update_alpha == -0.5);
  CHECK(t.bs2.update_beta == 0.0);
  CHECK(t.base_path_length == 1.0);
  CHECK(t.photon_count == r.photon_count);
}

TEST_CASE("derive_child_seed") {
  CHECK(derive_child_seed(42, 7) == derive_child_seed(42, 7));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i <= 10000; ++i) seen.insert(derive_child_seed(42, i));
  CHECK(seen.size() == 10001);
  for (std::uint64_t i = 0; i <= 50; ++i) {
    for (std::uint64_t j = i + 1; j <= 50; ++j) REQUIRE(derive_child_seed(3, i) != derive_child_seed(3, j));
  }
  // published SplitMix64 output for state 0: first value 0xE220A8397B1DCDAF
  CHECK(splitmix64_mix(0x9E3779B97F4A7C15ULL) == 0xE220A8397B1DCDAFULL);
  CHECK(derive_child_seed(0, 0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("draw_photons is deterministic and ordered") {
  const auto c = small(5000);
  const auto a = draw_photons(c, 17);
  CHECK(a == draw_photons(c, 17));
  CHECK(a != draw_photons(c, 18));
  for (std::size_t i = 1; i < a.size(); ++i) REQUIRE(a[i].emitted_at > a[i - 1].emitted_at);
  auto fixed = c;
  fixed.particle_initial_phase = InitialPhase::fixed(wrap_phase(1.5));
  const auto f = draw_photons(fixed, 17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    REQUIRE(f[i].emitted_at == a[i].emitted_at);
    REQUIRE(f[i].initial_phase.radians() == 1.5);
  }
}

TEST_CASE("single splitter: fixed phase matching the splitter reflects") {
  auto c = reference_config();
  c.photon_count = 1;
  c.base_path_length = 0.75;
  c.bs1 = {0.6, wrap_phase(2.0), 1.0, -1.0};
  const auto te = draw_photons(c, derive_child_seed(c.master_seed, 0)).front().emitted_at;
  const double arrival = te + c.base_path_length;
  const double s = phase_at(PhaseOscillator(c.bs1.frequency, c.bs1.initial_offset), arrival).radians();
  // photon phase at emission that has advanced to s by the arrival
  c.particle_initial_phase = InitialPhase::fixed(wrap_phase(s - c.particle_frequency * c.base_path_length));
  auto r = run_single_bs(c);
  CHECK(r.counts.d1 == 1);
  CHECK(r.counts.d2 == 0);
  // half a period later the photon is exactly out of phase and is transmitted
  c.particle_initial_phase = InitialPhase::fixed(wrap_phase(s + pi - c.particle_frequency * c.base_path_length));
  r = run_single_bs(c);
  CHECK(r.counts.d1 == 0);
  CHECK(r.counts.d2 == 1);
}

TEST_CASE("single splitter: uniform phases split 50/50") {
  const auto r = run_single_bs(reference_config());
  CHECK(r.counts.total() == 100000);
  CHECK(r.counts.d1_fraction() >= 0.495);
  CHECK(r.counts.d1_fraction() <= 0.505);
  CHECK(r == run_single_bs(reference_config()));
}

TEST_CASE("single splitter: grid enumeration over initial phases gives one half") {
  auto c = reference_config();
  c.photon_count = 1;
  const int grid = 10000;
  std::uint64_t d1 = 0;
  for (int k = 0; k < grid; ++k) {
    c.particle_initial_phase = InitialPhase::fixed(wrap_phase(kTwoPi * (k + 0.5) / grid));
    d1 += run_single_bs(c).counts.d1;
  }
  CHECK(std::fabs(static_cast<double>(d1) / grid - 0.5) <= 1.0 / grid);
}

TEST_CASE("single splitter trace") {
  auto c = small(300);
  const auto r = run_single_bs(c, {true});
  REQUIRE(r.trace);
  REQUIRE(r.trace->size() == 300);
  std::uint64_t reflected = 0;
  for (const auto& e : *r.trace) {
    CHECK_FALSE(e.bs2.has_value());
    CHECK(e.path == (e.bs1 == Outcome::Reflect ? PathTag::Path1 : PathTag::Path2));
    reflected += e.bs1 == Outcome::Reflect;
  }
  CHECK(reflected == r.counts.d1);
}

TEST_CASE("mzi conserves photons and traces agree with counts") {
  Gen g(31);
  for (int i = 0; i < 20; ++i) {
    auto c = small(static_cast<std::uint64_t>(g.integer(1, 3000)));
    c.delta = g.uniform(0, 20);
    c.base_path_length = g.uniform(0, 3);
    c.bs1.update_alpha = g.uniform(-2, 2);
    c.bs2.update_beta = g.uniform(-2, 2);
    c.inter_arrival_law = static_cast<InterArrivalLaw>(g.integer(0, 2));
    const auto r = run_mzi(c, {true});
    REQUIRE(r.counts.total() == c.photon_count);
    REQUIRE(r.trace->size() == c.photon_count);
    std::uint64_t d1 = 0;
    for (const auto& e : *r.trace) d1 += e.bs2 == Outcome::Reflect;
    REQUIRE(d1 == r.counts.d1);
  }
}

TEST_CASE("mzi is exactly periodic in delta") {
  Gen g(32);
  for (const auto& base : {reference_config(), tuned_visibility_config()}) {
    for (int i = 0; i < 4; ++i) {
      auto c = base;
      c.photon_count = 20000;
      c.master_seed = g.next();
      c.base_path_length = i % 2 == 0 ? 0.0 : g.uniform(0, 2);
      c.delta = g.uniform(0, 2 * kTwoPi);
      const auto a = run_mzi(c, {true});
      c.delta += kTwoPi / c.particle_frequency;
      const auto b = run_mzi(c, {true});
      CHECK(a.counts == b.counts);
      CHECK(*a.trace == *b.trace);
    }
  }
}

TEST_CASE("mzi with the reference config deviates from 50/50 at a fringe extremum") {
  const auto c = reference_config();
  const auto sweep = run_sweep(c, default_deltas(c), {false, 4});
  const auto fit = fit_sine(to_sine_points(sweep));
  REQUIRE(fit.r_squared >= 0.9);
  // first delta >= 0 where the fitted sine is at its minimum: omega*delta + phase = 3pi/2
  const double w = fit.angular_frequency;
  double at_min = (3 * pi / 2 - fit.phase.radians()) / w;
  while (at_min < 0) at_min += kTwoPi / w;
  auto probe = c;
  probe.delta = at_min;
  const double frac = run_mzi(probe).counts.d1_fraction();
  CHECK(std::fabs(frac - 0.5) >= 0.15);
}

TEST_CASE("run_sweep: single delta equals run_mzi") {
  auto c = small(5000);
  const std::vector<double> zero{0.0};
  const auto sweep = run_sweep(c, zero);
  REQUIRE(sweep.points.size() == 1);
  const auto direct = run_mzi(c);
  CHECK(sweep.points[0].counts == direct.counts);
  CHECK(sweep.points[0].stream_seed == direct.stream_seed);
  CHECK(sweep.points[0].delta == 0.0);
}

TEST_CASE("run_sweep: permutation invariance") {
  auto c = small(3000);
  auto deltas = default_deltas(c, 12);
  const auto base = run_sweep(c, deltas);
  Gen g(33);
  for (int round = 0; round < 5; ++round) {
    std::vector<std::size_t> perm(deltas.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      std::swap(perm[i], perm[static_cast<std::size_t>(g.integer(0, static_cast<std::int64_t>(i)))]);
    }
    std::vector<double> shuffled;
    for (auto p : perm) shuffled.push_back(deltas[p]);
    const auto got = run_sweep(c, shuffled, {false, 3});
    SweepResult unpermuted;
    unpermuted.points.resize(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) unpermuted.points[perm[i]] = got.points[i];
    CHECK(unpermuted == base);
  }
}

TEST_CASE("run_sweep: parallel matches sequential, fractions are exact") {
  auto c = small(4000);
  const auto deltas = default_deltas(c, 25);
  const auto seq = run_sweep(c, deltas, {true, 1});
  const auto par = run_sweep(c, deltas, {true, 8});
  CHECK(seq == par);
  for (const auto& p : seq.points) {
    CHECK(p.d1_fraction == static_cast<double>(p.counts.d1) / static_cast<double>(p.counts.total()));
    CHECK(p.trace->size() == c.photon_count);
  }
}

TEST_CASE("run_sweep errors") {
  const auto c = small(10);
  CHECK_THROWS_AS(run_sweep(c, std::vector<double>{}), UsageError);
  CHECK_THROWS_AS(run_sweep(c, std::vector<double>{1.0, -1.0}), ConfigError);
  CHECK_THROWS_AS(run_sweep(c, std::vector<double>{NAN}), ConfigError);
}

TEST_CASE("sweep stream indices are dense ranks") {
  const std::vector<double> d{3.0, 1.0, 3.0, 0.5};
  CHECK(sweep_stream_indices(d) == std::vector<std::uint64_t>{2, 1, 2, 0});
}

TEST_CASE("default_deltas") {
  const auto c = reference_config();
  const auto d = default_deltas(c);
  REQUIRE(d.size() == 50);
  CHECK(d.front() == 0.0);
  CHECK(d.back() == doctest::Approx(2 * kTwoPi).epsilon(1e-15));
  CHECK(default_deltas(c, 1) == std::vector<double>{0.0});
  CHECK(default_deltas(c, 5, 4.0) == std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_AS(default_deltas(c, 0), UsageError);
  CHECK_THROWS_AS(default_deltas(c, 5, -1.0), UsageError);
}

TEST_CASE("full determinism") {
  auto c = small(20000);
  c.delta = 2.2;
  CHECK(run_mzi(c, {true}) == run_mzi(c, {true}));
  const auto deltas = default_deltas(c, 10);
  CHECK(run_sweep(c, deltas, {true, 4}) == run_sweep(c, deltas, {true, 2}));
}

TEST_CASE("order sensitivity: reversing the photon order changes BS2's history") {
  auto c = small(2000);
  c.delta = 1.0;
  const auto photons = draw_photons(c, derive_child_seed(c.master_seed, 0));
  const auto reversed = reverse_emission_order(photons);
  REQUIRE(reversed.size() == photons.size());
  CHECK(reversed.front().initial_phase == photons.back().initial_phase);
  CHECK(reversed.front().emitted_at == photons.front().emitted_at);

  MziState s1 = initial_state(c);
  MziState s2 = initial_state(c);
  const auto a = simulate_mzi(c, c.delta, photons, s1, true);
  const auto b = simulate_mzi(c, c.delta, reversed, s2, true);
  CHECK_FALSE(s1.bs2 == s2.bs2);
  const auto diff = trace_diff(*a.trace, *b.trace);
  CHECK(diff.compared == photons.size());
  CHECK(diff.differing > 0);
  CHECK(diff.first_difference.has_value());

  // the same photons replayed in the same order reproduce the trace exactly
  MziState s3 = initial_state(c);
  const auto again = simulate_mzi(c, c.delta, photons, s3, true);
  CHECK(trace_diff(*a.trace, *again.trace).differing == 0);
  CHECK(s3.bs2 == s1.bs2);

  CHECK_THROWS_AS(trace_diff(*a.trace, std::vector<TraceEntry>{}), UsageError);
}

TEST_CASE("without memory coupling there is no interference") {
  auto c = reference_config();
  c.bs1.update_alpha = c.bs2.update_alpha = 1.0;
  c.bs1.update_beta = c.bs2.update_beta = 0.0;
  const auto sweep = run_sweep(c, default_deltas(c, 10), {false, 4});
  for (const auto& p : sweep.points) {
    CAPTURE(p.delta);
    CHECK(std::fabs(p.d1_fraction - 0.5) <= 0.01);
  }
}

TEST_CASE("carry_memory threads state through the sweep") {
  auto c = small(3000);
  c.carry_memory = true;
  const auto deltas = default_deltas(c, 8);
  const auto carried = run_sweep(c, deltas, {false, 4});
  CHECK(carried == run_sweep(c, deltas));
  auto fresh = c;
  fresh.carry_memory = false;
  const auto reset = run_sweep(fresh, deltas);
  // the first point starts from the same state and clock
  CHECK(carried.points[0] == reset.points[0]);
  bool any_diff = false;
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    REQUIRE(carried.points[i].counts.total() == c.photon_count);
    any_diff = any_diff || !(carried.points[i].counts == reset.points[i].counts);
  }
  CHECK(any_diff);
}
