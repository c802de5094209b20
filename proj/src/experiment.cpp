#include "mzsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "mzsim/errors.hpp"
#include "mzsim/rng.hpp"

namespace mzsim {

namespace {

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
}

void require_non_negative(double v, const char* field) {
  require_finite(v, field);
  if (v < 0.0) throw ConfigError(field, "must be >= 0, got " + std::to_string(v));
}

void require_positive(double v, const char* field) {
  require_finite(v, field);
  if (v <= 0.0) throw ConfigError(field, "must be > 0, got " + std::to_string(v));
}

void validate_splitter(const SplitterConfig& s, const std::string& prefix) {
  require_non_negative(s.frequency, (prefix + ".frequency").c_str());
  require_finite(s.update_alpha, (prefix + ".update_alpha").c_str());
  require_finite(s.update_beta, (prefix + ".update_beta").c_str());
}

BeamSplitterState make_splitter(const SplitterConfig& s) {
  return BeamSplitterState(PhaseOscillator(s.frequency, s.initial_offset), s.update_alpha,
                           s.update_beta);
}

Photon make_photon(const ExperimentConfig& config, const PhotonSeed& seed) {
  const double nu = config.particle_frequency;
  return Photon{seed.emitted_at,
                PhaseOscillator(nu, wrap_phase(seed.initial_phase.radians() - nu * seed.emitted_at)),
                PathTag::Unsplit};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (photon_count < 1) throw ConfigError("photon_count", "must be >= 1");
  require_positive(source_rate, "source_rate");
  require_positive(particle_frequency, "particle_frequency");
  validate_splitter(bs1, "bs1");
  validate_splitter(bs2, "bs2");
  require_non_negative(base_path_length, "base_path_length");
  require_non_negative(delta, "delta");
}

double ExperimentConfig::period() const { return kTwoPi / particle_frequency; }

ExperimentConfig reference_config() { return ExperimentConfig{}; }

ExperimentConfig tuned_visibility_config() {
  ExperimentConfig c;
  c.bs1.update_alpha = c.bs2.update_alpha = -0.5;
  c.bs1.update_beta = c.bs2.update_beta = 0.0;
  c.base_path_length = 1.0;
  return c;
}

MziState initial_state(const ExperimentConfig& config) {
  return {make_splitter(config.bs1), make_splitter(config.bs2)};
}

std::vector<PhotonSeed> draw_photons(const ExperimentConfig& config, std::uint64_t stream_seed,
                                     double start) {
  RandomStream stream(stream_seed);
  const auto n = static_cast<std::size_t>(config.photon_count);
  const auto times =
      generate_emissions(config.source_rate, n, stream, config.inter_arrival_law, start);
  std::vector<PhotonSeed> photons(n);
  for (std::size_t i = 0; i < n; ++i) {
    photons[i].emitted_at = times[i];
    photons[i].initial_phase =
        config.particle_initial_phase.kind == InitialPhase::Kind::Fixed
            ? config.particle_initial_phase.value
            : wrap_phase(kTwoPi * stream.uniform_open01());
  }
  return photons;
}

MziRun simulate_mzi(const ExperimentConfig& config, double delta,
                    std::span<const PhotonSeed> photons, MziState& state, bool trace) {
  const PathSegment feed(config.base_path_length);
  const PathSegment arm1(config.base_path_length);
  const PathSegment arm2(config.base_path_length + delta);

  MziRun run;
  if (trace) run.trace.emplace().reserve(photons.size());
  for (const auto& seed : photons) {
    Photon photon = make_photon(config, seed);
    const double t1 = propagate(photon, feed, seed.emitted_at);
    const auto first = interact(state.bs1, photon, t1);
    const double t2 = propagate(photon, photon.path == PathTag::Path1 ? arm1 : arm2, t1);
    const auto second = interact(state.bs2, photon, t2);
    run.counts.record(second.kind);
    if (trace) run.trace->push_back({seed.emitted_at, first.kind, photon.path, second.kind});
  }
  return run;
}

RunRecord run_single_bs(const ExperimentConfig& config, RunOptions options) {
  config.validate();
  RunRecord record{config, config.delta, derive_child_seed(config.master_seed, 0), {}, {}};
  const auto photons = draw_photons(config, record.stream_seed);
  const PathSegment feed(config.base_path_length);
  BeamSplitterState bs = make_splitter(config.bs1);
  if (options.trace) record.trace.emplace().reserve(photons.size());
  for (const auto& seed : photons) {
    Photon photon = make_photon(config, seed);
    const auto out = interact(bs, photon, propagate(photon, feed, seed.emitted_at));
    record.counts.record(out.kind);
    if (options.trace) record.trace->push_back({seed.emitted_at, out.kind, photon.path, {}});
  }
  return record;
}

RunRecord run_mzi(const ExperimentConfig& config, RunOptions options) {
  config.validate();
  RunRecord record{config, config.delta, derive_child_seed(config.master_seed, 0), {}, {}};
  const auto photons = draw_photons(config, record.stream_seed);
  MziState state = initial_state(config);
  auto run = simulate_mzi(config, config.delta, photons, state, options.trace);
  record.counts = run.counts;
  record.trace = std::move(run.trace);
  return record;
}

std::vector<std::uint64_t> sweep_stream_indices(std::span<const double> deltas) {
  std::vector<double> sorted(deltas.begin(), deltas.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::uint64_t> idx;
  idx.reserve(deltas.size());
  for (double d : deltas) {
    idx.push_back(static_cast<std::uint64_t>(
        std::lower_bound(sorted.begin(), sorted.end(), d) - sorted.begin()));
  }
  return idx;
}

SweepResult run_sweep(const ExperimentConfig& config, std::span<const double> deltas,
                      SweepOptions options) {
  if (deltas.empty()) throw UsageError("run_sweep: deltas must not be empty");
  config.validate();
  for (double d : deltas) {
    if (!std::isfinite(d) || d < 0.0) throw ConfigError("delta", "sweep deltas must be finite and >= 0");
  }
  const auto indices = sweep_stream_indices(deltas);
  SweepResult result;
  result.points.resize(deltas.size());

  auto finish = [&](std::size_t i, MziRun&& run, std::uint64_t seed) {
    auto& pt = result.points[i];
    pt.delta = deltas[i];
    pt.stream_seed = seed;
    pt.counts = run.counts;
    pt.d1_fraction = run.counts.d1_fraction();
    pt.trace = std::move(run.trace);
  };

  if (config.carry_memory) {
    MziState state = initial_state(config);
    double clock = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const auto seed = derive_child_seed(config.master_seed, indices[i]);
      const auto photons = draw_photons(config, seed, clock);
      clock = photons.back().emitted_at;
      finish(i, simulate_mzi(config, deltas[i], photons, state, options.trace), seed);
    }
    return result;
  }

  auto run_point = [&](std::size_t i) {
    const auto seed = derive_child_seed(config.master_seed, indices[i]);
    const auto photons = draw_photons(config, seed);
    MziState state = initial_state(config);
    finish(i, simulate_mzi(config, deltas[i], photons, state, options.trace), seed);
  };

  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, options.parallel), deltas.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < deltas.size(); ++i) run_point(i);
    return result;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < deltas.size(); i = next++) {
          try {
            run_point(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<double> default_deltas(const ExperimentConfig& config, std::size_t steps,
                                   std::optional<double> delta_max) {
  if (steps < 1) throw UsageError("default_deltas: steps must be >= 1");
  const double hi = delta_max.value_or(2.0 * config.period());
  if (!std::isfinite(hi) || hi < 0.0) throw UsageError("default_deltas: delta_max must be finite and >= 0");
  std::vector<double> out(steps, 0.0);
  for (std::size_t j = 1; j < steps; ++j) {
    out[j] = hi * static_cast<double>(j) / static_cast<double>(steps - 1);
  }
  return out;
}

std::vector<PhotonSeed> reverse_emission_order(std::span<const PhotonSeed> photons) {
  std::vector<PhotonSeed> out(photons.begin(), photons.end());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out[i].initial_phase = photons[n - 1 - i].initial_phase;
  return out;
}

TraceDiff trace_diff(std::span<const TraceEntry> a, std::span<const TraceEntry> b) {
  if (a.size() != b.size()) throw UsageError("trace_diff: traces differ in length");
  TraceDiff diff;
  diff.compared = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].bs1 != b[i].bs1 || a[i].path != b[i].path || a[i].bs2 != b[i].bs2) {
      ++diff.differing;
      if (!diff.first_difference) diff.first_difference = i;
    }
  }
  return diff;
}

}  // namespace mzsim
