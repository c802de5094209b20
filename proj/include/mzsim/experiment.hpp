#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mzsim/optics.hpp"
#include "mzsim/phase.hpp"

namespace mzsim {

struct SplitterConfig {
  double frequency = 1.0;
  Phase initial_offset{};
  double update_alpha = 1.0;
  double update_beta = -1.0;

  friend bool operator==(const SplitterConfig&, const SplitterConfig&) = default;
};

struct InitialPhase {
  enum class Kind : std::uint8_t { UniformRandom, Fixed };
  Kind kind = Kind::UniformRandom;
  Phase value{};  // meaningful only for Fixed: the photon's phase at its emission instant

  static InitialPhase uniform() { return {}; }
  static InitialPhase fixed(Phase p) { return {Kind::Fixed, p}; }

  friend bool operator==(const InitialPhase&, const InitialPhase&) = default;
};

/// Complete, reproducible description of one experiment. Default values form the
/// reference configuration: 1e5 photons from a Poissonian source (rate 10) with uniformly
/// random photon phases and nu = 1; BS1 runs at the photon frequency, BS2 has a static
/// clock (frequency 0), and both update as p' = p - s, s' = s - p on reflection.
struct ExperimentConfig {
  std::uint64_t photon_count = 100000;
  double source_rate = 10.0;
  InterArrivalLaw inter_arrival_law = InterArrivalLaw::Exponential;
  double particle_frequency = 1.0;
  InitialPhase particle_initial_phase{};
  SplitterConfig bs1{1.0, Phase{}, 1.0, -1.0};
  SplitterConfig bs2{0.0, Phase{}, 1.0, -1.0};
  double base_path_length = 0.0;
  double delta = 0.0;
  std::uint64_t master_seed = 42;
  /// Sweeps only: carry both splitter memories (and the clock) from one delta step to
  /// the next instead of starting every step fresh. Forces sequential execution.
  bool carry_memory = false;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  /// 2*pi / particle_frequency: the exact delta-period of the model.
  double period() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig reference_config();

/// Reference config with uncoupled memory: a reflection rescales each phase on its own,
/// p' = -p/2 and s' = -s/2, and both arms are 1 long. Fringe visibility is near 0.5.
ExperimentConfig tuned_visibility_config();

struct TraceEntry {
  double emitted_at = 0.0;
  Outcome bs1 = Outcome::Transmit;
  PathTag path = PathTag::Unsplit;
  std::optional<Outcome> bs2;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct RunRecord {
  ExperimentConfig config;
  double delta = 0.0;
  std::uint64_t stream_seed = 0;
  DetectorCounts counts;
  std::optional<std::vector<TraceEntry>> trace;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct SweepPoint {
  double delta = 0.0;
  std::uint64_t stream_seed = 0;
  DetectorCounts counts;
  double d1_fraction = 0.0;
  std::optional<std::vector<TraceEntry>> trace;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepResult {
  std::vector<SweepPoint> points;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

struct RunOptions {
  bool trace = false;
};

struct SweepOptions {
  bool trace = false;
  unsigned parallel = 1;
};

/// One photon before it enters the apparatus.
struct PhotonSeed {
  double emitted_at = 0.0;
  Phase initial_phase;  // phase at the emission instant

  friend bool operator==(const PhotonSeed&, const PhotonSeed&) = default;
};

struct MziState {
  BeamSplitterState bs1;
  BeamSplitterState bs2;
};

struct MziRun {
  DetectorCounts counts;
  std::optional<std::vector<TraceEntry>> trace;
};

/// Fresh splitter memories as configured.
MziState initial_state(const ExperimentConfig& config);

/// Draws config.photon_count photons from a stream seeded with stream_seed: all
/// emission gaps first, then all initial phases. The clock starts at `start`.
std::vector<PhotonSeed> draw_photons(const ExperimentConfig& config, std::uint64_t stream_seed,
                                     double start = 0.0);

/// Runs an explicit, emission-ordered photon list through the two-splitter arrangement,
/// mutating `state`. Photons reflected at BS2 count on D1, transmitted ones on D2.
MziRun simulate_mzi(const ExperimentConfig& config, double delta,
                    std::span<const PhotonSeed> photons, MziState& state, bool trace);

/// Single splitter: every photon meets BS1 once; Reflect counts on D1.
RunRecord run_single_bs(const ExperimentConfig& config, RunOptions options = {});

/// Two-splitter run at config.delta. Uses child stream 0 of config.master_seed, so the
/// photon stream does not depend on delta.
RunRecord run_mzi(const ExperimentConfig& config, RunOptions options = {});

/// Child-stream index of every delta: its dense rank among the distinct sorted deltas.
/// Reordering the input therefore reorders, but never changes, each point's result.
std::vector<std::uint64_t> sweep_stream_indices(std::span<const double> deltas);

/// One run_mzi per delta, results in input order. Throws UsageError on an empty list.
SweepResult run_sweep(const ExperimentConfig& config, std::span<const double> deltas,
                      SweepOptions options = {});

/// `steps` evenly spaced deltas over [0, delta_max], endpoints included. delta_max
/// defaults to two periods.
std::vector<double> default_deltas(const ExperimentConfig& config, std::size_t steps = 50,
                                   std::optional<double> delta_max = std::nullopt);

/// Same emission instants, photon phases assigned in reverse order.
std::vector<PhotonSeed> reverse_emission_order(std::span<const PhotonSeed> photons);

struct TraceDiff {
  std::size_t compared = 0;
  std::size_t differing = 0;
  std::optional<std::size_t> first_difference;
};

/// Per-entry comparison of splitter outcomes and paths (emission times ignored).
TraceDiff trace_diff(std::span<const TraceEntry> a, std::span<const TraceEntry> b);

}  // namespace mzsim
