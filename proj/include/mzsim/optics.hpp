#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mzsim/phase.hpp"
#include "mzsim/rng.hpp"

namespace mzsim {

enum class PathTag : std::uint8_t { Unsplit, Path1, Path2 };
enum class Outcome : std::uint8_t { Reflect, Transmit };
enum class InterArrivalLaw : std::uint8_t { Exponential, Uniform, Fixed };

std::string_view to_string(PathTag p) noexcept;
std::string_view to_string(Outcome o) noexcept;
std::string_view to_string(InterArrivalLaw law) noexcept;

/// A deterministic corpuscle carrying its own phase oscillator.
struct Photon {
  double emitted_at = 0.0;
  PhaseOscillator osc;
  PathTag path = PathTag::Unsplit;
};

/// Contextual memory of a beam splitter. Its oscillator is rewritten by every
/// reflection; transmissions leave it untouched.
class BeamSplitterState {
 public:
  BeamSplitterState() = default;
  /// Throws DomainError if either update coefficient is non-finite.
  BeamSplitterState(PhaseOscillator osc, double update_alpha, double update_beta);

  const PhaseOscillator& osc() const noexcept { return osc_; }
  double update_alpha() const noexcept { return alpha_; }
  double update_beta() const noexcept { return beta_; }

  void set_osc(const PhaseOscillator& osc) noexcept { osc_ = osc; }

  friend bool operator==(const BeamSplitterState&, const BeamSplitterState&) = default;

 private:
  PhaseOscillator osc_;
  double alpha_ = 1.0;
  double beta_ = -1.0;
};

struct InteractionOutcome {
  Outcome kind = Outcome::Transmit;
  Phase particle_phase_after;
  Phase splitter_phase_after;
  double interaction_time = 0.0;
};

/// Propagation length in natural time units (speed 1).
class PathSegment {
 public:
  /// Throws DomainError unless length is finite and >= 0.
  explicit PathSegment(double length);
  double length() const noexcept { return length_; }

 private:
  double length_;
};

struct DetectorCounts {
  std::uint64_t d1 = 0;
  std::uint64_t d2 = 0;

  std::uint64_t total() const noexcept { return d1 + d2; }
  /// d1 / (d1 + d2); 0 when nothing was counted.
  double d1_fraction() const noexcept {
    return total() == 0 ? 0.0 : static_cast<double>(d1) / static_cast<double>(total());
  }
  void record(Outcome o) noexcept { (o == Outcome::Reflect ? d1 : d2) += 1; }

  friend bool operator==(const DetectorCounts&, const DetectorCounts&) = default;
};

/// Emission times of n photons, starting the clock at `start`. Gaps are i.i.d. from
/// `law` with mean 1/rate. Throws ConfigError if rate is not finite and positive.
std::vector<double> generate_emissions(double rate, std::size_t n, RandomStream& stream,
                                       InterArrivalLaw law = InterArrivalLaw::Exponential,
                                       double start = 0.0);

/// Reflect iff diff < pi.
Outcome decide(Phase diff) noexcept;

/// Instantaneous photon/splitter interaction at time t.
///
/// The phase difference d = wrap(p - s) of the photon phase p and splitter phase s
/// selects the outcome. On Reflect both phases are replaced,
///   p' = wrap(alpha p + beta s),  s' = wrap(alpha s + beta p),
/// and each oscillator is rebased so its instantaneous phase at t equals the new value
/// (an oscillator whose phase did not change keeps its offset bit-for-bit). Transmit
/// changes nothing. An Unsplit photon is routed to Path1 on Reflect and Path2 on
/// Transmit; a photon already on a path keeps its tag.
///
/// Throws SequencingError if t precedes the photon's emission.
InteractionOutcome interact(BeamSplitterState& bs, Photon& photon, double t);

/// Arrival time after traversing `segment` from `depart`. Phase accrues implicitly
/// through the later evaluation time. Throws SequencingError if depart < emission.
double propagate(const Photon& photon, const PathSegment& segment, double depart);

}  // namespace mzsim
