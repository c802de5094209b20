#pragma once

#include <compare>
#include <numbers>

namespace mzsim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Values within this distance below 2*pi are canonicalised to 0.
inline constexpr double kWrapEpsilon = 1e-12;

/// An angle in radians, always held in the half-open interval [0, 2*pi).
class Phase {
 public:
  constexpr Phase() = default;

  /// Reduces an arbitrary finite angle. Throws DomainError on NaN/inf.
  static Phase from_radians(double theta);

  constexpr double radians() const noexcept { return value_; }

  friend constexpr bool operator==(Phase, Phase) = default;
  friend constexpr auto operator<=>(Phase, Phase) = default;

 private:
  explicit constexpr Phase(double canonical) : value_(canonical) {}
  double value_ = 0.0;

  friend Phase wrap_phase(double theta);
};

/// theta reduced into [0, 2*pi).
Phase wrap_phase(double theta);

/// wrap(a - b): the phase of `a` measured from `b`, in [0, 2*pi).
Phase signed_diff(Phase a, Phase b);

/// Internal periodic phenomenon: instantaneous phase frequency * t + offset.
class PhaseOscillator {
 public:
  PhaseOscillator() = default;
  /// Throws DomainError unless frequency is finite and >= 0.
  PhaseOscillator(double frequency, Phase offset);

  double frequency() const noexcept { return frequency_; }
  Phase offset() const noexcept { return offset_; }

  friend bool operator==(const PhaseOscillator&, const PhaseOscillator&) = default;

 private:
  double frequency_ = 0.0;
  Phase offset_{};
};

/// wrap(osc.frequency * t + osc.offset). Requires finite t >= 0.
Phase phase_at(const PhaseOscillator& osc, double t);

/// Same frequency, offset chosen so that phase_at(result, t) == target.
PhaseOscillator rebase_offset(const PhaseOscillator& osc, double t, Phase target);

/// Shortest angular distance between two phases, in [0, pi]. Test/diagnostic helper.
double circular_distance(Phase a, Phase b);

}  // namespace mzsim
