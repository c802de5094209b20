#include "mzsim/phase.hpp"

#include <cmath>
#include <string>

#include "mzsim/errors.hpp"

namespace mzsim {

Phase Phase::from_radians(double theta) { return wrap_phase(theta); }

Phase wrap_phase(double theta) {
  if (!std::isfinite(theta)) {
    throw DomainError("wrap_phase: non-finite angle " + std::to_string(theta));
  }
  // fmod is exact, so the result differs from theta by an integer multiple of kTwoPi.
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi - kWrapEpsilon) r = 0.0;
  return Phase(r);
}

Phase signed_diff(Phase a, Phase b) { return wrap_phase(a.radians() - b.radians()); }

PhaseOscillator::PhaseOscillator(double frequency, Phase offset)
    : frequency_(frequency), offset_(offset) {
  if (!std::isfinite(frequency) || frequency < 0.0) {
    throw DomainError("PhaseOscillator: frequency must be finite and >= 0, got " +
                      std::to_string(frequency));
  }
}

namespace {

void check_time(double t, const char* where) {
  if (!std::isfinite(t) || t < 0.0) {
    throw DomainError(std::string(where) + ": time must be finite and >= 0, got " +
                      std::to_string(t));
  }
}

}  // namespace

Phase phase_at(const PhaseOscillator& osc, double t) {
  check_time(t, "phase_at");
  return wrap_phase(osc.frequency() * t + osc.offset().radians());
}

PhaseOscillator rebase_offset(const PhaseOscillator& osc, double t, Phase target) {
  check_time(t, "rebase_offset");
  return PhaseOscillator(osc.frequency(), wrap_phase(target.radians() - osc.frequency() * t));
}

double circular_distance(Phase a, Phase b) {
  const double d = signed_diff(a, b).radians();
  return d > std::numbers::pi ? kTwoPi - d : d;
}

}  // namespace mzsim
