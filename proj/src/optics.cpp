#include "mzsim/optics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mzsim/errors.hpp"

namespace mzsim {

std::string_view to_string(PathTag p) noexcept {
  switch (p) {
    case PathTag::Unsplit: return "unsplit";
    case PathTag::Path1: return "path1";
    case PathTag::Path2: return "path2";
  }
  return "?";
}

std::string_view to_string(Outcome o) noexcept {
  return o == Outcome::Reflect ? "reflect" : "transmit";
}

std::string_view to_string(InterArrivalLaw law) noexcept {
  switch (law) {
    case InterArrivalLaw::Exponential: return "exponential";
    case InterArrivalLaw::Uniform: return "uniform";
    case InterArrivalLaw::Fixed: return "fixed";
  }
  return "?";
}

BeamSplitterState::BeamSplitterState(PhaseOscillator osc, double update_alpha, double update_beta)
    : osc_(osc), alpha_(update_alpha), beta_(update_beta) {
  if (!std::isfinite(update_alpha) || !std::isfinite(update_beta)) {
    throw DomainError("BeamSplitterState: update coefficients must be finite");
  }
}

PathSegment::PathSegment(double length) : length_(length) {
  if (!std::isfinite(length) || length < 0.0) {
    throw DomainError("PathSegment: length must be finite and >= 0, got " + std::to_string(length));
  }
}

std::vector<double> generate_emissions(double rate, std::size_t n, RandomStream& stream,
                                       InterArrivalLaw law, double start) {
  if (!std::isfinite(rate) || rate <= 0.0) {
    throw ConfigError("source_rate", "must be finite and > 0, got " + std::to_string(rate));
  }
  std::vector<double> times;
  times.reserve(n);
  double t = start;
  for (std::size_t i = 0; i < n; ++i) {
    switch (law) {
      case InterArrivalLaw::Exponential: t += stream.exponential(rate); break;
      case InterArrivalLaw::Uniform: t += stream.uniform_open01() * (2.0 / rate); break;
      case InterArrivalLaw::Fixed: t += 1.0 / rate; break;
    }
    times.push_back(t);
  }
  return times;
}

Outcome decide(Phase diff) noexcept {
  return diff.radians() < std::numbers::pi ? Outcome::Reflect : Outcome::Transmit;
}

InteractionOutcome interact(BeamSplitterState& bs, Photon& photon, double t) {
  if (!(t >= photon.emitted_at)) {
    throw SequencingError("interact: interaction at t=" + std::to_string(t) +
                          " precedes emission at " + std::to_string(photon.emitted_at));
  }
  const Phase p = phase_at(photon.osc, t);
  const Phase s = phase_at(bs.osc(), t);
  InteractionOutcome out{decide(signed_diff(p, s)), p, s, t};

  if (out.kind == Outcome::Reflect) {
    const double a = bs.update_alpha();
    const double b = bs.update_beta();
    const Phase p_new = wrap_phase(a * p.radians() + b * s.radians());
    const Phase s_new = wrap_phase(a * s.radians() + b * p.radians());
    if (p_new != p) photon.osc = rebase_offset(photon.osc, t, p_new);
    if (s_new != s) bs.set_osc(rebase_offset(bs.osc(), t, s_new));
    out.particle_phase_after = p_new;
    out.splitter_phase_after = s_new;
  }
  if (photon.path == PathTag::Unsplit) {
    photon.path = out.kind == Outcome::Reflect ? PathTag::Path1 : PathTag::Path2;
  }
  return out;
}

double propagate(const Photon& photon, const PathSegment& segment, double depart) {
  if (!(depart >= photon.emitted_at)) {
    throw SequencingError("propagate: departure precedes emission");
  }
  return depart + segment.length();
}

}  // namespace mzsim
