#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mzsim/experiment.hpp"
#include "mzsim/phase.hpp"

namespace mzsim {

inline constexpr std::string_view kIntervalMethod = "normal-approximation (Wald), clamped to [0,1]";

struct IntervalEstimate {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double confidence = 0.95;

  double width() const noexcept { return hi - lo; }
  bool contains(double p) const noexcept { return lo <= p && p <= hi; }

  friend bool operator==(const IntervalEstimate&, const IntervalEstimate&) = default;
};

/// Two-sided normal-approximation interval for successes / trials.
/// Throws UsageError unless 0 <= successes <= trials, trials >= 1, 0 < confidence < 1.
IntervalEstimate binomial_ci(std::uint64_t successes, std::uint64_t trials,
                             double confidence = 0.95);

/// Fringe visibility (max - min) / (max + min); 0 when every fraction is 0.
/// Throws UsageError on an empty list or a value outside [0, 1].
double visibility(std::span<const double> fractions);

/// f(delta) = offset + amplitude * sin(angular_frequency * delta + phase)
struct SineFit {
  double amplitude = 0.0;
  double angular_frequency = 1.0;
  Phase phase{};
  double offset = 0.0;
  double r_squared = 0.0;
  bool converged = false;
  int iterations = 0;

  double operator()(double delta) const noexcept;
  double period() const noexcept { return kTwoPi / angular_frequency; }

  friend bool operator==(const SineFit&, const SineFit&) = default;
};

struct SinePoint {
  double delta = 0.0;
  double fraction = 0.0;
};

inline constexpr std::size_t kFitMinPoints = 8;
inline constexpr std::size_t kFitFrequencyGrid = 512;
inline constexpr int kFitMaxIterations = 200;

/// Least-squares sinusoid fit. The angular frequency is seeded from the strongest
/// bins of a DFT power scan of the mean-removed series over kFitFrequencyGrid
/// frequencies in [0.1, 10] * 2*pi / span, then all four parameters are refined by
/// Levenberg-damped Gauss-Newton. `converged` is false if the iteration cap was hit.
/// Throws UsageError with fewer than kFitMinPoints points or fewer than 2 distinct deltas.
SineFit fit_sine(std::span<const SinePoint> points);

/// 1 - SS_res / SS_tot of `fit` against the data (1 for constant data fitted exactly).
double r_squared(const SineFit& fit, std::span<const SinePoint> points);

/// Ideal single-photon Mach-Zehnder output probability cos^2(nu * delta / 2).
/// Throws UsageError unless nu > 0.
double qm_reference(double delta, double nu);

struct QmComparison {
  std::vector<double> residuals;  // model fraction - qm_reference, per point
  double model_visibility = 0.0;
  double ideal_visibility = 1.0;
  double visibility_gap = 0.0;  // ideal - model
  double expected_period = 0.0;
  std::optional<SineFit> fit;   // present when the sweep has enough points to fit
  std::optional<double> fitted_period;
  std::optional<double> period_relative_error;

  friend bool operator==(const QmComparison&, const QmComparison&) = default;
};

/// Point-by-point comparison of a sweep against the ideal interferometer. A model
/// visibility below 1 is an expected property of the particle model, not a failure.
QmComparison compare_to_qm(const SweepResult& sweep, double nu);

/// Everything the CLI reports about a sweep.
struct SweepAnalysis {
  std::vector<IntervalEstimate> intervals;
  double raw_visibility = 0.0;
  double raw_min = 0.0;
  double raw_max = 0.0;
  std::optional<SineFit> fit;
  std::optional<double> fitted_min;  // offset - amplitude
  std::optional<double> fitted_max;  // offset + amplitude
  std::optional<double> fitted_visibility;
  double confidence = 0.95;

  friend bool operator==(const SweepAnalysis&, const SweepAnalysis&) = default;
};

SweepAnalysis analyze_sweep(const SweepResult& sweep, double confidence = 0.95);

std::vector<SinePoint> to_sine_points(const SweepResult& sweep);

}  // namespace mzsim
