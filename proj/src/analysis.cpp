#include "mzsim/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "mzsim/errors.hpp"

namespace mzsim {

IntervalEstimate binomial_ci(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials < 1) throw UsageError("binomial_ci: trials must be >= 1");
  if (successes > trials) throw UsageError("binomial_ci: successes exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw UsageError("binomial_ci: confidence must lie in (0, 1)");
  }
  const boost::math::normal_distribution<double> standard;
  const double z = boost::math::quantile(standard, 0.5 + confidence / 2.0);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double half = z * std::sqrt(p * (1.0 - p) / n);
  return {p, std::max(0.0, p - half), std::min(1.0, p + half), confidence};
}

double visibility(std::span<const double> fractions) {
  if (fractions.empty()) throw UsageError("visibility: empty list");
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw UsageError("visibility: fraction outside [0, 1]");
  }
  const auto [lo, hi] = std::minmax_element(fractions.begin(), fractions.end());
  if (*hi == 0.0) return 0.0;
  return (*hi - *lo) / (*hi + *lo);
}

double SineFit::operator()(double delta) const noexcept {
  return offset + amplitude * std::sin(angular_frequency * delta + phase.radians());
}

double r_squared(const SineFit& fit, std::span<const SinePoint> points) {
  double mean = 0.0;
  for (const auto& p : points) mean += p.fraction;
  mean /= static_cast<double>(points.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (const auto& p : points) {
    ss_tot += (p.fraction - mean) * (p.fraction - mean);
    const double r = p.fraction - fit(p.delta);
    ss_res += r * r;
  }
  if (ss_tot == 0.0) return ss_res <= 1e-30 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

namespace {

// Parameters in the centred frame x' = x - centre: offset, amplitude, omega, phase.
using Params = Eigen::Vector4d;

struct Series {
  std::vector<double> x;  // centred
  std::vector<double> y;
};

double sum_sq(const Series& s, const Params& q) {
  double ss = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const double r = s.y[i] - (q[0] + q[1] * std::sin(q[2] * s.x[i] + q[3]));
    ss += r * r;
  }
  return ss;
}

Params linear_start(const Series& s, double omega) {
  Eigen::MatrixXd design(s.x.size(), 3);
  Eigen::VectorXd rhs(s.x.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    design(row, 0) = 1.0;
    design(row, 1) = std::sin(omega * s.x[i]);
    design(row, 2) = std::cos(omega * s.x[i]);
    rhs(row) = s.y[i];
  }
  const Eigen::Vector3d abc = design.colPivHouseholderQr().solve(rhs);
  // a sin + b cos = A sin(. + phi) with A cos(phi) = a, A sin(phi) = b
  return {abc[0], std::hypot(abc[1], abc[2]), omega, std::atan2(abc[2], abc[1])};
}

struct Refined {
  Params q;
  double ss;
  bool converged;
  int iterations;
};

Refined refine(const Series& s, Params q) {
  double ss = sum_sq(s, q);
  double lambda = 1e-3;
  const double floor = 1e-30 * std::max(1.0, ss);
  for (int it = 1; it <= kFitMaxIterations; ++it) {
    if (ss <= floor) return {q, ss, true, it - 1};
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double arg = q[2] * s.x[i] + q[3];
      const double sn = std::sin(arg), cs = std::cos(arg);
      const Eigen::Vector4d j(1.0, sn, q[1] * s.x[i] * cs, q[1] * cs);
      jtj.noalias() += j * j.transpose();
      jtr += j * (s.y[i] - (q[0] + q[1] * sn));
    }
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::Matrix4d damped = jtj;
      for (int k = 0; k < 4; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Eigen::Vector4d step = damped.ldlt().solve(jtr);
      const Params trial = q + step;
      const double ss_trial = sum_sq(s, trial);
      if (std::isfinite(ss_trial) && ss_trial < ss) {
        const double improvement = ss - ss_trial;
        const double rel_step =
            (step.array().abs() / (q.array().abs() + 1e-12)).maxCoeff();
        q = trial;
        ss = ss_trial;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (rel_step < 1e-12 || improvement <= 1e-15 * ss) return {q, ss, true, it};
        break;
      }
      lambda *= 10.0;
    }
    // No downhill step exists at any damping: q is a numerical minimum.
    if (!accepted) return {q, ss, true, it};
  }
  return {q, ss, false, kFitMaxIterations};
}

}  // namespace

SineFit fit_sine(std::span<const SinePoint> points) {
  if (points.size() < kFitMinPoints) {
    throw UsageError("fit_sine: need at least " + std::to_string(kFitMinPoints) + " points, got " +
                     std::to_string(points.size()));
  }
  double lo = points.front().delta, hi = lo;
  for (const auto& p : points) {
    if (!std::isfinite(p.delta) || !std::isfinite(p.fraction)) {
      throw UsageError("fit_sine: non-finite data");
    }
    lo = std::min(lo, p.delta);
    hi = std::max(hi, p.delta);
  }
  if (!(hi > lo)) throw UsageError("fit_sine: need at least 2 distinct deltas");
  const double span = hi - lo;
  const double centre = 0.5 * (lo + hi);

  Series s;
  double mean = 0.0;
  for (const auto& p : points) {
    s.x.push_back(p.delta - centre);
    s.y.push_back(p.fraction);
    mean += p.fraction;
  }
  mean /= static_cast<double>(points.size());
  double ss_tot = 0.0;
  for (double y : s.y) ss_tot += (y - mean) * (y - mean);

  const double base = kTwoPi / span;
  if (ss_tot == 0.0) {
    SineFit flat{0.0, base, Phase{}, mean, 0.0, true, 0};
    flat.r_squared = r_squared(flat, points);
    return flat;
  }

  // DFT power of the mean-removed series over the frequency grid.
  const double w_lo = 0.1 * base, w_hi = 10.0 * base;
  std::vector<double> omega(kFitFrequencyGrid), power(kFitFrequencyGrid);
  for (std::size_t k = 0; k < kFitFrequencyGrid; ++k) {
    omega[k] = w_lo + (w_hi - w_lo) * static_cast<double>(k) /
                          static_cast<double>(kFitFrequencyGrid - 1);
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      re += (s.y[i] - mean) * std::cos(omega[k] * s.x[i]);
      im -= (s.y[i] - mean) * std::sin(omega[k] * s.x[i]);
    }
    power[k] = re * re + im * im;
  }
  std::vector<std::size_t> peaks;
  for (std::size_t k = 0; k < kFitFrequencyGrid; ++k) {
    const bool left = k == 0 || power[k] >= power[k - 1];
    const bool right = k + 1 == kFitFrequencyGrid || power[k] >= power[k + 1];
    if (left && right) peaks.push_back(k);
  }
  std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return power[a] > power[b]; });
  if (peaks.size() > 3) peaks.resize(3);

  std::optional<Refined> best;
  for (auto k : peaks) {
    auto r = refine(s, linear_start(s, omega[k]));
    if (!best || r.ss < best->ss) best = r;
  }

  Params q = best->q;
  if (q[2] < 0.0) {  // A sin(-w x + phi) = A sin(w x + pi - phi)
    q[2] = -q[2];
    q[3] = std::numbers::pi - q[3];
  }
  if (q[1] < 0.0) {
    q[1] = -q[1];
    q[3] += std::numbers::pi;
  }
  SineFit fit;
  fit.offset = q[0];
  fit.amplitude = q[1];
  fit.angular_frequency = q[2];
  fit.phase = wrap_phase(q[3] - q[2] * centre);
  fit.converged = best->converged;
  fit.iterations = best->iterations;
  fit.r_squared = r_squared(fit, points);
  return fit;
}

double qm_reference(double delta, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw UsageError("qm_reference: nu must be > 0");
  const double c = std::cos(nu * delta / 2.0);
  return c * c;
}

std::vector<SinePoint> to_sine_points(const SweepResult& sweep) {
  std::vector<SinePoint> pts;
  pts.reserve(sweep.points.size());
  for (const auto& p : sweep.points) pts.push_back({p.delta, p.d1_fraction});
  return pts;
}

namespace {

bool fittable(std::span<const SinePoint> pts) {
  if (pts.size() < kFitMinPoints) return false;
  const auto [lo, hi] = std::minmax_element(
      pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.delta < b.delta; });
  return hi->delta > lo->delta;
}

std::vector<double> fractions_of(const SweepResult& sweep) {
  std::vector<double> f;
  f.reserve(sweep.points.size());
  for (const auto& p : sweep.points) f.push_back(p.d1_fraction);
  return f;
}

}  // namespace

QmComparison compare_to_qm(const SweepResult& sweep, double nu) {
  if (sweep.points.empty()) throw UsageError("compare_to_qm: empty sweep");
  QmComparison cmp;
  for (const auto& p : sweep.points) cmp.residuals.push_back(p.d1_fraction - qm_reference(p.delta, nu));
  const auto fr = fractions_of(sweep);
  cmp.model_visibility = visibility(fr);
  cmp.visibility_gap = cmp.ideal_visibility - cmp.model_visibility;
  cmp.expected_period = kTwoPi / nu;
  const auto pts = to_sine_points(sweep);
  if (fittable(pts)) {
    cmp.fit = fit_sine(pts);
    cmp.fitted_period = cmp.fit->period();
    cmp.period_relative_error =
        std::abs(*cmp.fitted_period - cmp.expected_period) / cmp.expected_period;
  }
  return cmp;
}

SweepAnalysis analyze_sweep(const SweepResult& sweep, double confidence) {
  if (sweep.points.empty()) throw UsageError("analyze_sweep: empty sweep");
  SweepAnalysis a;
  a.confidence = confidence;
  for (const auto& p : sweep.points) {
    a.intervals.push_back(binomial_ci(p.counts.d1, p.counts.total(), confidence));
  }
  const auto fr = fractions_of(sweep);
  a.raw_visibility = visibility(fr);
  const auto [lo, hi] = std::minmax_element(fr.begin(), fr.end());
  a.raw_min = *lo;
  a.raw_max = *hi;
  const auto pts = to_sine_points(sweep);
  if (fittable(pts)) {
    a.fit = fit_sine(pts);
    a.fitted_min = a.fit->offset - a.fit->amplitude;
    a.fitted_max = a.fit->offset + a.fit->amplitude;
    a.fitted_visibility = a.fit->offset > 0.0 ? a.fit->amplitude / a.fit->offset : 0.0;
  }
  return a;
}

}  // namespace mzsim
