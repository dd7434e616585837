#pragma once

/**
 * @file stability.hpp
 * @brief Quantitative stability of the Gaussian isoperimetric inequality on
 * intervals: centering, the half-line deficit, the potential-gap bounds,
 * L^p / entropy / Wasserstein distances to γ, and the truncated-Gaussian
 * family on which the order δ^{1/p} is attained.
 *
 * Notation: γ = e^{-ψ_g}dx is the standard Gaussian, ψ_g(x) = x²/2 + log√(2π);
 * a_θ = Φ^{-1}(θ). The deficit of a centered measure is
 * δ = e^{-ψ(a_θ)} - e^{-ψ_g(a_θ)}.
 */

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "isolab/errors.hpp"
#include "isolab/measure1d.hpp"
#include "isolab/numerics.hpp"

namespace isolab {

inline double gaussian_potential(double x) { return 0.5 * x * x + kLogSqrt2Pi; }

/// A measure translated so that its θ-quantile is a_θ.
struct CenteredMeasure {
  Measure1D measure;
  double theta;
  double a_theta;
  /// Translation applied to the input measure.
  double shift;
};

inline CenteredMeasure center(const Measure1D& m, double theta) {
  const double a = gaussian_quantile(theta);
  const double shift = a - m.quantile(theta);
  return {m.translated(shift), theta, a, shift};
}

struct DeficitReport {
  double theta = 0.0;
  double a_theta = 0.0;
  double shift = 0.0;
  double perimeter_at_a = 0.0;
  double profile_at_theta = 0.0;
  double deficit = 0.0;
};

inline DeficitReport deficit(const CenteredMeasure& cm) {
  DeficitReport r;
  r.theta = cm.theta;
  r.a_theta = cm.a_theta;
  r.shift = cm.shift;
  r.perimeter_at_a = half_line_perimeter(cm.measure, cm.a_theta);
  r.profile_at_theta = gaussian_profile(cm.theta);
  r.deficit = r.perimeter_at_a - r.profile_at_theta;
  return r;
}

inline DeficitReport deficit(const Measure1D& m, double theta) { return deficit(center(m, theta)); }

/// ψ'₊(a_θ) - a_θ for the centered measure.
inline double slope_gap(const CenteredMeasure& cm) { return cm.measure.right_derivative(cm.a_theta) - cm.a_theta; }

// ---------------------------------------------------------------------------
// Potential-gap bounds
// ---------------------------------------------------------------------------

/// [a - √(2 ln(1/δ)), a + √(2 ln(1/δ))]; the half-width is floored at 1.
inline Interval default_gap_window(double a_theta, double delta) {
  const double half = delta > 0 && delta < 1 ? std::max(1.0, std::sqrt(2.0 * std::log(1.0 / delta))) : 1.0;
  return {a_theta - half, a_theta + half};
}

struct GapBoundCaps {
  double lower = kInf;
  double upper = kInf;
};

struct GapBoundReport {
  double deficit = 0.0;
  double slope_gap = 0.0;
  Interval window;
  /// Smallest c with ψ-ψ_g ≥ slope_gap·(x-a) - c·δ at every sample in I.
  double fitted_lower_constant = 0.0;
  /// Smallest c with ψ-ψ_g ≤ slope_gap·(x-a) + c·√δ at every sample in the window.
  double fitted_upper_constant = 0.0;
  /// (x, ψ(x) - ψ_g(x)) at every sample.
  std::vector<std::pair<double, double>> pointwise_samples;
  /// δ = 0 to rounding: both bounds degenerate to ψ - ψ_g being affine.
  bool equality_case = false;
  double linearity_residual = 0.0;
  bool lower_pass = true;
  bool upper_pass = true;
};

/**
 * Samples the lower bound on I (clipped to a_θ ± 12) and the upper bound
 * on `window` (default_gap_window when absent), `sample_count` points each,
 * and reports the constants that make both hold at the samples.
 */
inline GapBoundReport check_gap_bounds(const CenteredMeasure& cm, std::optional<Interval> window = std::nullopt,
                                       int sample_count = 1000, GapBoundCaps caps = {}) {
  if (sample_count < 2) throw std::invalid_argument("check_gap_bounds needs at least two samples");
  const Measure1D& m = cm.measure;
  const double a = cm.a_theta;
  GapBoundReport r;
  r.deficit = deficit(cm).deficit;
  r.slope_gap = slope_gap(cm);
  const double delta = r.deficit;
  const Interval dom = m.domain();

  Interval win = window.value_or(default_gap_window(a, delta));
  win = Interval(std::max(win.lo, dom.lo), std::min(win.hi, dom.hi));
  r.window = win;

  auto gap = [&](double x) { return m.potential(x) - gaussian_potential(x); };
  auto lin = [&](double x) { return r.slope_gap * (x - a); };
  auto samples_in = [&](double lo, double hi) {
    std::vector<double> xs;
    xs.reserve(sample_count + 1);
    for (int i = 0; i < sample_count; ++i) xs.push_back(lo + (hi - lo) * (i + 0.5) / sample_count);
    xs.push_back(a);
    return xs;
  };

  const double lo = std::max(dom.lo, a - 12.0);
  const double hi = std::min(dom.hi, a + 12.0);
  double worst_low = 0.0;
  double worst_lin = 0.0;
  const double gap_a = gap(a);
  for (double x : samples_in(lo, hi)) {
    if (!dom.contains(x)) continue;
    const double g = gap(x);
    r.pointwise_samples.emplace_back(x, g);
    worst_low = std::max(worst_low, lin(x) - g);
    worst_lin = std::max(worst_lin, std::fabs(g - gap_a - lin(x)));
  }
  double worst_up = 0.0;
  for (double x : samples_in(win.lo, win.hi)) {
    if (!dom.contains(x)) continue;
    worst_up = std::max(worst_up, gap(x) - lin(x));
  }

  if (delta <= 1e-13) {
    r.equality_case = true;
    r.linearity_residual = worst_lin;
    r.lower_pass = r.upper_pass = worst_lin <= 1e-9;
    return r;
  }
  r.fitted_lower_constant = worst_low / delta;
  r.fitted_upper_constant = worst_up / std::sqrt(delta);
  r.lower_pass = r.fitted_lower_constant <= caps.lower;
  r.upper_pass = r.fitted_upper_constant <= caps.upper;
  return r;
}

// ---------------------------------------------------------------------------
// Distances to the Gaussian
// ---------------------------------------------------------------------------

namespace detail {

// log|e^L - 1|
inline double log_abs_expm1(double L) {
  if (L > 0.5) return L + std::log1p(-std::exp(-L));
  return std::log(std::fabs(std::expm1(L)));
}

inline Interval clipped_domain(const Measure1D& m, const QuadratureSettings& s) {
  const double lo = std::max(m.domain().lo, -s.tail_cutoff);
  const double hi = std::min(m.domain().hi, s.tail_cutoff);
  if (!(lo < hi)) throw NonIntegrableError("measure support lies beyond the quadrature tail cutoff");
  return {lo, hi};
}

}  // namespace detail

inline constexpr double kMaxLpExponent = 64.0;

/**
 * ‖e^{ψ_g-ψ} - 1‖_{L^p(γ)}, with e^{ψ_g-ψ} := 0 off the domain (so γ(ℝ∖I)
 * enters with weight one). p is capped at 64 to keep e^{p(ψ_g-ψ)} finite.
 */
inline double lp_distance(const Measure1D& m, double p, const QuadratureSettings& settings = {}) {
  if (!(p >= 1.0) || !(p <= kMaxLpExponent)) {
    std::ostringstream os;
    os << "lp_distance: p must lie in [1, 64], got " << p;
    throw DomainError(os.str());
  }
  auto integrand = [&](double x) {
    const double L = gaussian_potential(x) - m.potential(x);
    if (L == 0.0) return 0.0;
    return std::exp(p * detail::log_abs_expm1(L) - gaussian_potential(x));
  };
  const auto bps = m.breakpoints();
  const double inside = integrate(integrand, detail::clipped_domain(m, settings), settings, bps);
  const double outside = gaussian_cdf(m.domain().lo) + gaussian_cdf(-m.domain().hi);
  return std::pow(inside + outside, 1.0 / p);
}

/// Ent_γ(𝔪) = ∫_I (ψ_g - ψ) d𝔪.
inline double relative_entropy(const Measure1D& m, const QuadratureSettings& settings = {}) {
  auto integrand = [&](double x) {
    const double rho = m.density(x);
    return rho > 0 ? (gaussian_potential(x) - m.potential(x)) * rho : 0.0;
  };
  const auto bps = m.breakpoints();
  return std::max(0.0, integrate(integrand, detail::clipped_domain(m, settings), settings, bps));
}

/// Probability cut at each end of (0,1) when integrating the quantile coupling.
inline constexpr double kCouplingClip = 1e-12;

/// Monotone transport map from γ to 𝔪: T(z) = F_𝔪^{-1}(Φ(z)), evaluated tail-accurately.
inline double transport_map(const Measure1D& m, double z) {
  return z <= 0 ? m.quantile(gaussian_cdf(z)) : m.upper_quantile(gaussian_cdf(-z));
}

/**
 * W_p(𝔪, γ)^p = ∫₀¹ |F_𝔪^{-1}(t) - Φ^{-1}(t)|^p dt, integrated in Gaussian
 * coordinates t = Φ(z) on t ∈ [1e-12, 1 - 1e-12]. The returned error adds a
 * bound for the two clipped tails, using that T is 1-Lipschitz for
 * 1-convex 𝔪: |T(z) - z| ≤ |T(z₀) - z₀| + 2|z - z₀| beyond the clip.
 */
inline Quadrature wasserstein_power(const Measure1D& m, double p, const QuadratureSettings& settings = {}) {
  if (!(p >= 1.0)) throw DomainError("wasserstein order must be >= 1");
  const double z_hi = -gaussian_quantile(kCouplingClip);
  auto integrand = [&](double z) { return std::pow(std::fabs(transport_map(m, z) - z), p) * gaussian_pdf(z); };
  std::vector<double> bps;
  for (double x : m.spec().kinks()) {
    const double t = m.cdf(x);
    if (t > kCouplingClip && t < 1 - kCouplingClip) bps.push_back(gaussian_quantile(t));
  }
  Quadrature q = integrate_with_error(integrand, Interval(-z_hi, z_hi), settings, bps);

  double tail_bound = 0.0;
  for (double sign : {-1.0, 1.0}) {
    const double z0 = sign * z_hi;
    const double d0 = std::fabs(transport_map(m, z0) - z0);
    auto bound = [&](double z) { return std::pow(d0 + 2.0 * std::fabs(z - z0), p) * gaussian_pdf(z); };
    const Interval tail = sign > 0 ? Interval(z_hi, z_hi + 30.0) : Interval(-z_hi - 30.0, -z_hi);
    tail_bound += integrate(bound, tail, settings);
  }
  q.error += tail_bound;
  return q;
}

inline double w2_to_gaussian(const Measure1D& m, const QuadratureSettings& settings = {}) {
  return std::sqrt(std::max(0.0, wasserstein_power(m, 2.0, settings).value));
}

inline double w1_to_gaussian(const Measure1D& m, const QuadratureSettings& settings = {}) {
  return std::max(0.0, wasserstein_power(m, 1.0, settings).value);
}

struct TalagrandReport {
  double lhs = 0.0;  // W_2²
  double rhs = 0.0;  // 2·Ent_γ
  bool pass = false;
};

inline TalagrandReport talagrand_check(const Measure1D& m, const QuadratureSettings& settings = {}) {
  TalagrandReport r;
  r.lhs = std::max(0.0, wasserstein_power(m, 2.0, settings).value);
  r.rhs = 2.0 * relative_entropy(m, settings);
  r.pass = r.lhs <= r.rhs + 1e-8;
  return r;
}

/// ∫ |x - a_θ|·|e^{(ψ_g-ψ)(x)} - 1| γ(dx), an upper bound for W_1 by duality.
inline double w1_dual_bound(const CenteredMeasure& cm, const QuadratureSettings& settings = {}) {
  const Measure1D& m = cm.measure;
  const double a = cm.a_theta;
  auto integrand = [&](double x) { return std::fabs(x - a) * std::fabs(m.density(x) - gaussian_pdf(x)); };
  std::vector<double> bps = m.breakpoints();
  bps.push_back(a);
  return integrate(integrand, Interval(-settings.tail_cutoff, settings.tail_cutoff), settings, bps);
}

// ---------------------------------------------------------------------------
// Truncated-Gaussian sharpness family
// ---------------------------------------------------------------------------

/// I = (-D, D), 𝔪 = (1+δ_E)·γ|_I with γ(I) = (1+δ_E)^{-1}.
struct Example23Family {
  double half_width = 0.0;
  double delta_e = 0.0;

  static Example23Family with_half_width(double D) {
    if (!(D > 0)) throw std::invalid_argument("example23: D must be positive");
    const double outside = 2.0 * gaussian_cdf(-D);  // γ(ℝ∖I)
    return {D, outside / (1.0 - outside)};
  }

  /// Closed-form half-line deficit at θ = 1/2: δ_E/√(2π).
  [[nodiscard]] double deficit() const { return delta_e * kInvSqrt2Pi; }

  /// Closed-form ‖e^{ψ_g-ψ} - 1‖_{L^p(γ)} = ((1+δ_E^{p-1})/(1+δ_E))^{1/p} δ_E^{1/p}.
  [[nodiscard]] double lp(double p) const {
    if (delta_e == 0.0) return 0.0;
    return std::pow((1.0 + std::pow(delta_e, p - 1.0)) / (1.0 + delta_e), 1.0 / p) * std::pow(delta_e, 1.0 / p);
  }

  /// Ent_γ(𝔪) = log(1 + δ_E): the density ratio is constant on I.
  [[nodiscard]] double entropy() const { return std::log1p(delta_e); }
};

struct Example23 {
  Measure1D measure;
  Example23Family family;
};

/// D = +∞ gives the Gaussian itself with δ_E = 0.
inline Example23 example23(double D) {
  if (std::isinf(D) && D > 0) return {standard_gaussian(), {D, 0.0}};
  const Example23Family fam = Example23Family::with_half_width(D);
  return {normalize(PotentialSpec::truncated_gaussian(D)), fam};
}

}  // namespace isolab
