#pragma once

/**
 * @file numerics.hpp
 * @brief Numerical kernels: Gaussian special functions, adaptive
 * Gauss-Kronrod quadrature and bracketed root finding.
 *
 * erf is evaluated with the positive-term series
 *     erf(x) = 2/√π · x e^{-x²} Σ_n (2x²)^n / (1·3·…·(2n+1))
 * for |x| ≤ 4 and from the Laplace continued fraction for erfc beyond.
 * The scaled complement erfcx(x) = e^{x²} erfc(x) uses the continued
 * fraction from x = 1.5 on, so Gaussian tail probabilities keep full
 * relative precision down to the underflow threshold.
 *
 * Integrals over unbounded intervals are truncated at ±tail_cutoff. Every
 * integrand in this library carries a Gaussian (or 1-convex) factor, so
 * the discarded mass is below 1e-300 at the default cutoff of 40.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "isolab/errors.hpp"

namespace isolab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811045253;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736405617640;

/// Open interval (lo, hi) of the extended real line.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  Interval() = default;
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
      std::ostringstream os;
      os << "interval requires lo < hi, got (" << lo << ", " << hi << ")";
      throw std::invalid_argument(os.str());
    }
  }

  static Interval whole_line() { return {}; }

  [[nodiscard]] bool contains(double x) const { return lo < x && x < hi; }
  [[nodiscard]] bool bounded_below() const { return std::isfinite(lo); }
  [[nodiscard]] bool bounded_above() const { return std::isfinite(hi); }
  [[nodiscard]] bool is_subset_of(const Interval& other) const {
    return other.lo <= lo && hi <= other.hi;
  }
  [[nodiscard]] Interval translated(double s) const { return {lo + s, hi + s}; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct QuadratureSettings {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 1 << 14;
  double tail_cutoff = 40.0;

  void validate() const {
    if (!(abs_tol > 0) || !(rel_tol > 0) || max_subdivisions <= 0) {
      throw std::invalid_argument("quadrature tolerances must be strictly positive");
    }
    if (!(tail_cutoff >= 10.0)) {
      throw std::invalid_argument("tail_cutoff must be at least 10");
    }
  }

  friend bool operator==(const QuadratureSettings&, const QuadratureSettings&) = default;
};

// ---------------------------------------------------------------------------
// Error function family
// ---------------------------------------------------------------------------

namespace detail {

// e^{-x²} with the square split so that the rounding of x² does not leak
// into the exponent for large x.
inline double exp_minus_square(double x) {
  x = std::fabs(x);
  const double head = std::floor(x * 16.0) / 16.0;
  const double tail = (x - head) * (x + head);
  return std::exp(-head * head) * std::exp(-tail);
}

inline double erf_series(double x) {
  const double x2 = x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 500; ++n) {
    term *= 2.0 * x2 / (2.0 * n + 1.0);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * x * exp_minus_square(x) * sum;
}

// 1 / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))) by modified Lentz, x > 0.
inline double erfc_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 5000; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace detail

/// Scaled complementary error function e^{x²} erfc(x), for x ≥ 0.
inline double erfcx(double x) {
  if (x < 0) throw DomainError("erfcx is only provided for x >= 0");
  if (x >= 1.5) return detail::erfc_continued_fraction(x) / std::sqrt(std::numbers::pi);
  return (1.0 - detail::erf_series(x)) * std::exp(x * x);
}

inline double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x < 0) return 2.0 - erfc(-x);
  if (x >= 1.5) {
    if (x > 27.3) return 0.0;
    return detail::exp_minus_square(x) * detail::erfc_continued_fraction(x) /
           std::sqrt(std::numbers::pi);
  }
  return 1.0 - detail::erf_series(x);
}

inline double erf(double x) {
  if (std::isnan(x)) return x;
  if (std::fabs(x) <= 4.0) return detail::erf_series(x);
  return x > 0 ? 1.0 - erfc(x) : erfc(-x) - 1.0;
}

// ---------------------------------------------------------------------------
// Standard Gaussian
// ---------------------------------------------------------------------------

inline double gaussian_pdf(double x) { return kInvSqrt2Pi * detail::exp_minus_square(x / kSqrt2); }

/// Φ(x) = γ((-∞, x]). Saturates to 0 / 1 in the far tails.
inline double gaussian_cdf(double x) {
  if (x == -kInf) return 0.0;
  if (x == kInf) return 1.0;
  return x < 0 ? 0.5 * erfc(-x / kSqrt2) : 1.0 - 0.5 * erfc(x / kSqrt2);
}

/// log Φ(x), accurate for arbitrarily negative x.
inline double log_gaussian_cdf(double x) {
  if (x == -kInf) return -kInf;
  if (x < -5.0) {
    const double z = -x / kSqrt2;
    return std::log(0.5 * erfcx(z)) - z * z;
  }
  if (x > 5.0) return std::log1p(-gaussian_cdf(-x));
  return std::log(gaussian_cdf(x));
}

/// log γ((a, b)) for a < b, robust in both tails.
inline double log_gaussian_mass(double a, double b) {
  if (!(a < b)) return -kInf;
  if (a >= 0) return log_gaussian_mass(-b, -a);
  // now a < 0: compare against the left tail mass up to a
  const double lb = log_gaussian_cdf(b);
  const double la = log_gaussian_cdf(a);
  if (la == -kInf) return lb;
  return lb + std::log1p(-std::exp(la - lb));
}

namespace detail {

// Rational approximation of Φ^{-1} (P. J. Acklam), relative error < 1.2e-9.
inline double quantile_initial_guess(double p) {
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// a_θ with Φ(a_θ) = θ. Newton/Halley refinement with a bisection guard.
inline double gaussian_quantile(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    std::ostringstream os;
    os << "theta out of range (0,1): " << theta;
    throw DomainError(os.str());
  }
  if (theta > 0.5) return -gaussian_quantile(1.0 - theta);
  if (theta == 0.5) return 0.0;

  double lo = -40.0;
  double hi = 0.0;
  double x = std::clamp(detail::quantile_initial_guess(theta), lo, hi);
  for (int iter = 0; iter < 60; ++iter) {
    const double err = gaussian_cdf(x) - theta;
    if (err > 0) hi = x;
    else lo = x;
    const double u = err / gaussian_pdf(x);
    double next = x - u / (1.0 + 0.5 * x * u);
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - x);
    x = next;
    if (step <= 1e-16 * std::max(1.0, std::fabs(x))) break;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature
// ---------------------------------------------------------------------------

namespace detail {

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

inline constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// QUADPACK qk15 on [a, b]; returns {value, error, |f| integral}.
template <class F>
std::array<double, 3> gauss_kronrod_15(F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::fabs(resk);
  std::array<double, 7> fv1{};
  std::array<double, 7> fv2{};
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::fabs(f1) + std::fabs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::fabs(f1) + std::fabs(f2));
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  }
  const double result = resk * half;
  resabs *= std::fabs(half);
  resasc *= std::fabs(half);
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > uflow / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {result, err, resabs};
}

}  // namespace detail

/// Result of an adaptive integration.
struct Quadrature {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/**
 * Adaptive G7/K15 quadrature with global error control.
 *
 * Unbounded ends are replaced by ±settings.tail_cutoff. `breakpoints` are
 * known kinks or jumps of f; they seed the initial partition. Throws
 * ConvergenceError when the subdivision budget is exhausted before the
 * error estimate falls below max(abs_tol, rel_tol·|value|).
 */
template <class F>
Quadrature integrate_with_error(F&& f, const Interval& domain, const QuadratureSettings& settings = {},
                                std::span<const double> breakpoints = {}) {
  settings.validate();
  double lo = domain.lo;
  double hi = domain.hi;
  if (!std::isfinite(lo)) lo = std::isfinite(hi) ? std::min(-settings.tail_cutoff, hi - settings.tail_cutoff)
                                                 : -settings.tail_cutoff;
  if (!std::isfinite(hi)) hi = std::max(settings.tail_cutoff, lo + settings.tail_cutoff);

  std::vector<double> cuts{lo};
  std::vector<double> inner;
  for (double b : breakpoints) {
    if (b > lo && b < hi) inner.push_back(b);
  }
  std::sort(inner.begin(), inner.end());
  inner.push_back(hi);
  constexpr double max_piece = 2.0;
  for (double next : inner) {
    const double from = cuts.back();
    if (!(next > from)) continue;
    const int pieces = std::max(1, static_cast<int>(std::ceil((next - from) / max_piece)));
    for (int k = 1; k < pieces; ++k) cuts.push_back(from + (next - from) * k / pieces);
    cuts.push_back(next);
  }

  std::priority_queue<detail::Segment> heap;
  std::vector<detail::Segment> settled;
  long double total = 0.0L;
  long double total_err = 0.0L;
  long double total_abs = 0.0L;
  Quadrature out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto [v, e, ab] = detail::gauss_kronrod_15(f, cuts[i], cuts[i + 1]);
    out.evaluations += 15;
    heap.push({cuts[i], cuts[i + 1], v, e});
    total += v;
    total_err += e;
    total_abs += ab;
  }

  auto target = [&] {
    return std::max({settings.abs_tol, settings.rel_tol * std::fabs(static_cast<double>(total)),
                     100.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(total_abs)});
  };

  int subdivisions = 0;
  while (static_cast<double>(total_err) > target() && !heap.empty()) {
    if (subdivisions >= settings.max_subdivisions) {
      std::ostringstream os;
      os << "integrate: no convergence after " << subdivisions << " subdivisions on [" << lo << ", " << hi
         << "], estimate " << static_cast<double>(total) << " +/- " << static_cast<double>(total_err);
      throw ConvergenceError(os.str());
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      settled.push_back(worst);
      continue;
    }
    const auto [v1, e1, ab1] = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto [v2, e2, ab2] = detail::gauss_kronrod_15(f, mid, worst.b);
    out.evaluations += 30;
    total += static_cast<long double>(v1) + v2 - worst.value;
    total_err += static_cast<long double>(e1) + e2 - worst.error;
    heap.push({worst.a, mid, v1, e1});
    heap.push({mid, worst.b, v2, e2});
    ++subdivisions;
  }
  if (static_cast<double>(total_err) > target()) {
    std::ostringstream os;
    os << "integrate: error estimate " << static_cast<double>(total_err)
       << " exceeds tolerance at machine resolution";
    throw ConvergenceError(os.str());
  }
  out.value = static_cast<double>(total);
  out.error = static_cast<double>(std::max<long double>(total_err, 0.0L));
  return out;
}

template <class F>
double integrate(F&& f, const Interval& domain, const QuadratureSettings& settings = {},
                 std::span<const double> breakpoints = {}) {
  return integrate_with_error(std::forward<F>(f), domain, settings, breakpoints).value;
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/**
 * Root of a continuous f on a finite bracket with f(lo)·f(hi) ≤ 0.
 * TOMS 748 until the bracket width is ≤ tol, finished by bisection if the
 * iteration budget runs out. Deterministic.
 */
template <class F>
double find_root(F&& f, const Interval& bracket, double tol = 1e-12) {
  if (!bracket.bounded_below() || !bracket.bounded_above()) {
    throw BracketError("find_root needs a finite bracket");
  }
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw BracketError("find_root: f is NaN at a bracket end");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) {
    std::ostringstream os;
    os << "find_root: invalid bracket, f(" << a << ")=" << fa << " and f(" << b << ")=" << fb
       << " have the same sign";
    throw BracketError(os.str());
  }
  std::uintmax_t max_iter = 200;
  auto done = [tol](double x, double y) { return std::fabs(y - x) <= tol; };
  auto [r0, r1] = boost::math::tools::toms748_solve(f, a, b, fa, fb, done, max_iter);
  if (!done(r0, r1)) {
    double flo = f(r0);
    while (std::fabs(r1 - r0) > tol) {
      const double mid = 0.5 * (r0 + r1);
      if (mid <= r0 || mid >= r1) break;
      const double fm = f(mid);
      if (fm == 0.0) return mid;
      if ((fm > 0) == (flo > 0)) {
        r0 = mid;
        flo = fm;
      } else {
        r1 = mid;
      }
    }
  }
  return 0.5 * (r0 + r1);
}

}  // namespace isolab
