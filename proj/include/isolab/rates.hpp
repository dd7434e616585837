#pragma once

/**
 * @file rates.hpp
 * @brief Deficit sweeps and log-log power-law fits.
 *
 * A sweep solves, for every δ on a grid, the family parameter whose centered
 * measure has half-line deficit δ, evaluates a distance to γ there, and fits
 * value ≈ C·δ^α by least squares in log-log coordinates.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isolab/errors.hpp"
#include "isolab/measure1d.hpp"
#include "isolab/needles.hpp"
#include "isolab/numerics.hpp"
#include "isolab/parallel.hpp"
#include "isolab/stability.hpp"

namespace isolab {

struct Metric {
  enum class Kind { lp, w1, w2, entropy, mixture_l1 };
  Kind kind = Kind::lp;
  double p = 2.0;

  static Metric lp_norm(double p) { return {Kind::lp, p}; }
  static Metric w1() { return {Kind::w1, 1.0}; }
  static Metric w2() { return {Kind::w2, 2.0}; }
  static Metric entropy() { return {Kind::entropy, 1.0}; }
  static Metric mixture_l1() { return {Kind::mixture_l1, 1.0}; }

  /// Accepts "lp:P", "w1", "w2", "entropy", "mixture_l1".
  static Metric parse(const std::string& s) {
    if (s == "w1") return w1();
    if (s == "w2") return w2();
    if (s == "entropy") return entropy();
    if (s == "mixture_l1") return mixture_l1();
    if (s.rfind("lp:", 0) == 0) {
      try {
        std::size_t used = 0;
        const double p = std::stod(s.substr(3), &used);
        if (used + 3 == s.size()) return lp_norm(p);
      } catch (const std::exception&) {
      }
    }
    throw std::invalid_argument("unknown metric '" + s + "' (expected lp:P, w1, w2, entropy or mixture_l1)");
  }

  [[nodiscard]] std::string name() const {
    switch (kind) {
      case Kind::lp: {
        std::ostringstream os;
        os << "lp:" << p;
        return os.str();
      }
      case Kind::w1:
        return "w1";
      case Kind::w2:
        return "w2";
      case Kind::entropy:
        return "entropy";
      case Kind::mixture_l1:
        return "mixture_l1";
    }
    return "?";
  }

  [[nodiscard]] double evaluate(const Measure1D& m, const QuadratureSettings& s) const {
    switch (kind) {
      case Kind::lp:
        return lp_distance(m, p, s);
      case Kind::w1:
        return w1_to_gaussian(m, s);
      case Kind::w2:
        return w2_to_gaussian(m, s);
      case Kind::entropy:
        return relative_entropy(m, s);
      case Kind::mixture_l1:
        break;
    }
    throw std::invalid_argument("metric mixture_l1 needs a needle ensemble, not a single measure");
  }
};

/// One-parameter family of 1-convex measures.
struct MeasureFamily {
  std::string name;
  std::function<Measure1D(double)> make;
  /// Parameter range searched when matching a deficit.
  Interval parameter_range;
  /// Families that do not depend on their parameter (the Gaussian).
  bool constant = false;
};

/// Symmetric truncations (-D, D); parameter D.
inline MeasureFamily example23_family() {
  return {"example23", [](double D) { return Measure1D(PotentialSpec::truncated_gaussian(D)); }, Interval(0.05, 38.0)};
}

inline MeasureFamily gaussian_family() {
  return {"gaussian", [](double) { return standard_gaussian(); }, Interval(0.0, 1.0), true};
}

/// x²/2 + t·g with g the piecewise-linear convex function given by breakpoints and slopes; parameter t.
inline MeasureFamily scaled_perturbation_family(std::vector<double> breakpoints, std::vector<double> slopes,
                                                double t_max = 20.0) {
  (void)PotentialSpec::perturbed_gaussian(breakpoints, slopes);  // validate once
  return {"scaled_perturbation",
          [b = std::move(breakpoints), s = std::move(slopes)](double t) {
            std::vector<double> scaled(s);
            for (double& v : scaled) v *= t;
            return Measure1D(PotentialSpec::perturbed_gaussian(b, scaled));
          },
          Interval(0.0, t_max)};
}

struct SweepPoint {
  double delta = 0.0;
  double value = 0.0;
  /// Solved family parameter (NaN for constant families and ensembles).
  double parameter = 0.0;
  /// Deficit actually reached.
  double achieved_deficit = 0.0;
};

struct SkippedPoint {
  double delta = 0.0;
  std::string reason;
};

struct PowerLawFit {
  double alpha = 0.0;
  double log_c = 0.0;
  double r_squared = 0.0;
};

struct SweepResult {
  std::string family;
  std::string metric;
  double theta = 0.5;
  /// Sorted by δ, decreasing.
  std::vector<SweepPoint> points;
  std::vector<SkippedPoint> skipped;
  std::optional<PowerLawFit> fit;
  std::string fit_failure;
};

/// Least squares for log value = α log δ + c over the points with value > 0.
inline PowerLawFit fit_exponent(const std::vector<SweepPoint>& points) {
  std::vector<double> xs, ys;
  for (const auto& pt : points) {
    if (pt.value > 0 && pt.delta > 0 && std::isfinite(pt.value)) {
      xs.push_back(std::log(pt.delta));
      ys.push_back(std::log(pt.value));
    }
  }
  if (xs.size() < 3) throw std::invalid_argument("fit_exponent needs at least 3 positive points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_exponent needs at least two distinct deltas");
  PowerLawFit f;
  f.alpha = sxy / sxx;
  f.log_c = my - f.alpha * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - f.alpha * xs[i] - f.log_c;
    ss_res += r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

inline PowerLawFit fit_exponent(const SweepResult& r) { return fit_exponent(r.points); }

/// n points spaced evenly in log δ from `from` down to `to`.
inline std::vector<double> log_grid(double from, double to, int n) {
  if (!(from > 0 && to > 0) || n < 1) throw std::invalid_argument("log_grid needs positive ends and n >= 1");
  std::vector<double> g;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    g.push_back(std::exp(std::log(from) + t * (std::log(to) - std::log(from))));
  }
  return g;
}

inline std::vector<double> default_delta_grid() { return log_grid(1e-2, 1e-6, 9); }

namespace detail {

inline std::vector<double> checked_grid(std::vector<double> grid) {
  if (grid.empty()) throw std::invalid_argument("delta grid is empty");
  for (double d : grid)
    if (!(d > 0 && d < 1)) throw std::invalid_argument("delta grid entries must lie in (0, 1)");
  std::sort(grid.begin(), grid.end(), std::greater<>());
  if (std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw std::invalid_argument("delta grid entries must be distinct");
  return grid;
}

inline void finish(SweepResult& r) {
  try {
    r.fit = fit_exponent(r.points);
  } catch (const std::invalid_argument& e) {
    r.fit_failure = e.what();
  }
}

// Relative mismatch tolerated between requested and achieved deficit.
inline constexpr double kDeficitMatch = 0.05;

// Metric values below this are rounding noise of an exact zero.
inline constexpr double kValueFloor = 1e-13;

inline double floored(double v) { return v < kValueFloor ? 0.0 : v; }

}  // namespace detail

/**
 * Centered measure of `family` with deficit δ at θ, and its parameter.
 * The deficit need not be monotone in the parameter (a large multiple of a
 * one-signed perturbation is close to a translated Gaussian again), so the
 * range is scanned and the first crossing from its low end is refined.
 */
inline std::pair<CenteredMeasure, double> solve_for_deficit(const MeasureFamily& family, double theta, double delta,
                                                            int scan_points = 64) {
  auto f = [&](double t) { return deficit(family.make(t), theta).deficit - delta; };
  const Interval range = family.parameter_range;
  double lo = range.lo;
  double f_lo = f(lo);
  for (int i = 1; i <= scan_points; ++i) {
    const double hi = i == scan_points ? range.hi : range.lo + (range.hi - range.lo) * i / scan_points;
    const double f_hi = f(hi);
    if (f_lo == 0) return {center(family.make(lo), theta), lo};
    if ((f_lo < 0) != (f_hi < 0)) {
      const double t = find_root(f, Interval(lo, hi), 1e-13);
      return {center(family.make(t), theta), t};
    }
    lo = hi;
    f_lo = f_hi;
  }
  std::ostringstream os;
  os << "no parameter of family " << family.name << " reaches deficit " << delta;
  throw BracketError(os.str());
}

inline SweepResult sweep(const MeasureFamily& family, double theta, const Metric& metric, std::vector<double> grid,
                         const QuadratureSettings& settings = {}) {
  if (!(theta > 0 && theta < 1)) throw DomainError("theta out of range (0,1)");
  if (metric.kind == Metric::Kind::mixture_l1)
    throw std::invalid_argument("metric mixture_l1 needs the needle ensemble sweep");
  grid = detail::checked_grid(std::move(grid));

  struct Outcome {
    std::optional<SweepPoint> point;
    std::string reason;
  };
  auto run = [&](std::size_t i) -> Outcome {
    const double delta = grid[i];
    try {
      if (family.constant) {
        const auto cm = center(family.make(0.0), theta);
        return {SweepPoint{delta, detail::floored(metric.evaluate(cm.measure, settings)), std::nan(""), deficit(cm).deficit},
                {}};
      }
      auto [cm, t] = solve_for_deficit(family, theta, delta);
      const double got = deficit(cm).deficit;
      if (std::fabs(got - delta) > detail::kDeficitMatch * delta) return {std::nullopt, "deficit not matched"};
      return {SweepPoint{delta, detail::floored(metric.evaluate(cm.measure, settings)), t, got}, {}};
    } catch (const BracketError&) {
      return {std::nullopt, "deficit outside the family's parameter range"};
    } catch (const ConvergenceError& e) {
      return {std::nullopt, e.what()};
    } catch (const NonIntegrableError& e) {
      return {std::nullopt, e.what()};
    }
  };
  const auto outcomes = parallel_map(grid.size(), run);

  SweepResult r;
  r.family = family.name;
  r.metric = metric.name();
  r.theta = theta;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (outcomes[i].point)
      r.points.push_back(*outcomes[i].point);
    else
      r.skipped.push_back({grid[i], outcomes[i].reason});
  }
  detail::finish(r);
  return r;
}

struct NeedleSweepResult {
  SweepResult sweep;
  std::vector<NeedleExperimentReport> reports;
};

/**
 * mixture_l1 over the δ-grid with the canonical calibration: for each δ the
 * generator gets deficit_scale = δ and bad_fraction = δ^{(1-ε)/(9-3ε)}; the
 * remaining fields of `base` (seed, counts, θ, ε) are kept.
 */
inline NeedleSweepResult sweep_needles(const EnsembleConfig& base, std::vector<double> grid,
                                       const QuadratureSettings& settings = {}) {
  grid = detail::checked_grid(std::move(grid));
  NeedleSweepResult out;
  out.sweep.family = "needle_ensemble";
  out.sweep.metric = "mixture_l1";
  out.sweep.theta = base.theta;
  const double alpha = needle_rate_exponent(base.epsilon);
  for (double delta : grid) {
    EnsembleConfig cfg = base;
    cfg.deficit_scale = delta;
    cfg.bad_fraction = std::pow(delta, alpha);
    try {
      const auto ens = generate_ensemble(cfg);
      auto rep = theorem31_experiment(ens, delta, cfg.c_threshold, settings);
      out.sweep.points.push_back({delta, detail::floored(rep.mixture_l1), std::nan(""), rep.aggregate_deficit});
      out.reports.push_back(std::move(rep));
    } catch (const std::invalid_argument& e) {
      out.sweep.skipped.push_back({delta, e.what()});
    }
  }
  detail::finish(out.sweep);
  return out;
}

}  // namespace isolab
