#pragma once

/**
 * @file selftest.hpp
 * @brief Built-in battery of closed-form and equality-case checks, one per
 * library operation. Special functions are reached through a table so a
 * fault can be injected into one of them and must surface by name.
 */

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isolab/measure1d.hpp"
#include "isolab/needles.hpp"
#include "isolab/numerics.hpp"
#include "isolab/rates.hpp"
#include "isolab/stability.hpp"

namespace isolab {

struct SelftestCheck {
  std::string module;
  std::string operation;
  std::string description;
  bool passed = false;
  std::string detail;
};

struct SpecialFunctionTable {
  std::function<double(double)> erf = [](double x) { return isolab::erf(x); };
  std::function<double(double)> gaussian_cdf = [](double x) { return isolab::gaussian_cdf(x); };
  std::function<double(double)> gaussian_quantile = [](double t) { return isolab::gaussian_quantile(t); };
};

inline const std::vector<std::string>& known_faults() {
  static const std::vector<std::string> names{"erf", "gaussian_cdf", "gaussian_quantile"};
  return names;
}

/**
 * Table with one entry perturbed at the 1e-6 level. "erf" corrupts the erf
 * table and therefore also Φ, which is built from it.
 */
inline SpecialFunctionTable faulty_table(const std::string& fault) {
  SpecialFunctionTable t;
  if (fault.empty()) return t;
  if (fault == "erf") {
    t.erf = [](double x) { return isolab::erf(x) + 1e-6; };
    t.gaussian_cdf = [](double x) { return isolab::gaussian_cdf(x) + 5e-7; };
  } else if (fault == "gaussian_cdf") {
    t.gaussian_cdf = [](double x) { return isolab::gaussian_cdf(x) + 5e-7; };
  } else if (fault == "gaussian_quantile") {
    t.gaussian_quantile = [](double p) { return isolab::gaussian_quantile(p) + 1e-6; };
  } else {
    throw std::invalid_argument("unknown fault '" + fault + "'");
  }
  return t;
}

namespace detail {

class Battery {
 public:
  explicit Battery(std::vector<SelftestCheck>& out) : out_(out) {}

  void near(const std::string& module, const std::string& op, const std::string& what, double got, double want,
            double tol) {
    std::ostringstream os;
    os.precision(17);
    os << "got " << got << ", expected " << want << " (tol " << tol << ")";
    record(module, op, what, std::fabs(got - want) <= tol, os.str());
  }

  void truth(const std::string& module, const std::string& op, const std::string& what, bool ok,
             const std::string& detail = {}) {
    record(module, op, what, ok, detail);
  }

  template <class F>
  void guarded(const std::string& module, const std::string& op, const std::string& what, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      record(module, op, what, false, std::string("threw: ") + e.what());
    }
  }

  template <class E, class F>
  void throws(const std::string& module, const std::string& op, const std::string& what, F&& f) {
    bool ok = false;
    std::string detail = "no exception";
    try {
      f();
    } catch (const E&) {
      ok = true;
      detail.clear();
    } catch (const std::exception& e) {
      detail = std::string("wrong exception: ") + e.what();
    }
    record(module, op, what, ok, detail);
  }

 private:
  void record(const std::string& module, const std::string& op, const std::string& what, bool ok,
              const std::string& detail) {
    out_.push_back({module, op, what, ok, ok ? std::string() : detail});
  }
  std::vector<SelftestCheck>& out_;
};

}  // namespace detail

inline std::vector<SelftestCheck> run_selftest(const SpecialFunctionTable& fns = {}) {
  std::vector<SelftestCheck> out;
  detail::Battery b(out);
  const QuadratureSettings qs;

  // numerics
  b.near("numerics", "erf", "erf(0) = 0", fns.erf(0.0), 0.0, 1e-15);
  b.near("numerics", "erf", "erf(sqrt 2)", fns.erf(kSqrt2), 0.9544997361036416, 1e-14);
  b.near("numerics", "gaussian_cdf", "Phi(0) = 1/2", fns.gaussian_cdf(0.0), 0.5, 1e-15);
  b.near("numerics", "gaussian_cdf", "Phi(1)", fns.gaussian_cdf(1.0), 0.8413447460685429, 1e-14);
  b.near("numerics", "gaussian_cdf", "Phi(-8)", fns.gaussian_cdf(-8.0), 6.220960574271784e-16, 1e-28);
  b.near("numerics", "gaussian_cdf", "Phi(40) = 1", fns.gaussian_cdf(40.0), 1.0, 0.0);
  b.near("numerics", "gaussian_quantile", "quantile(1/2) = 0", fns.gaussian_quantile(0.5), 0.0, 1e-15);
  b.near("numerics", "gaussian_quantile", "quantile(0.841344746)", fns.gaussian_quantile(0.841344746),
         0.99999999971673, 1e-12);
  b.throws<DomainError>("numerics", "gaussian_quantile", "quantile(0) rejected", [] { (void)gaussian_quantile(0.0); });
  b.guarded("numerics", "integrate", "Gaussian density integrates to 1", [&] {
    b.near("numerics", "integrate", "Gaussian density integrates to 1",
           integrate([](double x) { return gaussian_pdf(x); }, Interval(), qs), 1.0, 1e-12);
  });
  b.guarded("numerics", "find_root", "root of x^2 - 2 on [0, 2]", [&] {
    b.near("numerics", "find_root", "root of x^2 - 2 on [0, 2]",
           find_root([](double x) { return x * x - 2.0; }, Interval(0.0, 2.0)), std::sqrt(2.0), 1e-12);
  });
  b.throws<BracketError>("numerics", "find_root", "same-sign bracket rejected",
                         [] { (void)find_root([](double x) { return x * x + 1.0; }, Interval(-1.0, 1.0)); });

  // measure1d
  const double delta_e = 0.04766922627144435;
  b.guarded("measure1d", "normalize", "Gaussian normalizer", [&] {
    b.near("measure1d", "normalize", "Gaussian normalizer", standard_gaussian().log_normalizer(), kLogSqrt2Pi, 1e-14);
    const auto t = normalize(PotentialSpec::truncated_gaussian(2.0));
    b.near("measure1d", "normalize", "truncated (-2,2) density at 0", t.density(0.0), (1 + delta_e) * kInvSqrt2Pi,
           1e-12);
    b.near("measure1d", "normalize", "truncated (-2,2) total mass", t.mass(-2.0, 2.0), 1.0, 1e-12);
  });
  b.throws<ConvexityError>("measure1d", "normalize", "x^2/4 rejected as not 1-convex", [] {
    std::vector<double> xs, vs;
    for (int i = 0; i <= 80; ++i) {
      xs.push_back(-4.0 + 0.1 * i);
      vs.push_back(xs.back() * xs.back() / 4.0);
    }
    (void)normalize(PotentialSpec::tabulated(xs, vs));
  });
  b.guarded("measure1d", "brute_force_minimizer", "Gaussian minimizer is a half-line at the profile", [&] {
    const auto r = brute_force_minimizer(standard_gaussian(), 0.5);
    b.near("measure1d", "brute_force_minimizer", "Gaussian minimum perimeter at 1/2", r.perimeter, kInvSqrt2Pi, 1e-6);
    b.truth("measure1d", "brute_force_minimizer", "Gaussian minimizer is a half-line", r.is_half_line());
  });

  // stability
  b.guarded("stability", "deficit", "truncated-Gaussian closed forms", [&] {
    const auto ex = example23(2.0);
    b.near("stability", "example23", "delta_E for D = 2", ex.family.delta_e, delta_e, 1e-14);
    b.near("stability", "deficit", "deficit for D = 2 at 1/2", deficit(ex.measure, 0.5).deficit, 0.019017269833701895,
           1e-12);
    b.near("stability", "lp_distance", "L^1 for D = 2", lp_distance(ex.measure, 1.0), 0.09100052779271683, 1e-10);
    b.near("stability", "lp_distance", "L^2 for D = 2", lp_distance(ex.measure, 2.0), 0.21833283369993702, 1e-10);
    b.near("stability", "lp_distance", "L^4 for D = 2", lp_distance(ex.measure, 4.0), 0.46186519813979012, 1e-10);
    b.near("stability", "relative_entropy", "entropy for D = 2", relative_entropy(ex.measure), 0.04656791229239016,
           1e-10);
  });
  b.guarded("stability", "deficit", "Gaussian equality case", [&] {
    const auto g = standard_gaussian();
    b.near("stability", "deficit", "Gaussian deficit at 0.3", deficit(g, 0.3).deficit, 0.0, 1e-14);
    b.near("stability", "lp_distance", "Gaussian L^2", lp_distance(g, 2.0), 0.0, 1e-12);
    const auto gb = check_gap_bounds(center(g, 0.3));
    b.truth("stability", "check_gap_bounds", "Gaussian gap is affine", gb.equality_case && gb.lower_pass);
  });
  b.guarded("stability", "w2_to_gaussian", "translated Gaussian", [&] {
    const auto m = standard_gaussian().translated(0.5);
    b.near("stability", "w2_to_gaussian", "W2 of a 0.5-translate", w2_to_gaussian(m), 0.5, 1e-9);
    b.near("stability", "w1_to_gaussian", "W1 of a 0.5-translate", w1_to_gaussian(m), 0.5, 1e-9);
    b.near("stability", "relative_entropy", "entropy of a 0.5-translate", relative_entropy(m), 0.125, 1e-12);
    b.truth("stability", "talagrand_check", "Talagrand on a 0.5-translate", talagrand_check(m).pass);
  });
  b.throws<DomainError>("stability", "lp_distance", "p < 1 rejected",
                        [] { (void)lp_distance(standard_gaussian(), 0.5); });

  // needles
  b.guarded("needles", "shifted_gaussian_l1", "s = 1", [&] {
    b.near("needles", "shifted_gaussian_l1", "4 Phi(1/2) - 2 at s = 1", shifted_gaussian_l1(1.0), 0.7658498450960524,
           1e-9);
    b.truth("needles", "shifted_gaussian_l1", "below 2 s / sqrt(2 pi) at s = 1",
            shifted_gaussian_l1(1.0) <= 0.7978845608028654);
  });
  b.guarded("needles", "mixture_density", "two translated Gaussians", [&] {
    const double s = 0.7;
    NeedleEnsemble e;
    e.needles.push_back(make_needle(0.5, standard_gaussian().translated(-s), 0.5));
    e.needles.push_back(make_needle(0.5, standard_gaussian().translated(s), 0.5));
    b.near("needles", "mixture_density", "rho(0) for +-0.7 translates", mixture_density(e, 0.0),
           std::exp(-s * s / 2) * kInvSqrt2Pi, 1e-15);
    const auto d = disintegration_check(e, [](double x) { return x * x; });
    b.near("needles", "disintegration_check", "second moment 1 + s^2", d.lhs, 1 + s * s, 1e-9);
    b.near("needles", "disintegration_check", "Fubini consistency", d.lhs, d.rhs, 1e-8);
  });
  b.guarded("needles", "needle_l1", "truncated needle D = 2", [&] {
    const auto n = make_needle(1.0, example23(2.0).measure, 0.5);
    b.near("needles", "needle_l1", "needle L^1 for D = 2", needle_l1(n), 0.09100052779271683, 1e-9);
    NeedleEnsemble e;
    e.needles.push_back(n);
    b.near("needles", "aggregate_l1", "single needle: mixture equals needlewise", aggregate_l1(e).mixture_l1,
           0.09100052779271683, 1e-9);
  });
  b.guarded("needles", "classify_good", "all-Gaussian ensemble", [&] {
    EnsembleConfig cfg;
    cfg.needle_count = 10;
    cfg.deficit_scale = 0.0;
    const auto e = generate_ensemble(cfg);
    const auto r = classify(e, 1e-4);
    b.near("needles", "classify_good", "good mass of Gaussians", *r.good_mass, 1.0, 1e-12);
    b.near("needles", "classify_centered", "centered mass of Gaussians", *r.centered_mass, 1.0, 1e-12);
    b.near("needles", "aggregate_l1", "mixture L^1 of Gaussians", aggregate_l1(e).mixture_l1, 0.0, 1e-12);
  });

  // rates
  b.guarded("rates", "fit_exponent", "exact power law", [&] {
    std::vector<SweepPoint> pts;
    for (double d : default_delta_grid()) pts.push_back({d, 3.0 * std::pow(d, 0.7), 0.0, d});
    const auto f = fit_exponent(pts);
    b.near("rates", "fit_exponent", "exponent of 3 delta^0.7", f.alpha, 0.7, 1e-12);
    b.near("rates", "fit_exponent", "constant of 3 delta^0.7", f.log_c, std::log(3.0), 1e-11);
  });
  b.guarded("rates", "sweep", "truncated family L^2 equals sqrt(delta_E)", [&] {
    const auto r = sweep(example23_family(), 0.5, Metric::lp_norm(2.0), {1e-2, 1e-3, 1e-4});
    bool ok = r.points.size() == 3;
    for (const auto& p : r.points)
      ok = ok && std::fabs(p.value - std::sqrt(Example23Family::with_half_width(p.parameter).delta_e)) <= 1e-10;
    b.truth("rates", "sweep", "truncated family L^2 equals sqrt(delta_E)", ok);
  });
  return out;
}

}  // namespace isolab
