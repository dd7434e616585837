#pragma once

/**
 * @file needles.hpp
 * @brief Finite weighted families of 1-convex "needles" standing in for a
 * needle decomposition: the mixture density ρ = Σ w_q e^{-σ_q}, good/bad
 * needle classification, and the L^1 aggregation estimate.
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "isolab/errors.hpp"
#include "isolab/measure1d.hpp"
#include "isolab/numerics.hpp"
#include "isolab/parallel.hpp"
#include "isolab/stability.hpp"

namespace isolab {

struct Needle {
  double weight = 0.0;
  Measure1D measure;
  /// θ- and (1-θ)-quantiles of the needle.
  double r_minus = 0.0;
  double r_plus = 0.0;
};

/// Builds a needle, filling in its quantiles.
inline Needle make_needle(double weight, Measure1D measure, double theta) {
  if (!(weight >= 0)) throw std::invalid_argument("needle weight must be nonnegative");
  const double lo = measure.quantile(theta);
  const double hi = measure.quantile(1.0 - theta);
  return {weight, std::move(measure), lo, hi};
}

struct NeedleEnsemble {
  std::vector<Needle> needles;
  double theta = 0.5;
  double epsilon = 0.1;
  /// Seed of the generator that produced the ensemble, 0 when built by hand.
  std::uint64_t seed = 0;

  void validate() const {
    if (needles.empty()) throw std::invalid_argument("ensemble has no needles");
    if (!(theta > 0 && theta < 1)) throw DomainError("ensemble theta out of range (0,1)");
    if (!(epsilon > 0 && epsilon < 1)) throw DomainError("ensemble epsilon out of range (0,1)");
    double total = 0.0;
    for (const auto& n : needles) {
      if (!(n.weight >= 0)) throw std::invalid_argument("needle weight must be nonnegative");
      total += n.weight;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("needle weights must sum to 1");
  }

  /// Union of the needles' kinks and finite domain ends, sorted.
  [[nodiscard]] std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& n : needles) {
      auto b = n.measure.breakpoints();
      out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

/// (1-ε)/(9-3ε)
inline double needle_rate_exponent(double epsilon) { return (1.0 - epsilon) / (9.0 - 3.0 * epsilon); }

/// ρ(x) = Σ w_q e^{-σ_q(x)}, with e^{-σ_q} = 0 off the needle.
inline double mixture_density(const NeedleEnsemble& ens, double x) {
  double rho = 0.0;
  for (const auto& n : ens.needles) rho += n.weight * n.measure.density(x);
  return rho;
}

inline double mixture_mass(const NeedleEnsemble& ens, const QuadratureSettings& settings = {}) {
  const auto bps = ens.breakpoints();
  const Interval whole(-settings.tail_cutoff, settings.tail_cutoff);
  return integrate([&](double x) { return mixture_density(ens, x); }, whole, settings, bps);
}

struct DisintegrationReport {
  double lhs = 0.0;  // ∫ h ρ dx
  double rhs = 0.0;  // Σ w_q ∫ h d𝔪_q
};

inline DisintegrationReport disintegration_check(const NeedleEnsemble& ens, const std::function<double(double)>& h,
                                                 const QuadratureSettings& settings = {}) {
  DisintegrationReport r;
  const auto bps = ens.breakpoints();
  const Interval whole(-settings.tail_cutoff, settings.tail_cutoff);
  r.lhs = integrate([&](double x) { return h(x) * mixture_density(ens, x); }, whole, settings, bps);
  for (const auto& n : ens.needles) {
    if (n.weight == 0) continue;
    const auto& m = n.measure;
    const auto nb = m.breakpoints();
    r.rhs += n.weight * integrate([&](double x) { return h(x) * m.density(x); }, detail::clipped_domain(m, settings),
                                  settings, nb);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct ClassificationReport {
  std::optional<double> good_mass;
  std::optional<double> centered_mass;
  std::optional<double> good_and_centered_mass;
  /// Σ w_q (P_q - profile(θ)) with P_q = e^{-σ_q(r_q^-)}.
  double aggregate_deficit = 0.0;
  /// √δ for the perimeter test, c·δ^{(1-ε)/(9-3ε)} for the quantile test.
  double threshold_used = 0.0;
  bool markov_checked = false;
  bool markov_pass = true;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<double> needle_deficits(const NeedleEnsemble& ens) {
  const double prof = gaussian_profile(ens.theta);
  std::vector<double> out;
  out.reserve(ens.needles.size());
  for (const auto& n : ens.needles) out.push_back(n.measure.density(n.r_minus) - prof);
  return out;
}

inline double aggregate(const NeedleEnsemble& ens, const std::vector<double>& per_needle) {
  double s = 0.0;
  for (std::size_t i = 0; i < per_needle.size(); ++i) s += ens.needles[i].weight * per_needle[i];
  return s;
}

inline std::vector<bool> good_flags(const NeedleEnsemble& ens, double delta) {
  const double prof = gaussian_profile(ens.theta);
  const double cut = prof + std::sqrt(delta);
  std::vector<bool> out;
  for (const auto& n : ens.needles) out.push_back(n.measure.density(n.r_minus) < cut);
  return out;
}

inline std::vector<bool> centered_flags(const NeedleEnsemble& ens, double delta, double c_threshold) {
  const double a = gaussian_quantile(ens.theta);
  const double b = gaussian_quantile(1.0 - ens.theta);
  const double cut = c_threshold * std::pow(delta, needle_rate_exponent(ens.epsilon));
  std::vector<bool> out;
  for (const auto& n : ens.needles) out.push_back(std::max(std::fabs(a - n.r_minus), std::fabs(b - n.r_plus)) <= cut);
  return out;
}

inline double flagged_mass(const NeedleEnsemble& ens, const std::vector<bool>& flags) {
  double s = 0.0;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) s += ens.needles[i].weight;
  return std::min(1.0, s);
}

// Aggregate deficit allowed to exceed δ by this relative slack before the
// Markov step counts as inapplicable.
inline constexpr double kPreconditionSlack = 1e-9;

inline bool within(double value, double bound) { return value <= bound * (1.0 + kPreconditionSlack) + 1e-300; }

}  // namespace detail

/// Mass of needles with P_q < profile(θ) + √δ, and the Markov check good_mass ≥ 1 - √δ.
inline ClassificationReport classify_good(const NeedleEnsemble& ens, double delta) {
  if (!(delta > 0)) throw DomainError("classify_good: delta must be positive");
  ClassificationReport r;
  r.aggregate_deficit = detail::aggregate(ens, detail::needle_deficits(ens));
  r.threshold_used = std::sqrt(delta);
  r.good_mass = detail::flagged_mass(ens, detail::good_flags(ens, delta));
  r.markov_checked = detail::within(r.aggregate_deficit, delta);
  if (r.markov_checked) {
    r.markov_pass = *r.good_mass >= 1.0 - std::sqrt(delta) - 1e-12;
  } else {
    r.warnings.push_back("aggregate deficit exceeds delta; Markov bound not checked");
  }
  return r;
}

/// Mass of needles with max(|a_θ - r^-|, |a_{1-θ} - r^+|) ≤ c·δ^{(1-ε)/(9-3ε)}.
inline ClassificationReport classify_centered(const NeedleEnsemble& ens, double delta, double c_threshold = 1.0) {
  if (!(delta > 0)) throw DomainError("classify_centered: delta must be positive");
  if (!(c_threshold > 0)) throw DomainError("classify_centered: c_threshold must be positive");
  ClassificationReport r;
  r.aggregate_deficit = detail::aggregate(ens, detail::needle_deficits(ens));
  r.threshold_used = c_threshold * std::pow(delta, needle_rate_exponent(ens.epsilon));
  r.centered_mass = detail::flagged_mass(ens, detail::centered_flags(ens, delta, c_threshold));
  return r;
}

/// Both tests plus the mass of needles passing both.
inline ClassificationReport classify(const NeedleEnsemble& ens, double delta, double c_threshold = 1.0) {
  ClassificationReport r = classify_good(ens, delta);
  const auto c = classify_centered(ens, delta, c_threshold);
  r.centered_mass = c.centered_mass;
  const auto g = detail::good_flags(ens, delta);
  const auto k = detail::centered_flags(ens, delta, c_threshold);
  std::vector<bool> both(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) both[i] = g[i] && k[i];
  r.good_and_centered_mass = detail::flagged_mass(ens, both);
  return r;
}

// ---------------------------------------------------------------------------
// L^1 quantities
// ---------------------------------------------------------------------------

/// ‖γ(· - s) - γ‖_{L^1(dx)} by quadrature, split at the crossing point s/2.
inline double shifted_gaussian_l1(double s, const QuadratureSettings& settings = {}) {
  if (s == 0.0) return 0.0;
  auto f = [&](double x) { return std::fabs(gaussian_pdf(x - s) - gaussian_pdf(x)); };
  const double bps[] = {0.5 * s};
  const double c = settings.tail_cutoff + std::fabs(s);
  return integrate(f, Interval(-c, c), settings, bps);
}

/// 4Φ(|s|/2) - 2, written as 2(1 - 2Φ(-|s|/2)) to keep precision for small s.
inline double shifted_gaussian_l1_closed(double s) { return 2.0 * isolab::erf(std::fabs(s) / (2.0 * kSqrt2)); }

/// ‖e^{ψ_g-σ_q} - 1‖_{L^1(γ)}; at most 2.
inline double needle_l1(const Needle& n, const QuadratureSettings& settings = {}) {
  return lp_distance(n.measure, 1.0, settings);
}

struct AggregateL1Report {
  double mixture_l1 = 0.0;
  double needlewise_sum = 0.0;
  std::vector<double> needle_values;
};

/// ‖ρe^{ψ_g} - 1‖_{L^1(γ)} = ∫|ρ - φ| dx next to Σ w_q needle_l1(q).
inline AggregateL1Report aggregate_l1(const NeedleEnsemble& ens, const QuadratureSettings& settings = {}) {
  AggregateL1Report r;
  const auto bps = ens.breakpoints();
  const Interval whole(-settings.tail_cutoff, settings.tail_cutoff);
  r.mixture_l1 =
      integrate([&](double x) { return std::fabs(mixture_density(ens, x) - gaussian_pdf(x)); }, whole, settings, bps);
  r.needle_values = parallel_map(ens.needles.size(), [&](std::size_t i) { return needle_l1(ens.needles[i], settings); });
  for (std::size_t i = 0; i < r.needle_values.size(); ++i) r.needlewise_sum += ens.needles[i].weight * r.needle_values[i];
  return r;
}

struct NeedleExperimentReport {
  double delta = 0.0;
  double epsilon = 0.0;
  double mixture_l1 = 0.0;
  double needlewise_sum = 0.0;
  double max_needle_l1 = 0.0;
  /// (1-ε)/(9-3ε)
  double rate_bound_exponent = 0.0;
  /// mixture_l1 / δ^{rate_bound_exponent}
  double implied_constant = 0.0;
  double good_mass = 0.0;
  double centered_mass = 0.0;
  double good_and_centered_mass = 0.0;
  double bad_mass = 0.0;
  double aggregate_deficit = 0.0;
  /// Σ_{good ∩ centered} w_q needle_l1(q) + 2·bad_mass
  double decomposition_bound = 0.0;
  bool decomposition_pass = false;
  bool fubini_pass = false;
  bool markov_pass = true;
  bool fully_bad = false;
  std::vector<std::string> precondition_violations;
};

inline NeedleExperimentReport theorem31_experiment(const NeedleEnsemble& ens, double delta, double c_threshold = 1.0,
                                            const QuadratureSettings& settings = {}) {
  NeedleExperimentReport r;
  r.delta = delta;
  r.epsilon = ens.epsilon;
  r.rate_bound_exponent = needle_rate_exponent(ens.epsilon);
  const auto cls = classify(ens, delta, c_threshold);
  r.good_mass = *cls.good_mass;
  r.centered_mass = *cls.centered_mass;
  r.good_and_centered_mass = *cls.good_and_centered_mass;
  r.bad_mass = std::max(0.0, 1.0 - r.good_and_centered_mass);
  r.aggregate_deficit = cls.aggregate_deficit;
  r.markov_pass = cls.markov_pass;
  r.fully_bad = r.good_and_centered_mass == 0.0;

  const auto agg = aggregate_l1(ens, settings);
  r.mixture_l1 = agg.mixture_l1;
  r.needlewise_sum = agg.needlewise_sum;
  for (double v : agg.needle_values) r.max_needle_l1 = std::max(r.max_needle_l1, v);
  r.implied_constant = r.mixture_l1 / std::pow(delta, r.rate_bound_exponent);
  r.fubini_pass = r.mixture_l1 <= r.needlewise_sum + 1e-8;

  const auto g = detail::good_flags(ens, delta);
  const auto k = detail::centered_flags(ens, delta, c_threshold);
  double good_part = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] && k[i]) good_part += ens.needles[i].weight * agg.needle_values[i];
  r.decomposition_bound = good_part + 2.0 * r.bad_mass;
  r.decomposition_pass = r.mixture_l1 <= r.decomposition_bound + 1e-8;

  if (!detail::within(r.aggregate_deficit, delta)) r.precondition_violations.push_back("aggregate deficit exceeds delta");
  if (!detail::within(r.bad_mass, std::pow(delta, r.rate_bound_exponent)))
    r.precondition_violations.push_back("bad mass exceeds delta^((1-eps)/(9-3eps))");
  return r;
}

// ---------------------------------------------------------------------------
// Synthetic ensembles
// ---------------------------------------------------------------------------

struct EnsembleConfig {
  int needle_count = 100;
  double theta = 0.5;
  double epsilon = 0.1;
  /// Target aggregate deficit Σ w_q (P_q - profile).
  double deficit_scale = 1e-4;
  /// Total weight of needles displaced far from a_θ.
  double bad_fraction = 0.0;
  std::uint64_t seed = 1;
  double c_threshold = 1.0;

  void validate() const {
    if (needle_count < 1 || needle_count > 100000) throw std::invalid_argument("needle_count must lie in [1, 100000]");
    if (!(theta > 0 && theta < 1)) throw DomainError("theta out of range (0,1)");
    if (!(epsilon > 0 && epsilon < 1)) throw DomainError("epsilon out of range (0,1)");
    if (!(deficit_scale == 0 || (deficit_scale >= 1e-10 && deficit_scale <= 0.05)))
      throw std::invalid_argument("deficit_scale must be 0 or lie in [1e-10, 0.05]");
    if (!(bad_fraction >= 0 && bad_fraction <= 1)) throw std::invalid_argument("bad_fraction must lie in [0, 1]");
    if (bad_fraction > 0 && bad_fraction < 1 && needle_count < 2)
      throw std::invalid_argument("a partial bad_fraction needs at least two needles");
    if (bad_fraction < 1 && deficit_scale > 0 && deficit_scale / (1.0 - bad_fraction) > 0.05)
      throw std::invalid_argument("deficit_scale too large for the remaining good weight");
    if (!(c_threshold > 0)) throw std::invalid_argument("c_threshold must be positive");
  }
};

namespace detail {

/// Uniform double in [0,1) from the top 53 bits of one mt19937_64 output.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class NeedleShape { two_sided, upper_cut, lower_cut, kink };

inline PotentialSpec shape_spec(NeedleShape shape, double param, double kink_at) {
  switch (shape) {
    case NeedleShape::two_sided:
      return PotentialSpec::truncated_gaussian(param);
    case NeedleShape::upper_cut:
      return PotentialSpec::truncated_gaussian(Interval(-kInf, param));
    case NeedleShape::lower_cut:
      return PotentialSpec::truncated_gaussian(Interval(-param, kInf));
    case NeedleShape::kink:
      return PotentialSpec::perturbed_gaussian({kink_at}, {-param, param});
  }
  throw std::logic_error("unknown needle shape");
}

/// Measure of the given shape whose half-line deficit at θ equals `target`.
inline Measure1D solve_shape(NeedleShape shape, double kink_at, double theta, double target) {
  auto make = [&](double param) { return Measure1D(shape_spec(shape, param, kink_at)); };
  auto f = [&](double param) { return deficit(make(param), theta).deficit - target; };
  // Truncation widths shrink the deficit as they grow; kink strength grows it.
  const Interval bracket = shape == NeedleShape::kink ? Interval(0.0, 30.0)
                           : shape == NeedleShape::two_sided ? Interval(0.05, 38.0)
                                                             : Interval(0.0, 38.0);
  try {
    return make(find_root(f, bracket, 1e-13));
  } catch (const BracketError&) {
    throw std::invalid_argument("needle deficit target not reachable by the generator's shapes");
  }
}

}  // namespace detail

/**
 * Deterministic synthetic ensemble. Every needle consumes five uniforms from
 * mt19937_64(seed) in index order, so the draws do not depend on the other
 * config fields. The first ⌈n/10⌉ needles (all of them when bad_fraction = 1)
 * are bad when bad_fraction > 0: translated Gaussians with |r^- - a_θ| ≥
 * 2 + c_threshold, sharing total weight bad_fraction. The rest are
 * truncated or kinked Gaussians with prescribed deficits, normalized so the
 * aggregate deficit equals deficit_scale, then translated by at most
 * c_threshold·δ^{(1-ε)/(9-3ε)}/4 with δ = deficit_scale.
 */
inline NeedleEnsemble generate_ensemble(const EnsembleConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.needle_count);
  std::mt19937_64 rng(cfg.seed);
  struct Draw {
    double weight, shape, deficit, position, extra;
  };
  std::vector<Draw> draws(n);
  for (auto& d : draws) {
    d.weight = detail::uniform01(rng);
    d.shape = detail::uniform01(rng);
    d.deficit = detail::uniform01(rng);
    d.position = detail::uniform01(rng);
    d.extra = detail::uniform01(rng);
  }

  std::size_t n_bad = 0;
  if (cfg.bad_fraction >= 1.0) {
    n_bad = n;
  } else if (cfg.bad_fraction > 0.0) {
    n_bad = std::clamp<std::size_t>((n + 9) / 10, 1, n - 1);
  }

  std::vector<double> weights(n);
  double bad_total = 0.0, good_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = 0.5 + draws[i].weight;
    (i < n_bad ? bad_total : good_total) += weights[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    weights[i] *= i < n_bad ? cfg.bad_fraction / bad_total : (1.0 - cfg.bad_fraction) / good_total;

  // Per-needle deficits d_i ∝ (0.5 + u_i) with Σ_good w_i d_i = deficit_scale.
  std::vector<double> deficits(n, 0.0);
  double weighted = 0.0;
  for (std::size_t i = n_bad; i < n; ++i) weighted += weights[i] * (0.5 + draws[i].deficit);
  if (weighted > 0)
    for (std::size_t i = n_bad; i < n; ++i) deficits[i] = cfg.deficit_scale * (0.5 + draws[i].deficit) / weighted;

  const double a = gaussian_quantile(cfg.theta);
  const double wiggle =
      cfg.deficit_scale > 0 ? 0.25 * cfg.c_threshold * std::pow(cfg.deficit_scale, needle_rate_exponent(cfg.epsilon)) : 0.0;

  auto build = [&](std::size_t i) -> Needle {
    const Draw& d = draws[i];
    if (i < n_bad) {
      const double side = d.shape < 0.5 ? -1.0 : 1.0;
      const double dist = 2.0 + 2.0 * d.position + cfg.c_threshold;
      return make_needle(weights[i], standard_gaussian().translated(side * dist), cfg.theta);
    }
    if (deficits[i] == 0.0) return make_needle(weights[i], standard_gaussian(), cfg.theta);
    const auto shape = static_cast<detail::NeedleShape>(std::min(3, static_cast<int>(4.0 * d.shape)));
    const double kink_at = 2.0 * d.extra - 1.0;
    const Measure1D raw = detail::solve_shape(shape, kink_at, cfg.theta, deficits[i]);
    const double shift = a - raw.quantile(cfg.theta) + wiggle * (2.0 * d.position - 1.0);
    return make_needle(weights[i], raw.translated(shift), cfg.theta);
  };

  NeedleEnsemble ens;
  ens.needles = parallel_map(n, build);
  ens.theta = cfg.theta;
  ens.epsilon = cfg.epsilon;
  ens.seed = cfg.seed;
  return ens;
}

}  // namespace isolab
