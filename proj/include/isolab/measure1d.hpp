#pragma once

/**
 * @file measure1d.hpp
 * @brief 1-convex weighted intervals (I, |·|, e^{-ψ}dx), their CDFs and
 * quantiles, half-line perimeters, the Gaussian isoperimetric profile and an
 * exhaustive isoperimetric search over finite interval unions.
 *
 * Every potential family is stored in one canonical form:
 *
 *     ψ̂(x) = u²/2 + φ(u) + offset,    u = x - shift,
 *
 * with φ convex and piecewise linear on the local support. The Gaussian is
 * φ ≡ 0, a truncated Gaussian is φ ≡ 0 on a sub-interval, a perturbed
 * Gaussian carries the user's piecewise-linear φ, and a tabulated potential
 * interpolates φ = ψ̂ - x²/2 linearly between samples (so the interpolant is
 * 1-convex exactly when the samples are). On each linear piece e^{-ψ̂} is a
 * shifted Gaussian, which makes masses, CDFs and quantiles closed-form in Φ.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "isolab/errors.hpp"
#include "isolab/numerics.hpp"

namespace isolab {

struct GaussianFamily {
  friend bool operator==(const GaussianFamily&, const GaussianFamily&) = default;
};

struct TruncatedGaussianFamily {
  Interval support;
  friend bool operator==(const TruncatedGaussianFamily&, const TruncatedGaussianFamily&) = default;
};

/// x²/2 + g(x) with g convex piecewise linear: slope slopes[0] left of
/// breakpoints[0], slopes[i] on [breakpoints[i-1], breakpoints[i]), g(0) = 0.
struct PerturbedGaussianFamily {
  std::vector<double> breakpoints;
  std::vector<double> slopes;
  Interval support;
  friend bool operator==(const PerturbedGaussianFamily&, const PerturbedGaussianFamily&) = default;
};

/// Samples (x_i, ψ̂(x_i)); the domain is (x_0, x_last).
struct TabulatedConvexFamily {
  std::vector<double> x;
  std::vector<double> value;
  friend bool operator==(const TabulatedConvexFamily&, const TabulatedConvexFamily&) = default;
};

using PotentialFamily =
    std::variant<GaussianFamily, TruncatedGaussianFamily, PerturbedGaussianFamily, TabulatedConvexFamily>;

/// One linear piece of φ in local coordinates: φ(u) = slope·u + intercept on [lo, hi).
struct PotentialPiece {
  double lo;
  double hi;
  double slope;
  double intercept;
};

class PotentialSpec {
 public:
  static PotentialSpec gaussian() { return PotentialSpec(GaussianFamily{}); }

  static PotentialSpec truncated_gaussian(Interval support) {
    return PotentialSpec(TruncatedGaussianFamily{support});
  }

  /// Symmetric truncation (-half_width, half_width).
  static PotentialSpec truncated_gaussian(double half_width) {
    if (!(half_width > 0)) throw std::invalid_argument("truncation half-width must be positive");
    return truncated_gaussian(Interval(-half_width, half_width));
  }

  static PotentialSpec perturbed_gaussian(std::vector<double> breakpoints, std::vector<double> slopes,
                                          Interval support = {}) {
    return PotentialSpec(PerturbedGaussianFamily{std::move(breakpoints), std::move(slopes), support});
  }

  static PotentialSpec tabulated(std::vector<double> x, std::vector<double> value) {
    return PotentialSpec(TabulatedConvexFamily{std::move(x), std::move(value)});
  }

  explicit PotentialSpec(PotentialFamily family, double shift = 0.0, double offset = 0.0)
      : family_(std::move(family)), shift_(shift), offset_(offset) {
    if (!std::isfinite(shift_) || !std::isfinite(offset_)) {
      throw std::invalid_argument("potential shift and offset must be finite");
    }
    compile();
  }

  [[nodiscard]] PotentialSpec translated(double s) const { return PotentialSpec(family_, shift_ + s, offset_); }
  [[nodiscard]] PotentialSpec plus_constant(double c) const { return PotentialSpec(family_, shift_, offset_ + c); }

  /// ψ̂(x); +∞ outside the open domain.
  [[nodiscard]] double operator()(double x) const {
    if (!domain_.contains(x)) return kInf;
    const double u = x - shift_;
    const PotentialPiece& p = piece_at(u);
    return 0.5 * u * u + p.slope * u + p.intercept + offset_;
  }

  /// ψ̂'₊(x): the slope of the piece to the right of x.
  [[nodiscard]] double right_derivative(double x) const {
    const double u = x - shift_;
    return u + piece_at(u).slope;
  }

  [[nodiscard]] const Interval& domain() const { return domain_; }
  [[nodiscard]] const PotentialFamily& family() const { return family_; }
  [[nodiscard]] double shift() const { return shift_; }
  [[nodiscard]] double offset() const { return offset_; }
  [[nodiscard]] std::span<const PotentialPiece> pieces() const { return pieces_; }

  /// Interior kinks of ψ̂ in global coordinates.
  [[nodiscard]] std::vector<double> kinks() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].lo + shift_);
    return out;
  }

  /// Short family name used in reports and serialization.
  [[nodiscard]] std::string tag() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, GaussianFamily>) return "gaussian";
          else if constexpr (std::is_same_v<T, TruncatedGaussianFamily>) return "truncated_gaussian";
          else if constexpr (std::is_same_v<T, PerturbedGaussianFamily>) return "perturbed_gaussian";
          else return "tabulated";
        },
        family_);
  }

  /// Built-in families are 1-convex by construction; tabulated data needs the grid test.
  [[nodiscard]] bool needs_numeric_convexity_check() const {
    return std::holds_alternative<TabulatedConvexFamily>(family_);
  }

  friend bool operator==(const PotentialSpec& a, const PotentialSpec& b) {
    return a.family_ == b.family_ && a.shift_ == b.shift_ && a.offset_ == b.offset_;
  }

 private:
  [[nodiscard]] const PotentialPiece& piece_at(double u) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), u,
                               [](double v, const PotentialPiece& p) { return v < p.lo; });
    if (it == pieces_.begin()) return pieces_.front();
    return *std::prev(it);
  }

  void compile() {
    pieces_.clear();
    Interval local;
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, GaussianFamily>) {
            pieces_.push_back({-kInf, kInf, 0.0, 0.0});
          } else if constexpr (std::is_same_v<T, TruncatedGaussianFamily>) {
            local = f.support;
            pieces_.push_back({f.support.lo, f.support.hi, 0.0, 0.0});
          } else if constexpr (std::is_same_v<T, PerturbedGaussianFamily>) {
            compile_perturbed(f);
            local = f.support;
          } else {
            compile_tabulated(f);
            local = Interval(f.x.front(), f.x.back());
          }
        },
        family_);
    domain_ = local.translated(shift_);
    // clip pieces to the support
    std::vector<PotentialPiece> clipped;
    for (PotentialPiece p : pieces_) {
      p.lo = std::max(p.lo, local.lo);
      p.hi = std::min(p.hi, local.hi);
      if (p.lo < p.hi) clipped.push_back(p);
    }
    if (clipped.empty()) throw std::invalid_argument("potential has no pieces inside its support");
    clipped.front().lo = local.lo;
    pieces_ = std::move(clipped);
  }

  void compile_perturbed(const PerturbedGaussianFamily& f) {
    const auto& b = f.breakpoints;
    const auto& s = f.slopes;
    if (s.size() != b.size() + 1) {
      throw std::invalid_argument("perturbed gaussian needs exactly one more slope than breakpoints");
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!std::isfinite(b[i]) || (i > 0 && !(b[i] > b[i - 1]))) {
        throw std::invalid_argument("perturbation breakpoints must be finite and strictly increasing");
      }
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!std::isfinite(s[i])) throw std::invalid_argument("perturbation slopes must be finite");
      if (i > 0 && s[i] < s[i - 1]) {
        throw ConvexityError("perturbation slopes must be nondecreasing (convex perturbation)");
      }
    }
    // g(u) = s0·u + Σ (s_i - s_{i-1}) max(u - b_i, 0); re-anchor so that g(0) = 0.
    std::vector<double> intercepts(s.size(), 0.0);
    for (std::size_t i = 1; i < s.size(); ++i) {
      intercepts[i] = intercepts[i - 1] - (s[i] - s[i - 1]) * b[i - 1];
    }
    auto g_at = [&](double u) {
      std::size_t k = std::upper_bound(b.begin(), b.end(), u) - b.begin();
      return s[k] * u + intercepts[k];
    };
    const double anchor = g_at(0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double lo = i == 0 ? -kInf : b[i - 1];
      const double hi = i == b.size() ? kInf : b[i];
      pieces_.push_back({lo, hi, s[i], intercepts[i] - anchor});
    }
  }

  void compile_tabulated(const TabulatedConvexFamily& f) {
    if (f.x.size() < 2 || f.x.size() != f.value.size()) {
      throw std::invalid_argument("tabulated potential needs at least two (x, value) samples");
    }
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      if (!std::isfinite(f.x[i]) || !std::isfinite(f.value[i])) {
        throw std::invalid_argument("tabulated potential samples must be finite");
      }
      if (i > 0 && !(f.x[i] > f.x[i - 1])) {
        throw std::invalid_argument("tabulated abscissae must be strictly increasing");
      }
    }
    for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
      const double x0 = f.x[i];
      const double x1 = f.x[i + 1];
      const double phi0 = f.value[i] - 0.5 * x0 * x0;
      const double phi1 = f.value[i + 1] - 0.5 * x1 * x1;
      const double slope = (phi1 - phi0) / (x1 - x0);
      pieces_.push_back({x0, x1, slope, phi0 - slope * x0});
    }
  }

  PotentialFamily family_;
  double shift_ = 0.0;
  double offset_ = 0.0;
  Interval domain_;
  std::vector<PotentialPiece> pieces_;
};

/// Reads a two-column CSV (x, ψ̂(x)); lines that do not start with a number are skipped.
inline PotentialSpec load_tabulated_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tabulated potential file: " + path.string());
  std::vector<double> xs;
  std::vector<double> vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0;
    double v = 0;
    if (!(row >> x)) continue;
    if (!(row >> v)) throw std::runtime_error("tabulated potential row needs two columns: " + line);
    xs.push_back(x);
    vs.push_back(v);
  }
  return PotentialSpec::tabulated(std::move(xs), std::move(vs));
}

struct ConvexityReport {
  bool pass = false;
  double worst_violation = 0.0;
};

/**
 * Midpoint form of 1-convexity on a uniform grid of `grid_points` interior
 * points: ψ((x+y)/2) ≤ (ψ(x)+ψ(y))/2 - (x-y)²/8 + tol for all pairs.
 * Unbounded ends are clipped 12 units from the shift.
 */
inline ConvexityReport check_one_convexity(const PotentialSpec& spec, int grid_points = 512, double tol = 1e-9) {
  if (grid_points < 3) throw std::invalid_argument("check_one_convexity needs at least 3 grid points");
  const double lo = spec.domain().bounded_below() ? spec.domain().lo : spec.shift() - 12.0;
  const double hi = spec.domain().bounded_above() ? spec.domain().hi : spec.shift() + 12.0;
  std::vector<double> xs(grid_points);
  std::vector<double> vs(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    xs[i] = lo + (hi - lo) * (i + 1.0) / (grid_points + 1.0);
    vs[i] = spec(xs[i]);
  }
  ConvexityReport out;
  for (int i = 0; i < grid_points; ++i) {
    for (int j = i + 1; j < grid_points; ++j) {
      const double d = xs[j] - xs[i];
      const double excess = spec(0.5 * (xs[i] + xs[j])) - 0.5 * (vs[i] + vs[j]) + d * d / 8.0;
      out.worst_violation = std::max(out.worst_violation, excess);
    }
  }
  out.pass = out.worst_violation <= tol;
  return out;
}

/**
 * Probability measure e^{-ψ}dx with ψ = ψ̂ + log Z. Immutable.
 */
class Measure1D {
 public:
  explicit Measure1D(PotentialSpec spec) : spec_(std::move(spec)) {
    const auto pieces = spec_.pieces();
    piece_log_mass_.reserve(pieces.size());
    for (const PotentialPiece& p : pieces) piece_log_mass_.push_back(log_piece_mass(p, p.lo, p.hi));
    const double top = *std::max_element(piece_log_mass_.begin(), piece_log_mass_.end());
    if (!std::isfinite(top)) {
      throw NonIntegrableError("potential mass is zero or infinite on " + describe(spec_.domain()));
    }
    double sum = 0.0;
    for (double lm : piece_log_mass_) sum += std::exp(lm - top);
    log_z_ = top + std::log(sum);
    prefix_.assign(pieces.size() + 1, 0.0);
    suffix_.assign(pieces.size() + 1, 0.0);
    for (std::size_t i = 0; i < pieces.size(); ++i) prefix_[i + 1] = prefix_[i] + weight(i);
    for (std::size_t i = pieces.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + weight(i);
  }

  [[nodiscard]] const PotentialSpec& spec() const { return spec_; }
  [[nodiscard]] double log_normalizer() const { return log_z_; }
  [[nodiscard]] const Interval& domain() const { return spec_.domain(); }

  /// Normalized potential ψ; +∞ outside the domain.
  [[nodiscard]] double potential(double x) const { return spec_(x) + log_z_; }
  [[nodiscard]] double density(double x) const { return domain().contains(x) ? std::exp(-potential(x)) : 0.0; }
  [[nodiscard]] double right_derivative(double x) const { return spec_.right_derivative(x); }

  /// 𝔪((-∞, x]).
  [[nodiscard]] double cdf(double x) const {
    if (x <= domain().lo) return 0.0;
    if (x >= domain().hi) return 1.0;
    const double u = x - spec_.shift();
    const std::size_t k = piece_index(u);
    const PotentialPiece& p = spec_.pieces()[k];
    return std::min(1.0, prefix_[k] + std::exp(log_piece_mass(p, p.lo, u) - log_z_));
  }

  /// 𝔪([x, ∞)), accurate in the right tail.
  [[nodiscard]] double survival(double x) const {
    if (x <= domain().lo) return 1.0;
    if (x >= domain().hi) return 0.0;
    const double u = x - spec_.shift();
    const std::size_t k = piece_index(u);
    const PotentialPiece& p = spec_.pieces()[k];
    return std::min(1.0, suffix_[k + 1] + std::exp(log_piece_mass(p, u, p.hi) - log_z_));
  }

  /// 𝔪((a, b)).
  [[nodiscard]] double mass(double a, double b) const {
    if (!(a < b)) return 0.0;
    const double mid_prob = cdf(b) - cdf(a);
    if (cdf(a) < 0.5) return mid_prob;
    return survival(a) - survival(b);
  }

  /// x with 𝔪((-∞, x]) = θ.
  [[nodiscard]] double quantile(double theta) const {
    if (!(theta > 0.0 && theta < 1.0)) {
      std::ostringstream os;
      os << "theta out of range (0,1): " << theta;
      throw DomainError(os.str());
    }
    if (theta > 0.5) return upper_quantile(1.0 - theta);
    return solve_tail(theta, false);
  }

  /// x with 𝔪([x, ∞)) = tail.
  [[nodiscard]] double upper_quantile(double tail) const {
    if (!(tail > 0.0 && tail < 1.0)) {
      std::ostringstream os;
      os << "tail probability out of range (0,1): " << tail;
      throw DomainError(os.str());
    }
    if (tail > 0.5) return quantile(1.0 - tail);
    return solve_tail(tail, true);
  }

  [[nodiscard]] Measure1D translated(double s) const { return Measure1D(spec_.translated(s)); }

  /// Kinks and finite domain ends: breakpoints for quadrature.
  [[nodiscard]] std::vector<double> breakpoints() const {
    std::vector<double> out = spec_.kinks();
    if (domain().bounded_below()) out.push_back(domain().lo);
    if (domain().bounded_above()) out.push_back(domain().hi);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static std::string describe(const Interval& i) {
    std::ostringstream os;
    os << "(" << i.lo << ", " << i.hi << ")";
    return os.str();
  }

  // log ∫_a^b e^{-ψ̂(shift+u)} du over a sub-range of piece p.
  [[nodiscard]] double log_piece_mass(const PotentialPiece& p, double a, double b) const {
    const double s = p.slope;
    return 0.5 * s * s - p.intercept - spec_.offset() + kLogSqrt2Pi + log_gaussian_mass(a + s, b + s);
  }

  [[nodiscard]] double weight(std::size_t i) const { return std::exp(piece_log_mass_[i] - log_z_); }

  [[nodiscard]] std::size_t piece_index(double u) const {
    const auto pieces = spec_.pieces();
    auto it = std::upper_bound(pieces.begin(), pieces.end(), u,
                               [](double v, const PotentialPiece& p) { return v < p.lo; });
    if (it == pieces.begin()) return 0;
    return static_cast<std::size_t>(std::prev(it) - pieces.begin());
  }

  // Solves cdf(x) = target (from_right = false) or survival(x) = target.
  [[nodiscard]] double solve_tail(double target, bool from_right) const {
    const auto pieces = spec_.pieces();
    const std::size_t n = pieces.size();
    std::size_t k = 0;
    if (!from_right) {
      while (k + 1 < n && prefix_[k + 1] < target) ++k;
    } else {
      k = n - 1;
      while (k > 0 && suffix_[k] < target) --k;
    }
    const PotentialPiece& p = pieces[k];
    const double s = p.slope;
    const double scale = std::exp(-(0.5 * s * s - p.intercept - spec_.offset() - log_z_)) * kInvSqrt2Pi;

    // closed-form guess inside the piece, in shifted-Gaussian coordinates v = u + s
    double guess;
    if (!from_right) {
      const double need = std::max(0.0, target - prefix_[k]) * scale;
      const double base_left = gaussian_cdf(p.lo + s);
      if (p.lo + s <= 0) {
        const double v = base_left + need;
        guess = (v > 0 && v < 1) ? gaussian_quantile(v) - s : 0.5 * (finite_lo(p) + finite_hi(p));
      } else {
        const double v = gaussian_cdf(-(p.lo + s)) - need;
        guess = (v > 0 && v < 1) ? -gaussian_quantile(v) - s : 0.5 * (finite_lo(p) + finite_hi(p));
      }
    } else {
      const double need = std::max(0.0, target - suffix_[k + 1]) * scale;
      if (p.hi + s >= 0) {
        const double v = gaussian_cdf(-(p.hi + s)) + need;
        guess = (v > 0 && v < 1) ? -gaussian_quantile(v) - s : 0.5 * (finite_lo(p) + finite_hi(p));
      } else {
        const double v = gaussian_cdf(p.hi + s) - need;
        guess = (v > 0 && v < 1) ? gaussian_quantile(v) - s : 0.5 * (finite_lo(p) + finite_hi(p));
      }
    }

    // safeguarded Newton in global coordinates
    const double shift = spec_.shift();
    double lo = finite_lo(p) + shift;
    double hi = finite_hi(p) + shift;
    double x = std::clamp(guess + shift, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
      const double f = from_right ? target - survival(x) : cdf(x) - target;
      if (f == 0.0) return x;
      if (f > 0) hi = x;
      else lo = x;
      const double rho = density(x);
      double next = rho > 0 ? x - f / rho : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::fabs(next - x);
      x = next;
      if (step <= 4e-16 * std::max(1.0, std::fabs(x)) || hi - lo <= 4e-16 * std::max(1.0, std::fabs(x))) break;
    }
    return x;
  }

  // Unbounded piece ends replaced by a point far beyond any representable tail mass.
  static double finite_lo(const PotentialPiece& p) {
    return std::isfinite(p.lo) ? p.lo : std::min(p.hi, 0.0) - 40.0 - std::fabs(p.slope);
  }
  static double finite_hi(const PotentialPiece& p) {
    return std::isfinite(p.hi) ? p.hi : std::max(p.lo, 0.0) + 40.0 + std::fabs(p.slope);
  }

  PotentialSpec spec_;
  double log_z_ = 0.0;
  std::vector<double> piece_log_mass_;
  std::vector<double> prefix_;
  std::vector<double> suffix_;
};

/**
 * Makes 𝔪 a probability measure. Tabulated potentials must pass the
 * 512-point midpoint certificate first; a mass that is zero or infinite in
 * double precision raises NonIntegrableError.
 */
inline Measure1D normalize(const PotentialSpec& spec) {
  if (spec.needs_numeric_convexity_check()) {
    const ConvexityReport rep = check_one_convexity(spec, 512, 1e-9);
    if (!rep.pass) {
      std::ostringstream os;
      os << "tabulated potential is not 1-convex (worst midpoint violation " << rep.worst_violation << ")";
      throw ConvexityError(os.str());
    }
  }
  return Measure1D(spec);
}

inline Measure1D standard_gaussian() { return Measure1D(PotentialSpec::gaussian()); }

// ---------------------------------------------------------------------------
// Perimeters and the Gaussian profile
// ---------------------------------------------------------------------------

enum class Side { left, right };

/// Perimeter of (-∞, a] ∩ I (side = left) or [a, ∞) ∩ I (side = right): e^{-ψ(a)} for a ∈ I, else 0.
inline double half_line_perimeter(const Measure1D& m, double a, Side side = Side::left) {
  (void)side;  // a single boundary point either way
  return m.density(a);
}

/// I_γ(θ) = e^{-a_θ²/2}/√(2π).
inline double gaussian_profile(double theta) { return gaussian_pdf(gaussian_quantile(theta)); }

/// Finite union of disjoint open sub-intervals of the domain.
struct BoundarySet {
  std::vector<Interval> intervals;
  double total_measure = 0.0;
  std::vector<double> boundary_points;
};

/// Clips to the domain, sorts, merges touching parts; overlapping parts are rejected.
inline BoundarySet make_boundary_set(const Measure1D& m, std::vector<Interval> parts) {
  const Interval& dom = m.domain();
  std::vector<Interval> clipped;
  for (const Interval& p : parts) {
    const double lo = std::max(p.lo, dom.lo);
    const double hi = std::min(p.hi, dom.hi);
    if (lo < hi) clipped.emplace_back(lo, hi);
  }
  std::sort(clipped.begin(), clipped.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  BoundarySet out;
  for (const Interval& p : clipped) {
    if (!out.intervals.empty()) {
      Interval& last = out.intervals.back();
      if (p.lo < last.hi) throw std::invalid_argument("boundary set parts overlap");
      if (p.lo == last.hi) {
        last.hi = p.hi;
        continue;
      }
    }
    out.intervals.push_back(p);
  }
  for (const Interval& p : out.intervals) {
    out.total_measure += m.mass(p.lo, p.hi);
    if (std::isfinite(p.lo)) out.boundary_points.push_back(p.lo);
    if (std::isfinite(p.hi)) out.boundary_points.push_back(p.hi);
  }
  return out;
}

/// Σ e^{-ψ(x)} over boundary points strictly inside the domain.
inline double perimeter(const Measure1D& m, const BoundarySet& set) {
  double sum = 0.0;
  for (double x : set.boundary_points) {
    if (m.domain().contains(x)) sum += m.density(x);
  }
  return sum;
}

struct MinimizerResult {
  BoundarySet set;
  double perimeter = 0.0;
  int components = 0;
  int interior_boundary_points = 0;
  /// min(e^{-ψ(q(θ))}, e^{-ψ(q(1-θ))}): the better of the two half-lines.
  double half_line_perimeter = 0.0;
  [[nodiscard]] bool is_half_line() const { return components == 1 && interior_boundary_points == 1; }
};

/**
 * Exhaustive minimum perimeter over all unions of at most `max_components`
 * intervals whose endpoints lie on the mass grid {i·grid_step}, i.e. at the
 * quantiles q(i·grid_step) of 𝔪. Every candidate has measure exactly θ, so θ
 * must be a multiple of grid_step. The search is a dynamic program over grid
 * cells (state: cells taken, components opened, inside/outside), which
 * visits every admissible set once; domain ends are free.
 */
inline MinimizerResult brute_force_minimizer(const Measure1D& m, double theta, int max_components = 2,
                                             double grid_step = 1e-3) {
  if (!(theta > 0.0 && theta < 1.0)) {
    std::ostringstream os;
    os << "theta out of range (0,1): " << theta;
    throw DomainError(os.str());
  }
  if (max_components < 1 || max_components > 2) throw std::invalid_argument("max_components must be 1 or 2");
  if (!(grid_step > 0.0 && grid_step < 0.5)) throw std::invalid_argument("grid_step must lie in (0, 0.5)");
  const double cells_real = 1.0 / grid_step;
  const long cells_l = std::lround(cells_real);
  const double taken_real = theta * static_cast<double>(cells_l);
  const long taken_l = std::lround(taken_real);
  if (std::fabs(cells_real - static_cast<double>(cells_l)) > 1e-6 * cells_real ||
      std::fabs(taken_real - static_cast<double>(taken_l)) > 1e-6 || taken_l <= 0 || taken_l >= cells_l ||
      cells_l > 200000) {
    std::ostringstream os;
    os << "infeasible theta/grid combination: theta=" << theta << " is not a multiple of grid_step=" << grid_step;
    throw std::invalid_argument(os.str());
  }
  const int M = static_cast<int>(cells_l);
  const int K = static_cast<int>(taken_l);
  const int C = max_components;

  // node i sits at mass i/M; nodes 0 and M are the domain ends
  std::vector<double> node_x(M + 1);
  std::vector<double> node_cost(M + 1, 0.0);
  node_x[0] = m.domain().lo;
  node_x[M] = m.domain().hi;
  for (int i = 1; i < M; ++i) {
    node_x[i] = 2 * i <= M ? m.quantile(static_cast<double>(i) / M) : m.upper_quantile(static_cast<double>(M - i) / M);
    node_cost[i] = m.density(node_x[i]);
  }

  const int S = (K + 1) * (C + 1) * 2;
  auto idx = [C](int k, int c, int in) { return (k * (C + 1) + c) * 2 + in; };
  std::vector<double> cur(S, kInf);
  std::vector<double> nxt(S, kInf);
  std::vector<std::uint8_t> from_in(static_cast<std::size_t>(M) * S, 0);
  cur[idx(0, 0, 0)] = 0.0;
  cur[idx(1, 1, 1)] = 0.0;
  for (int cell = 1; cell < M; ++cell) {
    std::fill(nxt.begin(), nxt.end(), kInf);
    const double cost = node_cost[cell];
    std::uint8_t* back = &from_in[static_cast<std::size_t>(cell) * S];
    for (int k = 0; k <= K; ++k) {
      for (int c = 0; c <= C; ++c) {
        // stay / leave: cell is outside
        {
          const double stay = cur[idx(k, c, 0)];
          const double leave = cur[idx(k, c, 1)] + cost;
          const int j = idx(k, c, 0);
          if (leave < stay) {
            nxt[j] = leave;
            back[j] = 1;
          } else {
            nxt[j] = stay;
            back[j] = 0;
          }
        }
        // continue / enter: cell is inside
        if (k >= 1) {
          const double cont = cur[idx(k - 1, c, 1)];
          const double enter = c >= 1 ? cur[idx(k - 1, c - 1, 0)] + cost : kInf;
          const int j = idx(k, c, 1);
          if (enter < cont) {
            nxt[j] = enter;
            back[j] = 0;
          } else {
            nxt[j] = cont;
            back[j] = 1;
          }
        }
      }
    }
    std::swap(cur, nxt);
  }

  double best = kInf;
  int best_c = 0;
  int best_in = 0;
  for (int c = 0; c <= C; ++c) {
    for (int in = 0; in < 2; ++in) {
      if (cur[idx(K, c, in)] < best) {
        best = cur[idx(K, c, in)];
        best_c = c;
        best_in = in;
      }
    }
  }
  if (!std::isfinite(best)) throw std::invalid_argument("infeasible theta/grid combination: no admissible set");

  // walk back through the cells
  std::vector<std::uint8_t> inside(M, 0);
  int k = K;
  int c = best_c;
  int in = best_in;
  for (int cell = M - 1; cell >= 0; --cell) {
    inside[cell] = static_cast<std::uint8_t>(in);
    if (cell == 0) break;
    const int prev_in = from_in[static_cast<std::size_t>(cell) * S + idx(k, c, in)];
    if (in == 1) {
      if (prev_in == 0) --c;
      --k;
    }
    in = prev_in;
  }

  std::vector<Interval> parts;
  int interior = 0;
  for (int cell = 0; cell < M;) {
    if (!inside[cell]) {
      ++cell;
      continue;
    }
    int end = cell;
    while (end < M && inside[end]) ++end;
    parts.emplace_back(node_x[cell], node_x[end]);
    interior += (cell > 0) + (end < M);
    cell = end;
  }

  MinimizerResult out;
  out.set = make_boundary_set(m, parts);
  out.perimeter = best;
  out.components = static_cast<int>(parts.size());
  out.interior_boundary_points = interior;
  out.half_line_perimeter = std::min(m.density(m.quantile(theta)), m.density(m.upper_quantile(theta)));
  return out;
}

}  // namespace isolab
