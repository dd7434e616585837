#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "isolab/measure1d.hpp"

using namespace isolab;

namespace {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53); }
  int integer(int lo, int hi) { return lo + static_cast<int>((*this)(0, hi - lo + 1 - 1e-12)); }

 private:
  std::mt19937_64 rng_;
};

struct Perturbation {
  std::vector<double> breakpoints;
  std::vector<double> slopes;
};

Perturbation random_perturbation(Uniform& u) {
  Perturbation p;
  const int k = u.integer(1, 3);
  for (int i = 0; i < k; ++i) p.breakpoints.push_back(u(-2, 2));
  std::sort(p.breakpoints.begin(), p.breakpoints.end());
  p.slopes.push_back(u(-1, 1));
  for (int i = 0; i < k; ++i) p.slopes.push_back(p.slopes.back() + u(0.2, 1.5));
  return p;
}

// g(x) with g(0) = 0, written from the definition without the library's piece tables.
double reference_g(const Perturbation& p, double x) {
  auto integral_from_zero = [&](double t) {
    // ∫_0^t g'(s) ds with g' piecewise constant
    std::vector<double> cuts{0.0, t};
    for (double b : p.breakpoints)
      if ((b > 0 && b < t) || (b < 0 && b > t)) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
      std::size_t j = 0;
      while (j < p.breakpoints.size() && mid >= p.breakpoints[j]) ++j;
      sum += p.slopes[j] * (cuts[i + 1] - cuts[i]);
    }
    return t >= 0 ? sum : -sum;
  };
  return integral_from_zero(x);
}

double reference_density(const Perturbation& p, double x, double z) {
  return std::exp(-(0.5 * x * x + reference_g(p, x))) / z;
}

double reference_normalizer(const Perturbation& p) {
  boost::math::quadrature::tanh_sinh<double> ts;
  std::vector<double> cuts{-40.0};
  for (double b : p.breakpoints) cuts.push_back(b);
  cuts.push_back(40.0);
  double z = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    z += ts.integrate([&](double x) { return std::exp(-(0.5 * x * x + reference_g(p, x))); }, cuts[i], cuts[i + 1]);
  return z;
}

}  // namespace

TEST(Gaussian, MatchesClosedForms) {
  const auto g = standard_gaussian();
  EXPECT_NEAR(g.log_normalizer(), 0.5 * std::log(2 * M_PI), 1e-15);
  for (double x : {-3.0, -0.5, 0.0, 1.0, 2.5}) {
    EXPECT_NEAR(g.density(x), std::exp(-x * x / 2) / std::sqrt(2 * M_PI), 1e-16);
    EXPECT_NEAR(g.cdf(x), 0.5 * std::erfc(-x / std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(g.right_derivative(x), x, 1e-15);
  }
  EXPECT_EQ(g.domain(), Interval::whole_line());
}

TEST(Gaussian, TranslationShiftsEverything) {
  const auto g = standard_gaussian().translated(3.0);
  for (double x : {-1.0, 2.0, 3.0, 4.5}) {
    EXPECT_NEAR(g.density(x), std::exp(-(x - 3) * (x - 3) / 2) / std::sqrt(2 * M_PI), 1e-16);
    EXPECT_NEAR(g.cdf(x), 0.5 * std::erfc(-(x - 3) / std::sqrt(2.0)), 1e-15);
  }
  EXPECT_NEAR(g.quantile(0.5), 3.0, 1e-14);
}

TEST(Truncated, DensityAndCdfAgainstClosedForm) {
  const double lo = -1.3, hi = 2.1;
  const auto m = normalize(PotentialSpec::truncated_gaussian(Interval(lo, hi)));
  auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double z = Phi(hi) - Phi(lo);
  for (double x = lo + 0.01; x < hi; x += 0.1) {
    EXPECT_NEAR(m.density(x), std::exp(-x * x / 2) / std::sqrt(2 * M_PI) / z, 1e-14);
    EXPECT_NEAR(m.cdf(x), (Phi(x) - Phi(lo)) / z, 1e-14);
  }
  EXPECT_EQ(m.density(lo - 0.1), 0.0);
  EXPECT_EQ(m.density(hi + 0.1), 0.0);
  EXPECT_EQ(m.cdf(lo - 1), 0.0);
  EXPECT_EQ(m.cdf(hi + 1), 1.0);
}

TEST(Truncated, SymmetricHalfWidthTwo) {
  const auto m = normalize(PotentialSpec::truncated_gaussian(2.0));
  EXPECT_NEAR(m.density(0.0), 0.41795955023513457, 1e-15);
  EXPECT_NEAR(m.quantile(0.5), 0.0, 1e-14);
  EXPECT_NEAR(m.mass(-2, 2), 1.0, 1e-14);
}

TEST(Truncated, FarTailWindowStaysNormalized) {
  const auto m = normalize(PotentialSpec::truncated_gaussian(Interval(30.0, 31.0)));
  EXPECT_NEAR(m.cdf(31.0), 1.0, 1e-14);
  const double q = m.quantile(0.5);
  EXPECT_GT(q, 30.0);
  EXPECT_NEAR(m.cdf(q), 0.5, 1e-12);
}

TEST(Perturbed, AgreesWithIndependentQuadratureOracle) {
  Uniform u(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_perturbation(u);
    const auto m = normalize(PotentialSpec::perturbed_gaussian(p.breakpoints, p.slopes));
    const double z = reference_normalizer(p);
    EXPECT_NEAR(m.log_normalizer(), std::log(z), 1e-12) << trial;
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double x = -3.0; x <= 3.0; x += 0.37) {
      EXPECT_LT(std::fabs(m.density(x) / reference_density(p, x, z) - 1.0), 1e-12) << trial << " x=" << x;
    }
    // cdf at 0.25 by direct integration of the reference density
    std::vector<double> cuts{-40.0};
    for (double b : p.breakpoints)
      if (b < 0.25) cuts.push_back(b);
    cuts.push_back(0.25);
    double cdf = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      cdf += ts.integrate([&](double x) { return reference_density(p, x, z); }, cuts[i], cuts[i + 1]);
    EXPECT_NEAR(m.cdf(0.25), cdf, 1e-12) << trial;
  }
}

TEST(Perturbed, RightDerivativeIncludesSlope) {
  const auto m = normalize(PotentialSpec::perturbed_gaussian({0.0}, {-0.5, 0.75}));
  EXPECT_NEAR(m.right_derivative(-1.0), -1.0 - 0.5, 1e-15);
  EXPECT_NEAR(m.right_derivative(0.0), 0.0 + 0.75, 1e-15);
  EXPECT_NEAR(m.right_derivative(2.0), 2.0 + 0.75, 1e-15);
}

TEST(Perturbed, DecreasingSlopesRejected) {
  EXPECT_THROW((void)PotentialSpec::perturbed_gaussian({0.0}, {1.0, 0.5}), ConvexityError);
  EXPECT_THROW((void)PotentialSpec::perturbed_gaussian({0.0, 1.0}, {1.0}), std::invalid_argument);
}

TEST(Measure, QuantileRoundTripProperty) {
  Uniform u(22);
  std::vector<Measure1D> ms{standard_gaussian(), normalize(PotentialSpec::truncated_gaussian(1.5)),
                            normalize(PotentialSpec::truncated_gaussian(Interval(-kInf, 0.4))),
                            normalize(PotentialSpec::truncated_gaussian(Interval(-0.2, kInf)))};
  for (int i = 0; i < 5; ++i) {
    const auto p = random_perturbation(u);
    ms.push_back(normalize(PotentialSpec::perturbed_gaussian(p.breakpoints, p.slopes)).translated(u(-2, 2)));
  }
  for (std::size_t k = 0; k < ms.size(); ++k) {
    for (int i = 0; i < 200; ++i) {
      const double theta = u(1e-9, 1 - 1e-9);
      const double x = ms[k].quantile(theta);
      EXPECT_NEAR(ms[k].cdf(x), theta, 1e-12) << k << " theta=" << theta;
      EXPECT_NEAR(ms[k].cdf(x) + ms[k].survival(x), 1.0, 1e-14);
    }
  }
}

TEST(Measure, DensityIntegratesToOne) {
  Uniform u(23);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_perturbation(u);
    const auto m = normalize(PotentialSpec::perturbed_gaussian(p.breakpoints, p.slopes, Interval(-1.5, 2.5)));
    std::vector<double> cuts{-1.5};
    for (double b : p.breakpoints)
      if (b > -1.5 && b < 2.5) cuts.push_back(b);
    cuts.push_back(2.5);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      total += ts.integrate([&](double x) { return m.density(x); }, cuts[i], cuts[i + 1]);
    EXPECT_NEAR(total, 1.0, 1e-10) << trial;
  }
}

TEST(Measure, QuantileRejectsOutOfRange) {
  const auto g = standard_gaussian();
  EXPECT_THROW((void)g.quantile(0.0), DomainError);
  EXPECT_THROW((void)g.quantile(1.0), DomainError);
  EXPECT_THROW((void)g.upper_quantile(1.2), DomainError);
}

TEST(Tabulated, ExactOnPiecewiseLinearExcess) {
  // ψ̂ = x²/2 + |x| tabulated on a grid containing 0: the interpolated excess is exact.
  std::vector<double> xs, vs;
  for (int i = -600; i <= 600; ++i) {
    const double x = i * 0.01;
    xs.push_back(x);
    vs.push_back(0.5 * x * x + std::fabs(x));
  }
  const auto tab = normalize(PotentialSpec::tabulated(xs, vs));
  const auto ref = normalize(PotentialSpec::perturbed_gaussian({0.0}, {-1.0, 1.0}, Interval(-6.0, 6.0)));
  for (double x = -5.5; x <= 5.5; x += 0.173) EXPECT_NEAR(tab.density(x), ref.density(x), 1e-13) << x;
  EXPECT_NEAR(tab.right_derivative(0.0), 1.0, 1e-12);
  EXPECT_NEAR(tab.right_derivative(-1.0), -2.0, 1e-12);
}

TEST(Tabulated, NonConvexRejected) {
  std::vector<double> xs, vs;
  for (int i = 0; i <= 80; ++i) {
    xs.push_back(-4.0 + 0.1 * i);
    vs.push_back(xs.back() * xs.back() / 4.0);
  }
  const auto spec = PotentialSpec::tabulated(xs, vs);
  EXPECT_FALSE(check_one_convexity(spec).pass);
  EXPECT_THROW((void)normalize(spec), ConvexityError);
}

TEST(Tabulated, LoadsFromCsv) {
  const std::filesystem::path path = std::filesystem::path(ISOLAB_SOURCE_DIR) / "configs" / "tabulated_example.csv";
  const auto spec = load_tabulated_csv(path);
  EXPECT_TRUE(spec.needs_numeric_convexity_check());
  const auto m = normalize(spec);
  EXPECT_NEAR(m.cdf(m.quantile(0.3)), 0.3, 1e-12);
}

TEST(Convexity, StructuralFamiliesPass) {
  Uniform u(24);
  EXPECT_TRUE(check_one_convexity(PotentialSpec::gaussian()).pass);
  EXPECT_TRUE(check_one_convexity(PotentialSpec::truncated_gaussian(1.0)).pass);
  for (int i = 0; i < 5; ++i) {
    const auto p = random_perturbation(u);
    EXPECT_TRUE(check_one_convexity(PotentialSpec::perturbed_gaussian(p.breakpoints, p.slopes), 128).pass);
  }
}

TEST(Perimeter, HalfLinesAndProfile) {
  const auto g = standard_gaussian();
  for (double theta : {0.1, 0.3, 0.5, 0.9}) {
    const double a = g.quantile(theta);
    EXPECT_NEAR(half_line_perimeter(g, a), gaussian_profile(theta), 1e-15);
    EXPECT_NEAR(gaussian_profile(theta), gaussian_profile(1 - theta), 1e-15);
  }
  const auto set = make_boundary_set(g, {Interval(-kInf, 0.0)});
  EXPECT_NEAR(set.total_measure, 0.5, 1e-15);
  EXPECT_NEAR(perimeter(g, set), 1 / std::sqrt(2 * M_PI), 1e-16);
}

TEST(Perimeter, BoundarySetMergesAndClips) {
  const auto m = normalize(PotentialSpec::truncated_gaussian(1.0));
  const auto s = make_boundary_set(m, {Interval(0.0, 0.5), Interval(-3.0, 0.0)});
  ASSERT_EQ(s.intervals.size(), 1u);
  EXPECT_EQ(s.intervals[0], Interval(-1.0, 0.5));
  // the clipped end -1 is a domain end and carries no perimeter
  EXPECT_NEAR(perimeter(m, s), m.density(0.5), 1e-16);
  EXPECT_THROW((void)make_boundary_set(m, {Interval(0.0, 0.5), Interval(0.4, 0.8)}), std::invalid_argument);
}

namespace {

// Exhaustive enumeration of unions of ≤ 2 grid intervals with measure θ.
double naive_minimum(const Measure1D& m, int cells, int taken) {
  std::vector<double> node(cells + 1);
  for (int i = 1; i < cells; ++i) node[i] = m.density(m.quantile(static_cast<double>(i) / cells));
  node[0] = node[cells] = 0.0;
  double best = kInf;
  for (int a = 0; a + taken <= cells; ++a) best = std::min(best, node[a] + node[a + taken]);
  for (int a = 0; a < cells; ++a)
    for (int b = a + 1; b < cells; ++b) {
      const int first = b - a;
      if (first >= taken) break;
      for (int c = b + 1; c + (taken - first) <= cells; ++c)
        best = std::min(best, node[a] + node[b] + node[c] + node[c + taken - first]);
    }
  return best;
}

}  // namespace

TEST(Minimizer, MatchesNaiveEnumerationOnCoarseGrid) {
  Uniform u(25);
  for (int trial = 0; trial < 6; ++trial) {
    const auto p = random_perturbation(u);
    const auto m = normalize(PotentialSpec::perturbed_gaussian(p.breakpoints, p.slopes));
    for (int taken : {5, 17, 33}) {
      const double theta = taken / 40.0;
      const auto r = brute_force_minimizer(m, theta, 2, 1.0 / 40.0);
      EXPECT_NEAR(r.perimeter, naive_minimum(m, 40, taken), 1e-14) << trial << " theta=" << theta;
      EXPECT_NEAR(r.set.total_measure, theta, 1e-12);
    }
  }
}

TEST(Minimizer, GaussianHalfLineAtProfile) {
  for (double theta : {0.1, 0.5, 0.9}) {
    const auto r = brute_force_minimizer(standard_gaussian(), theta);
    EXPECT_NEAR(r.perimeter, gaussian_profile(theta), 1e-6) << theta;
    EXPECT_TRUE(r.is_half_line());
  }
}

TEST(Minimizer, TruncatedMinimumIsPerimeterOfHalfLine) {
  const auto m = normalize(PotentialSpec::truncated_gaussian(2.0));
  const auto r = brute_force_minimizer(m, 0.5);
  EXPECT_NEAR(r.perimeter, 0.41795955023513457, 1e-12);
  EXPECT_TRUE(r.is_half_line());
}

TEST(Minimizer, RejectsThetaOffGrid) {
  EXPECT_THROW((void)brute_force_minimizer(standard_gaussian(), 0.1234), std::invalid_argument);
  EXPECT_THROW((void)brute_force_minimizer(standard_gaussian(), 0.5, 3), std::invalid_argument);
  EXPECT_THROW((void)brute_force_minimizer(standard_gaussian(), 1.5), DomainError);
}
