#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "isolab/numerics.hpp"

using namespace isolab;

namespace {

// Reference values computed with mpmath at 40 significant digits.
struct Ref {
  double x;
  double value;
};

constexpr Ref kErfc[] = {
    {0.5, 0.4795001221869535},      {1.0, 0.15729920705028513},     {2.0, 0.004677734981047266},
    {3.0, 2.209049699858544e-05},   {4.0, 1.541725790028002e-08},   {6.0, 2.1519736712498913e-17},
    {10.0, 2.088487583762545e-45},
};

double rel_err(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

TEST(SpecialFunctions, ErfcMatchesReferenceTable) {
  for (const auto& r : kErfc) EXPECT_LT(rel_err(isolab::erfc(r.x), r.value), 1e-14) << "x = " << r.x;
}

TEST(SpecialFunctions, ErfcAgreesWithLibmAcrossRange) {
  for (double x = -6.0; x <= 26.0; x += 0.0137) {
    EXPECT_LT(rel_err(isolab::erfc(x), std::erfc(x)), 1e-13) << "x = " << x;
  }
}

TEST(SpecialFunctions, ErfAgreesWithLibm) {
  for (double x = -7.0; x <= 7.0; x += 0.0173) EXPECT_NEAR(isolab::erf(x), std::erf(x), 4e-15) << "x = " << x;
  EXPECT_EQ(isolab::erf(0.0), 0.0);
  EXPECT_NEAR(isolab::erf(std::sqrt(2.0)), 0.9544997361036416, 1e-15);
}

TEST(SpecialFunctions, ErfIsOdd) {
  Uniform u(11);
  for (int i = 0; i < 200; ++i) {
    const double x = u(-6, 6);
    EXPECT_EQ(isolab::erf(-x), -isolab::erf(x));
  }
}

TEST(SpecialFunctions, ErfcxIsScaledErfc) {
  for (double x : {0.0, 0.3, 1.0, 1.5, 2.0, 5.0, 10.0}) {
    EXPECT_LT(rel_err(erfcx(x), std::exp(x * x) * std::erfc(x)), 1e-13) << "x = " << x;
  }
  // asymptotically 1/(x√π)
  EXPECT_LT(rel_err(erfcx(1e6), 1.0 / (1e6 * std::sqrt(M_PI))), 1e-11);
}

TEST(GaussianCdf, KnownValues) {
  EXPECT_EQ(gaussian_cdf(0.0), 0.5);
  EXPECT_NEAR(gaussian_cdf(1.0), 0.8413447460685429, 1e-16);
  EXPECT_LT(rel_err(gaussian_cdf(-8.0), 6.220960574271784e-16), 1e-13);
  EXPECT_LT(rel_err(gaussian_cdf(-37.0), 5.725571222524577e-300), 1e-12);
}

TEST(GaussianCdf, SaturatesInExtremeTails) {
  EXPECT_EQ(gaussian_cdf(40.0), 1.0);
  EXPECT_EQ(gaussian_cdf(kInf), 1.0);
  EXPECT_EQ(gaussian_cdf(-kInf), 0.0);
  EXPECT_GE(gaussian_cdf(-40.0), 0.0);
  EXPECT_LT(gaussian_cdf(-40.0), 1e-300);
}

TEST(GaussianCdf, ComplementSymmetry) {
  Uniform u(12);
  for (int i = 0; i < 500; ++i) {
    const double x = u(-8, 8);
    EXPECT_NEAR(gaussian_cdf(x) + gaussian_cdf(-x), 1.0, 2e-16);
  }
}

TEST(GaussianCdf, MonotoneOnGrid) {
  double prev = 0.0;
  for (double x = -38.0; x <= 9.0; x += 0.01) {
    const double v = gaussian_cdf(x);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(GaussianCdf, LogCdfInDeepTail) {
  for (double x : {-5.0, -20.0, -30.0}) {
    EXPECT_LT(rel_err(log_gaussian_cdf(x), std::log(0.5 * std::erfc(-x / std::sqrt(2.0)))), 1e-13) << x;
  }
  // beyond underflow: log Φ(x) ≈ -x²/2 - log(-x√(2π))
  const double x = -60.0;
  EXPECT_NEAR(log_gaussian_cdf(x), -x * x / 2 - std::log(-x * std::sqrt(2 * M_PI)) - 1.0 / (x * x), 1e-6);
}

TEST(GaussianCdf, LogMassOfIntervals) {
  EXPECT_NEAR(log_gaussian_mass(-kInf, kInf), 0.0, 1e-16);
  EXPECT_NEAR(std::exp(log_gaussian_mass(-2, 2)), 0.9544997361036416, 1e-15);
  // far right tail interval, where Φ(b) - Φ(a) cancels catastrophically
  const double want = std::log(0.5 * (std::erfc(30 / std::sqrt(2.0)) - std::erfc(31 / std::sqrt(2.0))));
  EXPECT_LT(rel_err(log_gaussian_mass(30, 31), want), 1e-12);
}

TEST(GaussianQuantile, KnownValues) {
  EXPECT_EQ(gaussian_quantile(0.5), 0.0);
  EXPECT_NEAR(gaussian_quantile(0.841344746), 0.99999999971673, 1e-13);
  EXPECT_NEAR(gaussian_quantile(0.8413447460685429), 1.0, 1e-15);
}

TEST(GaussianQuantile, RoundTripProperty) {
  Uniform u(13);
  for (int i = 0; i < 2000; ++i) {
    const double theta = std::exp(u(-690, std::log(0.5)));
    const double x = gaussian_quantile(theta);
    // Φ has relative condition number ≈ x² at x, so rounding x costs ~x²·eps
    EXPECT_LT(rel_err(gaussian_cdf(x), theta), 1e-14 + 4e-16 * x * x) << "theta = " << theta;
    const double upper = 1.0 - theta;
    if (upper < 1.0) {
      const double lower = 1.0 - upper;  // exact
      EXPECT_NEAR(gaussian_quantile(upper), -gaussian_quantile(lower), 1e-12 * (1 + std::fabs(x)))
          << "theta = " << theta;
    }
  }
}

TEST(GaussianQuantile, Monotone) {
  double prev = -kInf;
  for (int i = 1; i < 1000; ++i) {
    const double q = gaussian_quantile(i / 1000.0);
    EXPECT_GT(q, prev);
    prev = q;
  }
}

TEST(GaussianQuantile, RejectsOutOfRange) {
  for (double t : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    try {
      (void)gaussian_quantile(t);
      ADD_FAILURE() << "no exception for " << t;
    } catch (const DomainError& e) {
      EXPECT_NE(std::string(e.what()).find("theta out of range"), std::string::npos);
    }
  }
}

TEST(Quadrature, PolynomialsAreExact) {
  for (int k = 0; k <= 12; ++k) {
    const double got = integrate([k](double x) { return std::pow(x, k); }, Interval(0.0, 1.0));
    EXPECT_NEAR(got, 1.0 / (k + 1), 1e-14) << "k = " << k;
  }
}

TEST(Quadrature, GaussianDensityOverLine) {
  const auto q = integrate_with_error([](double x) { return gaussian_pdf(x); }, Interval());
  EXPECT_NEAR(q.value, 1.0, 1e-14);
  EXPECT_LT(q.error, 1e-10);
  EXPECT_NEAR(integrate([](double x) { return gaussian_pdf(x); }, Interval(-2, 2)), 0.9544997361036416, 1e-15);
}

TEST(Quadrature, BreakpointsHandleKinks) {
  const double bps[] = {0.3};
  EXPECT_NEAR(integrate([](double x) { return std::fabs(x - 0.3); }, Interval(-1.0, 2.0), {}, bps),
              0.5 * 1.3 * 1.3 + 0.5 * 1.7 * 1.7, 1e-14);
}

TEST(Quadrature, AgreesWithBoostTanhSinhOnRandomSmoothIntegrands) {
  Uniform u(14);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (int i = 0; i < 25; ++i) {
    const double a = u(-1.5, 1.5), b = u(0.1, 2.0), lo = u(-4, 0), hi = lo + u(0.5, 6);
    auto f = [a, b](double x) { return std::exp(-0.5 * x * x + a * x) * std::cos(b * x) + 1.0; };
    const double ours = integrate(f, Interval(lo, hi));
    const double ref = ts.integrate(f, lo, hi);
    EXPECT_NEAR(ours, ref, 1e-11 * (1 + std::fabs(ref))) << i;
  }
}

TEST(Quadrature, AgreesWithBoostKronrodOnHalfLine) {
  auto f = [](double x) { return std::exp(-x) * x * x; };
  const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, kInf, 15, 1e-14);
  EXPECT_NEAR(integrate(f, Interval(0.0, kInf)), ref, 1e-11);
}

TEST(Quadrature, BudgetExhaustionRaisesConvergenceError) {
  QuadratureSettings s;
  s.max_subdivisions = 8;
  EXPECT_THROW((void)integrate([](double x) { return std::sin(1.0 / x); }, Interval(1e-4, 1.0), s), ConvergenceError);
}

TEST(Quadrature, SettingsValidation) {
  QuadratureSettings s;
  s.abs_tol = -1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.tail_cutoff = 5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  EXPECT_NO_THROW(QuadratureSettings{}.validate());
}

TEST(RootFinding, SimpleRoots) {
  EXPECT_NEAR(find_root([](double x) { return x * x - 2; }, Interval(0, 2)), std::sqrt(2.0), 1e-12);
  const double r = find_root([](double x) { return std::cos(x) - x; }, Interval(0, 1));
  EXPECT_NEAR(std::cos(r), r, 1e-12);
}

TEST(RootFinding, RandomCubicsProperty) {
  Uniform u(15);
  for (int i = 0; i < 200; ++i) {
    const double root = u(-3, 3), c = u(0.1, 4);
    auto f = [=](double x) { return (x - root) * ((x - root) * (x - root) + c); };
    EXPECT_NEAR(find_root(f, Interval(-5, 5), 1e-13), root, 1e-12);
  }
}

TEST(RootFinding, SameSignBracketRejected) {
  EXPECT_THROW((void)find_root([](double x) { return x * x + 1; }, Interval(-1, 1)), BracketError);
}

TEST(RootFinding, InfiniteBracketRejected) {
  EXPECT_THROW((void)find_root([](double x) { return x; }, Interval(-kInf, 1.0)), BracketError);
}

TEST(IntervalType, Basics) {
  EXPECT_THROW(Interval(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Interval(2.0, 1.0), std::invalid_argument);
  const Interval i(-1, 2);
  EXPECT_TRUE(i.contains(0.0));
  EXPECT_FALSE(i.contains(-1.0));
  EXPECT_FALSE(i.contains(2.0));
  EXPECT_TRUE(Interval::whole_line().contains(1e300));
  EXPECT_EQ(i.translated(1.0), Interval(0, 3));
  EXPECT_TRUE(i.is_subset_of(Interval::whole_line()));
}
