#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tailblend/math/special.hpp"

using namespace tailblend;

namespace {

// Romberg integration, independent of the adaptive Simpson used by the
// library; oracle for the Debye integral.
template <class F>
double romberg(const F& f, double a, double b, int levels = 18) {
    std::vector<double> row(levels), prev(levels);
    double h = b - a;
    prev[0] = 0.5 * h * (f(a) + f(b));
    for (int i = 1; i < levels; ++i) {
        h *= 0.5;
        long n = 1L << (i - 1);
        double s = 0.0;
        for (long k = 0; k < n; ++k) s += f(a + (2 * k + 1) * h);
        row[0] = 0.5 * prev[0] + h * s;
        double p4 = 4.0;
        for (int j = 1; j <= i; ++j) {
            row[j] = (p4 * row[j - 1] - prev[j - 1]) / (p4 - 1.0);
            p4 *= 4.0;
        }
        std::swap(row, prev);
    }
    return prev[levels - 1];
}

} // namespace

TEST_CASE("debye1 limit, reference value and quadrature oracle") {
    CHECK(math::debye1(0.0) == 1.0);
    CHECK(math::debye1(1e-14) == Catch::Approx(1.0).margin(1e-10));

    auto integrand = [](double t) { return t < 1e-10 ? 1.0 : t / std::expm1(t); };
    double oracle1 = romberg(integrand, 0.0, 1.0);
    CHECK(math::debye1(1.0) == Catch::Approx(oracle1).epsilon(1e-10));
    CHECK(math::debye1(1.0) == Catch::Approx(0.7775046341).epsilon(1e-9));

    for (double x : {0.25, 2.0, 4.0, 10.0}) {
        double oracle = romberg(integrand, 0.0, x) / x;
        CHECK(math::debye1(x) == Catch::Approx(oracle).epsilon(1e-9));
    }
    // reflection identity
    CHECK(math::debye1(-3.0) == Catch::Approx(math::debye1(3.0) + 1.5).epsilon(1e-12));
}

TEST_CASE("normal cdf/quantile round trip") {
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9}) {
        CHECK(math::norm_cdf(math::norm_quantile(p)) == Catch::Approx(p).epsilon(1e-10));
    }
    CHECK(math::norm_quantile(0.5) == Catch::Approx(0.0).margin(1e-14));
    CHECK(math::norm_cdf(0.0) == Catch::Approx(0.5));
    CHECK(math::norm_cdf(1.959963984540054) == Catch::Approx(0.975).epsilon(1e-12));
}

TEST_CASE("student t cdf against closed forms at df 1 and 2") {
    for (double x : {-4.0, -1.3, -0.2, 0.0, 0.5, 2.7, 8.0}) {
        double cauchy = 0.5 + std::atan(x) / math::pi;
        CHECK(math::t_cdf(x, 1.0) == Catch::Approx(cauchy).margin(1e-12));
        double df2 = 0.5 + x / (2.0 * std::sqrt(2.0 + x * x));
        CHECK(math::t_cdf(x, 2.0) == Catch::Approx(df2).margin(1e-12));
    }
}

TEST_CASE("student t quantile inverts the cdf") {
    for (double df : {1.0, 2.0, 4.7, 9.06, 30.0, 120.0}) {
        for (double p : {1e-8, 0.001, 0.115, 0.5, 0.83, 0.999}) {
            double x = math::t_quantile(p, df);
            CHECK(math::t_cdf(x, df) == Catch::Approx(p).epsilon(1e-9));
        }
    }
}

TEST_CASE("regularized incomplete gamma and its inverse") {
    CHECK(math::gamma_p(1.0, 1.0) == Catch::Approx(1.0 - std::exp(-1.0)).epsilon(1e-13));
    // chi-square(2) median
    CHECK(math::gamma_p_inv(1.0, 0.5) == Catch::Approx(std::log(2.0)).epsilon(1e-10));
    for (double a : {0.3, 1.0, 2.0, 6.0, 55.0}) {
        for (double p : {1e-6, 0.05, 0.5, 0.93, 1.0 - 1e-7}) {
            double x = math::gamma_p_inv(a, p);
            CHECK(math::gamma_p(a, x) == Catch::Approx(p).epsilon(1e-9));
        }
    }
    CHECK(math::gamma_quantile(0.5, 2.0, 0.1) ==
          Catch::Approx(math::gamma_p_inv(2.0, 0.5) / 0.1).epsilon(1e-12));
}

TEST_CASE("incomplete beta basics") {
    CHECK(math::inc_beta(1.0, 1.0, 0.3) == Catch::Approx(0.3).epsilon(1e-13));
    // I_x(2,2) = 3x^2 - 2x^3
    for (double x : {0.1, 0.42, 0.9}) {
        CHECK(math::inc_beta(2.0, 2.0, x) ==
              Catch::Approx(3.0 * x * x - 2.0 * x * x * x).epsilon(1e-12));
    }
}

TEST_CASE("digamma and trigamma recurrences") {
    // psi(1) = -gamma_E, psi'(1) = pi^2/6
    CHECK(math::digamma(1.0) == Catch::Approx(-0.5772156649015329).epsilon(1e-12));
    CHECK(math::trigamma(1.0) == Catch::Approx(math::pi * math::pi / 6.0).epsilon(1e-12));
    for (double x : {0.2, 1.7, 5.5, 40.0}) {
        CHECK(math::digamma(x + 1.0) == Catch::Approx(math::digamma(x) + 1.0 / x).epsilon(1e-12));
        CHECK(math::trigamma(x + 1.0) ==
              Catch::Approx(math::trigamma(x) - 1.0 / (x * x)).epsilon(1e-11));
    }
}

TEST_CASE("gamma density integrates against cdf") {
    double shape = 2.0, rate = 0.1;
    double mid = math::gamma_cdf(20.0, shape, rate);
    CHECK(mid == Catch::Approx(math::gamma_p(2.0, 2.0)).epsilon(1e-13));
    double h = 1e-5;
    double fd = (math::gamma_cdf(20.0 + h, shape, rate) - math::gamma_cdf(20.0 - h, shape, rate)) / (2.0 * h);
    CHECK(std::exp(math::gamma_logpdf(20.0, shape, rate)) == Catch::Approx(fd).epsilon(1e-8));
}
