#include <doctest.h>

#include <cmath>

#include "needle/density1d.hpp"
#include "needle/intervals.hpp"
#include "needle/profile.hpp"

using namespace needle;

namespace {

// Independent oracle for I_D: composite Simpson cdf of sin^{N-1}(xi + t) on [0, D],
// quantiles by bisection, minimized over a xi grid.
double simpsonCdf(double N, double xi, double x, int m = 4000) {
    double h = x / m, s = 0.0;
    for (int i = 0; i <= m; ++i) {
        double w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
        s += w * std::pow(std::sin(xi + i * h), N - 1);
    }
    return s * h / 3;
}

double oracleWindowProfile(double N, double D, double xi, double v) {
    double total = simpsonCdf(N, xi, D);
    auto q = [&](double m) {
        double lo = 0, hi = D;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (simpsonCdf(N, xi, mid, 400) / simpsonCdf(N, xi, D, 400) < m ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    double rm = q(v), rp = q(1 - v);
    return std::min(std::pow(std::sin(xi + rm), N - 1), std::pow(std::sin(xi + rp), N - 1)) / total;
}

}  // namespace

TEST_CASE("window mass") {
    for (double D : {0.5, 1.5, 2.9}) CHECK(lambdaOf(2.0, D, 0.0) == doctest::Approx((1 - std::cos(D)) / 2));
    CHECK(lambdaOf(3.0, kPi / 2, 0.0) == doctest::Approx(0.5));
    for (double N : {1.7, 2.0, 4.0}) CHECK(lambdaOf(N, kPi, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("model profile on the full segment") {
    for (double v : {0.05, 0.3, 0.5, 0.77}) CHECK(modelProfile(2.0, kPi, v).value == doctest::Approx(std::sqrt(v * (1 - v))).epsilon(1e-12));
    CHECK(modelProfile(2.0, kPi, 0.5).value == doctest::Approx(0.5));
    for (double N : {2.5, 3.0, 6.0})
        for (double v : {0.1, 0.35}) CHECK(modelProfile(N, kPi, v).value == doctest::Approx(modelProfile(N, kPi, 1 - v).value).epsilon(1e-10));
}

TEST_CASE("model profile below pi matches a xi grid search") {
    const double N = 2.0, D = kPi - 0.2, v = 0.3;
    double best = 1e9;
    for (int i = 0; i <= 200; ++i) best = std::min(best, oracleWindowProfile(N, D, 0.2 * i / 200, v));
    ModelProfile p = modelProfile(N, D, v);
    CHECK(p.value <= best + 1e-9);
    CHECK(p.value == doctest::Approx(best).epsilon(1e-4));
    CHECK(windowProfile(N, D, 0.07, v) == doctest::Approx(oracleWindowProfile(N, D, 0.07, v)).epsilon(1e-8));
}

TEST_CASE("quantile radii") {
    Density1D h2 = Density1D::model(2.0);
    QuantileRadii q = quantileRadii(h2, 0.5);
    CHECK(q.rMinus == doctest::Approx(kPi / 2).epsilon(1e-10));
    CHECK(q.rPlus == doctest::Approx(kPi / 2).epsilon(1e-10));
    for (double v : {0.1, 0.3, 0.8}) CHECK(quantileRadii(h2, v).rMinus == doctest::Approx(std::acos(1 - 2 * v)).epsilon(1e-9));
    const double v = 0.3, dv = 1e-6;
    double slope = (quantileRadii(h2, v + dv).rMinus - quantileRadii(h2, v).rMinus) / dv;
    CHECK(std::abs(slope - 1.0 / h2(quantileRadii(h2, v).rMinus)) < 1e-4);
}

TEST_CASE("one-dimensional deficit") {
    Density1D h2 = Density1D::model(2.0);
    const double v = 0.3;
    QuantileRadii q = quantileRadii(h2, v);
    CHECK(std::abs(deficit1d(h2, IntervalSet(kPi, {{0.0, q.rMinus}}), v)) < 1e-9);
    // Interior interval [a, a + l] of mass v.
    const double a = 0.5;
    double b = std::acos(std::cos(a) - 2 * v);
    double expect = h2(a) + h2(b) - std::sqrt(v * (1 - v));
    CHECK(deficit1d(h2, IntervalSet(kPi, {{a, b}}), v) == doctest::Approx(expect).epsilon(1e-9));
    CHECK_THROWS_AS(deficit1d(h2, IntervalSet(kPi, {{0.0, 1.0}}), v), Error);
}

TEST_CASE("profile identity") {
    CHECK(profileIdentityCheck(2.0, kPi, 0.0, 0.3).gap < 1e-12);
    CHECK(profileIdentityCheck(2.0, 2.8, 0.1, 0.4).gap <= 1e-8);
    CHECK(profileIdentityCheck(3.0, 2.2, 0.3, 0.15).gap <= 1e-8);
}

TEST_CASE("concavity gap") {
    ConcavityGap g = concavityGap(2.0, kPi, 0.0, 0.3);
    CHECK(g.gap == doctest::Approx(0.0));
    CHECK(g.bound == doctest::Approx(0.0));
    CHECK(smallVolumeProfileLimit(2.0) == doctest::Approx(1.0).epsilon(1e-3));
    // With xi = 0 the gap is concave in lambda and vanishes at 1, so it sits under its tangent
    // C1 (1 - lambda) and only reaches the bound asymptotically.
    const double v = 0.3;
    const double I = std::sqrt(v * (1 - v)), dI = (1 - 2 * v) / (2 * I);
    for (double D : {3.0, 2.5, 2.0}) {
        ConcavityGap c = concavityGap(2.0, D, 0.0, v);
        double lam = lambdaOf(2.0, D, 0.0);
        CHECK(c.gap > 0.0);
        CHECK(c.gap <= (I - v * dI) * (1 - lam) + 1e-12);
        CHECK(c.gap >= 0.8 * c.bound);
    }
    ConcavityGap near = concavityGap(2.0, ModelDensity(2.0).quantile(1 - 1e-7), 0.0, 0.5);
    CHECK(near.gap / near.bound == doctest::Approx(1.0).epsilon(1e-5));
    // Centered windows keep a margin.
    for (double D : {3.0, 2.5, 2.0}) CHECK(concavityGap(2.0, D, 0.5 * (kPi - D), v).holds);
}

TEST_CASE("critical volume fraction") {
    CHECK(solveEtaN(2.0) == doctest::Approx((3 - std::sqrt(5.0)) / 2).epsilon(1e-12));
    CHECK(std::abs(solveEtaN(1000.0) - 0.5) < 0.01);
    for (double N : {1.5, 2.0, 3.0, 10.0}) {
        double x = solveEtaN(N);
        CHECK(std::abs(std::pow(x, (N - 1) / N) - (1 - x)) <= 1e-12);
    }
    CHECK(solveEtaN(2.0) < solveEtaN(3.0));
}

TEST_CASE("exponent admissibility") {
    ExponentChoice e = defaultExponents(2.0);
    CHECK_NOTHROW(validateExponents(2.0, e));
    CHECK(etaExponent(2.0, e.beta, e.gamma, false) == doctest::Approx(2.0 / 7.0).epsilon(1e-3));
    ExponentChoice bad = e;
    bad.alpha = 0.5;
    CHECK_THROWS_AS(validateExponents(2.0, bad), Error);
    ExponentChoice riem = defaultExponents(2.0, true);
    CHECK_NOTHROW(validateExponents(2.0, riem));
}

TEST_CASE("constant bundle") {
    ConstantBundle c = makeConstants(2.0, 0.3);
    CHECK(c.CNv > 0.0);
    CHECK(c.C1Nv > 0.0);
    CHECK(c.C2Nv == doctest::Approx(1.0 / (c.CNv * c.C1Nv)));
    CHECK(c.DN > 0.0);
    CHECK(c.DN < kPi);
    CHECK(lambdaOf(2.0, c.DN, 0.5 * (kPi - c.DN)) == doctest::Approx(c.etaN).epsilon(1e-6));
    CHECK(c.C2At(0.0).value == doctest::Approx(c.C2Nv));
    CHECK(c.C2At(1e6).isInf());
}

TEST_CASE("antipodal constant and ball radius") {
    // inf (1 - cos r) / r^2 over (0, pi] is attained at r = pi.
    double inf = 1e9;
    for (int i = 1; i <= 100000; ++i) {
        double r = kPi * i / 100000;
        inf = std::min(inf, (1 - std::cos(r)) / (r * r));
    }
    CHECK(rawSinePowerIntegral(2.0, 1.0) == doctest::Approx(1 - std::cos(1.0)));
    CHECK(modelBallRadius(2.0, 0.3) == doctest::Approx(std::acos(1 - 0.6)).epsilon(1e-10));
    CHECK(inf == doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-6));
    CHECK(antipodalConstant(2.0) == doctest::Approx(3.0 / (2.0 * inf)).epsilon(1e-6));
}

TEST_CASE("diameter scaling exponent") {
    for (double N : {2.0, 3.0}) CHECK(diameterGapScaling(N, 0.3, 0.02, 0.3, 12).slope == doctest::Approx(N).epsilon(0.05));
}
