#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "needle/density1d.hpp"

using namespace needle;

TEST_CASE("sigma coefficient closed values") {
    CurvatureParams p{1.0, 2.0};
    CHECK(sigmaCoeff(0.3, 0.0, p).value == doctest::Approx(0.3));
    CHECK(sigmaCoeff(1.0, 1.0, p).value == doctest::Approx(1.0));
    CHECK(sigmaCoeff(0.5, kPi * std::sqrt(2.0), p).isInf());
    CHECK(sigmaCoeff(0.5, 10.0, p).isInf());
    CHECK_THROWS_AS(sigmaCoeff(1.5, 1.0, p), Error);
}

TEST_CASE("tau coefficient against a 50-digit evaluation") {
    using big = boost::multiprecision::cpp_bin_float_50;
    CHECK(tauCoeff(1.0, 0.5, {1.0, 2.0}).value == doctest::Approx(1.0));
    CHECK(tauCoeff(0.0, 0.5, {1.0, 2.0}).value == 0.0);
    // K = 1, N = 3, t = 0.5, theta = 1: t^{1/3} (sin(t theta k) / sin(theta k))^{2/3}, k = sqrt(1/2).
    big k = boost::multiprecision::sqrt(big(1) / 2);
    big s = boost::multiprecision::sin(big(0.5) * k) / boost::multiprecision::sin(k);
    big expect = boost::multiprecision::pow(big(0.5), big(1) / 3) * boost::multiprecision::pow(s, big(2) / 3);
    CHECK(std::abs(tauCoeff(0.5, 1.0, {1.0, 3.0}).value - expect.convert_to<double>()) < 1e-14);
}

TEST_CASE("model density normalization") {
    ModelDensity h2(2.0), h3(3.0);
    CHECK(h2.omega() == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(h2(kPi / 2) == doctest::Approx(0.5));
    CHECK(h3.omega() == doctest::Approx(kPi / 2).epsilon(1e-13));
    CHECK(h3(kPi / 2) == doctest::Approx(2.0 / kPi));
    for (double N : {1.5, 2.0, 2.5, 3.0, 7.0}) {
        ModelDensity h(N);
        CHECK(h(0.0) == 0.0);
        CHECK(h.cdf(kPi) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // h_2 cdf is (1 - cos x) / 2.
    for (double x : {0.1, 0.7, 1.9, 3.0}) CHECK(h2.cdf(x) == doctest::Approx((1 - std::cos(x)) / 2).epsilon(1e-12));
}

TEST_CASE("Density1D forms integrate to one and invert") {
    std::mt19937_64 rng(3);
    std::vector<Density1D> hs = {Density1D::model(2.0), Density1D::model(3.5), Density1D::sinePower(2.0, 2.5, 0.3),
                                 randomCdDensity(3.0, 2.9, rng)};
    for (const auto& h : hs) {
        CHECK(h.cdf(h.D()) == doctest::Approx(1.0).epsilon(1e-10));
        for (double m : {0.1, 0.5, 0.9}) CHECK(h.cdf(h.quantile(m)) == doctest::Approx(m).epsilon(1e-9));
    }
}

TEST_CASE("text round trip keeps values") {
    Density1D h = Density1D::sinePower(3.0, 2.7, 0.2);
    Density1D g = Density1D::fromText(h.toText());
    for (size_t k = 0; k < h.grid().size(); k += 97) CHECK(g(h.grid()[k]) == doctest::Approx(h(h.grid()[k])).epsilon(1e-6));
    CHECK(g(1.3) == doctest::Approx(h(1.3)).epsilon(1e-5));
    std::vector<double> t = {0.0, 1.0, 2.0}, v = {0.0, 1.0, 0.0};
    Density1D s = Density1D::fromSamples(t, v);
    CHECK(s.cdf(2.0) == doctest::Approx(1.0));
    CHECK(s(1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(Density1D::fromText("garbage"), Error);
}

TEST_CASE("CD membership") {
    CHECK(isCdDensity(Density1D::model(2.0), CurvatureParams::unitModel(2.0), 1e-9).ok);
    CHECK(isCdDensity(Density1D::model(3.0), CurvatureParams::unitModel(3.0), 1e-9).ok);
    Density1D flat = Density1D::closedForm(2.0, [](double) { return 0.5; }, 2.0);
    CdReport r = isCdDensity(flat, CurvatureParams::unitModel(2.0), 1e-9);
    CHECK_FALSE(r.ok);
    CHECK(r.worstSynthetic > 0.0);
    CHECK(isCdDensity(Density1D::sinePower(2.5, 2.0, 0.4), CurvatureParams::unitModel(2.5), 1e-9).ok);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 5; ++i) {
        Density1D h = randomCdDensity(2.0, 2.8, rng);
        CHECK(isCdDensity(h, CurvatureParams::unitModel(2.0), defaultCdTolerance(h)).ok);
    }
}

TEST_CASE("ratio, sandwich and log-derivative bounds") {
    Density1D h2 = Density1D::model(2.0);
    RatioBounds rb = densityRatioBounds(h2, 1.0, 0.5, 2.0);
    CHECK(rb.satisfied);
    CHECK(rb.lower == doctest::Approx(rb.upper));
    CHECK(rb.ratio == doctest::Approx(std::sin(1.5) / std::sin(1.0)));
    RatioBounds tiny = densityRatioBounds(h2, 1.0, 1e-7, 2.0);
    CHECK(tiny.lower == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(tiny.upper == doctest::Approx(1.0).epsilon(1e-5));

    Sandwich sw = densitySandwich(h2, 1.2, 2.0, 1.0);
    CHECK(sw.satisfied);
    CHECK(sw.lower == doctest::Approx(sw.value).epsilon(1e-9));
    CHECK(sw.upper == doctest::Approx(sw.value).epsilon(1e-9));

    LogDerivBracket lb = logDerivativeBounds(h2, 0.8, 2.0);
    CHECK(lb.inside);
    CHECK(lb.measured == doctest::Approx(1.0 / std::tan(0.8)).epsilon(1e-6));
    CHECK(logDerivativeBounds(h2, kPi / 2, 2.0).inside);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        Density1D h = randomCdDensity(2.0, kPi - 0.1, rng);
        CHECK(densityRatioBounds(h, 1.0, 0.5, 2.0).satisfied);
        CHECK(logDerivativeBounds(h, 1.3, 2.0).inside);
        CHECK(densitySandwich(h, 0.9, 2.0, (1 - std::cos(kPi - 0.1)) / 2).satisfied);
    }
}

TEST_CASE("unique maximum location") {
    CHECK(uniqueMax(Density1D::model(2.0)).x0 == doctest::Approx(kPi / 2).epsilon(1e-6));
    UniqueMax m = uniqueMax(Density1D::sinePower(3.0, 2.0, 0.4));
    CHECK(m.x0 == doctest::Approx(kPi / 2 - 0.4).epsilon(1e-6));
    CHECK(m.monotoneOk);
    UniqueMax e = uniqueMax(Density1D::sinePower(3.0, 0.5, 1.0));
    CHECK(e.x0 == doctest::Approx(0.5));
    CHECK(e.monotoneOk);
}

TEST_CASE("generator densities approach the model as the diameter grows") {
    double prev = 1e9;
    for (double eps : {0.1, 0.05, 0.01}) {
        std::mt19937_64 rng(8);
        double sup = 0.0;
        for (int i = 0; i < 20; ++i) {
            Density1D h = randomCdDensity(2.0, kPi - eps, rng);
            sup = std::max(sup, supDeviationFromModel(h, 2.0, 0.2, kPi - 0.2));
        }
        CHECK(sup < prev);
        prev = sup;
    }
}
