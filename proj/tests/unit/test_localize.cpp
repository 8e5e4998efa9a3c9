#include <doctest.h>

#include <cmath>
#include <numeric>

#include "needle/localize.hpp"
#include "needle/profile.hpp"
#include "needle/spaces.hpp"

using namespace needle;

namespace {

const CheckResult* check(const MainTheoremReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("localization function") {
    std::vector<double> d(100, 1.0);
    for (int i = 0; i < 10; ++i) d[i * 10 + i] = 0.0;
    DiscreteSpace X = DiscreteSpace::fromMatrix(d, std::vector<double>(10, 0.1), 1);
    Mask E(10, 0);
    for (int i = 0; i < 3; ++i) E[i] = 1;
    auto f = localizationFunction(X, E);
    CHECK(f[0] == doctest::Approx(10.0 / 3));
    CHECK(f[9] == doctest::Approx(-10.0 / 7));
    double s = 0.0;
    for (int i = 0; i < 10; ++i) s += f[i] * X.weight[i];
    CHECK(std::abs(s) < 1e-15);
    Mask H(10, 0);
    for (int i = 0; i < 5; ++i) H[i] = 1;
    auto g = localizationFunction(X, H);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[7] == doctest::Approx(-2.0));
}

TEST_CASE("two-point potential") {
    DiscreteSpace X = DiscreteSpace::fromMatrix({0.0, 1.7, 1.7, 0.0}, {0.3, 0.7}, 1);
    Mask E = {1, 0};
    Potential p = kantorovichPotential(X, localizationFunction(X, E));
    CHECK(p.phi[0] - p.phi[1] == doctest::Approx(1.7));
    CHECK(p.primal == doctest::Approx(1.7));
}

TEST_CASE("segment potential is a translated coordinate") {
    DiscreteSpace X = makeSegment(2.0, kPi, 0.0, 201);
    CapSet E = makeCapSet(X, 0, 0.3);
    Potential p = kantorovichPotential(X, localizationFunction(X, E.mask));
    double worst = 0.0;
    for (int i = 0; i < X.size(); ++i) worst = std::max(worst, std::abs(p.phi[i] + X.d(0, i) - p.phi[0]));
    CHECK(worst <= 1e-6);
    auto gamma = transportRelation(X, p.phi, 1e-9);
    CHECK(gamma.size() == static_cast<size_t>(X.size()) * (X.size() - 1) / 2);
    for (auto [x, y] : gamma) CHECK(X.d(0, x) < X.d(0, y));
    CHECK(transportRelation(X, std::vector<double>(X.size(), 0.0), 1e-9).empty());

    NeedleDecomposition dec = localize(X, E.mask);
    REQUIRE(dec.rays.size() == 1);
    CHECK(dec.rays[0].Dq == doctest::Approx(kPi));
    CHECK(dec.quotientMass() == doctest::Approx(1.0));
    FittedRay fit = fitRayDensity(X, dec.rays[0], 2.0, dec.mesh);
    CHECK(fit.cdOk);
    CHECK(supDeviationFromModel(fit.density, 2.0, 0.1, kPi - 0.1) <= 1e-3);
}

TEST_CASE("non-CD weighting is detected on a ray") {
    const int n = 301;
    const double D = 3.0;
    std::vector<double> d(static_cast<size_t>(n) * n), w(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) d[static_cast<size_t>(i) * n + j] = D * std::abs(i - j) / (n - 1);
        w[i] = 1.0 + std::cos(8.0 * D * i / (n - 1)) + 0.05;
    }
    double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= s;
    DiscreteSpace X = DiscreteSpace::fromMatrix(d, w, 1);
    NeedleDecomposition dec = localize(X, makeCapSet(X, 0, 0.4).mask);
    REQUIRE(dec.rays.size() == 1);
    CHECK_FALSE(fitRayDensity(X, dec.rays[0], 2.0, dec.mesh).cdOk);
}

TEST_CASE("sphere cap decomposition") {
    DiscreteSpace X = makeSphere2(1500);
    CapSet cap = makeCapSet(X, 0, 0.3);
    Potential p = kantorovichPotential(X, localizationFunction(X, cap.mask));
    // phi follows minus the distance to the cap center.
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < X.size(); ++i) {
        double r = p.phi[i] + X.d(0, i);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi - lo <= 2 * X.mesh());

    NeedleDecomposition dec = extractRays(X, localizationFunction(X, cap.mask), p, cap.mask);
    CHECK(dec.quotientMass() >= 0.95);
    CHECK(dec.maxMeanDeviation() <= 0.02);
    CHECK(dec.quotientMass() + dec.zeroMass(X) + dec.branchMass(X) == doctest::Approx(1.0).epsilon(1e-12));
    Mask all(X.size(), 1);
    CHECK(disintegrationResidual(X, dec, all) <= 1e-12);
    for (const Ray& r : dec.rays) {
        CHECK(rayChainDefect(X, p.phi, r) <= 3 * X.mesh());
        CHECK(r.Dq >= kPi - 3 * X.mesh());
    }
    auto gamma = transportRelation(X, p.phi, dec.tolGamma);
    CHECK(monotonicitySpotCheck(X, gamma, dec.tolGamma, 500, 3).ok);

    ConstantBundle C = makeConstants(2.0, 0.3);
    RayClassification cls = classifyRays(X, dec, 2.0, 0.3, C, 0.0, 3 * X.mesh());
    for (RayLabel l : cls.labels) CHECK(l == RayLabel::LongGoodS);
    CHECK(cls.mass(RayLabel::LongGoodS, dec) == doctest::Approx(dec.quotientMass()));
}

TEST_CASE("quantify on the model segment and the sphere") {
    DiscreteSpace S = makeSegment(2.0, kPi, 0.0, 401);
    MainTheoremReport seg = quantify(S, makeCapSet(S, 0, 0.3).mask, 2.0);
    CHECK(std::abs(seg.delta) <= 1e-4);
    for (const auto& c : seg.checks) CHECK_MESSAGE(c.ok, c.name);

    DiscreteSpace X = makeSphere2(1500);
    const double mesh = X.mesh();
    MainTheoremReport cap = quantify(X, makeCapSet(X, 0, 0.3).mask, 2.0);
    CHECK(cap.asymmetry <= 3 * mesh);
    CHECK(cap.delta <= 3 * mesh);
    CHECK(cap.side == 'S');
    CHECK(check(cap, "endpoint-sum")->ok);
    CHECK(cap.rNv == doctest::Approx(std::acos(1 - 0.6)).epsilon(1e-9));

    MainTheoremReport blob = quantify(X, makePerturbedCap(X, 0, 0.3, 0.02, farthestPoint(X, 0)).mask, 2.0);
    CHECK(blob.delta > mesh);
    CHECK(check(blob, "short-ray-mass")->ok);
    CHECK(blob.asymmetry > cap.asymmetry);
}

TEST_CASE("antipodal triples") {
    DiscreteSpace X = makeSphere2(600);
    AntipodalResult r = antipodalCheck(X, kPi - 0.3, 2.0, 0.05);
    CHECK(r.ok);
    CHECK(r.bound == doctest::Approx(antipodalConstant(2.0)));
    CHECK_THROWS_AS(antipodalCheck(X, kPi - 1e-9, 2.0, 0.05), Error);
}

TEST_CASE("markov bound") {
    MarkovResult c = markovBound({0.6, 0.6, 0.6}, {0.2, 0.3, 0.5}, 0.4);
    CHECK(c.measured == doctest::Approx(1.0));
    CHECK(c.measured >= (0.6 - 0.4) / (1 - 0.4));
    MarkovResult z = markovBound({0.0, 0.5, 1.0, 0.2}, {0.25, 0.25, 0.25, 0.25}, 0.0);
    CHECK(z.measured == doctest::Approx(1.0));
    // Two values on six points: 3 x 1 and 3 x 0 with a = 1/2 is an equality case.
    MarkovResult e = markovBound({1, 1, 1, 0, 0, 0}, {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6}, 0.0);
    CHECK(e.measured == doctest::Approx(1.0));
    MarkovResult eq = markovBound({1, 1, 1, 0, 0, 0}, std::vector<double>(6, 1.0 / 6), 0.5);
    CHECK(eq.measured == doctest::Approx(0.5));
    CHECK(eq.bound == doctest::Approx(0.0));
    CHECK_THROWS_AS(markovBound({0.5}, {1.0}, 1.0), Error);
}

TEST_CASE("ball localization") {
    DiscreteSpace X = makeSphere2(1500);
    CapSet cap = makeCapSet(X, 0, 0.3);
    CHECK_THROWS_AS(ballLocalization(X, cap.mask, 0, 0.3, 2.0), Error);
    CapSet E = makePerturbedCap(X, 0, 0.3, 0.02, farthestPoint(X, 0));
    int edge = -1;
    for (int i = 0; i < X.size(); ++i)
        if (std::abs(X.d(0, i) - cap.radius) < X.mesh()) { edge = i; break; }
    REQUIRE(edge >= 0);
    BallLocalization b = ballLocalization(X, E.mask, edge, 0.35, 2.0);
    CHECK(b.perimeterLower > 0.0);
    CHECK(b.perimeterLower <= b.relativePerimeter + X.mesh());
    CHECK(b.markov.ok);
}
