#include <doctest.h>

#include <cmath>

#include "needle/space.hpp"
#include "needle/spaces.hpp"

using namespace needle;

TEST_CASE("text round trip") {
    DiscreteSpace X = makeSphere2(60);
    DiscreteSpace Y = DiscreteSpace::fromText(X.toText());
    REQUIRE(Y.size() == X.size());
    CHECK(Y.d(3, 17) == doctest::Approx(X.d(3, 17)).epsilon(1e-12));
    CHECK(Y.weight[5] == doctest::Approx(X.weight[5]));
    DiscreteSpace S = makeSegment(2.0, 2.0, 0.0, 20);
    DiscreteSpace T = DiscreteSpace::fromText(S.toText());
    CHECK(T.dim == 1);
    CHECK(T.d(0, 19) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("validation rejects broken spaces") {
    std::vector<double> d = {0, 1, 5, 1, 0, 1, 5, 1, 0};
    DiscreteSpace bad = DiscreteSpace::fromMatrix(d, {0.2, 0.3, 0.5}, 1);
    CHECK_THROWS_AS(bad.validate(), Error);
    std::vector<double> ok = {0, 1, 2, 1, 0, 1, 2, 1, 0};
    CHECK_NOTHROW(DiscreteSpace::fromMatrix(ok, {0.2, 0.3, 0.5}, 1).validate());
    CHECK_THROWS_AS(DiscreteSpace::fromMatrix(ok, {0.2, 0.3, 0.6}, 1).validate(), Error);
    std::vector<double> asym = {0, 1, 2, 1.5, 0, 1, 2, 1, 0};
    CHECK_THROWS_AS(DiscreteSpace::fromMatrix(asym, {0.2, 0.3, 0.5}, 1).validate(), Error);
    CHECK_THROWS_AS(DiscreteSpace::fromText("3\n0 1\n"), Error);
}

TEST_CASE("sphere lattice") {
    DiscreteSpace X = makeSphere2(1500);
    CHECK(X.totalMass() == doctest::Approx(1.0));
    CHECK(X.mesh() <= 0.12);
    CHECK(X.d(0, farthestPoint(X, 0)) == doctest::Approx(kPi).epsilon(X.mesh()));
    for (double r : {0.5, 1.2, 2.0}) {
        double m = 0.0;
        for (int i = 0; i < X.size(); ++i)
            if (X.d(0, i) <= r) m += X.weight[i];
        CHECK(std::abs(m - (1 - std::cos(r)) / 2) <= 2 * X.mesh());
    }
    CHECK_NOTHROW(makeSphere2(300).validate());
}

TEST_CASE("segment space") {
    DiscreteSpace X = makeSegment(2.0, kPi, 0.0, 101);
    CHECK(X.totalMass() == doctest::Approx(1.0));
    CHECK(X.diameter() == doctest::Approx(kPi));
    int arg = static_cast<int>(std::max_element(X.weight.begin(), X.weight.end()) - X.weight.begin());
    CHECK(arg == 50);
    DiscreteSpace Y = makeSegment(3.0, 2.0, 0.5, 50);
    CHECK(Y.diameter() == doctest::Approx(2.0));
    CHECK_THROWS_AS(makeSegment(2.0, 3.0, 0.5, 50), Error);
}

TEST_CASE("circle and suspension") {
    DiscreteSpace C = makeCircle(40);
    CHECK(C.diameter() == doctest::Approx(kPi));
    CHECK_NOTHROW(C.validate());
    DiscreteSpace S = makeSuspension(2.0, 8, 10);
    CHECK(S.totalMass() == doctest::Approx(1.0));
    CHECK(S.diameter() == doctest::Approx(kPi));
    CHECK_NOTHROW(S.validate());
    CHECK_THROWS_AS(makeSuspension(2.0, 30, 10), Error);
}

TEST_CASE("caps") {
    DiscreteSpace X = makeSphere2(1500);
    for (int c : {0, 400, 999}) {
        CapSet cap = makeCapSet(X, c, 0.5);
        CHECK(cap.mass >= 0.5);
        CHECK(cap.mass <= 0.5 + 1.0 / 1500 + 1e-12);
    }
    CapSet cap = makeCapSet(X, 0, 0.3);
    CHECK(std::abs(cap.radius - std::acos(1 - 0.6)) <= 2 * X.mesh());
    double diff = 0.0;
    for (int i = 0; i < X.size(); ++i)
        if (static_cast<bool>(cap.mask[i]) != (X.d(0, i) <= std::acos(1 - 0.6))) diff += X.weight[i];
    CHECK(diff <= 2 * X.mesh());

    CapSet same = makePerturbedCap(X, 0, 0.3, 0.0, farthestPoint(X, 0));
    CHECK(same.mask == cap.mask);
    CapSet blob = makePerturbedCap(X, 0, 0.3, 0.02, farthestPoint(X, 0));
    CHECK(blob.mass == doctest::Approx(0.3).epsilon(0.01));
    double best = 1.0;
    for (int c = 0; c < X.size(); c += 7) {
        CapSet single = makeCapSet(X, c, blob.mass);
        double s = 0.0;
        for (int i = 0; i < X.size(); ++i)
            if (single.mask[i] != blob.mask[i]) s += X.weight[i];
        best = std::min(best, s);
    }
    CHECK(best >= 2 * 0.02 - 4 * X.mesh());
    CHECK_THROWS_AS(makePerturbedCap(X, 0, 0.3, 0.02, 1), Error);
}
