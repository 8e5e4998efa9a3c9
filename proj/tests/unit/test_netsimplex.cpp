#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "needle/localize.hpp"
#include "needle/netsimplex.hpp"
#include "needle/spaces.hpp"

using namespace needle;

namespace {

// Successive shortest paths (Bellman-Ford) for balanced transport between the positive and
// negative parts of `supply` with cost d(i, j). Independent of the simplex code.
double transportOracle(const std::vector<double>& supply, const std::vector<double>& d, int n) {
    std::vector<int> src, snk;
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i) {
        if (supply[i] > 1e-15) src.push_back(i), a.push_back(supply[i]);
        if (supply[i] < -1e-15) snk.push_back(i), b.push_back(-supply[i]);
    }
    const int S = static_cast<int>(src.size()), T = static_cast<int>(snk.size());
    std::vector<double> x(static_cast<size_t>(S) * T, 0.0);
    double cost = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    while (true) {
        // Nodes: sources 0..S-1, sinks S..S+T-1. Forward arcs s->t, backward t->s where x > 0.
        std::vector<double> dist(S + T, inf);
        std::vector<int> prev(S + T, -1);
        for (int s = 0; s < S; ++s)
            if (a[s] > 1e-15) dist[s] = 0.0;
        for (int it = 0; it < S + T; ++it) {
            bool changed = false;
            for (int s = 0; s < S; ++s)
                for (int t = 0; t < T; ++t) {
                    double c = d[static_cast<size_t>(src[s]) * n + snk[t]];
                    if (dist[s] + c < dist[S + t] - 1e-15) dist[S + t] = dist[s] + c, prev[S + t] = s, changed = true;
                    if (x[static_cast<size_t>(s) * T + t] > 1e-15 && dist[S + t] - c < dist[s] - 1e-15)
                        dist[s] = dist[S + t] - c, prev[s] = S + t, changed = true;
                }
            if (!changed) break;
        }
        int best = -1;
        for (int t = 0; t < T; ++t)
            if (b[t] > 1e-15 && dist[S + t] < inf && (best < 0 || dist[S + t] < dist[S + best])) best = t;
        if (best < 0) break;
        double amount = b[best];
        int v = S + best;
        while (prev[v] >= 0) {
            int u = prev[v];
            if (v < S) amount = std::min(amount, x[static_cast<size_t>(v) * T + (u - S)]);
            v = u;
        }
        amount = std::min(amount, a[v]);
        v = S + best;
        while (prev[v] >= 0) {
            int u = prev[v];
            if (v >= S) x[static_cast<size_t>(u) * T + (v - S)] += amount;
            else x[static_cast<size_t>(v) * T + (u - S)] -= amount;
            v = u;
        }
        a[v] -= amount;
        b[best] -= amount;
        cost += amount * dist[S + best];
    }
    return cost;
}

}  // namespace

TEST_CASE("simplex on a three-node line") {
    NetworkSimplex ns({1.0, 0.0, -1.0}, 2.0);
    ns.addArc(0, 1, 1.0);
    ns.addArc(1, 2, 1.0);
    ns.addArc(0, 2, 3.0);
    ns.solve();
    CHECK(ns.primalCost() == doctest::Approx(2.0));
    CHECK(ns.dualValue() == doctest::Approx(2.0));
    CHECK(ns.flow(2) == 0.0);
    CHECK(ns.artificialFlow() == doctest::Approx(0.0));
}

TEST_CASE("simplex matches a shortest-path transport oracle") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 12 + 3 * trial;
        std::vector<std::array<double, 2>> p(n);
        for (auto& q : p) q = {U(rng), U(rng)};
        std::vector<double> d(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d[static_cast<size_t>(i) * n + j] = std::hypot(p[i][0] - p[j][0], p[i][1] - p[j][1]);
        std::vector<double> s(n);
        double sum = 0.0;
        for (int i = 0; i + 1 < n; ++i) s[i] = U(rng) - 0.5, sum += s[i];
        s[n - 1] = -sum;
        NetworkSimplex ns(s, 2.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) ns.addArc(i, j, d[static_cast<size_t>(i) * n + j]);
        ns.solve();
        double oracle = transportOracle(s, d, n);
        CHECK(ns.primalCost() == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(ns.dualValue() == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("constraint generation agrees with the full arc set") {
    DiscreteSpace X = makeSphere2(300);
    CapSet cap = makeCapSet(X, 0, 0.3);
    auto f = localizationFunction(X, cap.mask);
    Potential a = kantorovichPotential(X, f, 6);
    Potential b = kantorovichPotentialAllPairs(X, f);
    CHECK(a.primal == doctest::Approx(b.primal).epsilon(1e-10));
    CHECK(std::abs(a.gap) <= 1e-9);
    CHECK(a.lipschitzSlack <= 1e-9);
    CHECK(a.rounds >= 1);
    std::vector<double> s(X.size());
    for (int i = 0; i < X.size(); ++i) s[i] = f[i] * X.weight[i];
    CHECK(a.primal == doctest::Approx(transportOracle(s, X.dist, X.size())).epsilon(1e-9));
}
