#include "needle/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "needle/density1d.hpp"
#include "needle/intervals.hpp"
#include "needle/localize.hpp"
#include "needle/profile.hpp"
#include "needle/spaces.hpp"

namespace needle {

namespace {

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

struct Outcome {
    bool pass;
    std::string detail;
};

struct Detail {
    std::ostringstream os;
    bool pass = true;
    void note(const std::string& s) {
        if (os.tellp() > 0) os << "; ";
        os << s;
    }
    void expect(bool ok, const std::string& s) {
        pass = pass && ok;
        note(std::string(ok ? "" : "FAILED ") + s);
    }
    Outcome done() { return {pass, os.str()}; }
};

const std::vector<double> kIdentityN = {2.0, 2.5, 3.0, 7.0};
const std::vector<double> kIdentityD = {2.0, 2.5, 3.0, kPi};
const std::vector<double> kIdentityV = {0.1, 0.3, 0.5};

Outcome closedFormProfile() {
    Detail d;
    double worst = 0.0;
    const int m = 512;
    for (int i = 0; i < m; ++i) {
        double v = (i + 0.5) / m;
        worst = std::max(worst, std::abs(modelProfile(2.0, kPi, v).value - std::sqrt(v * (1.0 - v))));
    }
    d.expect(worst <= 1e-8, "max |I - sqrt(v(1-v))| = " + fmt("%.3e", worst) + " (tol 1e-8)");
    return d.done();
}

Outcome profileIdentity() {
    Detail d;
    double worst = 0.0;
    int cases = 0;
    for (double N : kIdentityN)
        for (double D : kIdentityD)
            for (double xi : {0.0, 0.5 * (kPi - D)})
                for (double v : kIdentityV) {
                    worst = std::max(worst, std::abs(profileIdentityCheck(N, D, xi, v).gap));
                    ++cases;
                }
    d.expect(worst <= 1e-7, "max gap = " + fmt("%.3e", worst) + " over " + std::to_string(cases) + " cases (tol 1e-7)");
    return d.done();
}

Outcome concavity() {
    Detail d;
    double worstShort = -std::numeric_limits<double>::infinity();
    int failures = 0, cases = 0;
    for (double N : kIdentityN)
        for (double D : kIdentityD)
            for (double xi : {0.0, 0.5 * (kPi - D)})
                for (double v : kIdentityV) {
                    ConcavityGap g = concavityGap(N, D, xi, v, 1e-7);
                    worstShort = std::max(worstShort, g.bound - g.gap);
                    failures += g.holds ? 0 : 1;
                    ++cases;
                }
    d.expect(failures == 0, "gap >= bound - 1e-7 on " + std::to_string(cases - failures) + "/" +
                                std::to_string(cases) + " cases, max(bound - gap) = " + fmt("%.3e", worstShort));
    // For xi = 0 the gap is strictly concave in lambda and vanishes at lambda = 1, so it stays
    // below its tangent C (1 - lambda); the bound is only reached in the limit.
    {
        const double N = 2.0, v = 0.5;
        ModelDensity m(N);
        double D = m.quantile(1.0 - 1e-6);
        ConcavityGap g = concavityGap(N, D, 0.0, v, 1e-7);
        d.note("gap/bound at lambda = 1 - 1e-6: " + fmt("%.8f", g.gap / g.bound));
    }
    for (double N : {2.0, 3.0}) {
        for (double v : kIdentityV) {
            ScalingFit s = diameterGapScaling(N, v, 0.02, 0.3, 16);
            d.expect(std::abs(s.slope - N) <= 0.15,
                     "N=" + fmt("%g", N) + " v=" + fmt("%g", v) + " slope " + fmt("%.4f", s.slope) + " (target N +- 0.15)");
        }
    }
    return d.done();
}

Outcome bobkovMinimality() {
    Detail d;
    std::vector<std::pair<std::string, Density1D>> hs;
    hs.emplace_back("h2", Density1D::model(2.0));
    hs.emplace_back("h3", Density1D::model(3.0));
    std::mt19937_64 rng(20261016);
    hs.emplace_back("gen(N=2,D=3.0)", randomCdDensity(2.0, 3.0, rng));
    hs.emplace_back("gen(N=3,D=2.7)", randomCdDensity(3.0, 2.7, rng));
    hs.emplace_back("gen(N=2.5,D=2.4)", randomCdDensity(2.5, 2.4, rng));
    const int grid = 300;
    for (auto& [name, h] : hs) {
        for (double v : {0.2, 0.5}) {
            BruteForceResult r = bruteForceMin(h, v, 3, grid);
            const double cell = h.D() / grid;
            QuantileRadii q = quantileRadii(h, v);
            bool oneSided = false;
            if (r.best.size() == 1) {
                auto [a, b] = r.best.parts()[0];
                bool left = a <= 2 * cell + 1e-12 && std::abs(b - q.rMinus) <= 2 * cell + 1e-12;
                bool right = std::abs(b - h.D()) <= 2 * cell + 1e-12 && std::abs(a - q.rPlus) <= 2 * cell + 1e-12;
                oneSided = left || right;
            }
            double minDeficit = r.deficits.empty() ? 0.0 : *std::min_element(r.deficits.begin(), r.deficits.end());
            d.expect(oneSided && minDeficit >= -1e-9,
                     name + " v=" + fmt("%g", v) + ": best " + r.best.toText() + ", min deficit " +
                         fmt("%.2e", minDeficit) + " over " + std::to_string(r.configurations) + " sets");
        }
    }
    return d.done();
}

Outcome quantitative1d() {
    Detail d;
    for (double eps : {0.05, 0.1}) {
        Density1D h = Density1D::sinePower(2.0, kPi - eps, 0.0);
        SweepResult s = quantitativeSweep(h, 0.3, eps, 100000, 300, 7 + static_cast<unsigned long long>(eps * 1000));
        d.expect(s.ratioMin >= 0.01, "eps=" + fmt("%g", eps) + " min ratio " + fmt("%.5f", s.ratioMin) + " (" +
                                         std::to_string(s.evaluated) + " sets, " + std::to_string(s.sentinel) +
                                         " sentinel)");
    }
    return d.done();
}

Outcome appendixBounds() {
    Detail d;
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> epsDist(0.02, 0.6);
    for (double N : {2.0, 3.0}) {
        long checks = 0, sandwichBad = 0, ratioBad = 0, logBad = 0;
        for (int k = 0; k < 100; ++k) {
            const double D = kPi - epsDist(rng);
            Density1D h = randomCdDensity(N, D, rng);
            const double lambdaD = lambdaOf(N, D, 0.0);
            const int pts = 40;
            for (int i = 1; i < pts; ++i) {
                double t = D * i / pts;
                if (!densitySandwich(h, t, N, lambdaD, 1e-9).satisfied) ++sandwichBad;
                if (!logDerivativeBounds(h, t, N, 1e-9).inside) ++logBad;
                for (int j = 1; i + j < pts; j += 3) {
                    double s = D * j / pts;
                    if (!densityRatioBounds(h, t, s, N, 1e-9).satisfied) ++ratioBad;
                    ++checks;
                }
                checks += 2;
            }
        }
        d.expect(sandwichBad + ratioBad + logBad == 0,
                 "N=" + fmt("%g", N) + ": " + std::to_string(checks) + " checks, violations sandwich " +
                     std::to_string(sandwichBad) + " ratio " + std::to_string(ratioBad) + " logderiv " +
                     std::to_string(logBad));
    }
    for (double N : {2.0, 3.0}) {
        std::vector<double> sups;
        for (double eps : {0.1, 0.05, 0.01}) {
            std::mt19937_64 r2(99);
            double sup = 0.0;
            for (int k = 0; k < 100; ++k) {
                Density1D h = randomCdDensity(N, kPi - eps, r2);
                sup = std::max(sup, supDeviationFromModel(h, N, 0.0, h.D()));
            }
            sups.push_back(sup);
        }
        bool decreasing = sups[0] > sups[1] && sups[1] > sups[2];
        d.expect(decreasing, "N=" + fmt("%g", N) + " sup|h - h_N| = " + fmt("%.4f", sups[0]) + ", " +
                                 fmt("%.4f", sups[1]) + ", " + fmt("%.4f", sups[2]));
    }
    return d.done();
}

const CheckResult* findCheck(const MainTheoremReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

Outcome needleSoundness() {
    Detail d;
    DiscreteSpace X = makeSphere2(1500);
    CapSet cap = makeCapSet(X, 0, 0.3);
    MainTheoremReport rep = quantify(X, cap.mask, 2.0);
    const NeedleDecomposition& dec = rep.decomposition;
    d.expect(dec.quotientMass() >= 0.95, "assigned mass " + fmt("%.4f", dec.quotientMass()) + " (>= 0.95), " +
                                             std::to_string(dec.rays.size()) + " rays");
    d.expect(rep.maxMeanDeviation <= 0.02, "max |m_q(E) - v| " + fmt("%.4f", rep.maxMeanDeviation) + " (<= 0.02)");
    std::mt19937_64 rng(31);
    std::bernoulli_distribution coin(0.5);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        Mask B(X.size());
        for (auto& b : B) b = coin(rng) ? 1 : 0;
        worst = std::max(worst, disintegrationResidual(X, dec, B));
    }
    d.expect(worst <= 1e-9, "disintegration residual " + fmt("%.2e", worst) + " (<= 1e-9)");
    d.expect(std::abs(dec.potential.gap) <= 1e-7, "duality gap " + fmt("%.2e", dec.potential.gap) + " (<= 1e-7)");
    d.expect(dec.potential.lipschitzSlack <= 1e-9,
             "Lipschitz slack " + fmt("%.2e", dec.potential.lipschitzSlack));
    auto gamma = transportRelation(X, dec.potential.phi, dec.tolGamma);
    MonotonicityCheck mono = monotonicitySpotCheck(X, gamma, dec.tolGamma, 1000, 5);
    d.expect(mono.ok, "monotonicity: " + std::to_string(mono.cycles) + " cycles, worst excess " +
                          fmt("%.2e", mono.worstExcess));
    const CheckResult* ep = findCheck(rep, "endpoint-sum");
    d.expect(ep && ep->ok, "endpoint inequality excess " + fmt("%.4f", ep ? ep->measured : NAN) + " (<= 3 mesh = " +
                               fmt("%.4f", ep ? ep->bound : NAN) + ")");
    return d.done();
}

Outcome mainTheorem() {
    Detail d;
    DiscreteSpace X = makeSphere2(1500);
    const double mesh = X.mesh();
    const double N = 2.0, v = 0.3;
    const double eta = N / (N * N + 2 * N - 1);
    CapSet cap = makeCapSet(X, 0, v);
    MainTheoremReport exact = quantify(X, cap.mask, N);
    d.expect(exact.asymmetry <= 3 * mesh, "exact cap asymmetry " + fmt("%.4f", exact.asymmetry) + " (<= 3 mesh = " +
                                              fmt("%.4f", 3 * mesh) + ")");
    const int far = farthestPoint(X, 0);
    std::vector<double> deltas, asyms;
    bool checksOk = true;
    for (double rho : {0.01, 0.02, 0.04}) {
        CapSet E = makePerturbedCap(X, 0, v, rho, far);
        MainTheoremReport r = quantify(X, E.mask, N);
        deltas.push_back(r.delta);
        asyms.push_back(r.asymmetry);
        for (const char* name : {"pole-cluster", "short-ray-mass"}) {
            const CheckResult* c = findCheck(r, name);
            bool ok = c && c->ok;
            checksOk = checksOk && ok;
            if (!ok) d.note(std::string("rho=") + fmt("%g", rho) + " " + name + " failed");
        }
        d.note("rho=" + fmt("%g", rho) + " delta " + fmt("%.4f", r.delta) + " asym " + fmt("%.4f", r.asymmetry));
    }
    bool monotone = true;
    for (size_t i = 1; i < deltas.size(); ++i) monotone = monotone && deltas[i] > deltas[i - 1] && asyms[i] > asyms[i - 1];
    d.expect(monotone, "(delta, asymmetry) monotone");
    bool positive = std::all_of(deltas.begin(), deltas.end(), [](double x) { return x > 0; });
    double cfit = 0.0;
    if (positive)
        for (size_t i = 0; i < deltas.size(); ++i) cfit = std::max(cfit, asyms[i] / std::pow(deltas[i], eta));
    bool within = positive;
    for (size_t i = 0; positive && i < deltas.size(); ++i)
        within = within && asyms[i] <= cfit * std::pow(deltas[i], eta) * (1 + 1e-12);
    within = within && exact.asymmetry <= cfit * std::pow(std::max(exact.delta, 0.0), eta) + 3 * mesh;
    d.expect(within, "asymmetry <= C_fit delta^eta with C_fit " + fmt("%.4f", cfit) + ", eta " + fmt("%.4f", eta));
    d.expect(checksOk, "pole-cluster and short-ray checks");
    return d.done();
}

Outcome diameterDeficit() {
    Detail d;
    const double N = 2.0;
    ConstantBundle C = makeConstants(N, 0.3);
    const double cChain = std::pow(C.C2Nv, 1.0 / N);
    std::vector<double> eps = {0.05, 0.1, 0.2}, deficit, deltas;
    for (double e : eps) {
        DiscreteSpace X = makeSegment(N, kPi - e, 0.0, 801);
        CapSet cap = makeCapSet(X, 0, 0.3);
        MainTheoremReport r = quantify(X, cap.mask, N);
        deficit.push_back(kPi - X.diameter());
        deltas.push_back(r.delta);
    }
    double cfit = 0.0;
    bool positive = true;
    for (size_t i = 0; i < eps.size(); ++i) {
        positive = positive && deltas[i] > 0;
        if (deltas[i] > 0) cfit = std::max(cfit, deficit[i] / std::sqrt(deltas[i]));
        d.note("eps=" + fmt("%g", eps[i]) + " delta " + fmt("%.3e", deltas[i]) + " ratio " +
               fmt("%.4f", deltas[i] > 0 ? deficit[i] / std::sqrt(deltas[i]) : INFINITY));
    }
    d.expect(positive, "all deficits positive");
    d.expect(positive && cfit <= cChain, "pi - diam <= C_fit delta^(1/2), C_fit " + fmt("%.4f", cfit) +
                                             " within the chain constant " + fmt("%.4f", cChain));
    return d.done();
}

Outcome antipodal() {
    Detail d;
    DiscreteSpace X = makeSphere2(1500);
    AntipodalResult r = antipodalCheck(X, kPi - 0.3, 2.0, 0.05);
    d.expect(r.worstRatio <= r.bound + 0.05, "worst ratio " + fmt("%.4f", r.worstRatio) + " (bound " +
                                                 fmt("%.4f", r.bound) + " + 0.05) over " + std::to_string(r.triples) +
                                                 " triples");
    return d.done();
}

struct Entry {
    const char* title;
    double budget;
    std::function<Outcome()> run;
};

const std::vector<Entry>& entries() {
    static const std::vector<Entry> e = {
        {"closed-form profile", 1.0, closedFormProfile},
        {"profile identity", 10.0, profileIdentity},
        {"concavity gap and diameter scaling", 30.0, concavity},
        {"one-sided minimizers", 120.0, bobkovMinimality},
        {"quantitative 1D inequality", 300.0, quantitative1d},
        {"density sandwich, ratio and log-derivative bounds", 60.0, appendixBounds},
        {"needle decomposition soundness", 300.0, needleSoundness},
        {"main theorem pipeline", 600.0, mainTheorem},
        {"diameter deficit", 10.0, diameterDeficit},
        {"antipodal bound", 120.0, antipodal},
    };
    return e;
}

}  // namespace

CriterionResult runCriterion(int id) {
    require(id >= 1 && id <= kCriterionCount, ErrorKind::InvalidParameter, "criterion id out of range");
    const Entry& e = entries()[id - 1];
    CriterionResult r;
    r.id = id;
    r.title = e.title;
    r.budget = e.budget;
    auto t0 = std::chrono::steady_clock::now();
    try {
        Outcome o = e.run();
        r.pass = o.pass;
        r.detail = o.detail;
    } catch (const Error& err) {
        r.pass = false;
        r.detail = std::string("error ") + errorKindName(err.kind()) + ": " + err.what();
    } catch (const std::exception& err) {
        r.pass = false;
        r.detail = std::string("error: ") + err.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.seconds >= r.budget) {
        r.pass = false;
        r.detail += "; FAILED runtime " + fmt("%.1f", r.seconds) + " s over budget " + fmt("%.0f", r.budget) + " s";
    }
    return r;
}

std::vector<CriterionResult> runAcceptance(const std::vector<int>& ids) {
    std::vector<int> todo = ids;
    if (todo.empty())
        for (int i = 1; i <= kCriterionCount; ++i) todo.push_back(i);
    std::vector<CriterionResult> out;
    for (int id : todo) out.push_back(runCriterion(id));
    return out;
}

std::string formatCriterion(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " [" << r.title << "] " << fmt("%.2f", r.seconds)
       << "s: " << r.detail;
    return os.str();
}

}  // namespace needle
