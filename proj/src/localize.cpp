#include "needle/localize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "needle/netsimplex.hpp"
#include "needle/spaces.hpp"

namespace needle {

std::vector<double> localizationFunction(const DiscreteSpace& X, const Mask& E) {
    require(static_cast<int>(E.size()) == X.size(), ErrorKind::InvalidParameter, "mask size mismatch");
    const double v = maskMass(X, E);
    require(v > 0.0 && v < 1.0, ErrorKind::Degenerate, "E must be neither empty nor full");
    std::vector<double> f(X.size());
    for (int i = 0; i < X.size(); ++i) f[i] = E[i] ? 1.0 / v : -1.0 / (1.0 - v);
    return f;
}

double lipschitzSlack(const DiscreteSpace& X, const std::vector<double>& phi) {
    double worst = -std::numeric_limits<double>::infinity();
    const int n = X.size();
    for (int i = 0; i < n; ++i) {
        const double* r = X.row(i);
        for (int j = i + 1; j < n; ++j) worst = std::max(worst, std::abs(phi[i] - phi[j]) - r[j]);
    }
    return n > 1 ? worst : 0.0;
}

namespace {

Potential finishPotential(const DiscreteSpace& X, NetworkSimplex& ns) {
    Potential p;
    const int n = X.size();
    p.phi.resize(n);
    for (int i = 0; i < n; ++i) p.phi[i] = ns.potential(i);
    p.primal = ns.primalCost();
    p.dual = ns.dualValue();
    p.gap = p.primal - p.dual;
    double lo = *std::min_element(p.phi.begin(), p.phi.end());
    for (double& x : p.phi) x -= lo;
    p.lipschitzSlack = lipschitzSlack(X, p.phi);
    p.arcs = ns.arcCount();
    for (int a = 0; a < ns.arcCount(); ++a)
        if (ns.flow(a) > 0.0) p.flows.emplace_back(ns.arcFrom(a), ns.arcTo(a), ns.flow(a));
    return p;
}

std::vector<double> supplies(const DiscreteSpace& X, const std::vector<double>& f) {
    require(static_cast<int>(f.size()) == X.size(), ErrorKind::InvalidParameter, "f size mismatch");
    std::vector<double> b(X.size());
    double s = 0.0, scale = 0.0;
    for (int i = 0; i < X.size(); ++i) {
        b[i] = f[i] * X.weight[i];
        s += b[i];
        scale += std::abs(b[i]);
    }
    require(std::abs(s) <= 1e-9 * std::max(1.0, scale), ErrorKind::InvalidParameter, "f must have zero mean");
    return b;
}

}  // namespace

Potential kantorovichPotential(const DiscreteSpace& X, const std::vector<double>& f, int knn) {
    const int n = X.size();
    NetworkSimplex ns(supplies(X, f), X.diameter());
    const int k = std::min(knn, n - 1);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) {
        std::iota(idx.begin(), idx.end(), 0);
        const double* r = X.row(i);
        std::partial_sort(idx.begin(), idx.begin() + k + 1, idx.end(),
                          [&](int a, int b) { return r[a] < r[b] || (r[a] == r[b] && a < b); });
        for (int m = 0; m <= k; ++m) {
            int j = idx[m];
            if (j == i) continue;
            ns.addArc(i, j, r[j]);
            ns.addArc(j, i, r[j]);
        }
    }
    long pivots = 0;
    int rounds = 0;
    const int perNode = 8;
    std::vector<std::pair<double, int>> viol;
    for (;;) {
        pivots += ns.solve();
        ++rounds;
        long added = 0;
        for (int i = 0; i < n; ++i) {
            const double* r = X.row(i);
            const double pi = ns.potential(i);
            viol.clear();
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                double e = pi - ns.potential(j) - r[j];
                if (e > 1e-11) viol.push_back({-e, j});
            }
            if (viol.empty()) continue;
            size_t take = std::min<size_t>(perNode, viol.size());
            std::partial_sort(viol.begin(), viol.begin() + take, viol.end());
            for (size_t m = 0; m < take; ++m) {
                ns.addArc(i, viol[m].second, r[viol[m].second]);
                ++added;
            }
        }
        if (added == 0) break;
        require(rounds < 500, ErrorKind::NonConvergence, "constraint generation did not settle");
    }
    Potential p = finishPotential(X, ns);
    p.pivots = pivots;
    p.rounds = rounds;
    return p;
}

Potential kantorovichPotentialAllPairs(const DiscreteSpace& X, const std::vector<double>& f) {
    const int n = X.size();
    NetworkSimplex ns(supplies(X, f), X.diameter());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) ns.addArc(i, j, X.d(i, j));
    long pivots = ns.solve();
    Potential p = finishPotential(X, ns);
    p.pivots = pivots;
    p.rounds = 1;
    return p;
}

std::vector<std::pair<int, int>> transportRelation(const DiscreteSpace& X, const std::vector<double>& phi,
                                                    double tolGamma) {
    std::vector<std::pair<int, int>> out;
    for (int x = 0; x < X.size(); ++x)
        for (int y = 0; y < X.size(); ++y)
            if (inGamma(X, phi, x, y, tolGamma)) out.push_back({x, y});
    return out;
}

MonotonicityCheck monotonicitySpotCheck(const DiscreteSpace& X, const std::vector<std::pair<int, int>>& gamma,
                                        double tol, int samples, unsigned long long seed) {
    MonotonicityCheck c{0, -std::numeric_limits<double>::infinity(), true};
    if (gamma.empty()) {
        c.worstExcess = 0.0;
        return c;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, gamma.size() - 1);
    std::uniform_int_distribution<int> len(2, 5);
    for (int s = 0; s < samples; ++s) {
        int k = len(rng);
        std::vector<std::pair<int, int>> cyc(k);
        for (auto& p : cyc) p = gamma[pick(rng)];
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < k; ++i) {
            lhs += X.d(cyc[i].first, cyc[i].second);
            rhs += X.d(cyc[i].first, cyc[(i + 1) % k].second);
        }
        double excess = lhs - rhs - k * tol;
        c.worstExcess = std::max(c.worstExcess, excess);
        if (excess > 0.0) c.ok = false;
        ++c.cycles;
    }
    return c;
}

double NeedleDecomposition::quotientMass() const {
    double s = 0.0;
    for (const auto& r : rays) s += r.weight;
    return s;
}

double NeedleDecomposition::zeroMass(const DiscreteSpace& X) const {
    double s = 0.0;
    for (int i : zeroSet) s += X.weight[i];
    return s;
}

double NeedleDecomposition::branchMass(const DiscreteSpace& X) const {
    double s = 0.0;
    for (int i : branch) s += X.weight[i];
    return s;
}

double NeedleDecomposition::maxMeanDeviation() const {
    double m = 0.0;
    for (const auto& r : rays) m = std::max(m, std::abs(r.massE - v));
    return m;
}

namespace {

struct Spine {
    std::vector<int> pts;
    double length;
    long southId;
    int seed;
};

// Steepest descent (or ascent) along phi through short, nearly tight hops.
std::vector<int> followGradient(const DiscreteSpace& X, const std::vector<double>& phi,
                                const std::vector<std::vector<int>>& nbr, int start, bool down) {
    std::vector<int> path;
    int x = start;
    for (;;) {
        int best = -1;
        double bestScore = -std::numeric_limits<double>::infinity();
        for (int y : nbr[x]) {
            double d = X.d(x, y);
            double drop = down ? phi[x] - phi[y] : phi[y] - phi[x];
            if (drop <= 0.5 * d || drop <= 0.0) continue;
            double score = drop - 2.0 * (d - drop);
            if (score > bestScore || (score == bestScore && y < best)) {
                bestScore = score;
                best = y;
            }
        }
        if (best < 0) break;
        path.push_back(best);
        x = best;
    }
    return path;
}

}  // namespace

NeedleDecomposition extractRays(const DiscreteSpace& X, const std::vector<double>& f, const Potential& pot,
                                const Mask& E, const LocalizeOptions& opt) {
    const int n = X.size();
    const auto& phi = pot.phi;
    NeedleDecomposition dec;
    dec.E = E;
    dec.f = f;
    dec.potential = pot;
    dec.mesh = X.mesh();
    dec.tolGamma = opt.tolGammaMesh * dec.mesh;
    dec.v = maskMass(X, E);
    dec.rayOf.assign(n, -1);

    std::vector<char> active(n, 1);
    for (int i = 0; i < n; ++i) {
        if (std::abs(f[i]) > opt.fTol) continue;
        bool paired = false;
        for (int j = 0; j < n && !paired; ++j)
            paired = inGamma(X, phi, i, j, dec.tolGamma) || inGamma(X, phi, j, i, dec.tolGamma);
        if (!paired) {
            active[i] = 0;
            dec.zeroSet.push_back(i);
        }
    }

    const double hop = opt.hopMesh * dec.mesh;
    std::vector<std::vector<int>> nbr(n);
    for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        const double* r = X.row(i);
        for (int j = 0; j < n; ++j)
            if (j != i && active[j] && r[j] <= hop) nbr[i].push_back(j);
    }

    std::vector<Spine> cands;
    for (int s = 0; s < n; ++s) {
        if (!active[s]) continue;
        auto up = followGradient(X, phi, nbr, s, false);
        auto down = followGradient(X, phi, nbr, s, true);
        Spine sp;
        sp.pts.assign(up.rbegin(), up.rend());
        sp.pts.push_back(s);
        sp.pts.insert(sp.pts.end(), down.begin(), down.end());
        if (sp.pts.size() < 2) continue;
        sp.length = X.d(sp.pts.front(), sp.pts.back());
        sp.southId = X.ids[sp.pts.front()];
        sp.seed = s;
        cands.push_back(std::move(sp));
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Spine& a, const Spine& b) {
        if (a.length != b.length) return a.length > b.length;
        if (a.southId != b.southId) return a.southId < b.southId;
        return a.seed < b.seed;
    });

    const double sep = opt.separationMesh * dec.mesh;
    std::vector<const Spine*> accepted;
    std::vector<std::vector<double>> distTo;
    for (const auto& c : cands) {
        bool ok = true;
        for (size_t k = 0; k < accepted.size() && ok; ++k) {
            double h = 0.0;
            for (int x : c.pts) h = std::max(h, distTo[k][x]);
            ok = h >= sep;
        }
        if (!ok) continue;
        accepted.push_back(&c);
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        for (int x : c.pts) {
            const double* r = X.row(x);
            for (int j = 0; j < n; ++j) dist[j] = std::min(dist[j], r[j]);
        }
        distTo.push_back(std::move(dist));
    }

    const double branchR = opt.branchMesh * dec.mesh;
    const int K = static_cast<int>(accepted.size());
    std::vector<int> label(n, -1);  // ray index, -2 for branch points
    std::vector<int> nearest(n, -1);
    for (int x = 0; x < n; ++x) {
        if (!active[x] || K == 0) continue;
        int best = 0, owner = -1, close = 0;
        for (int k = 0; k < K; ++k) {
            if (distTo[k][x] < distTo[best][x]) best = k;
            if (distTo[k][x] <= branchR) {
                ++close;
                if (owner < 0) owner = k;
            }
        }
        nearest[x] = best;
        if (close >= 2) {
            label[x] = -2;
            dec.branch.push_back(x);
            dec.branchOwner.push_back(owner);
        }
    }
    // Sources take the nearest spine. Points receiving mass follow the origin of most of
    // their inflow, mixing proportionally at every node of the optimal plan.
    std::vector<std::vector<std::pair<int, double>>> out(n);
    std::vector<double> inflow(n, 0.0);
    for (const auto& [a, b, m] : pot.flows) {
        out[a].push_back({b, m});
        inflow[b] += m;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return phi[a] > phi[b]; });
    std::vector<std::vector<double>> comp(n, std::vector<double>(K + 1, 0.0));
    for (int x : order) {
        if (!active[x] || K == 0) continue;
        const double own = f[x] * X.weight[x];
        if (label[x] != -2 && own > 0.0) {
            label[x] = nearest[x];
        } else if (label[x] != -2 && inflow[x] > 0.0) {
            int best = -1;
            for (int k = 0; k < K; ++k)
                if (comp[x][k] > 0.0 && (best < 0 || comp[x][k] > comp[x][best])) best = k;
            label[x] = best >= 0 ? best : nearest[x];
        } else if (label[x] != -2) {
            label[x] = nearest[x];
        }
        if (own > 0.0) comp[x][label[x] == -2 ? K : label[x]] += own;
        double total = 0.0;
        for (double c : comp[x]) total += c;
        if (total <= 0.0) continue;
        for (const auto& [y, m] : out[x])
            for (int k = 0; k <= K; ++k) comp[y][k] += comp[x][k] * (m / total);
    }
    std::vector<std::vector<int>> cells(K);
    for (int x = 0; x < n; ++x)
        if (label[x] >= 0) cells[label[x]].push_back(x);

    std::vector<int> remap(K, -1);
    for (int k = 0; k < K; ++k) {
        auto& cell = cells[k];
        if (cell.empty()) continue;
        std::stable_sort(cell.begin(), cell.end(), [&](int a, int b) { return phi[a] > phi[b]; });
        Ray r;
        r.chain = cell;
        r.south = accepted[k]->pts.front();
        r.north = accepted[k]->pts.back();
        r.Dq = X.d(r.south, r.north);
        double me = 0.0;
        for (int x : cell) {
            r.t.push_back(std::min(r.Dq, X.d(r.south, x)));
            r.weight += X.weight[x];
            if (E[x]) me += X.weight[x];
        }
        r.massE = me / r.weight;
        remap[k] = static_cast<int>(dec.rays.size());
        for (int x : cell) dec.rayOf[x] = remap[k];
        dec.rays.push_back(std::move(r));
    }
    for (auto& o : dec.branchOwner) o = o >= 0 ? remap[o] : -1;

    const double transport = 1.0 - dec.zeroMass(X);
    const double bm = dec.branchMass(X);
    if (bm > opt.maxBranchMass)
        fail(ErrorKind::NonConvergence, "branching points carry mass " + std::to_string(bm) + " > " +
                                            std::to_string(opt.maxBranchMass));
    if (transport > 0.0 && (transport - dec.quotientMass()) > opt.maxUnassignedMass * transport)
        fail(ErrorKind::NonConvergence, "more than 5% of the transport set is unassigned");
    return dec;
}

NeedleDecomposition localize(const DiscreteSpace& X, const Mask& E, const LocalizeOptions& opt) {
    auto f = localizationFunction(X, E);
    Potential pot = kantorovichPotential(X, f, opt.knn);
    return extractRays(X, f, pot, E, opt);
}

double disintegrationResidual(const DiscreteSpace& X, const NeedleDecomposition& dec, const Mask& B) {
    double lhs = 0.0;
    for (const auto& r : dec.rays) {
        double inB = 0.0;
        for (int x : r.chain)
            if (B[x]) inB += X.weight[x];
        lhs += r.weight * (inB / r.weight);
    }
    double rhs = 0.0;
    for (int x = 0; x < X.size(); ++x)
        if (B[x] && dec.rayOf[x] >= 0) rhs += X.weight[x];
    return std::abs(lhs - rhs);
}

double rayChainDefect(const DiscreteSpace& X, const std::vector<double>& phi, const Ray& ray) {
    double worst = 0.0;
    for (int z : ray.chain) {
        worst = std::max(worst, X.d(ray.south, z) - (phi[ray.south] - phi[z]));
        worst = std::max(worst, X.d(z, ray.north) - (phi[z] - phi[ray.north]));
    }
    return worst;
}

FittedRay fitRayDensity(const DiscreteSpace& X, const Ray& ray, double N, double mesh) {
    require(ray.chain.size() >= 4, ErrorKind::DegenerateRay, "ray needs at least 4 points");
    require(ray.Dq >= 4.0 * mesh, ErrorKind::DegenerateRay, "ray shorter than 4 mesh cells");
    const double D = ray.Dq;
    std::vector<std::pair<double, double>> pts;  // (t, mass)
    for (size_t i = 0; i < ray.chain.size(); ++i) pts.push_back({ray.t[i], X.weight[ray.chain[i]]});
    std::sort(pts.begin(), pts.end());
    std::vector<double> ts, hs;
    if (X.dim == 1) {
        // One point per level: mass over the point's share of arc length.
        std::vector<std::pair<double, double>> merged;
        for (auto& p : pts) {
            if (!merged.empty() && p.first - merged.back().first <= 1e-12) merged.back().second += p.second;
            else merged.push_back(p);
        }
        const size_t m = merged.size();
        require(m >= 3, ErrorKind::DegenerateRay, "ray has fewer than 3 distinct levels");
        for (size_t i = 0; i < m; ++i) {
            double lo = i == 0 ? merged[i].first : 0.5 * (merged[i - 1].first + merged[i].first);
            double hi = i + 1 == m ? merged[i].first : 0.5 * (merged[i].first + merged[i + 1].first);
            ts.push_back(merged[i].first);
            hs.push_back(merged[i].second / std::max(hi - lo, 1e-300));
        }
        // End cells cover half a spacing and bias the value; extrapolate from the interior instead.
        auto extrapolate = [&](size_t e, size_t a, size_t b) {
            double slope = (hs[a] - hs[b]) / (ts[a] - ts[b]);
            hs[e] = std::max(0.0, hs[a] + slope * (ts[e] - ts[a]));
        };
        if (m >= 4) {
            extrapolate(0, 1, 2);
            extrapolate(m - 1, m - 2, m - 3);
        }
        if (ts.front() > 0.0) { ts.insert(ts.begin(), 0.0); hs.insert(hs.begin(), hs.front()); }
        if (ts.back() < D) { ts.push_back(D); hs.push_back(hs.back()); }
    } else {
        const int B = std::max(4, static_cast<int>(std::lround(D / (2.0 * mesh))));
        std::vector<double> mass(B, 0.0);
        for (auto& p : pts) mass[std::min(B - 1, static_cast<int>(p.first / D * B))] += p.second;
        const double w = D / B;
        ts.push_back(0.0);
        hs.push_back(0.0);
        for (int b = 0; b < B; ++b) {
            ts.push_back((b + 0.5) * w);
            hs.push_back(mass[b] / w);
        }
        ts.push_back(D);
        hs.push_back(0.0);
        // Linear extrapolation to the ends, kept nonnegative.
        hs.front() = std::max(0.0, 1.5 * hs[1] - 0.5 * hs[2]);
        hs.back() = std::max(0.0, 1.5 * hs[B] - 0.5 * hs[B - 1]);
    }
    Density1D dens = Density1D::fromSamples(ts, hs, N);
    CdReport rep = isCdDensity(dens, CurvatureParams::unitModel(N), 2.0 * mesh);
    return {std::move(dens), rep.ok, rep};
}

const char* rayLabelName(RayLabel l) {
    switch (l) {
        case RayLabel::Short: return "short";
        case RayLabel::LongBad1: return "long_bad_1";
        case RayLabel::LongBad2: return "long_bad_2";
        case RayLabel::LongGoodS: return "long_good_S";
        case RayLabel::LongGoodN: return "long_good_N";
        case RayLabel::LongGoodOther: return "long_good_other";
    }
    return "?";
}

double RayClassification::mass(RayLabel l, const NeedleDecomposition& dec) const {
    double s = 0.0;
    for (size_t q = 0; q < labels.size(); ++q)
        if (labels[q] == l) s += dec.rays[q].weight;
    return s;
}

double raySideAsymmetry(const DiscreteSpace& X, const NeedleDecomposition& dec, const Ray& ray, bool fromSouth) {
    std::vector<size_t> order(ray.chain.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return fromSouth ? ray.t[a] < ray.t[b] : ray.t[a] > ray.t[b];
    });
    const double target = ray.massE * ray.weight;
    double cum = 0.0, bestGap = target;
    size_t bestK = 0;
    for (size_t k = 0; k < order.size(); ++k) {
        cum += X.weight[ray.chain[order[k]]];
        if (std::abs(cum - target) < bestGap) {
            bestGap = std::abs(cum - target);
            bestK = k + 1;
        }
    }
    double sym = 0.0;
    for (size_t k = 0; k < order.size(); ++k) {
        int x = ray.chain[order[k]];
        bool inPrefix = k < bestK;
        if (inPrefix != static_cast<bool>(dec.E[x])) sym += X.weight[x];
    }
    return sym / ray.weight;
}

RayClassification classifyRays(const DiscreteSpace& X, const NeedleDecomposition& dec, double N, double v,
                               const ConstantBundle& constants, double delta, double floor) {
    RayClassification c;
    const size_t Q = dec.rays.size();
    c.labels.assign(Q, RayLabel::Short);
    c.lambda.assign(Q, 0.0);
    for (size_t q = 0; q < Q; ++q)
        if (c.qBar < 0 || dec.rays[q].Dq > dec.rays[c.qBar].Dq) c.qBar = static_cast<int>(q);
    const double d = std::max(delta, 0.0);
    c.poleThreshold = std::max(std::pow(d, constants.beta / N), floor);
    c.massThreshold = std::max(std::pow(d, constants.gamma), floor);
    if (Q == 0) return c;
    const Ray& bar = dec.rays[c.qBar];
    for (size_t q = 0; q < Q; ++q) {
        const Ray& r = dec.rays[q];
        double lam = 0.0;
        if (r.Dq > 0.0) {
            double D = std::min(kPi, r.Dq);
            double xi = D < kPi ? modelProfile(N, D, v).xi : 0.0;
            lam = lambdaOf(N, D, xi);
        }
        c.lambda[q] = lam;
        if (lam <= constants.etaN) {
            c.labels[q] = RayLabel::Short;
        } else if (X.d(r.south, bar.north) <= kPi - c.poleThreshold) {
            c.labels[q] = RayLabel::LongBad1;
        } else if (X.d(bar.south, r.north) <= kPi - c.poleThreshold) {
            c.labels[q] = RayLabel::LongBad2;
        } else if (raySideAsymmetry(X, dec, r, true) <= c.massThreshold) {
            c.labels[q] = RayLabel::LongGoodS;
        } else if (raySideAsymmetry(X, dec, r, false) <= c.massThreshold) {
            c.labels[q] = RayLabel::LongGoodN;
        } else {
            c.labels[q] = RayLabel::LongGoodOther;
        }
    }
    return c;
}

std::vector<double> lineCoordinates(const DiscreteSpace& X) {
    const int n = X.size();
    int a = 0, b = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (X.d(i, j) > best) { best = X.d(i, j); a = i; b = j; }
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
        s[i] = X.d(a, i);
        require(std::abs(X.d(a, i) + X.d(i, b) - best) <= 1e-9 * std::max(1.0, best), ErrorKind::InvalidParameter,
                "space is not a segment");
    }
    return s;
}

namespace {

bool isSegment(const DiscreteSpace& X) {
    if (X.dim != 1) return false;
    try {
        lineCoordinates(X);
        return true;
    } catch (const Error&) {
        return false;
    }
}

double rawCutPerimeter(const DiscreteSpace& X, const Mask& E, double rho, const Mask* window) {
    const int n = X.size();
    std::vector<double> ball(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* r = X.row(i);
        for (int j = 0; j < n; ++j)
            if (r[j] <= rho) ball[i] += X.weight[j];
    }
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!E[i] || (window && !(*window)[i])) continue;
        const double* r = X.row(i);
        for (int j = 0; j < n; ++j) {
            if (E[j] || r[j] > rho || (window && !(*window)[j])) continue;
            s += X.weight[i] * X.weight[j] / (0.5 * (ball[i] + ball[j]));
        }
    }
    const double d = X.dim;
    // (d+1) V_d / (V_{d-1} rho), with V_k the volume of the unit k-ball.
    auto unitBall = [](double k) { return std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k + 1.0); };
    return s * (d + 1.0) * unitBall(d) / (unitBall(d - 1.0) * rho);
}

}  // namespace

PerimeterModel perimeterModelFor(const DiscreteSpace& X, double rhoMesh) {
    PerimeterModel pm;
    if (isSegment(X)) {
        pm.line = true;
        return pm;
    }
    pm.rho = rhoMesh * X.mesh();
    if (X.sphereMetric) {
        // Calibrate against the closed-form cap profile sqrt(v(1-v)).
        double exact = 0.0, raw = 0.0;
        const int n = X.size();
        for (int c : {0, n / 3, (2 * n) / 3}) {
            for (double v : {0.1, 0.2, 0.3, 0.4, 0.5}) {
                CapSet cap = makeCapSet(X, c, v);
                exact += std::sqrt(cap.mass * (1.0 - cap.mass));
                raw += rawCutPerimeter(X, cap.mask, pm.rho, nullptr);
            }
        }
        pm.factor = exact / raw;
    }
    return pm;
}

double discretePerimeter(const DiscreteSpace& X, const Mask& E, const PerimeterModel& pm, const Mask* window) {
    if (!pm.line) return pm.factor * rawCutPerimeter(X, E, pm.rho, window);
    const int n = X.size();
    auto s = lineCoordinates(X);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s[a] < s[b]; });
    std::vector<double> dens(n);
    for (int k = 0; k < n; ++k) {
        double lo = k == 0 ? s[order[k]] : 0.5 * (s[order[k - 1]] + s[order[k]]);
        double hi = k + 1 == n ? s[order[k]] : 0.5 * (s[order[k]] + s[order[k + 1]]);
        dens[k] = X.weight[order[k]] / std::max(hi - lo, 1e-300);
    }
    double p = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
        int a = order[k], b = order[k + 1];
        if (E[a] == E[b]) continue;
        if (window && (!(*window)[a] || !(*window)[b])) continue;
        // Density at the cell interface, interpolated from the two cell averages.
        p += 0.5 * (dens[k] + dens[k + 1]);
    }
    return p;
}

AntipodalResult antipodalCheck(const DiscreteSpace& X, double threshold, double N, double tol) {
    require(threshold < kPi, ErrorKind::InvalidParameter, "threshold must be below pi");
    AntipodalResult r{0.0, antipodalConstant(N), 0, true};
    const int n = X.size();
    std::vector<int> far;
    for (int x = 0; x < n; ++x) {
        far.clear();
        const double* row = X.row(x);
        for (int y = 0; y < n; ++y)
            if (row[y] >= threshold) far.push_back(y);
        for (size_t a = 0; a < far.size(); ++a) {
            for (size_t b = a; b < far.size(); ++b) {
                r.worstRatio = std::max(r.worstRatio, X.d(far[a], far[b]) / (kPi - threshold));
                ++r.triples;
            }
        }
    }
    if (r.triples == 0) fail(ErrorKind::NoTriples, "no pair reaches the distance threshold");
    r.ok = r.worstRatio <= r.bound + tol;
    return r;
}

MarkovResult markovBound(const std::vector<double>& values, const std::vector<double>& weights, double a) {
    require(a < 1.0, ErrorKind::InvalidParameter, "markov threshold must be < 1");
    require(values.size() == weights.size(), ErrorKind::InvalidParameter, "values and weights differ in size");
    double c = 0.0, K = 0.0, measured = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        require(values[i] >= 0.0 && values[i] <= 1.0, ErrorKind::InvalidParameter, "values must lie in [0,1]");
        c += values[i] * weights[i];
        K += weights[i];
        if (values[i] >= a) measured += weights[i];
    }
    MarkovResult m;
    m.measured = measured;
    m.bound = (c - a * K) / (1.0 - a);
    m.ok = m.measured >= m.bound - 1e-12;
    return m;
}

BallLocalization ballLocalization(const DiscreteSpace& X, const Mask& E, int center, double r, double N,
                                  const LocalizeOptions& opt) {
    const int n = X.size();
    require(center >= 0 && center < n, ErrorKind::InvalidParameter, "ball center out of range");
    Mask inBall(n, 0), in3(n, 0);
    double mIn = 0.0, mOut = 0.0;
    for (int x = 0; x < n; ++x) {
        inBall[x] = X.d(center, x) <= r;
        in3[x] = X.d(center, x) <= 3.0 * r;
        if (!inBall[x]) continue;
        (E[x] ? mIn : mOut) += X.weight[x];
    }
    if (mIn <= 0.0 || mOut <= 0.0) fail(ErrorKind::DegenerateBall, "ball lies entirely inside E or its complement");
    std::vector<double> f(n, 0.0);
    for (int x = 0; x < n; ++x)
        if (inBall[x]) f[x] = E[x] ? 1.0 / mIn : -1.0 / mOut;
    Potential pot = kantorovichPotential(X, f, opt.knn);
    LocalizeOptions o = opt;
    o.maxBranchMass = 1.0;
    o.maxUnassignedMass = 1.0;
    NeedleDecomposition dec = extractRays(X, f, pot, E, o);

    BallLocalization out{};
    out.massInside = mIn;
    std::vector<double> vals, ws;
    for (const auto& ray : dec.rays) {
        double q1 = 0.0, e = 0.0, eb = 0.0;
        for (int x : ray.chain) {
            if (!in3[x]) continue;
            q1 += X.weight[x];
            if (E[x]) e += X.weight[x];
            if (E[x] && inBall[x]) eb += X.weight[x];
        }
        if (q1 <= 0.0) continue;
        double mE = e / q1;
        if (mE > 0.0 && mE < 1.0) out.perimeterLower += q1 * modelProfilePi(N, mE);
        vals.push_back(std::clamp(eb / q1, 0.0, 1.0));
        ws.push_back(q1);
        ++out.rays;
    }
    out.markov = markovBound(vals, ws, 0.5 * mIn);
    out.q1barMass = out.markov.measured;
    out.relativePerimeter = discretePerimeter(X, E, perimeterModelFor(X), &in3);
    return out;
}

MainTheoremReport quantify(const DiscreteSpace& X, const Mask& E, double N, const QuantifyOptions& opt) {
    MainTheoremReport rep;
    rep.N = N;
    rep.v = maskMass(X, E);
    require(rep.v > 0.0 && rep.v < 1.0, ErrorKind::Degenerate, "E must be neither empty nor full");
    ConstantBundle C = makeConstants(N, rep.v, opt.exponents);
    rep.eta = C.eta;

    rep.decomposition = localize(X, E, opt.localize);
    const auto& dec = rep.decomposition;
    rep.mesh = dec.mesh;
    const double slack = opt.floorMesh * dec.mesh;
    const double massSlack = dec.mesh;

    rep.perimeter = discretePerimeter(X, E, perimeterModelFor(X));
    rep.profile = modelProfilePi(N, rep.v);
    rep.delta = rep.perimeter - rep.profile;
    const double delta = std::max(rep.delta, 0.0);

    rep.classification = classifyRays(X, dec, N, rep.v, C, rep.delta, slack);
    const auto& cls = rep.classification;
    rep.qShort = cls.mass(RayLabel::Short, dec);
    rep.qBad1 = cls.mass(RayLabel::LongBad1, dec);
    rep.qBad2 = cls.mass(RayLabel::LongBad2, dec);
    rep.qS = cls.mass(RayLabel::LongGoodS, dec);
    rep.qN = cls.mass(RayLabel::LongGoodN, dec);
    rep.qOther = cls.mass(RayLabel::LongGoodOther, dec);
    rep.rays = static_cast<int>(dec.rays.size());
    rep.transportMass = dec.quotientMass();
    rep.branchMass = dec.branchMass(X);
    rep.zeroMass = dec.zeroMass(X);
    rep.maxMeanDeviation = dec.maxMeanDeviation();
    rep.dualityGap = dec.potential.gap;
    rep.lipschitzSlack = dec.potential.lipschitzSlack;
    rep.diamDeficit = kPi - X.diameter();
    rep.rNv = modelBallRadius(N, rep.v);

    require(cls.qBar >= 0, ErrorKind::NonConvergence, "decomposition produced no rays");
    const Ray& bar = dec.rays[cls.qBar];
    rep.Dqbar = bar.Dq;
    rep.side = rep.qS >= rep.qN ? 'S' : 'N';
    rep.xBarIndex = rep.side == 'S' ? bar.south : bar.north;
    rep.xBar = X.ids[rep.xBarIndex];
    double asym = 0.0;
    for (int x = 0; x < X.size(); ++x) {
        bool inB = X.d(rep.xBarIndex, x) <= rep.rNv;
        if (inB != static_cast<bool>(E[x])) asym += X.weight[x];
    }
    rep.asymmetry = asym;

    const double ipi = rep.profile;
    for (const auto& r : dec.rays) {
        if (r.Dq <= 0.0) continue;
        rep.rayLowerBound += r.weight * (modelProfile(N, std::min(kPi, r.Dq), rep.v).value - ipi);
    }
    rep.checks.push_back({"ray-lower-bound", rep.rayLowerBound, rep.delta + slack,
                          rep.rayLowerBound <= rep.delta + slack, false});

    const double shortBound = std::pow(C.etaN, 1.0 / N) / C.CNv * delta;
    rep.checks.push_back({"short-ray-mass", rep.qShort, shortBound + massSlack,
                          rep.qShort <= shortBound + massSlack, false});

    ExtReal c2 = C.C2At(delta);
    {
        CheckResult ch{"diameter-deficit", kPi - bar.Dq, 0.0, true, c2.isInf()};
        if (!c2.isInf()) {
            ch.bound = std::pow(c2.value * delta, 1.0 / N) + slack;
            ch.ok = ch.measured <= ch.bound;
        } else {
            ch.bound = std::numeric_limits<double>::infinity();
        }
        rep.checks.push_back(ch);
    }

    {
        CheckResult ch{"endpoint-sum", -std::numeric_limits<double>::infinity(), slack, true, false};
        for (size_t q = 0; q < dec.rays.size(); ++q) {
            if (cls.labels[q] == RayLabel::Short) continue;
            const Ray& r = dec.rays[q];
            double lhs = (kPi - X.d(r.south, bar.north)) + (kPi - X.d(bar.south, r.north));
            double rhs = (kPi - r.Dq) + (kPi - bar.Dq);
            ch.measured = std::max(ch.measured, lhs - rhs);
        }
        if (!std::isfinite(ch.measured)) ch.measured = 0.0;
        ch.ok = ch.measured <= slack;
        rep.checks.push_back(ch);
    }

    {
        CheckResult ch{"pole-cluster", 0.0, 0.0, true, c2.isInf()};
        double diam = c2.isInf() ? kPi : std::pow(c2.value * delta, 1.0 / N);
        ch.bound = C.CNantipodal * std::max(cls.poleThreshold, diam) + slack;
        for (size_t q = 0; q < dec.rays.size(); ++q) {
            RayLabel l = cls.labels[q];
            if (l != RayLabel::LongGoodS && l != RayLabel::LongGoodN && l != RayLabel::LongGoodOther) continue;
            const Ray& r = dec.rays[q];
            ch.measured = std::max({ch.measured, X.d(r.south, bar.south), X.d(r.north, bar.north)});
        }
        ch.ok = ch.measured <= ch.bound;
        rep.checks.push_back(ch);
    }

    rep.checks.push_back({"zero-mean", rep.maxMeanDeviation, 0.02, rep.maxMeanDeviation <= 0.02, false});
    return rep;
}

}  // namespace needle
