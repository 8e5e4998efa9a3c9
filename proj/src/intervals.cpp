#include "needle/intervals.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <queue>
#include <sstream>

#include "needle/profile.hpp"

namespace needle {

IntervalSet::IntervalSet(double D, std::vector<std::pair<double, double>> parts, double mergeGap) : D_(D) {
    require(D > 0.0, ErrorKind::DegenerateDomain, "interval domain must have positive length");
    for (auto& [a, b] : parts) {
        a = std::max(0.0, a);
        b = std::min(D, b);
    }
    parts.erase(std::remove_if(parts.begin(), parts.end(), [](auto& p) { return !(p.first < p.second); }),
                parts.end());
    std::sort(parts.begin(), parts.end());
    for (auto& p : parts) {
        if (!parts_.empty() && p.first - parts_.back().second <= mergeGap) {
            parts_.back().second = std::max(parts_.back().second, p.second);
        } else {
            parts_.push_back(p);
        }
    }
}

IntervalSet IntervalSet::complement() const {
    std::vector<std::pair<double, double>> out;
    double cur = 0.0;
    for (auto& [a, b] : parts_) {
        if (a > cur) out.emplace_back(cur, a);
        cur = b;
    }
    if (cur < D_) out.emplace_back(cur, D_);
    return IntervalSet(D_, out);
}

IntervalSet IntervalSet::intersect(const IntervalSet& o) const {
    std::vector<std::pair<double, double>> out;
    size_t i = 0, j = 0;
    while (i < parts_.size() && j < o.parts_.size()) {
        double a = std::max(parts_[i].first, o.parts_[j].first);
        double b = std::min(parts_[i].second, o.parts_[j].second);
        if (a < b) out.emplace_back(a, b);
        if (parts_[i].second < o.parts_[j].second) ++i;
        else ++j;
    }
    return IntervalSet(D_, out);
}

IntervalSet IntervalSet::unite(const IntervalSet& o) const {
    auto all = parts_;
    all.insert(all.end(), o.parts_.begin(), o.parts_.end());
    return IntervalSet(D_, all);
}

std::vector<double> IntervalSet::interiorBoundary() const {
    std::vector<double> pts;
    for (auto& [a, b] : parts_) {
        if (a > 0.0) pts.push_back(a);
        if (b < D_) pts.push_back(b);
    }
    return pts;
}

std::string IntervalSet::toText() const {
    std::string s;
    char buf[80];
    for (size_t i = 0; i < parts_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.17g %.17g", i ? "; " : "", parts_[i].first, parts_[i].second);
        s += buf;
    }
    return s;
}

IntervalSet IntervalSet::fromText(double D, const std::string& text) {
    std::vector<std::pair<double, double>> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream is(item);
        double a, b;
        if (!(is >> a >> b)) fail(ErrorKind::Parse, "interval item must be `a b`: " + item);
        std::string rest;
        if (is >> rest) fail(ErrorKind::Parse, "trailing text in interval item: " + item);
        require(a < b, ErrorKind::Parse, "interval with a >= b: " + item);
        parts.emplace_back(a, b);
    }
    return IntervalSet(D, parts);
}

double volume(const Density1D& h, const IntervalSet& E) {
    double s = 0.0;
    for (auto& [a, b] : E.parts()) s += h.mass(a, b);
    return s;
}

double perimeter1d(const Density1D& h, const IntervalSet& E, std::optional<std::pair<double, double>> window) {
    double s = 0.0;
    for (double x : E.interiorBoundary()) {
        if (window && !(x > window->first && x < window->second)) continue;
        s += h(x);
    }
    return s;
}

double symDiffVolume(const Density1D& h, const IntervalSet& E, const IntervalSet& F) {
    return std::max(0.0, volume(h, E) + volume(h, F) - 2.0 * volume(h, E.intersect(F)));
}

// ---------------------------------------------------------------------------

namespace {

struct DpState {
    double cost = std::numeric_limits<double>::infinity();
    double mass = 0.0;  // signed: -C at openings, +C at closings
    std::array<uint16_t, 6> pos{};
};

struct Candidate {
    double approxCost;
    int toggles;
    std::array<uint16_t, 6> pos;
    double mass;
    bool closeSolved;  // true: solved point closes the last interval; false: opens [p, D]
    bool operator<(const Candidate& o) const { return approxCost < o.approxCost; }
};

// Inverse CDF lookup on a uniform mass lattice; exact solves at the nodes.
class InverseTable {
public:
    InverseTable(const Density1D& h, int U) : U_(U), x_(U + 1) {
        for (int k = 0; k <= U; ++k) x_[k] = h.quantile(static_cast<double>(k) / U);
    }
    double operator()(double m) const {
        double s = std::clamp(m, 0.0, 1.0) * U_;
        int k = std::min(static_cast<int>(s), U_ - 1);
        double w = s - k;
        return x_[k] * (1.0 - w) + x_[k + 1] * w;
    }

private:
    int U_;
    std::vector<double> x_;
};

IntervalSet buildSet(double D, const std::vector<double>& toggles) {
    std::vector<std::pair<double, double>> parts;
    for (size_t j = 0; j + 1 < toggles.size(); j += 2) parts.emplace_back(toggles[j], toggles[j + 1]);
    return IntervalSet(D, parts);
}

}  // namespace

BruteForceResult bruteForceMin(const Density1D& h, double v, int kMax, int grid, const BruteForceOptions& opt) {
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "brute force needs v in (0,1)");
    require(kMax >= 1 && kMax <= 3, ErrorKind::InvalidParameter, "k_max must be in 1..3");
    require(grid >= 2 && grid <= 400, ErrorKind::InvalidParameter, "grid must be in 2..400 cells");
    const int n = grid;
    const int T = 2 * kMax;
    const int B = opt.massBins;
    const long work = static_cast<long>(n + 1) * (T + 1) * B;
    if (work > opt.budget) fail(ErrorKind::BudgetExceeded, "configuration budget exceeded: " + std::to_string(work));

    const double D = h.D();
    std::vector<double> x(n + 1), C(n + 1), w(n + 1);
    for (int i = 0; i <= n; ++i) {
        x[i] = D * i / n;
        C[i] = h.cdf(x[i]);
        w[i] = (i == 0 || i == n) ? 0.0 : h(x[i]);
    }
    x[n] = D;
    C[n] = 1.0;
    InverseTable inv(h, 1 << 16);
    auto bin = [B](double M) { return std::clamp(static_cast<int>((M + 1.0) * 0.5 * B), 0, B - 1); };

    std::vector<std::vector<DpState>> S(T + 1, std::vector<DpState>(B));
    S[0][bin(0.0)].cost = 0.0;

    const size_t keep = static_cast<size_t>(std::max(8, opt.keepPerClass * 8));
    std::priority_queue<Candidate> top;  // max-heap on cost: the worst kept candidate on top
    std::vector<std::priority_queue<Candidate>> perK(kMax + 1);
    auto offer = [&](const Candidate& c) {
        int k = (c.toggles + 1) / 2 + (c.closeSolved ? 0 : 1);
        auto push = [&](std::priority_queue<Candidate>& q, size_t cap) {
            if (q.size() < cap) q.push(c);
            else if (c.approxCost < q.top().approxCost) { q.pop(); q.push(c); }
        };
        push(top, keep);
        push(perK[std::min(k, kMax)], static_cast<size_t>(opt.keepPerClass));
    };
    auto terminal = [&](const DpState& s, int t, int last) {
        double lastC = t == 0 ? 0.0 : C[last];
        if (t % 2 == 1) {
            double u = v - s.mass;
            if (u > lastC && u < 1.0) offer({s.cost + h(inv(u)), t, s.pos, s.mass, true});
        } else if (t / 2 + 1 <= kMax) {
            double u = s.mass + 1.0 - v;
            if (u > lastC && u < 1.0) offer({s.cost + h(inv(u)), t, s.pos, s.mass, false});
        }
    };
    terminal(S[0][bin(0.0)], 0, 0);

    std::vector<int> touched;
    for (int i = 0; i <= n; ++i) {
        for (int t = T; t >= 1; --t) {
            bool opening = (t % 2 == 1);
            if (i == n && opening) continue;  // an interval cannot start at D
            if (i == 0 && !opening) continue;
            const double sgn = opening ? -1.0 : 1.0;
            touched.clear();
            for (int b = 0; b < B; ++b) {
                const DpState& src = S[t - 1][b];
                if (!std::isfinite(src.cost)) continue;
                DpState nxt = src;
                nxt.cost += w[i];
                nxt.mass += sgn * C[i];
                nxt.pos[t - 1] = static_cast<uint16_t>(i);
                int nb = bin(nxt.mass);
                if (nxt.cost < S[t][nb].cost) {
                    S[t][nb] = nxt;
                    touched.push_back(nb);
                }
            }
            for (int nb : touched)
                if (S[t][nb].pos[t - 1] == i) terminal(S[t][nb], t, i);
        }
    }

    // Exact re-evaluation of the retained candidates.
    std::vector<Candidate> cands;
    auto drain = [&](std::priority_queue<Candidate> q) {
        while (!q.empty()) { cands.push_back(q.top()); q.pop(); }
    };
    drain(top);
    for (auto& q : perK) drain(q);

    BruteForceResult res;
    res.work = work;
    res.configurations = 0;
    res.oneSided = oneSidedProfile(h, v);
    res.perimeter = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> seen;
    for (const auto& c : cands) {
        std::vector<double> tg;
        for (int j = 0; j < c.toggles; ++j) tg.push_back(x[c.pos[j]]);
        if (c.closeSolved) {
            tg.push_back(h.quantile(v - c.mass));
        } else {
            tg.push_back(h.quantile(c.mass + 1.0 - v));
            tg.push_back(D);
        }
        if (std::find(seen.begin(), seen.end(), tg) != seen.end()) continue;
        seen.push_back(tg);
        IntervalSet E = buildSet(D, tg);
        double P = perimeter1d(h, E);
        ++res.configurations;
        res.deficits.push_back(P - res.oneSided);
        bool better = P < res.perimeter - 1e-15 ||
                      (P <= res.perimeter + 1e-15 && res.best.parts() > E.parts());
        if (better) {
            res.perimeter = P;
            res.best = E;
        }
    }
    return res;
}

QuantRatio quantitativeRatio(const Density1D& h, const IntervalSet& E, double v) {
    QuantRatio r;
    r.numerator = deficit1d(h, E, v);
    QuantileRadii q = quantileRadii(h, v);
    IntervalSet left(h.D(), {{0.0, q.rMinus}});
    IntervalSet right(h.D(), {{q.rPlus, h.D()}});
    r.denominator = std::min(symDiffVolume(h, E, left), symDiffVolume(h, E, right));
    r.ratio = r.denominator < 1e-12 ? ExtReal::inf() : ExtReal::finite(r.numerator / r.denominator);
    return r;
}

std::optional<IntervalSet> randomAdmissibleSet(const Density1D& h, double v, int kMax, int grid, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nk(1, kMax);
    std::uniform_int_distribution<int> pick(0, grid - 1);
    std::bernoulli_distribution closeLast(0.5);
    const double D = h.D();
    int k = nk(rng);
    bool close = closeLast(rng);
    int m = close ? 2 * k - 1 : 2 * k - 2;
    std::vector<int> idx;
    while (static_cast<int>(idx.size()) < m) {
        int p = pick(rng);
        if (std::find(idx.begin(), idx.end(), p) == idx.end()) idx.push_back(p);
    }
    std::sort(idx.begin(), idx.end());
    std::vector<double> tg;
    double M = 0.0;
    for (int j = 0; j < m; ++j) {
        double xj = D * idx[j] / grid;
        tg.push_back(xj);
        M += (j % 2 == 0 ? -1.0 : 1.0) * h.cdf(xj);
    }
    double lastC = m == 0 ? 0.0 : h.cdf(tg.back());
    double u = close ? v - M : M + 1.0 - v;
    if (!(u > lastC + 1e-12 && u < 1.0 - 1e-12)) return std::nullopt;
    double p = h.quantile(u);
    tg.push_back(p);
    if (!close) tg.push_back(D);
    return buildSet(D, tg);
}

SweepResult quantitativeSweep(const Density1D& h, double v, double eps, long samples, int grid,
                              unsigned long long seed, int kMax) {
    std::mt19937_64 rng(seed);
    SweepResult r{v, eps, std::numeric_limits<double>::infinity(), IntervalSet(), 0, 0};
    long attempts = 0;
    while (r.evaluated < samples) {
        require(++attempts < 100 * samples + 1000, ErrorKind::NonConvergence, "admissible sampler stalled");
        auto E = randomAdmissibleSet(h, v, kMax, grid, rng);
        if (!E) continue;
        ++r.evaluated;
        QuantRatio q = quantitativeRatio(h, *E, v);
        if (q.ratio.isInf()) {
            ++r.sentinel;
            continue;
        }
        if (q.ratio.value < r.ratioMin) {
            r.ratioMin = q.ratio.value;
            r.argmin = *E;
        }
    }
    return r;
}

}  // namespace needle
