#include "needle/netsimplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "needle/common.hpp"

namespace needle {

NetworkSimplex::NetworkSimplex(std::vector<double> supply, double maxArcCost)
    : n_(static_cast<int>(supply.size())), root_(n_), supply_(std::move(supply)) {
    bigM_ = (n_ + 1.0) * (std::max(maxArcCost, 0.0) + 1.0);
    const int nodes = n_ + 1;
    parent_.assign(nodes, -1);
    parArc_.assign(nodes, -1);
    depth_.assign(nodes, 0);
    up_.assign(nodes, 0);
    firstChild_.assign(nodes, -1);
    nextSib_.assign(nodes, -1);
    prevSib_.assign(nodes, -1);
    pot_.assign(nodes, 0.0);
    for (int i = 0; i < n_; ++i) {
        const bool src = supply_[i] >= 0.0;
        from_.push_back(src ? i : root_);
        to_.push_back(src ? root_ : i);
        cost_.push_back(bigM_);
        flow_.push_back(std::abs(supply_[i]));
        basic_.push_back(1);
        attach(i, root_);
        parArc_[i] = i;
        up_[i] = src;
        depth_[i] = 1;
        pot_[i] = src ? bigM_ : -bigM_;
    }
}

int NetworkSimplex::addArc(int from, int to, double cost) {
    require(from >= 0 && from < n_ && to >= 0 && to < n_, ErrorKind::InvalidParameter, "arc endpoint out of range");
    from_.push_back(from);
    to_.push_back(to);
    cost_.push_back(cost);
    flow_.push_back(0.0);
    basic_.push_back(0);
    return static_cast<int>(from_.size()) - 1 - n_;
}

void NetworkSimplex::attach(int x, int p) {
    parent_[x] = p;
    prevSib_[x] = -1;
    nextSib_[x] = firstChild_[p];
    if (firstChild_[p] >= 0) prevSib_[firstChild_[p]] = x;
    firstChild_[p] = x;
}

void NetworkSimplex::detach(int x) {
    const int p = parent_[x];
    if (p < 0) return;
    if (prevSib_[x] >= 0)
        nextSib_[prevSib_[x]] = nextSib_[x];
    else
        firstChild_[p] = nextSib_[x];
    if (nextSib_[x] >= 0) prevSib_[nextSib_[x]] = prevSib_[x];
    parent_[x] = -1;
    prevSib_[x] = nextSib_[x] = -1;
}

void NetworkSimplex::refreshSubtree(int top) {
    std::vector<int> stack{top};
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        const int p = parent_[x];
        const int a = parArc_[x];
        depth_[x] = depth_[p] + 1;
        pot_[x] = up_[x] ? cost_[a] + pot_[p] : pot_[p] - cost_[a];
        for (int c = firstChild_[x]; c >= 0; c = nextSib_[c]) stack.push_back(c);
    }
}

int NetworkSimplex::findEntering(double eps) {
    const size_t m = from_.size();
    const size_t block = std::max<size_t>(32, static_cast<size_t>(std::sqrt(static_cast<double>(m))));
    int best = -1;
    double bestRc = -eps;
    size_t seen = 0, inBlock = 0;
    while (seen < m) {
        size_t a = cursor_;
        cursor_ = (cursor_ + 1) % m;
        ++seen;
        ++inBlock;
        if (!basic_[a]) {
            double rc = reducedCost(static_cast<int>(a));
            if (rc < bestRc) {
                bestRc = rc;
                best = static_cast<int>(a);
            }
        }
        if (inBlock >= block) {
            if (best >= 0) return best;
            inBlock = 0;
        }
    }
    return best;
}

void NetworkSimplex::pivot(int enter) {
    const int a = from_[enter], b = to_[enter];
    // Nodes on the two tree paths, from a (resp. b) up to but excluding the apex.
    std::vector<int> pathA, pathB;
    int u = a, w = b;
    while (u != w) {
        if (depth_[u] >= depth_[w]) {
            pathA.push_back(u);
            u = parent_[u];
        } else {
            pathB.push_back(w);
            w = parent_[w];
        }
    }
    // Cycle orientation follows the entering arc: apex -> ... -> a -> b -> ... -> apex.
    // Cunningham's rule: the last blocking arc in that order leaves.
    double theta = std::numeric_limits<double>::infinity();
    int leaveNode = -1;
    bool leaveOnA = false;
    for (auto it = pathA.rbegin(); it != pathA.rend(); ++it) {
        int x = *it;
        if (up_[x] && flow_[parArc_[x]] <= theta) {
            theta = flow_[parArc_[x]];
            leaveNode = x;
            leaveOnA = true;
        }
    }
    for (int x : pathB) {
        if (!up_[x] && flow_[parArc_[x]] <= theta) {
            theta = flow_[parArc_[x]];
            leaveNode = x;
            leaveOnA = false;
        }
    }
    if (leaveNode < 0) fail(ErrorKind::NonConvergence, "transport problem is unbounded");
    if (theta > 0.0) {
        for (int x : pathA) flow_[parArc_[x]] += up_[x] ? -theta : theta;
        for (int x : pathB) flow_[parArc_[x]] += up_[x] ? theta : -theta;
        flow_[enter] += theta;
    }
    const int leaveArc = parArc_[leaveNode];
    flow_[leaveArc] = 0.0;
    basic_[leaveArc] = 0;
    basic_[enter] = 1;

    const int in = leaveOnA ? a : b;
    int prevNode = leaveOnA ? b : a;
    int prevArc = enter;
    char prevUp = leaveOnA ? 1 : 0;  // entering arc a->b: a is the child iff it hangs below b
    int y = in;
    while (true) {
        const int nextNode = parent_[y];
        const int nextArc = parArc_[y];
        const char nextUp = up_[y];
        detach(y);
        attach(y, prevNode);
        parArc_[y] = prevArc;
        up_[y] = prevUp;
        if (y == leaveNode) break;
        prevNode = y;
        prevArc = nextArc;
        prevUp = !nextUp;
        y = nextNode;
    }
    refreshSubtree(in);
}

long NetworkSimplex::solve() {
    double scale = 1.0;
    for (size_t a = n_; a < cost_.size(); ++a) scale = std::max(scale, std::abs(cost_[a]));
    const double eps = 1e-12 * scale;
    long pivots = 0;
    const long limit = 200L * static_cast<long>(from_.size()) + 100000;
    for (;;) {
        int e = findEntering(eps);
        if (e < 0) break;
        pivot(e);
        if (++pivots > limit) fail(ErrorKind::NonConvergence, "network simplex pivot limit reached");
    }
    return pivots;
}

double NetworkSimplex::primalCost() const {
    double s = 0.0;
    for (size_t a = 0; a < cost_.size(); ++a) s += cost_[a] * flow_[a];
    return s;
}

double NetworkSimplex::dualValue() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += pot_[i] * supply_[i];
    return s;
}

double NetworkSimplex::artificialFlow() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += flow_[i];
    return s;
}

}  // namespace needle
