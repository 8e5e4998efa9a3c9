#pragma once

#include <vector>

namespace needle {

// Uncapacitated min-cost transshipment by primal network simplex.
// Arcs may be added between solves; the basis is kept and re-optimized.
// Optimality: reduced cost c_ij - p_i + p_j >= 0 on every arc.
class NetworkSimplex {
public:
    NetworkSimplex(std::vector<double> supply, double maxArcCost);

    int addArc(int from, int to, double cost);
    // Returns the number of pivots performed.
    long solve();

    int nodeCount() const { return n_; }
    int arcCount() const { return static_cast<int>(from_.size()) - n_; }
    double flow(int arc) const { return flow_[arc + n_]; }
    int arcFrom(int arc) const { return from_[arc + n_]; }
    int arcTo(int arc) const { return to_[arc + n_]; }
    double arcCost(int arc) const { return cost_[arc + n_]; }
    double potential(int node) const { return pot_[node]; }
    // Sum of cost times flow, artificial arcs included.
    double primalCost() const;
    double dualValue() const;
    // Flow still routed through the artificial root.
    double artificialFlow() const;

private:
    int n_;
    int root_;
    double bigM_;
    std::vector<double> supply_;
    std::vector<int> from_, to_;
    std::vector<double> cost_, flow_;
    std::vector<char> basic_;
    std::vector<int> parent_, parArc_, depth_;
    std::vector<char> up_;  // parArc oriented child -> parent
    std::vector<int> firstChild_, nextSib_, prevSib_;
    std::vector<double> pot_;
    size_t cursor_ = 0;

    double reducedCost(int a) const { return cost_[a] - pot_[from_[a]] + pot_[to_[a]]; }
    int findEntering(double eps);
    void pivot(int enter);
    void detach(int x);
    void attach(int x, int p);
    void refreshSubtree(int top);
};

}  // namespace needle
