#pragma once

#include <array>
#include <string>
#include <vector>

#include "needle/common.hpp"

namespace needle {

// Finite metric measure space with a dense distance matrix.
struct DiscreteSpace {
    std::vector<long> ids;
    std::vector<std::array<double, 3>> coords;  // empty when not supplied
    std::vector<double> weight;
    std::vector<double> dist;  // row-major n x n
    int dim = 2;                // intrinsic dimension used by the perimeter kernel
    bool sphereMetric = false;

    int size() const { return static_cast<int>(weight.size()); }
    double d(int i, int j) const { return dist[static_cast<size_t>(i) * weight.size() + j]; }
    const double* row(int i) const { return dist.data() + static_cast<size_t>(i) * weight.size(); }
    double diameter() const;
    // Largest nearest-neighbour distance.
    double mesh() const;
    double totalMass() const;

    // Throws unless weights are positive and sum to 1, the matrix is symmetric with zero
    // diagonal, and the triangle inequality holds (all triples up to n = 400, sampled above).
    void validate(double tol = 1e-9, unsigned long long seed = 7) const;

    std::string toText() const;
    static DiscreteSpace fromText(const std::string& text);

    static DiscreteSpace onSphere(std::vector<std::array<double, 3>> pts, std::vector<double> w);
    static DiscreteSpace fromMatrix(std::vector<double> dist, std::vector<double> w, int dim);
};

using Mask = std::vector<char>;

double maskMass(const DiscreteSpace& X, const Mask& E);

}  // namespace needle
