#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "needle/density1d.hpp"

namespace needle {

class IntervalSet {
public:
    IntervalSet() = default;
    // Sorts, clips to [0, D], and merges overlaps and gaps narrower than `mergeGap`.
    IntervalSet(double D, std::vector<std::pair<double, double>> parts, double mergeGap = 0.0);

    double D() const { return D_; }
    const std::vector<std::pair<double, double>>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    size_t size() const { return parts_.size(); }

    IntervalSet complement() const;
    IntervalSet intersect(const IntervalSet& o) const;
    IntervalSet unite(const IntervalSet& o) const;
    // Boundary points strictly inside (0, D).
    std::vector<double> interiorBoundary() const;

    std::string toText() const;
    static IntervalSet fromText(double D, const std::string& text);

    friend bool operator==(const IntervalSet& a, const IntervalSet& b) {
        return a.D_ == b.D_ && a.parts_ == b.parts_;
    }

private:
    double D_ = 0.0;
    std::vector<std::pair<double, double>> parts_;
};

double volume(const Density1D& h, const IntervalSet& E);

// Sum of h over interior boundary points, optionally only those inside the open window.
double perimeter1d(const Density1D& h, const IntervalSet& E,
                   std::optional<std::pair<double, double>> window = std::nullopt);

double symDiffVolume(const Density1D& h, const IntervalSet& E, const IntervalSet& F);

struct BruteForceResult {
    IntervalSet best;
    double perimeter;
    long configurations;       // exactly evaluated configurations
    long work;                 // dynamic-programming state updates
    std::vector<double> deficits;  // deficit of every exactly evaluated configuration
    double oneSided;           // min{h(r-), h(r+)}
};

struct BruteForceOptions {
    int massBins = 16384;
    long budget = 100000000L;
    int keepPerClass = 8;
};

BruteForceResult bruteForceMin(const Density1D& h, double v, int kMax, int grid,
                               const BruteForceOptions& opt = {});

struct QuantRatio {
    ExtReal ratio;
    double numerator, denominator;
};
QuantRatio quantitativeRatio(const Density1D& h, const IntervalSet& E, double v);

// Random finite union of at most kMax intervals with endpoints on a `grid`-cell lattice,
// the last boundary point solved so that the volume equals v. Returns nullopt if the draw
// admits no solution.
std::optional<IntervalSet> randomAdmissibleSet(const Density1D& h, double v, int kMax, int grid,
                                               std::mt19937_64& rng);

struct SweepResult {
    double v, eps;
    double ratioMin;
    IntervalSet argmin;
    long evaluated, sentinel;
};
SweepResult quantitativeSweep(const Density1D& h, double v, double eps, long samples, int grid,
                              unsigned long long seed, int kMax = 3);

}  // namespace needle
