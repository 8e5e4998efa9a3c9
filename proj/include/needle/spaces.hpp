#pragma once

#include <string>
#include <vector>

#include "needle/space.hpp"

namespace needle {

// Fibonacci lattice on the unit 2-sphere, geodesic distances, uniform weights.
DiscreteSpace makeSphere2(int n);
// n equally spaced points on a circle of length 2 pi, arc distances.
DiscreteSpace makeCircle(int n);
// Uniform grid on [xi, xi + D]; each weight is the sin^{N-1} mass of the point's grid cell.
DiscreteSpace makeSegment(double N, double D, double xi, int n);
// [0, pi] x_sin^{N-1} Y over a base of `baseSize` equally spaced points on a unit circle.
DiscreteSpace makeSuspension(double N, int baseSize, int levels);

struct CapSet {
    Mask mask;
    double mass = 0.0;
    double radius = 0.0;  // distance of the last included point
};

// Points added in order of distance from `center` until the mass reaches v.
CapSet makeCapSet(const DiscreteSpace& X, int center, double v);
// Cap of volume v - blobVolume at `center` plus a cap of volume blobVolume at `blobCenter`.
CapSet makePerturbedCap(const DiscreteSpace& X, int center, double v, double blobVolume, int blobCenter);

int farthestPoint(const DiscreteSpace& X, int i);

struct SpaceSpec {
    std::string kind = "sphere2";  // sphere2 | circle | segment1d | suspension
    int resolution = 1500;
    double N = 2.0;
    double D = kPi;
    double xi = 0.0;
    int baseSize = 12;
    unsigned long long seed = 1;
};

DiscreteSpace makeSpace(const SpaceSpec& spec);

}  // namespace needle
