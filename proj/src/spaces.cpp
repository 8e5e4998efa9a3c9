#include "needle/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "needle/density1d.hpp"

namespace needle {

DiscreteSpace makeSphere2(int n) {
    require(n >= 50, ErrorKind::InvalidParameter, "sphere2 needs n >= 50");
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    std::vector<std::array<double, 3>> pts(n);
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double th = golden * i;
        pts[i] = {r * std::cos(th), r * std::sin(th), z};
    }
    return DiscreteSpace::onSphere(std::move(pts), std::vector<double>(n, 1.0 / n));
}

DiscreteSpace makeCircle(int n) {
    require(n >= 4, ErrorKind::InvalidParameter, "circle needs n >= 4");
    std::vector<double> dm(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            int k = std::abs(i - j);
            k = std::min(k, n - k);
            dm[static_cast<size_t>(i) * n + j] = 2.0 * kPi * k / n;
        }
    }
    return DiscreteSpace::fromMatrix(std::move(dm), std::vector<double>(n, 1.0 / n), 1);
}

DiscreteSpace makeSegment(double N, double D, double xi, int n) {
    require(N > 1.0, ErrorKind::InvalidParameter, "N must exceed 1");
    require(D > 0.0, ErrorKind::DegenerateDomain, "D must be positive");
    require(xi >= 0.0 && xi + D <= kPi + 1e-12, ErrorKind::OutOfDomain, "need xi + D <= pi");
    require(n >= 4, ErrorKind::InvalidParameter, "segment needs n >= 4");
    ModelDensity model(N);
    const double h = D / (n - 1);
    std::vector<double> t(n), w(n);
    for (int i = 0; i < n; ++i) t[i] = xi + D * i / (n - 1);
    for (int i = 0; i < n; ++i) {
        double a = std::max(xi, t[i] - 0.5 * h), b = std::min(xi + D, t[i] + 0.5 * h);
        w[i] = model.cdf(std::min(b, kPi)) - model.cdf(a);
    }
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    std::vector<double> dm(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dm[static_cast<size_t>(i) * n + j] = D * std::abs(i - j) / (n - 1);
    return DiscreteSpace::fromMatrix(std::move(dm), std::move(w), 1);
}

DiscreteSpace makeSuspension(double N, int baseSize, int levels) {
    require(baseSize >= 2 && baseSize <= 20, ErrorKind::InvalidParameter, "suspension base must have 2..20 points");
    require(levels >= 2, ErrorKind::InvalidParameter, "suspension needs >= 2 interior levels");
    require(N > 1.0, ErrorKind::InvalidParameter, "N must exceed 1");
    // Interior levels plus the two poles.
    struct P { double t; int y; };
    std::vector<P> pts;
    pts.push_back({0.0, -1});
    for (int j = 1; j <= levels; ++j)
        for (int y = 0; y < baseSize; ++y) pts.push_back({kPi * j / (levels + 1), y});
    pts.push_back({kPi, -1});
    const int n = static_cast<int>(pts.size());
    auto baseDist = [&](int a, int b) {
        if (a < 0 || b < 0) return 0.0;
        int k = std::abs(a - b);
        k = std::min(k, baseSize - k);
        return std::min(kPi, 2.0 * kPi * k / baseSize);
    };
    std::vector<double> dm(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double c = std::cos(pts[i].t) * std::cos(pts[j].t) +
                       std::sin(pts[i].t) * std::sin(pts[j].t) * std::cos(baseDist(pts[i].y, pts[j].y));
            double d = std::acos(std::clamp(c, -1.0, 1.0));
            dm[static_cast<size_t>(i) * n + j] = d;
            dm[static_cast<size_t>(j) * n + i] = d;
        }
    }
    // Each level carries the sin^{N-1} mass of its band; poles take the end half-bands.
    ModelDensity model(N);
    const double h = kPi / (levels + 1);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        double a = std::max(0.0, pts[i].t - 0.5 * h), b = std::min(kPi, pts[i].t + 0.5 * h);
        double band = model.cdf(b) - model.cdf(a);
        w[i] = pts[i].y < 0 ? band : band / baseSize;
    }
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return DiscreteSpace::fromMatrix(std::move(dm), std::move(w), 2);
}

namespace {

std::vector<int> byDistance(const DiscreteSpace& X, int center) {
    std::vector<int> order(X.size());
    std::iota(order.begin(), order.end(), 0);
    const double* row = X.row(center);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return row[a] < row[b]; });
    return order;
}

}  // namespace

CapSet makeCapSet(const DiscreteSpace& X, int center, double v) {
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "cap volume must lie in (0,1)");
    require(center >= 0 && center < X.size(), ErrorKind::InvalidParameter, "cap center out of range");
    CapSet c;
    c.mask.assign(X.size(), 0);
    for (int i : byDistance(X, center)) {
        if (c.mass >= v) break;
        c.mask[i] = 1;
        c.mass += X.weight[i];
        c.radius = X.d(center, i);
    }
    return c;
}

CapSet makePerturbedCap(const DiscreteSpace& X, int center, double v, double blobVolume, int blobCenter) {
    require(blobVolume >= 0.0 && blobVolume < v, ErrorKind::InvalidParameter, "blob volume must lie in [0, v)");
    if (blobVolume == 0.0) return makeCapSet(X, center, v);
    CapSet cap = makeCapSet(X, center, v - blobVolume);
    CapSet blob = makeCapSet(X, blobCenter, blobVolume);
    for (int i = 0; i < X.size(); ++i) {
        if (!blob.mask[i]) continue;
        if (cap.mask[i]) fail(ErrorKind::Overlap, "blob intersects the shrunken cap");
        cap.mask[i] = 1;
        cap.mass += X.weight[i];
    }
    return cap;
}

int farthestPoint(const DiscreteSpace& X, int i) {
    const double* row = X.row(i);
    return static_cast<int>(std::max_element(row, row + X.size()) - row);
}

DiscreteSpace makeSpace(const SpaceSpec& s) {
    if (s.kind == "sphere2") return makeSphere2(s.resolution);
    if (s.kind == "circle") return makeCircle(s.resolution);
    if (s.kind == "segment1d") return makeSegment(s.N, s.D, s.xi, s.resolution);
    if (s.kind == "suspension") {
        int levels = std::max(2, s.resolution / std::max(1, s.baseSize));
        return makeSuspension(s.N, s.baseSize, levels);
    }
    fail(ErrorKind::InvalidParameter, "unknown space kind: " + s.kind);
}

}  // namespace needle
