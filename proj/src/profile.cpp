#include "needle/profile.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "needle/intervals.hpp"

namespace needle {

namespace {

// Inverse model CDF through the inverse regularized incomplete beta function.
double modelQuantileFast(const ModelDensity& m, double q) {
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return kPi;
    if (q > 0.5) return kPi - modelQuantileFast(m, 1.0 - q);
    double x = boost::math::ibeta_inv(0.5 * m.N(), 0.5, 2.0 * q);
    return std::asin(std::sqrt(std::clamp(x, 0.0, 1.0)));
}

double goldenMin(const std::function<double(double)>& f, double a, double b, double tol, double& xmin) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) { b = d; d = c; fd = fc; c = b - gr * (b - a); fc = f(c); }
        else { a = c; c = d; fc = fd; d = a + gr * (b - a); fd = f(d); }
    }
    xmin = 0.5 * (a + b);
    return f(xmin);
}

}  // namespace

double rawSinePowerIntegral(double N, double r) {
    ModelDensity m(N);
    return m.omega() * m.cdf(r);
}

double modelBallRadius(double N, double v) {
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "ball volume must lie in (0,1)");
    ModelDensity m(N);
    return modelQuantileFast(m, v);
}

double lambdaOf(double N, double D, double xi) {
    require(N > 1.0, ErrorKind::InvalidParameter, "N must exceed 1");
    require(D > 0.0, ErrorKind::DegenerateDomain, "D must be positive");
    require(xi >= 0.0 && xi + D <= kPi + 1e-12, ErrorKind::OutOfDomain, "window [xi, xi+D] must lie in [0, pi]");
    ModelDensity m(N);
    if (xi == 0.0 && D >= kPi) return 1.0;
    return m.cdf(std::min(kPi, xi + D)) - m.cdf(xi);
}

double modelProfilePi(double N, double v) {
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "profile needs v in (0,1)");
    ModelDensity m(N);
    return m(modelQuantileFast(m, v));
}

double windowProfile(double N, double D, double xi, double v) {
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "profile needs v in (0,1)");
    ModelDensity m(N);
    const double F0 = m.cdf(xi);
    const double lam = (xi == 0.0 && D >= kPi) ? 1.0 : m.cdf(std::min(kPi, xi + D)) - F0;
    // r- and r+ of the window, measured from xi.
    double rm = modelQuantileFast(m, F0 + lam * v) - xi;
    double rp = modelQuantileFast(m, F0 + lam * (1.0 - v)) - xi;
    return std::min(m(xi + rm), m(xi + rp)) / lam;
}

ModelProfile modelProfile(double N, double D, double v) {
    require(N > 1.0, ErrorKind::InvalidParameter, "N must exceed 1");
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "profile needs v in (0,1)");
    require(D > 0.0, ErrorKind::DegenerateDomain, "D must be positive");
    ModelProfile r{N, D, v, 0.0, 0.0, 1.0, false};
    if (D >= kPi) {
        r.value = modelProfilePi(N, v);
        return r;
    }
    const double L = kPi - D;
    auto obj = [&](double xi) { return windowProfile(N, D, std::clamp(xi, 0.0, L), v); };
    const int G = 64;
    std::vector<double> xs(G), fs(G);
    for (int k = 0; k < G; ++k) {
        xs[k] = L * k / (G - 1);
        fs[k] = obj(xs[k]);
    }
    int kb = 0;
    for (int k = 1; k < G; ++k)
        if (fs[k] < fs[kb] - 1e-15 * std::abs(fs[kb])) kb = k;
    double a = xs[std::max(0, kb - 1)], b = xs[std::min(G - 1, kb + 1)];
    double xm;
    double fm = goldenMin(obj, a, b, 1e-8, xm);
    if (fs[kb] <= fm) {
        xm = xs[kb];
        fm = fs[kb];
    }
    // Compare against the bracket ends, which golden section never evaluates exactly.
    if (obj(a) < fm) { fm = obj(a); xm = a; }
    if (obj(b) < fm) { fm = obj(b); xm = b; }
    const double tieTol = 1e-9 * std::max(1.0, std::abs(fm));
    for (int k = 0; k < G; ++k) {
        if (std::abs(xs[k] - xm) > 2.0 * L / (G - 1) && fs[k] - fm <= tieTol) r.tie = true;
    }
    r.value = fm;
    r.xi = xm;
    r.lambda = lambdaOf(N, D, xm);
    return r;
}

QuantileRadii quantileRadii(const Density1D& h, double v) {
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "quantile radii need v in (0,1)");
    return {h.quantile(v), h.quantile(1.0 - v), v};
}

double oneSidedProfile(const Density1D& h, double v) {
    QuantileRadii q = quantileRadii(h, v);
    return std::min(h(q.rMinus), h(q.rPlus));
}

double deficit1d(const Density1D& h, const IntervalSet& E, double v, double volumeTol) {
    double vol = volume(h, E);
    if (std::abs(vol - v) > volumeTol)
        fail(ErrorKind::VolumeMismatch, "recorded volume disagrees with the measure of E");
    return perimeter1d(h, E) - oneSidedProfile(h, v);
}

IdentityCheck profileIdentityCheck(double N, double D, double xi, double v) {
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "identity check needs v in (0,1)");
    const double lam = lambdaOf(N, D, xi);
    Density1D win = Density1D::sinePower(N, std::min(D, kPi - xi), xi);
    IdentityCheck c;
    c.lhs = oneSidedProfile(win, v);
    ModelDensity m(N);
    const double F0 = m.cdf(xi);
    c.rhs = std::min(modelProfilePi(N, lam * v + F0), modelProfilePi(N, lam * (1.0 - v) + F0)) / lam;
    c.gap = std::abs(c.lhs - c.rhs);
    return c;
}

double profileDerivativePi(double N, double v, double step) {
    return (modelProfilePi(N, v + step) - modelProfilePi(N, v - step)) / (2.0 * step);
}

double smallVolumeProfileLimit(double N) {
    const double p = (N - 1.0) / N;
    const double t[3] = {1e-3, 1e-4, 1e-5};
    double g[3];
    for (int i = 0; i < 3; ++i) g[i] = modelProfilePi(N, t[i]) / std::pow(t[i], p);
    // Corrections come in powers of r^2 ~ t^{2/N}.
    const double q1 = std::pow(0.1, 2.0 / N);
    const double q2 = std::pow(0.1, 4.0 / N);
    double r12 = (g[1] - q1 * g[0]) / (1.0 - q1);
    double r23 = (g[2] - q1 * g[1]) / (1.0 - q1);
    return (r23 - q2 * r12) / (1.0 - q2);
}

double concavityConstant(double N, double v) {
    const double I = modelProfilePi(N, v);
    const double d = profileDerivativePi(N, v);
    const double p = (N - 1.0) / N;
    const double L = smallVolumeProfileLimit(N);
    return std::min({I - v * d, I + (1.0 - v) * d, L * std::min(std::pow(v, p), std::pow(1.0 - v, p))});
}

ConcavityGap concavityGap(double N, double D, double xi, double v, double tol) {
    const double lam = lambdaOf(N, D, xi);
    ModelDensity m(N);
    const double F0 = m.cdf(xi);
    ConcavityGap g;
    if (lam >= 1.0) {
        g.gap = 0.0;
    } else {
        g.gap = std::min(modelProfilePi(N, lam * v + F0), modelProfilePi(N, lam * (1.0 - v) + F0)) -
                lam * modelProfilePi(N, v);
    }
    g.constant = concavityConstant(N, v);
    g.bound = g.constant * std::min(std::pow(lam, (N - 1.0) / N), 1.0 - lam);
    g.holds = g.gap >= g.bound - tol;
    return g;
}

double solveEtaN(double N) {
    require(N > 1.0, ErrorKind::InvalidParameter, "N must exceed 1");
    const double p = (N - 1.0) / N;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        double mid = 0.5 * (lo + hi);
        if (std::pow(mid, p) - (1.0 - mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double exponentBound(double N, double beta, double gamma, bool riemannian) {
    const double f = riemannian ? N / (N - 1.0) : N / (2.0 * N - 1.0);
    return f * std::min({gamma, 1.0 - gamma, 1.0 - beta});
}

double etaExponent(double N, double beta, double gamma, bool riemannian) {
    return std::min(exponentBound(N, beta, gamma, riemannian), beta / N);
}

ExponentChoice defaultExponents(double N, bool riemannian) {
    ExponentChoice e;
    e.riemannian = riemannian;
    e.gamma = 0.5;
    e.beta = riemannian ? N * N / (N * N + N - 1.0) : N * N / (N * N + 2.0 * N - 1.0);
    e.alpha = 0.999 * exponentBound(N, e.beta, e.gamma, riemannian);
    return e;
}

void validateExponents(double N, const ExponentChoice& e) {
    require(e.beta > 0.0 && e.beta < 1.0, ErrorKind::InvalidParameter, "beta must lie in (0,1)");
    require(e.gamma > 0.0 && e.gamma < 1.0, ErrorKind::InvalidParameter, "gamma must lie in (0,1)");
    require(e.alpha > 0.0, ErrorKind::InvalidParameter, "alpha must be positive");
    const double b = exponentBound(N, e.beta, e.gamma, e.riemannian);
    if (!(e.alpha < b))
        fail(ErrorKind::InvalidParameter,
             "alpha must be < " + std::to_string(b) + " = factor * min{gamma, 1-gamma, 1-beta}");
}

double antipodalConstant(double N) {
    require(N > 1.0, ErrorKind::InvalidParameter, "N must exceed 1");
    auto f = [N](double r) { return rawSinePowerIntegral(N, r) / std::pow(r, N); };
    const int G = 2000;
    int kb = G;
    double best = f(kPi);
    for (int k = 1; k < G; ++k) {
        double val = f(kPi * k / G);
        if (val < best) { best = val; kb = k; }
    }
    if (kb < G) {
        double xm;
        best = std::min(best, goldenMin(f, kPi * (kb - 1) / G, kPi * (kb + 1) / G, 1e-10, xm));
    }
    return std::max(1.0, (std::pow(2.0, N) - 1.0) / (N * best));
}

ExtReal ConstantBundle::C2At(double delta) const {
    double bracket = CNv - delta * std::pow(etaN, 1.0 / (N - 1.0));
    if (bracket <= 0.0) return ExtReal::inf();
    return ExtReal::finite(1.0 / (C1Nv * bracket));
}

ConstantBundle makeConstants(double N, double v, std::optional<ExponentChoice> exps) {
    require(N > 1.0, ErrorKind::InvalidParameter, "N must exceed 1");
    require(v > 0.0 && v < 1.0, ErrorKind::InvalidParameter, "v must lie in (0,1)");
    ExponentChoice e = exps ? *exps : defaultExponents(N);
    validateExponents(N, e);
    ConstantBundle c;
    c.N = N;
    c.v = v;
    c.etaN = solveEtaN(N);
    c.alpha = e.alpha;
    c.beta = e.beta;
    c.gamma = e.gamma;
    c.riemannian = e.riemannian;
    c.eta = etaExponent(N, e.beta, e.gamma, e.riemannian);
    c.CNv = concavityConstant(N, v);
    c.CNantipodal = antipodalConstant(N);

    // Centered windows carry the most mass, so they decide when lambda can exceed eta_N.
    double lo = 0.0, hi = kPi;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (lambdaOf(N, mid, 0.5 * (kPi - mid)) <= c.etaN) lo = mid;
        else hi = mid;
    }
    c.DN = hi;
    double inf = std::numeric_limits<double>::infinity();
    const int GD = 400, GX = 17;
    for (int k = 0; k < GD; ++k) {
        // Geometric spacing of pi - D toward zero.
        double gap0 = kPi - c.DN, gap1 = 1e-4;
        double gap = gap0 * std::pow(gap1 / gap0, static_cast<double>(k) / (GD - 1));
        double D = kPi - gap;
        for (int j = 0; j < GX; ++j) {
            double xi = gap * j / (GX - 1);
            double lam = lambdaOf(N, D, xi);
            inf = std::min(inf, (1.0 - lam) / std::pow(gap, N));
        }
    }
    c.C1Nv = inf;
    c.C2Nv = 1.0 / (c.CNv * c.C1Nv);
    return c;
}

ScalingFit diameterGapScaling(double N, double v, double epsLo, double epsHi, int points) {
    require(points >= 2, ErrorKind::InvalidParameter, "need at least two points");
    ScalingFit f;
    const double ipi = modelProfilePi(N, v);
    for (int k = 0; k < points; ++k) {
        double eps = epsLo * std::pow(epsHi / epsLo, static_cast<double>(k) / (points - 1));
        double gap = modelProfile(N, kPi - eps, v).value - ipi;
        require(gap > 0.0, ErrorKind::NonConvergence, "profile gap not positive at eps = " + std::to_string(eps));
        f.logEps.push_back(std::log(eps));
        f.logGap.push_back(std::log(gap));
    }
    double mx = 0, my = 0;
    for (int k = 0; k < points; ++k) { mx += f.logEps[k]; my += f.logGap[k]; }
    mx /= points;
    my /= points;
    double sxx = 0, sxy = 0;
    for (int k = 0; k < points; ++k) {
        sxx += (f.logEps[k] - mx) * (f.logEps[k] - mx);
        sxy += (f.logEps[k] - mx) * (f.logGap[k] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace needle
