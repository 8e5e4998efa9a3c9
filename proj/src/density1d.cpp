#include "needle/density1d.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>

namespace needle {

namespace {

double sinPow(double x, double e) {
    double s = std::sin(x);
    if (s <= 0.0) return 0.0;
    return std::pow(s, e);
}

double tanhSinh(const std::function<double(double)>& f, double a, double b) {
    if (b <= a) return 0.0;
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
    return integrator.integrate(f, a, b, 1e-14);
}

double adaptiveGk(const std::function<double(double)>& f, double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 12, 1e-14);
}

double omegaByQuadrature(double N) {
    static std::mutex mu;
    static std::map<double, double> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(N);
        if (it != cache.end()) return it->second;
    }
    double w = tanhSinh([N](double t) { return sinPow(t, N - 1.0); }, 0.0, kPi);
    std::lock_guard<std::mutex> lock(mu);
    cache[N] = w;
    return w;
}

}  // namespace

ExtReal sigmaCoeff(double t, double theta, const CurvatureParams& p) {
    require(t >= 0.0 && t <= 1.0, ErrorKind::InvalidParameter, "sigma: t must lie in [0,1]");
    require(p.K > 0.0, ErrorKind::InvalidParameter, "sigma: K must be positive");
    require(p.N > 0.0, ErrorKind::InvalidParameter, "sigma: N must be positive");
    require(theta >= 0.0, ErrorKind::InvalidParameter, "sigma: theta must be nonnegative");
    if (theta == 0.0) return ExtReal::finite(t);
    double k = std::sqrt(p.K / p.N);
    if (theta * k >= kPi) return ExtReal::inf();
    if (t == 1.0) return ExtReal::finite(1.0);
    return ExtReal::finite(std::sin(t * theta * k) / std::sin(theta * k));
}

ExtReal tauCoeff(double t, double theta, const CurvatureParams& p) {
    require(p.N > 1.0, ErrorKind::InvalidParameter, "tau: N must exceed 1");
    ExtReal s = sigmaCoeff(t, theta, {p.K, p.N - 1.0});
    if (s.isInf()) return s;
    return ExtReal::finite(std::pow(t, 1.0 / p.N) * std::pow(s.value, 1.0 - 1.0 / p.N));
}

// ---------------------------------------------------------------------------

ModelDensity::ModelDensity(double N) : N_(N) {
    require(N > 1.0, ErrorKind::InvalidParameter, "model density needs N > 1");
    omega_ = omegaByQuadrature(N);
}

double ModelDensity::operator()(double t) const {
    if (t <= 0.0 || t >= kPi) return 0.0;
    return sinPow(t, N_ - 1.0) / omega_;
}

double ModelDensity::logDerivative(double t) const { return (N_ - 1.0) / std::tan(t); }

double ModelDensity::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= kPi) return 1.0;
    if (x > 0.5 * kPi) return 1.0 - cdf(kPi - x);
    double s = std::sin(x);
    return 0.5 * boost::math::ibeta(0.5 * N_, 0.5, s * s);
}

double ModelDensity::quantile(double m) const {
    if (m <= 0.0) return 0.0;
    if (m >= 1.0) return kPi;
    double lo = 0.0, hi = kPi;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        double mid = 0.5 * (lo + hi);
        if (cdf(mid) < m) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

const char* densityFormName(DensityForm f) {
    switch (f) {
        case DensityForm::Model: return "model";
        case DensityForm::SinePower: return "sine-power";
        case DensityForm::Generator: return "generator";
        case DensityForm::Grid: return "grid";
    }
    return "grid";
}

double Density1D::rawEval(double t) const {
    switch (form_) {
        case DensityForm::Model:
        case DensityForm::SinePower:
            return sinPow(t + xi_, N_ - 1.0);
        case DensityForm::Generator: {
            double g = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < amps_.size(); ++i) g = std::min(g, amps_[i] * std::sin(t + phases_[i]));
            return g <= 0.0 ? 0.0 : std::pow(g, N_ - 1.0);
        }
        case DensityForm::Grid:
            break;
    }
    return fn_ ? std::max(0.0, fn_(t)) : 0.0;
}

double Density1D::operator()(double t) const {
    if (t < 0.0 || t > D_) return 0.0;
    if (form_ != DensityForm::Grid || fn_) {
        if (form_ == DensityForm::Grid) return scale_ * rawEval(t);
        return scale_ * rawEval(t);
    }
    int i = cellOf(t);
    double a = grid_[i], b = grid_[i + 1];
    double w = (b > a) ? (t - a) / (b - a) : 0.0;
    return vals_[i] * (1.0 - w) + vals_[i + 1] * w;
}

int Density1D::cellOf(double x) const {
    int n = cells();
    if (x <= grid_.front()) return 0;
    if (x >= grid_.back()) return n - 1;
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    int i = static_cast<int>(it - grid_.begin()) - 1;
    return std::clamp(i, 0, n - 1);
}

// Integral of the unscaled closed form over [a, b] within cell i.
double Density1D::cellIntegral(int i, double a, double b) const {
    if (b <= a) return 0.0;
    if (form_ == DensityForm::Grid && !fn_) {
        // Exact for the piecewise-linear interpolant (already scaled).
        return 0.5 * ((*this)(a) + (*this)(b)) * (b - a);
    }
    auto f = [this](double t) { return rawEval(t); };
    int n = cells();
    // Endpoint cells may carry an infinite-slope power singularity (N < 2).
    if (i == 0 || i == n - 1) return tanhSinh(f, a, b);
    if (form_ == DensityForm::Generator && amps_.size() > 1) {
        auto active = [this](double t) {
            int best = 0;
            double g = std::numeric_limits<double>::infinity();
            for (size_t k = 0; k < amps_.size(); ++k) {
                double v = amps_[k] * std::sin(t + phases_[k]);
                if (v < g) { g = v; best = static_cast<int>(k); }
            }
            return best;
        };
        if (active(a) != active(b) || active(a) != active(0.5 * (a + b))) return adaptiveGk(f, a, b);
    }
    double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

void Density1D::build(int cells) {
    require(D_ > 0.0, ErrorKind::DegenerateDomain, "density domain length must be positive");
    require(cells >= 2, ErrorKind::InvalidParameter, "need at least 2 cells");
    grid_.resize(cells + 1);
    for (int i = 0; i <= cells; ++i) grid_[i] = D_ * static_cast<double>(i) / cells;
    grid_.back() = D_;
    scale_ = 1.0;
    cum_.assign(cells + 1, 0.0);
    for (int i = 0; i < cells; ++i) cum_[i + 1] = cum_[i] + cellIntegral(i, grid_[i], grid_[i + 1]);
    rawMass_ = cum_.back();
    require(rawMass_ > 0.0, ErrorKind::DegenerateDomain, "density has zero mass");
    scale_ = 1.0 / rawMass_;
    for (auto& c : cum_) c *= scale_;
    vals_.resize(cells + 1);
    for (int i = 0; i <= cells; ++i) vals_[i] = scale_ * rawEval(grid_[i]);
}

Density1D Density1D::model(double N, int cells) {
    require(N > 1.0, ErrorKind::InvalidParameter, "model density needs N > 1");
    Density1D d;
    d.form_ = DensityForm::Model;
    d.D_ = kPi;
    d.N_ = N;
    d.build(cells);
    return d;
}

Density1D Density1D::sinePower(double N, double D, double xi, int cells) {
    require(N > 1.0, ErrorKind::InvalidParameter, "sine-power density needs N > 1");
    require(D > 0.0, ErrorKind::DegenerateDomain, "D must be positive");
    require(xi >= 0.0 && xi + D <= kPi + 1e-12, ErrorKind::OutOfDomain, "window [xi, xi+D] must lie in [0, pi]");
    Density1D d;
    d.form_ = DensityForm::SinePower;
    d.D_ = D;
    d.N_ = N;
    d.xi_ = xi;
    d.build(cells);
    return d;
}

Density1D Density1D::minOfSines(double N, double D, std::vector<double> amps, std::vector<double> phases, int cells) {
    require(N > 1.0, ErrorKind::InvalidParameter, "min-of-sines density needs N > 1");
    require(!amps.empty() && amps.size() == phases.size(), ErrorKind::InvalidParameter,
            "amplitudes and phases must be nonempty and equal length");
    for (double a : amps) require(a > 0.0, ErrorKind::InvalidParameter, "amplitudes must be positive");
    Density1D d;
    d.form_ = DensityForm::Generator;
    d.D_ = D;
    d.N_ = N;
    d.amps_ = std::move(amps);
    d.phases_ = std::move(phases);
    d.build(cells);
    return d;
}

Density1D Density1D::closedForm(double D, std::function<double(double)> f, double N, int cells, std::string) {
    Density1D d;
    d.form_ = DensityForm::Grid;
    d.D_ = D;
    d.N_ = N;
    d.fn_ = std::move(f);
    d.build(cells);
    return d;
}

Density1D Density1D::fromSamples(std::vector<double> t, std::vector<double> h, double N) {
    require(t.size() >= 3 && t.size() == h.size(), ErrorKind::InvalidParameter, "need >= 3 matching samples");
    for (size_t i = 1; i < t.size(); ++i)
        require(t[i] > t[i - 1], ErrorKind::InvalidParameter, "sample abscissae must increase");
    double t0 = t.front();
    for (auto& x : t) x -= t0;
    Density1D d;
    d.form_ = DensityForm::Grid;
    d.D_ = t.back();
    require(d.D_ > 0.0, ErrorKind::DegenerateDomain, "degenerate sample domain");
    d.N_ = N;
    d.grid_ = std::move(t);
    d.vals_ = std::move(h);
    for (auto& v : d.vals_) {
        require(std::isfinite(v) && v >= 0.0, ErrorKind::InvalidParameter, "density samples must be finite and >= 0");
    }
    double total = 0.0;
    for (size_t i = 0; i + 1 < d.grid_.size(); ++i)
        total += 0.5 * (d.vals_[i] + d.vals_[i + 1]) * (d.grid_[i + 1] - d.grid_[i]);
    require(total > 0.0, ErrorKind::DegenerateDomain, "density has zero mass");
    d.rawMass_ = total;
    for (auto& v : d.vals_) v /= total;
    d.cum_.assign(d.grid_.size(), 0.0);
    for (size_t i = 0; i + 1 < d.grid_.size(); ++i)
        d.cum_[i + 1] = d.cum_[i] + 0.5 * (d.vals_[i] + d.vals_[i + 1]) * (d.grid_[i + 1] - d.grid_[i]);
    return d;
}

double Density1D::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= D_) return 1.0;
    int i = cellOf(x);
    double part = cellIntegral(i, grid_[i], x);
    if (form_ != DensityForm::Grid || fn_) part *= scale_;
    return cum_[i] + part;
}

double Density1D::quantile(double m) const {
    if (m <= 0.0) return 0.0;
    if (m >= 1.0) return D_;
    auto it = std::lower_bound(cum_.begin(), cum_.end(), m);
    int i = std::clamp(static_cast<int>(it - cum_.begin()) - 1, 0, cells() - 1);
    double lo = grid_[i], hi = grid_[i + 1];
    for (int k = 0; k < 200 && hi - lo > 4e-16 * std::max(1.0, D_); ++k) {
        double mid = 0.5 * (lo + hi);
        if (cdf(mid) < m) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::string Density1D::toText() const {
    std::ostringstream os;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %s\n", D_, N_, densityFormName(form_));
    os << buf;
    for (size_t i = 0; i < grid_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", grid_[i], vals_[i]);
        os << buf;
    }
    return os.str();
}

Density1D Density1D::fromText(const std::string& text) {
    std::istringstream is(text);
    double D = 0, N = 0;
    std::string form;
    if (!(is >> D >> N >> form)) fail(ErrorKind::Parse, "density header must be `D N form`");
    std::vector<double> t, h;
    double a, b;
    while (is >> a >> b) {
        t.push_back(a);
        h.push_back(b);
    }
    if (!is.eof()) fail(ErrorKind::Parse, "malformed `t h` line in density file");
    if (form == "model" && std::abs(D - kPi) < 1e-12 && N > 1.0)
        return model(N, static_cast<int>(t.size()) >= 3 ? static_cast<int>(t.size()) - 1 : kDefaultCells);
    Density1D d = fromSamples(std::move(t), std::move(h), N);
    require(std::abs(d.D() - D) <= 1e-9 * std::max(1.0, D), ErrorKind::Parse, "header D disagrees with samples");
    return d;
}

// ---------------------------------------------------------------------------

double defaultCdTolerance(const Density1D& h) { return h.isClosedForm() ? 1e-8 : 1e-6; }

CdReport isCdDensity(const Density1D& h, const CurvatureParams& p, double tol, int maxPoints) {
    require(h.D() > 0.0, ErrorKind::DegenerateDomain, "D must be positive");
    require(p.N > 1.0 && p.K > 0.0, ErrorKind::InvalidParameter, "CD check needs N > 1, K > 0");
    const double e = 1.0 / (p.N - 1.0);
    const CurvatureParams pm{p.K, p.N - 1.0};
    const auto& grid = h.grid();
    int n = static_cast<int>(grid.size());
    int stride = std::max(1, (n - 1 + maxPoints - 2) / std::max(1, maxPoints - 1));
    std::vector<double> xs, gs;
    for (int i = 0; i < n; i += stride) xs.push_back(grid[i]);
    if (xs.back() != grid.back()) xs.push_back(grid.back());
    double gmax = 0.0;
    for (double x : xs) {
        gs.push_back(std::pow(h(x), e));
        gmax = std::max(gmax, gs.back());
    }
    // Values at rounding level (sin(pi) in floating point) count as zero mass.
    for (double& g : gs)
        if (g <= 1e-12 * gmax) g = 0.0;
    CdReport rep;
    rep.worstSynthetic = -std::numeric_limits<double>::infinity();
    const double ss[3] = {0.25, 0.5, 0.75};
    for (size_t i = 0; i < xs.size(); ++i) {
        for (size_t j = i + 1; j < xs.size(); ++j) {
            double theta = xs[j] - xs[i];
            for (double s : ss) {
                ExtReal a = sigmaCoeff(1.0 - s, theta, pm);
                ExtReal b = sigmaCoeff(s, theta, pm);
                double rhs = 0.0;
                bool infViol = false;
                if (gs[i] > 0.0) {
                    if (a.isInf()) infViol = true;
                    else rhs += a.value * gs[i];
                }
                if (gs[j] > 0.0) {
                    if (b.isInf()) infViol = true;
                    else rhs += b.value * gs[j];
                }
                double lhs = std::pow(h((1.0 - s) * xs[i] + s * xs[j]), e);
                // Past the conjugate distance both endpoint values must vanish; how far they are from
                // zero is the violation.
                double viol = infViol ? std::max(gs[i], gs[j]) : rhs - lhs;
                ++rep.triples;
                if (viol > rep.worstSynthetic) {
                    rep.worstSynthetic = viol;
                    rep.atX0 = xs[i];
                    rep.atX1 = xs[j];
                    rep.atS = s;
                }
            }
        }
    }
    const double scale = std::max(1.0, gmax);
    rep.ok = rep.worstSynthetic <= tol * scale;

    rep.worstDifferential = -std::numeric_limits<double>::infinity();
    if (h.isClosedForm()) {
        const double eta = 1e-3;
        auto g = [&](double x) { return std::pow(h(x), e); };
        // Index of the smallest term of a min-of-sines density; -1 for other forms.
        auto active = [&](double x) {
            if (h.form() != DensityForm::Generator) return -1;
            int best = 0;
            for (size_t i = 1; i < h.amps().size(); ++i)
                if (h.amps()[i] * std::sin(x + h.phases()[i]) < h.amps()[best] * std::sin(x + h.phases()[best]))
                    best = static_cast<int>(i);
            return best;
        };
        for (double x : grid) {
            if (x < 2.0 * eta || x > h.D() - 2.0 * eta) continue;
            // Kinks between terms are concave; the three-point check above covers them.
            if (active(x - 2 * eta) != active(x + 2 * eta) || active(x) != active(x + 2 * eta)) continue;
            double g0 = g(x);
            double d1 = (g(x + eta) - 2.0 * g0 + g(x - eta)) / (eta * eta);
            double d2 = (g(x + 2 * eta) - 2.0 * g0 + g(x - 2 * eta)) / (4 * eta * eta);
            double g2 = (4.0 * d1 - d2) / 3.0;
            double val = g2 + p.K / (p.N - 1.0) * g0;
            rep.worstDifferential = std::max(rep.worstDifferential, val);
        }
        if (rep.worstDifferential > tol * scale) rep.ok = false;
    }
    return rep;
}

RatioBounds densityRatioBounds(const Density1D& h, double t, double s, double N, double tol) {
    const double D = h.D();
    require(t > 0.0 && s > 0.0, ErrorKind::OutOfDomain, "ratio bounds need t > 0 and s > 0");
    require(t + s <= D + 1e-15, ErrorKind::OutOfDomain, "ratio bounds need t + s <= D");
    const double eps = kPi - D;
    const double e = N - 1.0;
    RatioBounds r;
    r.lower = std::pow(std::sin(t + s + eps) / std::sin(t + eps), e);
    r.upper = std::pow(std::sin(t + s) / std::sin(t), e);
    r.ratio = h(t + s) / h(t);
    r.satisfied = r.ratio >= r.lower - tol * std::max(1.0, r.lower) && r.ratio <= r.upper + tol * std::max(1.0, r.upper);
    return r;
}

Sandwich densitySandwich(const Density1D& h, double t, double N, double lambdaD, double tol) {
    const double D = h.D();
    require(t > 0.0 && t < D, ErrorKind::OutOfDomain, "sandwich needs t in (0, D)");
    ModelDensity hn(N);
    const double eps = kPi - D;
    const double w = hn.omega();
    double a = hn(t), b = hn(t + eps);
    Sandwich r;
    r.lower = w / (w * lambdaD + eps) * std::min(a, b);
    r.upper = w / (w - eps) * std::max(a, b);
    r.value = h(t);
    r.satisfied = r.value >= r.lower - tol * std::max(1.0, r.lower) && r.value <= r.upper + tol * std::max(1.0, r.upper);
    return r;
}

LogDerivBracket logDerivativeBounds(const Density1D& h, double t, double N, double tol) {
    const double D = h.D();
    require(t > 0.0 && t < D, ErrorKind::OutOfDomain, "log-derivative bracket needs t in (0, D)");
    const double eps = kPi - D;
    ModelDensity hn(N);
    LogDerivBracket r;
    r.lower = hn.logDerivative(t + eps);
    r.upper = hn.logDerivative(t);
    double eta = std::min({1e-5, 0.5 * t, 0.5 * (D - t)});
    double ht = h(t);
    r.measured = ht > 0.0 ? (h(t + eta) - h(t - eta)) / (2.0 * eta * ht) : 0.0;
    double up = hn.omega() / (hn.omega() - eps) * std::max(hn(t), hn(t + eps));
    r.lipschitz = std::max(std::abs(r.lower), std::abs(r.upper)) * up;
    double slack = tol * std::max(1.0, std::abs(r.measured));
    r.inside = r.measured >= r.lower - slack && r.measured <= r.upper + slack;
    return r;
}

UniqueMax uniqueMax(const Density1D& h) {
    const auto& g = h.grid();
    const auto& v = h.values();
    int n = static_cast<int>(v.size());
    int imax = 0;
    for (int i = 1; i < n; ++i)
        if (v[i] > v[imax]) imax = i;
    const double top = v[imax];
    const double flatTol = 1e-12 * std::max(1.0, top);
    int lo = imax, hi = imax;
    while (lo > 0 && top - v[lo - 1] <= flatTol) --lo;
    while (hi < n - 1 && top - v[hi + 1] <= flatTol) ++hi;
    if (hi - lo > 2) fail(ErrorKind::FlatDensity, "maximum attained on more than 2 adjacent cells");

    UniqueMax r;
    r.x0 = g[imax];
    if (h.isClosedForm() && imax > 0 && imax < n - 1) {
        double a = g[imax - 1], b = g[imax + 1];
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = h(c), fd = h(d);
        while (b - a > 1e-12) {
            if (fc > fd) { b = d; d = c; fd = fc; c = b - gr * (b - a); fc = h(c); }
            else { a = c; c = d; fc = fd; d = a + gr * (b - a); fd = h(d); }
        }
        r.x0 = 0.5 * (a + b);
    }
    r.monotoneOk = true;
    for (int i = 0; i + 1 <= lo; ++i)
        if (!(v[i + 1] > v[i])) r.monotoneOk = false;
    for (int i = hi; i + 1 < n; ++i)
        if (!(v[i + 1] < v[i])) r.monotoneOk = false;
    return r;
}

Density1D randomCdDensity(double N, double D, std::mt19937_64& rng, int cells) {
    std::uniform_int_distribution<int> nk(1, 3);
    std::uniform_real_distribution<double> ua(0.5, 2.0);
    std::uniform_real_distribution<double> up(0.0, std::max(0.0, kPi - D));
    int k = nk(rng);
    std::vector<double> A(k), P(k);
    for (int i = 0; i < k; ++i) {
        A[i] = ua(rng);
        P[i] = up(rng);
    }
    return Density1D::minOfSines(N, D, A, P, cells);
}

double supDeviationFromModel(const Density1D& h, double N, double a, double b) {
    ModelDensity hn(N);
    double worst = 0.0;
    for (double t : h.grid()) {
        if (t < a || t > b) continue;
        worst = std::max(worst, std::abs(h(t) - hn(t)));
    }
    return worst;
}

}  // namespace needle
