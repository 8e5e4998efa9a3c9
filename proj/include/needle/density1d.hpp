#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "needle/common.hpp"

namespace needle {

struct CurvatureParams {
    double K;
    double N;
    // The normalization used everywhere in the pipeline: K = N - 1.
    static CurvatureParams unitModel(double N) { return {N - 1.0, N}; }
};

ExtReal sigmaCoeff(double t, double theta, const CurvatureParams& p);
ExtReal tauCoeff(double t, double theta, const CurvatureParams& p);

// sin^{N-1}(t) / omega_N on [0, pi].
class ModelDensity {
public:
    explicit ModelDensity(double N);

    double N() const { return N_; }
    double omega() const { return omega_; }
    double operator()(double t) const;
    double logDerivative(double t) const;  // (N-1) cot t
    // Normalized mass of [0, x], x in [0, pi].
    double cdf(double x) const;
    // Unnormalized integral of sin^{N-1} over [0, x].
    double rawCdf(double x) const { return omega_ * cdf(x); }
    double quantile(double m) const;

private:
    double N_;
    double omega_;
};

enum class DensityForm { Model, SinePower, Generator, Grid };
const char* densityFormName(DensityForm f);

// A probability density on [0, D]. Closed forms keep their formula; grid forms
// interpolate linearly between samples. Both carry a uniform grid with
// per-cell masses for quadrature.
class Density1D {
public:
    static constexpr int kDefaultCells = 2048;

    static Density1D model(double N, int cells = kDefaultCells);
    // c * sin^{N-1}(t + xi) on [0, D], normalized.
    static Density1D sinePower(double N, double D, double xi, int cells = kDefaultCells);
    // c * (min_i A_i sin(t + phi_i))_+^{N-1} on [0, D], normalized.
    static Density1D minOfSines(double N, double D, std::vector<double> amps,
                                std::vector<double> phases, int cells = kDefaultCells);
    // Any closed form; `N` only selects endpoint handling (N < 2 has infinite slope).
    static Density1D closedForm(double D, std::function<double(double)> f, double N,
                                int cells = kDefaultCells, std::string label = "closed");
    // Samples on an arbitrary increasing grid t_0 = 0 < ... < t_m = D.
    static Density1D fromSamples(std::vector<double> t, std::vector<double> h, double N = 0.0);

    DensityForm form() const { return form_; }
    bool isClosedForm() const { return form_ != DensityForm::Grid; }
    double D() const { return D_; }
    double N() const { return N_; }
    int cells() const { return static_cast<int>(grid_.size()) - 1; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return vals_; }
    const std::vector<double>& amps() const { return amps_; }
    const std::vector<double>& phases() const { return phases_; }
    double rawMass() const { return rawMass_; }

    double operator()(double t) const;
    double cdf(double x) const;
    double mass(double a, double b) const { return cdf(b) - cdf(a); }
    // x in [0, D] with cdf(x) = m, by bisection.
    double quantile(double m) const;

    std::string toText() const;
    static Density1D fromText(const std::string& text);

private:
    double rawEval(double t) const;
    void build(int cells);
    double cellIntegral(int i, double a, double b) const;
    int cellOf(double x) const;

    DensityForm form_ = DensityForm::Grid;
    double D_ = 0.0;
    double N_ = 0.0;
    double xi_ = 0.0;
    std::vector<double> amps_, phases_;
    std::function<double(double)> fn_;
    double scale_ = 1.0;
    double rawMass_ = 1.0;
    std::vector<double> grid_, vals_, cum_;
};

struct CdReport {
    bool ok = true;
    double worstSynthetic = 0.0;  // max of rhs - lhs over checked triples
    double worstDifferential = 0.0;
    double atX0 = 0.0, atX1 = 0.0, atS = 0.0;
    long triples = 0;
};

CdReport isCdDensity(const Density1D& h, const CurvatureParams& p, double tol, int maxPoints = 257);
double defaultCdTolerance(const Density1D& h);

struct RatioBounds {
    double lower, upper, ratio;
    bool satisfied;
};
RatioBounds densityRatioBounds(const Density1D& h, double t, double s, double N, double tol = 1e-9);

struct Sandwich {
    double lower, upper, value;
    bool satisfied;
};
Sandwich densitySandwich(const Density1D& h, double t, double N, double lambdaD, double tol = 1e-9);

struct LogDerivBracket {
    double lower, upper, measured, lipschitz;
    bool inside;
};
LogDerivBracket logDerivativeBounds(const Density1D& h, double t, double N, double tol = 1e-6);

struct UniqueMax {
    double x0;
    bool monotoneOk;
};
UniqueMax uniqueMax(const Density1D& h);

// Random member of the min-of-sines family on [0, D]: 1..3 terms, phases in [0, pi - D].
Density1D randomCdDensity(double N, double D, std::mt19937_64& rng, int cells = Density1D::kDefaultCells);

// sup over t in [a, b] of |h(t) - h_N(t)| on the grid points of h.
double supDeviationFromModel(const Density1D& h, double N, double a, double b);

}  // namespace needle
