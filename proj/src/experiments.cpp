#include "needle/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "needle/acceptance.hpp"
#include "needle/intervals.hpp"
#include "needle/localize.hpp"
#include "needle/profile.hpp"
#include "needle/spaces.hpp"

namespace needle {

namespace fs = std::filesystem;
using nlohmann::json;

int workerCount() {
    if (const char* s = std::getenv("NEEDLE_WORKERS")) {
        int n = std::atoi(s);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::string readFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write to a sibling temp file, then rename over the target.
void writeAtomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
        out << content;
        if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json finiteOrNull(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

DiscreteSpace loadSpace(const ExperimentConfig& cfg) {
    if (!cfg.spaceFile.empty()) return DiscreteSpace::fromText(readFile(cfg.spaceFile));
    return makeSpace(cfg.space);
}

Mask loadSet(const DiscreteSpace& X, const ExperimentConfig& cfg, double v, double blob) {
    require(cfg.center >= 0 && cfg.center < X.size(), ErrorKind::InvalidParameter, "center out of range");
    if (cfg.setKind == "cap") return makeCapSet(X, cfg.center, v).mask;
    if (cfg.setKind == "perturbed") {
        int bc = cfg.blobCenter >= 0 ? cfg.blobCenter : farthestPoint(X, cfg.center);
        require(bc < X.size(), ErrorKind::InvalidParameter, "blob center out of range");
        return makePerturbedCap(X, cfg.center, v, blob, bc).mask;
    }
    // mask file: point ids, whitespace separated
    require(!cfg.maskFile.empty(), ErrorKind::InvalidParameter, "set=mask needs mask_file");
    std::istringstream is(readFile(cfg.maskFile));
    Mask E(X.size(), 0);
    long id;
    while (is >> id) {
        auto it = std::find(X.ids.begin(), X.ids.end(), id);
        require(it != X.ids.end(), ErrorKind::Parse, "mask id " + std::to_string(id) + " not in the space");
        E[it - X.ids.begin()] = 1;
    }
    require(!is.bad() && is.eof(), ErrorKind::Parse, "mask file must contain integer ids");
    double m = maskMass(X, E);
    require(m > 0.0 && m < 1.0, ErrorKind::VolumeMismatch, "mask must have mass strictly between 0 and 1");
    return E;
}

json reportJson(const DiscreteSpace& X, const MainTheoremReport& r) {
    json j;
    j["delta"] = r.delta;
    j["asymmetry"] = r.asymmetry;
    j["diam_deficit"] = r.diamDeficit;
    j["q_short"] = r.qShort;
    j["q_bad1"] = r.qBad1;
    j["q_bad2"] = r.qBad2;
    j["q_S"] = r.qS;
    j["q_N"] = r.qN;
    j["x_bar"] = r.xBar;
    j["r_N_v"] = r.rNv;
    j["v"] = r.v;
    j["N"] = r.N;
    j["perimeter"] = r.perimeter;
    j["profile"] = r.profile;
    j["q_other"] = r.qOther;
    j["side"] = std::string(1, r.side);
    j["eta"] = r.eta;
    j["mesh"] = r.mesh;
    j["ray_lower_bound"] = r.rayLowerBound;
    j["D_qbar"] = r.Dqbar;
    j["transport_mass"] = r.transportMass;
    j["branch_mass"] = r.branchMass;
    j["zero_mass"] = r.zeroMass;
    j["max_mean_deviation"] = r.maxMeanDeviation;
    j["duality_gap"] = r.dualityGap;
    j["lipschitz_slack"] = r.lipschitzSlack;
    j["rays"] = r.rays;
    j["points"] = X.size();
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"measured", finiteOrNull(c.measured)}, {"bound", finiteOrNull(c.bound)},
                          {"ok", c.ok}, {"vacuous", c.vacuous}});
    j["checks"] = checks;
    json labels = json::array();
    for (size_t q = 0; q < r.classification.labels.size(); ++q)
        labels.push_back({{"ray", q}, {"label", rayLabelName(r.classification.labels[q])},
                          {"weight", r.decomposition.rays[q].weight}, {"D_q", r.decomposition.rays[q].Dq}});
    j["ray_labels"] = labels;
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json runProfile(const ExperimentConfig& cfg, const fs::path& out) {
    std::ostringstream csv;
    csv << "N,D,v,profile,xi,lambda,tie\n";
    long rows = 0;
    for (double D : cfg.Ds) {
        for (int i = 0; i < cfg.vPoints; ++i) {
            double v = (i + 0.5) / cfg.vPoints;
            ModelProfile p = modelProfile(cfg.N, D, v);
            csv << num(cfg.N) << ',' << num(D) << ',' << num(v) << ',' << num(p.value) << ',' << num(p.xi) << ','
                << num(p.lambda) << ',' << (p.tie ? 1 : 0) << '\n';
            ++rows;
        }
    }
    writeAtomic(out / "profile.csv", csv.str());
    return {{"command", "profile"}, {"rows", rows}, {"files", {"profile.csv"}}};
}

json runCdcheck(const ExperimentConfig& cfg, const fs::path& out) {
    Density1D h = [&] {
        if (!cfg.densityFile.empty()) return Density1D::fromText(readFile(cfg.densityFile));
        if (cfg.densityKind == "model") return Density1D::model(cfg.N);
        if (cfg.densityKind == "sine") return Density1D::sinePower(cfg.N, cfg.D, cfg.xi);
        if (cfg.densityKind == "random") {
            std::mt19937_64 rng(cfg.seed);
            return randomCdDensity(cfg.N, cfg.D, rng);
        }
        fail(ErrorKind::InvalidParameter, "density must be model, sine or random");
    }();
    CdReport rep = isCdDensity(h, CurvatureParams::unitModel(cfg.N), defaultCdTolerance(h));
    UniqueMax um = uniqueMax(h);
    json j = {{"ok", rep.ok},
              {"form", densityFormName(h.form())},
              {"D", h.D()},
              {"N", cfg.N},
              {"worst_synthetic", rep.worstSynthetic},
              {"worst_differential", rep.worstDifferential},
              {"triples", rep.triples},
              {"max_location", um.x0},
              {"monotone_ok", um.monotoneOk}};
    writeAtomic(out / "report.json", dump(j));
    return {{"command", "cdcheck"}, {"ok", rep.ok}, {"files", {"report.json"}}};
}

json runNeedle(const ExperimentConfig& cfg, const fs::path& out) {
    DiscreteSpace X = loadSpace(cfg);
    Mask E = loadSet(X, cfg, cfg.v, cfg.blobVolume);
    NeedleDecomposition dec = localize(X, E, cfg.quantify.localize);
    json rays = json::array();
    for (const Ray& r : dec.rays) {
        json ids = json::array(), ts = json::array();
        for (size_t k = 0; k < r.chain.size(); ++k) {
            ids.push_back(X.ids[r.chain[k]]);
            ts.push_back(r.t[k]);
        }
        json ray = {{"ids", ids},     {"t", ts},           {"south", X.ids[r.south]}, {"north", X.ids[r.north]},
                    {"D_q", r.Dq},    {"weight", r.weight}, {"mass_E", r.massE}};
        try {
            FittedRay fit = fitRayDensity(X, r, cfg.N, dec.mesh);
            json gt = json::array(), gh = json::array();
            const int samples = 64;
            for (int i = 0; i <= samples; ++i) {
                double t = fit.density.D() * i / samples;
                gt.push_back(t);
                gh.push_back(fit.density(t));
            }
            ray["density"] = {{"t", gt}, {"h", gh}};
            ray["cd_ok"] = fit.cdOk;
        } catch (const Error& e) {
            ray["density"] = nullptr;
            ray["cd_ok"] = nullptr;
            ray["fit_error"] = errorKindName(e.kind());
        }
        rays.push_back(ray);
    }
    json zero = json::array(), branch = json::array();
    for (int i : dec.zeroSet) zero.push_back(X.ids[i]);
    for (int i : dec.branch) branch.push_back(X.ids[i]);
    json j = {{"rays", rays},
              {"zero_set", zero},
              {"branch", branch},
              {"quotient_mass", dec.quotientMass()},
              {"zero_mass", dec.zeroMass(X)},
              {"branch_mass", dec.branchMass(X)},
              {"max_mean_deviation", dec.maxMeanDeviation()},
              {"duality_gap", dec.potential.gap},
              {"lipschitz_slack", dec.potential.lipschitzSlack},
              {"mesh", dec.mesh},
              {"v", dec.v}};
    writeAtomic(out / "report.json", dump(j));
    return {{"command", "needle"}, {"rays", dec.rays.size()}, {"files", {"report.json"}}};
}

json runQuantify(const ExperimentConfig& cfg, const fs::path& out) {
    DiscreteSpace X = loadSpace(cfg);
    Mask E = loadSet(X, cfg, cfg.v, cfg.blobVolume);
    MainTheoremReport r = quantify(X, E, cfg.N, cfg.quantify);
    json j = reportJson(X, r);
    writeAtomic(out / "report.json", dump(j));
    bool ok = std::all_of(r.checks.begin(), r.checks.end(), [](const CheckResult& c) { return c.ok; });
    return {{"command", "quantify"}, {"delta", r.delta}, {"asymmetry", r.asymmetry}, {"checks_ok", ok},
            {"files", {"report.json"}}};
}

json runSweep(const ExperimentConfig& cfg, const fs::path& out) {
    const std::string& param = cfg.sweepParam;
    require(param == "blob_volume" || param == "v", ErrorKind::InvalidParameter,
            "sweep.param must be blob_volume or v");
    require(!cfg.sweepValues.empty(), ErrorKind::InvalidParameter, "sweep.values is empty");
    const DiscreteSpace X = loadSpace(cfg);
    const size_t n = cfg.sweepValues.size();
    std::vector<json> rows(n);
    std::vector<std::string> errors(n);
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next.fetch_add(1)) < n;) {
            double value = cfg.sweepValues[i];
            try {
                double v = param == "v" ? value : cfg.v;
                double blob = param == "blob_volume" ? value : cfg.blobVolume;
                ExperimentConfig local = cfg;
                if (param == "blob_volume" && blob > 0.0 && local.setKind == "cap") local.setKind = "perturbed";
                Mask E = loadSet(X, local, v, blob);
                MainTheoremReport r = quantify(X, E, cfg.N, cfg.quantify);
                json j = reportJson(X, r);
                j[param] = value;
                writeAtomic(out / ("sweep_" + std::to_string(i) + ".json"), dump(j));
                rows[i] = std::move(j);
            } catch (const Error& e) {
                errors[i] = std::string(errorKindName(e.kind())) + ": " + e.what();
            }
        }
    };
    const int workers = std::min<int>(workerCount(), static_cast<int>(n));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ostringstream csv, plot;
    csv << param << ",delta,asymmetry,diam_deficit,q_short,q_bad1,q_bad2,q_S,q_N,checks_ok,error\n";
    plot << "x,y\n";
    std::vector<double> xs, ys;
    for (size_t i = 0; i < n; ++i) {
        csv << num(cfg.sweepValues[i]) << ',';
        if (!errors[i].empty()) {
            csv << ",,,,,,,,,\"" << errors[i] << "\"\n";
            continue;
        }
        const json& j = rows[i];
        bool ok = std::all_of(j["checks"].begin(), j["checks"].end(), [](const json& c) { return c["ok"].get<bool>(); });
        for (const char* k : {"delta", "asymmetry", "diam_deficit", "q_short", "q_bad1", "q_bad2", "q_S", "q_N"})
            csv << num(j[k].get<double>()) << ',';
        csv << (ok ? 1 : 0) << ",\n";
        double d = j["delta"].get<double>(), a = j["asymmetry"].get<double>();
        if (d > 0 && a > 0) {
            xs.push_back(std::log(d));
            ys.push_back(std::log(a));
            plot << num(xs.back()) << ',' << num(ys.back()) << '\n';
        }
    }
    writeAtomic(out / "sweep.csv", csv.str());
    writeAtomic(out / "sweep_plot.csv", plot.str());
    for (size_t i = 0; i < n; ++i) fs::remove(out / ("sweep_" + std::to_string(i) + ".json"));

    json summary = {{"command", "sweep"}, {"experiments", n}, {"files", {"sweep.csv", "sweep_plot.csv"}}};
    long failed = std::count_if(errors.begin(), errors.end(), [](const std::string& s) { return !s.empty(); });
    summary["failed"] = failed;
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
        mx /= xs.size();
        my /= xs.size();
        double sxy = 0, sxx = 0;
        for (size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
        summary["loglog_slope"] = sxx > 0 ? json(sxy / sxx) : json(nullptr);
    }
    return summary;
}

json runAccept(const ExperimentConfig& cfg, const fs::path& out, bool& allPass) {
    std::vector<int> ids = cfg.criteria;
    if (ids.empty())
        for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
    json arr = json::array();
    allPass = true;
    for (int id : ids) {
        CriterionResult r = runCriterion(id);
        std::cout << formatCriterion(r) << std::endl;
        allPass = allPass && r.pass;
        arr.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail},
                       {"budget_seconds", r.budget}});
    }
    // Timings vary run to run, so they stay out of the file.
    writeAtomic(out / "acceptance.json", dump(arr));
    return {{"command", "accept"}, {"pass", allPass}, {"files", {"acceptance.json"}}};
}

}  // namespace

std::string runExperiment(const ExperimentConfig& cfg, int* exitCode) {
    const fs::path out = cfg.output;
    json summary;
    int code = 0;
    if (cfg.command == "profile") {
        summary = runProfile(cfg, out);
    } else if (cfg.command == "cdcheck") {
        summary = runCdcheck(cfg, out);
        if (!summary["ok"].get<bool>()) code = 1;
    } else if (cfg.command == "needle") {
        summary = runNeedle(cfg, out);
    } else if (cfg.command == "quantify") {
        summary = runQuantify(cfg, out);
    } else if (cfg.command == "sweep") {
        summary = runSweep(cfg, out);
    } else if (cfg.command == "accept") {
        bool pass = true;
        summary = runAccept(cfg, out, pass);
        if (!pass) code = 1;
    } else {
        fail(ErrorKind::InvalidParameter, "unknown command: " + cfg.command);
    }
    summary["output"] = out.string();
    if (exitCode) *exitCode = code;
    return summary.dump();
}

}  // namespace needle
