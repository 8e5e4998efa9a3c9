#include "needle/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace needle {

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

const std::vector<std::string>& Config::knownKeys() {
    static const std::vector<std::string> keys = {
        "space", "space_file", "resolution", "seed", "N", "v", "D", "xi", "D_list", "v_points",
        "base_size", "set", "mask_file", "center", "blob_center", "blob_volume", "density_file",
        "density", "alpha", "beta", "gamma", "riemannian", "output", "sweep.param", "sweep.values",
        "knn", "tol_gamma_mesh", "hop_mesh", "separation_mesh", "branch_mesh", "floor_mesh", "criteria",
    };
    return keys;
}

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream is(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(is, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.find('=') == std::string::npos)
            fail(ErrorKind::Parse, "config line " + std::to_string(lineNo) + " is not key=value");
        c.set(line);
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Config::set(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, "override must be key=value: " + assignment);
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
    const auto& keys = knownKeys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(ErrorKind::Parse, "unknown config key: " + key);
    values_[key] = value;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::num(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "pi") return kPi;
    try {
        size_t used = 0;
        double x = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        fail(ErrorKind::Parse, "config key " + key + " expects a number, got '" + it->second + "'");
    }
}

long Config::integer(const std::string& key, long fallback) const {
    double x = num(key, static_cast<double>(fallback));
    if (x != static_cast<double>(static_cast<long>(x)))
        fail(ErrorKind::Parse, "config key " + key + " expects an integer");
    return static_cast<long>(x);
}

bool Config::flag(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "1" || it->second == "true" || it->second == "yes") return true;
    if (it->second == "0" || it->second == "false" || it->second == "no") return false;
    fail(ErrorKind::Parse, "config key " + key + " expects a boolean");
}

std::vector<double> Config::list(const std::string& key, const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        if (tok == "pi") {
            out.push_back(kPi);
            continue;
        }
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            fail(ErrorKind::Parse, "config key " + key + " expects a number list");
        }
    }
    return out;
}

ExperimentConfig toExperiment(const std::string& command, const Config& cfg) {
    static const std::vector<std::string> commands = {"profile", "cdcheck", "needle", "quantify", "sweep", "accept"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end())
        fail(ErrorKind::InvalidParameter, "unknown command: " + command);
    ExperimentConfig e;
    e.command = command;
    e.N = cfg.num("N", 2.0);
    require(e.N > 1.0, ErrorKind::InvalidParameter, "N must exceed 1");
    e.v = cfg.num("v", 0.3);
    require(e.v > 0.0 && e.v < 1.0, ErrorKind::InvalidParameter, "v must lie in (0,1)");
    e.seed = static_cast<unsigned long long>(cfg.integer("seed", 1));
    e.space.kind = cfg.str("space", "sphere2");
    e.space.resolution = static_cast<int>(cfg.integer("resolution", e.space.kind == "segment1d" ? 801 : 1500));
    e.space.N = e.N;
    e.space.D = cfg.num("D", kPi);
    e.space.xi = cfg.num("xi", 0.0);
    e.space.baseSize = static_cast<int>(cfg.integer("base_size", 12));
    e.space.seed = e.seed;
    e.spaceFile = cfg.str("space_file", "");
    e.D = e.space.D;
    e.xi = e.space.xi;
    e.Ds = cfg.list("D_list", {e.D});
    e.vPoints = static_cast<int>(cfg.integer("v_points", 512));
    require(e.vPoints >= 1, ErrorKind::InvalidParameter, "v_points must be positive");
    e.setKind = cfg.str("set", "cap");
    require(e.setKind == "cap" || e.setKind == "perturbed" || e.setKind == "mask", ErrorKind::InvalidParameter,
            "set must be cap, perturbed or mask");
    e.maskFile = cfg.str("mask_file", "");
    e.center = static_cast<int>(cfg.integer("center", 0));
    e.blobCenter = static_cast<int>(cfg.integer("blob_center", -1));
    e.blobVolume = cfg.num("blob_volume", 0.0);
    e.densityFile = cfg.str("density_file", "");
    e.densityKind = cfg.str("density", "model");
    e.sweepParam = cfg.str("sweep.param", "blob_volume");
    e.sweepValues = cfg.list("sweep.values", {0.01, 0.02, 0.04});
    e.output = cfg.str("output", "needle_out");
    for (double c : cfg.list("criteria", {})) e.criteria.push_back(static_cast<int>(c));

    const bool riem = cfg.flag("riemannian", false);
    if (cfg.has("alpha") || cfg.has("beta") || cfg.has("gamma") || riem) {
        ExponentChoice x = defaultExponents(e.N, riem);
        x.beta = cfg.num("beta", x.beta);
        x.gamma = cfg.num("gamma", x.gamma);
        x.alpha = cfg.num("alpha", 0.999 * exponentBound(e.N, x.beta, x.gamma, riem));
        validateExponents(e.N, x);
        e.exponents = x;
    }
    auto& lo = e.quantify.localize;
    lo.knn = static_cast<int>(cfg.integer("knn", lo.knn));
    lo.tolGammaMesh = cfg.num("tol_gamma_mesh", lo.tolGammaMesh);
    lo.hopMesh = cfg.num("hop_mesh", lo.hopMesh);
    lo.separationMesh = cfg.num("separation_mesh", lo.separationMesh);
    lo.branchMesh = cfg.num("branch_mesh", lo.branchMesh);
    e.quantify.floorMesh = cfg.num("floor_mesh", e.quantify.floorMesh);
    e.quantify.exponents = e.exponents;
    return e;
}

}  // namespace needle
