#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "needle/localize.hpp"
#include "needle/profile.hpp"
#include "needle/spaces.hpp"

namespace needle {

// Flat key=value configuration. Unknown keys are rejected.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    // "key=value"
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key, double fallback) const;
    long integer(const std::string& key, long fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    static const std::vector<std::string>& knownKeys();

private:
    std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
    std::string command;
    SpaceSpec space;
    std::string spaceFile;
    std::string setKind = "cap";  // cap | perturbed | mask
    std::string maskFile;
    int center = 0;
    int blobCenter = -1;  // -1: farthest point from the center
    double blobVolume = 0.0;
    double N = 2.0;
    double v = 0.3;
    double D = kPi;
    double xi = 0.0;
    int vPoints = 512;
    std::vector<double> Ds;
    std::string densityFile;
    std::string densityKind = "model";  // model | sine | random (cdcheck without a file)
    std::string sweepParam = "blob_volume";
    std::vector<double> sweepValues;
    std::optional<ExponentChoice> exponents;
    QuantifyOptions quantify;
    std::string output = "needle_out";
    unsigned long long seed = 1;
    std::vector<int> criteria;  // accept: empty means all
};

// Builds the typed configuration and refuses inadmissible exponents before any computation.
ExperimentConfig toExperiment(const std::string& command, const Config& cfg);

}  // namespace needle
