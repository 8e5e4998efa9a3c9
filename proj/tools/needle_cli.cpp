// needle <command> --config <path> [--set key=value]... [--output dir]
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "needle/common.hpp"
#include "needle/config.hpp"
#include "needle/experiments.hpp"

namespace {

int reportError(const std::string& kind, const std::string& message) {
    nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}}}};
    std::cout << j.dump() << std::endl;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Needle decomposition experiments"};
    app.require_subcommand(1);
    std::string configPath, output;
    std::vector<std::string> overrides;
    for (const char* name : {"profile", "cdcheck", "needle", "quantify", "sweep", "accept"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", configPath, "flat key=value config file");
        sub->add_option("--set", overrides, "override key=value")->allow_extra_args(false);
        sub->add_option("--output", output, "output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return reportError("parse", e.what());
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        needle::Config cfg = configPath.empty() ? needle::Config{} : needle::Config::load(configPath);
        for (const auto& o : overrides) cfg.set(o);
        if (!output.empty()) cfg.set("output", output);
        needle::ExperimentConfig exp = needle::toExperiment(command, cfg);
        int code = 0;
        std::string summary = needle::runExperiment(exp, &code);
        std::cout << summary << std::endl;
        return code;
    } catch (const needle::Error& e) {
        return reportError(needle::errorKindName(e.kind()), e.what());
    } catch (const std::exception& e) {
        return reportError("internal", e.what());
    }
}
