#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "needle/config.hpp"
#include "needle/experiments.hpp"

using namespace needle;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("needle_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config parsing and overrides") {
    Config c = Config::parse("# comment\nN = 3\nv=0.25\nsweep.values = 0.01, 0.02\n");
    CHECK(c.num("N", 0) == 3.0);
    CHECK(c.list("sweep.values", {}) == std::vector<double>{0.01, 0.02});
    c.set("N=2.5");
    CHECK(c.num("N", 0) == 2.5);
    CHECK_THROWS_AS(c.set("bogus=1"), Error);
    CHECK_THROWS_AS(Config::parse("N 3\n"), Error);
    Config bad = Config::parse("N=two\n");
    CHECK_THROWS_AS(toExperiment("quantify", bad), Error);
    CHECK_THROWS_AS(toExperiment("launch", Config{}), Error);
}

TEST_CASE("inadmissible exponents are refused") {
    Config c;
    c.set("alpha=0.5");
    try {
        toExperiment("quantify", c);
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidParameter);
    }
    Config ok;
    ok.set("alpha=0.1");
    CHECK(toExperiment("quantify", ok).exponents.has_value());
}

TEST_CASE("profile table") {
    Config c;
    c.set("v_points=512");
    fs::path out = scratch("profile");
    c.set("output=" + out.string());
    runExperiment(toExperiment("profile", c));
    std::istringstream csv(slurp(out / "profile.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "N,D,v,profile,xi,lambda,tie");
    int rows = 0;
    double worst = 0.0;
    while (std::getline(csv, line)) {
        double N, D, v, I;
        CHECK(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &N, &D, &v, &I) == 4);
        worst = std::max(worst, std::abs(I - std::sqrt(v * (1 - v))));
        ++rows;
    }
    CHECK(rows == 512);
    CHECK(worst <= 1e-8);
}

TEST_CASE("quantify report schema and determinism") {
    Config c;
    c.set("resolution=600");
    fs::path a = scratch("q1"), b = scratch("q2");
    c.set("output=" + a.string());
    runExperiment(toExperiment("quantify", c));
    c.set("output=" + b.string());
    runExperiment(toExperiment("quantify", c));
    std::string ja = slurp(a / "report.json");
    CHECK(ja == slurp(b / "report.json"));
    auto j = nlohmann::json::parse(ja);
    for (const char* k : {"delta", "asymmetry", "diam_deficit", "q_short", "q_bad1", "q_bad2", "q_S", "q_N", "x_bar", "r_N_v"})
        CHECK_MESSAGE(j.contains(k), k);
}

TEST_CASE("sweep output") {
    Config c;
    c.set("resolution=1500");
    c.set("set=perturbed");
    c.set("sweep.values=0.01,0.02,0.04");
    fs::path out = scratch("sweep");
    c.set("output=" + out.string());
    auto summary = nlohmann::json::parse(runExperiment(toExperiment("sweep", c)));
    CHECK(summary["failed"] == 0);
    std::string first = slurp(out / "sweep.csv");
    std::istringstream plot(slurp(out / "sweep_plot.csv"));
    std::string line;
    std::getline(plot, line);
    CHECK(line == "x,y");
    double px = -1e9, py = -1e9;
    int n = 0;
    while (std::getline(plot, line)) {
        double x, y;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &x, &y) == 2);
        CHECK(x > px);
        CHECK(y > py);
        px = x, py = y;
        ++n;
    }
    CHECK(n == 3);
    runExperiment(toExperiment("sweep", c));
    CHECK(slurp(out / "sweep.csv") == first);
}

TEST_CASE("needle and cdcheck artifacts") {
    Config c;
    c.set("resolution=400");
    fs::path out = scratch("needle");
    c.set("output=" + out.string());
    runExperiment(toExperiment("needle", c));
    auto j = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(j["rays"].size() >= 1);
    CHECK(j["rays"][0]["ids"].size() > 5);
    CHECK(j["rays"][0].contains("density"));

    Config d;
    d.set("density=random");
    d.set("D=2.8");
    d.set("output=" + out.string());
    int code = -1;
    runExperiment(toExperiment("cdcheck", d), &code);
    CHECK(code == 0);
    CHECK(nlohmann::json::parse(slurp(out / "report.json"))["ok"] == true);
}
