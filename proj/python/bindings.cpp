#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "needle/acceptance.hpp"
#include "needle/config.hpp"
#include "needle/experiments.hpp"
#include "needle/localize.hpp"
#include "needle/profile.hpp"
#include "needle/spaces.hpp"

namespace py = pybind11;
using namespace needle;

namespace {

py::dict reportDict(const MainTheoremReport& r) {
    py::dict d;
    d["delta"] = r.delta;
    d["asymmetry"] = r.asymmetry;
    d["diam_deficit"] = r.diamDeficit;
    d["q_short"] = r.qShort;
    d["q_bad1"] = r.qBad1;
    d["q_bad2"] = r.qBad2;
    d["q_S"] = r.qS;
    d["q_N"] = r.qN;
    d["x_bar"] = r.xBar;
    d["r_N_v"] = r.rNv;
    d["mesh"] = r.mesh;
    d["rays"] = r.rays;
    d["transport_mass"] = r.transportMass;
    d["duality_gap"] = r.dualityGap;
    py::dict checks;
    for (const auto& c : r.checks) checks[py::str(c.name)] = c.ok;
    d["checks"] = checks;
    return d;
}

}  // namespace

PYBIND11_MODULE(_needle, m) {
    m.doc() = "Needle decomposition experiments";

    static py::exception<Error> exc(m, "NeedleError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            exc((std::string(errorKindName(e.kind())) + ": " + e.what()).c_str());
        }
    });

    m.def("model_profile", [](double N, double D, double v) { return modelProfile(N, D, v).value; },
          py::arg("N"), py::arg("D"), py::arg("v"));
    m.def("lambda_of", &lambdaOf, py::arg("N"), py::arg("D"), py::arg("xi") = 0.0);
    m.def("solve_eta_N", &solveEtaN, py::arg("N"));
    m.def("profile_identity_gap", [](double N, double D, double xi, double v) {
        return profileIdentityCheck(N, D, xi, v).gap;
    });
    m.def("concavity_gap", [](double N, double D, double xi, double v) {
        ConcavityGap g = concavityGap(N, D, xi, v);
        return py::make_tuple(g.gap, g.bound, g.constant);
    });
    m.def("validate_exponents", [](double N, double alpha, double beta, double gamma, bool riemannian) {
        validateExponents(N, {alpha, beta, gamma, riemannian});
    }, py::arg("N"), py::arg("alpha"), py::arg("beta"), py::arg("gamma"), py::arg("riemannian") = false);

    m.def("quantify_cap", [](int n, double v, double blob) {
        py::gil_scoped_release release;
        DiscreteSpace X = makeSphere2(n);
        CapSet E = makePerturbedCap(X, 0, v, blob, farthestPoint(X, 0));
        MainTheoremReport r = quantify(X, E.mask, 2.0);
        py::gil_scoped_acquire acquire;
        return reportDict(r);
    }, py::arg("n") = 1500, py::arg("v") = 0.3, py::arg("blob") = 0.0,
       "Main-theorem report for a (perturbed) cap on the Fibonacci sphere.");

    m.def("run_experiment", [](const std::string& command, const std::map<std::string, std::string>& settings) {
        Config c;
        for (const auto& [k, v] : settings) c.set(k, v);
        int code = 0;
        std::string summary = runExperiment(toExperiment(command, c), &code);
        return py::make_tuple(code, summary);
    }, py::arg("command"), py::arg("settings") = std::map<std::string, std::string>{});

    m.def("run_criterion", [](int id) {
        CriterionResult r;
        {
            py::gil_scoped_release release;
            r = runCriterion(id);
        }
        py::dict d;
        d["id"] = r.id;
        d["title"] = r.title;
        d["passed"] = r.pass;
        d["detail"] = r.detail;
        d["seconds"] = r.seconds;
        return d;
    });
}
