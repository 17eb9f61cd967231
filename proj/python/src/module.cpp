// Python bindings. Configs and records cross the boundary as JSON text; the
// package wrapper converts them to and from dicts.

#include "backbone/experiment.hpp"
#include "backbone/runner.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace backbone;
using nlohmann::json;

namespace {

ExperimentConfig config_from(const std::string& text)
{
    return parse_config(json::parse(text));
}

ProtocolParams params_from(const std::string& text)
{
    json j{{"schema_version", kSchemaVersion}, {"params", json::parse(text)}};
    return parse_config(j).params;
}

py::dict report_dict(const BoundReport& r)
{
    py::dict d;
    d["formula_id"] = r.formula_id;
    d["model"] = to_string(r.model);
    d["xi"] = r.xi;
    d["q"] = r.q;
    d["T"] = r.T;
    d["m"] = r.m;
    d["arg"] = r.arg;
    d["raw"] = r.raw;
    d["value"] = r.value;
    return d;
}

} // namespace

PYBIND11_MODULE(_backbone, m)
{
    m.doc() = "Backbone protocol simulator and bound calculator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParamError>(m, "ParamError", PyExc_ValueError);
    py::register_exception<BoundError>(m, "BoundError", PyExc_ValueError);

    m.attr("SCHEMA_VERSION") = kSchemaVersion;

    m.def("xi_of", &xi_of, py::arg("n"), py::arg("t"));
    m.def("q_of", &q_of, py::arg("p"), py::arg("honest"));
    m.def("p_for_q", &p_for_q, py::arg("q"), py::arg("honest"));
    m.def("eta_of", &eta_of, py::arg("xi"), py::arg("q"));
    m.def("eta_prime_of", &eta_prime_of, py::arg("xi"), py::arg("q"), py::arg("T"));

    m.def("derive_json", [](const std::string& params, bool unsafe) {
        const ProtocolParams pp = params_from(params);
        return derived_to_json(unsafe ? derive_unchecked(pp) : derive(pp)).dump();
    }, py::arg("params"), py::arg("unsafe") = false);

    m.def("report_probability", [](const std::string& formula, double arg, const std::string& params) {
        const ProtocolParams pp = params_from(params);
        return report_dict(report_probability(formula, arg, derive(pp), pp.m, pp.T));
    }, py::arg("formula_id"), py::arg("arg"), py::arg("params"));

    m.def("report_wait", [](const std::string& formula, double eps, const std::string& params, const std::string& model) {
        const ProtocolParams pp = params_from(params);
        return report_dict(report_wait(formula, eps, derive(pp), pp.m, model_from_string(model), pp.T));
    }, py::arg("formula_id"), py::arg("eps"), py::arg("params"), py::arg("model"));

    m.def("bounds_table", [](const std::string& config) {
        ExperimentConfig c = config_from(config);
        validate(c);
        py::list out;
        for (const auto& r : bounds_table(c)) out.append(report_dict(r));
        return out;
    }, py::arg("config"));

    m.def("validate", [](const std::string& config) {
        ExperimentConfig c = config_from(config);
        const auto warnings = validate(c);
        return py::make_tuple(to_json(c).dump(), warnings);
    }, py::arg("config"));

    m.def("simulate_record", [](const std::string& config, std::uint64_t trial) {
        ExperimentConfig c = config_from(config);
        validate(c);
        py::gil_scoped_release release;
        return record_json_string(simulate_one(c, trial));
    }, py::arg("config"), py::arg("trial") = 0);

    m.def("simulate", [](const std::string& config, bool records) {
        const ExperimentConfig c = config_from(config);
        std::vector<std::string> dumps;
        SimulateResult res;
        {
            py::gil_scoped_release release;
            if (records) dumps.resize(c.trials);
            RecordSink sink;
            if (records) sink = [&dumps](const SimRecord& r) { dumps[r.trial] = record_json_string(r); };
            res = simulate(c, sink);
        }
        json latency = json::array();
        for (const auto& r : res.latency)
            latency.push_back({{"trial", r.trial}, {"block", r.block}, {"broadcast_round", r.broadcast_round},
                               {"latency", r.latency ? json(*r.latency) : json(nullptr)}});
        json trials = json::array();
        for (const auto& t : res.trials)
            trials.push_back({{"trial", t.trial}, {"violations", t.violations}, {"adversary_mined", t.adversary_mined},
                              {"adversary_successes", t.adversary_successes}});
        json out{{"warnings", res.warnings},
                 {"implications", implications_to_json(res.implications)["implications"]},
                 {"events", events_to_json(res.events)["events"]},
                 {"bounds", bounds_to_json(res.bounds)["bounds"]},
                 {"latency", std::move(latency)},
                 {"trials", std::move(trials)},
                 {"violations", res.violations()}};
        return py::make_tuple(out.dump(), dumps);
    }, py::arg("config"), py::arg("records") = false);

    m.def("verify", [](const std::string& config, std::vector<std::string> suites) {
        const ExperimentConfig c = config_from(config);
        if (suites.empty()) suites = kDefaultVerifySuites;
        py::gil_scoped_release release;
        const VerifyResult v = verify(c, suites);
        return std::make_pair(v.ok, v.lines);
    }, py::arg("config"), py::arg("suites") = std::vector<std::string>{});

    m.def("event_frequency", [](const std::string& event, std::int64_t span, const std::string& params,
                                std::uint64_t trials, unsigned threads) {
        const ProtocolParams pp = params_from(params);
        py::gil_scoped_release release;
        return events_to_json({event_frequency(event, span, pp, trials, threads ? threads : default_threads())})["events"][0].dump();
    }, py::arg("event"), py::arg("span"), py::arg("params"), py::arg("trials"), py::arg("threads") = 0);

    m.def("lipschitz_check", [](std::uint64_t windows, std::uint64_t seed, unsigned threads) {
        py::gil_scoped_release release;
        const LipschitzReport r = lipschitz_check(windows, seed, threads ? threads : default_threads());
        return std::make_tuple(r.windows, r.x_violations, r.y_violations, r.max_dx, r.max_dy);
    }, py::arg("windows"), py::arg("seed") = 0, py::arg("threads") = 0);
}
