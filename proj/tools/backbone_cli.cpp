// Command line runner: bounds tables, simulations and verification suites.

#include "backbone/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace backbone;
namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<unsigned> threads;
    std::string out;
    std::vector<std::string> suites;
    bool unsafe = false;
    std::string format = "csv";
};

void add_common(CLI::App* app, Flags& f, bool config_required)
{
    auto* opt = app->add_option("--config", f.config, "JSON experiment config");
    if (config_required) opt->required();
    opt->check(CLI::ExistingFile);
    app->add_option("--seed", f.seed, "override params.seed");
    app->add_option("--trials", f.trials, "override trials");
    app->add_option("--threads", f.threads, "worker threads (default: BACKBONE_THREADS or all cores)");
    app->add_option("--out", f.out, "output directory (default: output.dir, else stdout only)");
    app->add_option("--suite", f.suites, "suites to run; repeatable, replaces the config list");
    app->add_flag("--unsafe-override", f.unsafe, "run parameters outside the admissible region");
}

ExperimentConfig load(const Flags& f)
{
    ExperimentConfig c = f.config.empty() ? parse_config({{"schema_version", kSchemaVersion}}) : load_config(f.config);
    if (f.seed) c.params.seed = *f.seed;
    if (f.trials) c.trials = *f.trials;
    if (f.threads) c.threads = *f.threads;
    if (!f.out.empty()) c.out_dir = f.out;
    if (f.unsafe) c.unsafe_override = true;
    return c;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

void emit_bounds(const std::vector<BoundReport>& rows, const std::string& dir, const std::string& format)
{
    if (dir.empty()) {
        if (format == "json") {
            std::cout << bounds_to_json(rows).dump(2) << '\n';
        } else {
            write_bounds_csv(std::cout, rows);
        }
        return;
    }
    fs::create_directories(dir);
    if (format == "json") {
        auto os = open_out(fs::path(dir) / "bounds.json");
        os << bounds_to_json(rows).dump(2) << '\n';
    } else {
        auto os = open_out(fs::path(dir) / "bounds.csv");
        write_bounds_csv(os, rows);
    }
}

int cmd_bounds(const Flags& f)
{
    ExperimentConfig c = load(f);
    for (const auto& w : validate(c)) std::cerr << "warning: " << w << '\n';
    emit_bounds(bounds_table(c), c.out_dir, f.format);
    return 0;
}

int cmd_simulate(const Flags& f)
{
    ExperimentConfig c = load(f);
    if (!f.suites.empty()) c.suites = f.suites;
    const std::string dir = c.out_dir;
    RecordSink sink;
    if (!dir.empty() && c.write_records) {
        fs::create_directories(fs::path(dir) / "records");
        sink = [dir](const SimRecord& r) {
            auto os = open_out(fs::path(dir) / "records" / ("record_" + std::to_string(r.trial) + ".json"));
            os << record_json_string(r) << '\n';
        };
    }
    const SimulateResult res = simulate(c, sink);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';

    if (!dir.empty()) {
        fs::create_directories(dir);
        if (c.wants("bounds")) emit_bounds(res.bounds, dir, "csv");
        if (c.wants("events")) {
            auto os = open_out(fs::path(dir) / "events.csv");
            write_events_csv(os, res.events);
        }
        if (c.wants("implications")) {
            auto csv = open_out(fs::path(dir) / "implications.csv");
            write_implications_csv(csv, res.implications);
            auto js = open_out(fs::path(dir) / "implications.json");
            js << implications_to_json(res.implications).dump(2) << '\n';
        }
        if (c.wants("latency")) {
            auto os = open_out(fs::path(dir) / "latency.csv");
            write_latency_csv(os, res.latency);
        }
        if (!res.trials.empty()) {
            auto os = open_out(fs::path(dir) / "trials.csv");
            os << "trial,violations,adversary_mined,adversary_successes\n";
            for (const auto& t : res.trials)
                os << t.trial << ',' << t.violations << ',' << t.adversary_mined << ',' << t.adversary_successes << '\n';
        }
    }

    if (c.wants("implications")) write_implications_csv(std::cout, res.implications);
    if (c.wants("events")) write_events_csv(std::cout, res.events);
    if (!res.trials.empty()) {
        std::uint64_t successes = 0;
        for (const auto& t : res.trials) successes += t.adversary_successes > 0;
        std::cout << "trials=" << res.trials.size() << " adversary_success_trials=" << successes << '\n';
    }
    for (const auto& r : res.implications.reports)
        for (const auto& cx : r.counterexamples) std::cerr << "violation " << r.theorem << ": " << cx << '\n';
    return res.violations() ? 1 : 0;
}

int cmd_verify(const Flags& f)
{
    const ExperimentConfig c = load(f);
    const VerifyResult v = verify(c, f.suites.empty() ? kDefaultVerifySuites : f.suites);
    for (const auto& line : v.lines) std::cout << line << '\n';
    std::cout << (v.ok ? "verify: ok" : "verify: FAILED") << '\n';
    return v.ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Backbone protocol simulator and bound calculator"};
    app.require_subcommand(1);
    Flags f;
    auto* bounds = app.add_subcommand("bounds", "evaluate bound formulas over a grid");
    add_common(bounds, f, false);
    bounds->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    auto* sim = app.add_subcommand("simulate", "run seeded trials and the configured suites");
    add_common(sim, f, true);
    auto* ver = app.add_subcommand("verify", "run verification suites; nonzero exit on failure");
    add_common(ver, f, true);
    CLI11_PARSE(app, argc, argv);

    try {
        if (bounds->parsed()) return cmd_bounds(f);
        if (sim->parsed()) return cmd_simulate(f);
        return cmd_verify(f);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
