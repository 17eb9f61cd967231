#include "backbone/experiment.hpp"

#include "backbone/runner.hpp"
#include "backbone/trace.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace backbone {

unsigned resolve_threads(const ExperimentConfig& config)
{
    return config.threads ? config.threads : default_threads();
}

SuiteOptions suite_options(const ExperimentConfig& config)
{
    SuiteOptions o;
    o.stride = config.implications.stride;
    o.random_points = config.implications.random_points;
    return o;
}

SimRecord simulate_one(const ExperimentConfig& config, std::uint64_t trial)
{
    auto adversary = make_adversary(config.adversary);
    const RunOptions opts{config.unsafe_override};
    return config.prism() ? run_prism(config.params, *adversary, trial, opts)
                          : run(config.params, *adversary, trial, opts);
}

std::vector<BoundReport> bounds_table(const ExperimentConfig& config)
{
    const DerivedParams d = config.unsafe_override ? derive_unchecked(config.params) : derive(config.params);
    const std::uint32_t m = config.params.m, T = config.params.T;
    std::vector<BoundReport> rows;
    const BoundsGrid& g = config.bounds;
    const auto steps = std::int64_t(std::floor((g.to - g.from) / g.step + 1e-9));
    for (const auto& id : g.probability)
        for (std::int64_t i = 0; i <= steps; ++i) rows.push_back(report_probability(id, g.from + double(i) * g.step, d, m, T));
    for (const auto& id : g.wait)
        for (double eps : g.eps) rows.push_back(report_wait(id, eps, d, m, config.model, T));
    return rows;
}

SimulateResult simulate(ExperimentConfig config, const RecordSink& sink)
{
    SimulateResult out;
    out.warnings = validate(config);
    const unsigned threads = resolve_threads(config);

    if (config.wants("bounds")) out.bounds = bounds_table(config);
    if (config.wants("events"))
        for (std::int64_t span : config.events.spans)
            for (auto& r : event_frequencies(config.events.ids, span, config.params, config.events.trials, threads))
                out.events.push_back(std::move(r));

    const bool implications = config.wants("implications");
    const bool latency = config.wants("latency");
    if (!implications && !latency && !sink) return out;

    const SuiteOptions options = suite_options(config);
    std::vector<SuiteReport> reports(config.trials);
    std::vector<std::vector<LatencyRow>> lat(config.trials);
    out.trials.resize(config.trials);
    parallel_for(config.trials, threads, [&](std::uint64_t trial) {
        const SimRecord record = simulate_one(config, trial);
        if (implications) reports[trial] = config.prism() ? prism_suite(record, options) : bitcoin_suite(record, options);
        if (latency) lat[trial] = latency_rows(record);
        out.trials[trial] = {trial, reports[trial].violations(), record.adversary_mined, record.adversary_successes};
        if (sink) sink(record);
    });
    for (std::uint64_t i = 0; i < config.trials; ++i) {
        out.implications.merge(reports[i]);
        out.latency.insert(out.latency.end(), lat[i].begin(), lat[i].end());
    }
    return out;
}

LipschitzReport lipschitz_check(std::uint64_t windows, std::uint64_t seed, unsigned threads)
{
    struct Delta {
        double dx = 0, dy = 0;
    };
    std::vector<Delta> deltas(windows);
    parallel_for(windows, threads, [&](std::uint64_t w) {
        CounterRng rng(seed, w, Substream::scratch);
        const std::uint32_t T = 1 + std::uint32_t(rng.below(8));
        const std::size_t len = 2 * T + rng.below(64);
        std::vector<double> h(len);
        // Mostly 0/1 rounds so the isolation indicators actually fire.
        for (auto& v : h) v = rng.below(4) ? double(rng.below(2)) : double(rng.below(4));
        const auto x0 = x_func(h, T), y0 = y_func(h, T);
        const std::size_t k = rng.below(len);
        h[k] = rng.below(2) ? double(rng.below(4)) : rng.uniform() * 4;
        deltas[w] = {double(std::abs(x_func(h, T) - x0)), double(std::abs(y_func(h, T) - y0))};
    });
    LipschitzReport r;
    r.windows = windows;
    for (const Delta& d : deltas) {
        r.x_violations += d.dx > 1;
        r.y_violations += d.dy > 2;
        r.max_dx = std::max(r.max_dx, d.dx);
        r.max_dy = std::max(r.max_dy, d.dy);
    }
    return r;
}

namespace {

std::string pass(bool ok) { return ok ? "PASS " : "FAIL "; }

void add(VerifyResult& v, bool ok, const std::string& line)
{
    v.ok = v.ok && ok;
    v.lines.push_back(pass(ok) + line);
}

void report_suite(VerifyResult& v, const std::string& suite, const SuiteReport& report)
{
    for (const ImplicationReport& r : report.reports) {
        std::string line = suite + " " + r.theorem + " scanned=" + std::to_string(r.scanned) +
                           " held=" + std::to_string(r.held) + " violations=" + std::to_string(r.violations);
        if (!r.counterexamples.empty()) line += " first: " + r.counterexamples.front();
        add(v, r.violations == 0, line);
    }
}

} // namespace

VerifyResult verify(const ExperimentConfig& base, const std::vector<std::string>& suites)
{
    VerifyResult v;
    ExperimentConfig config = base;
    for (const auto& w : validate(config)) v.lines.push_back("WARN " + w);
    const unsigned threads = resolve_threads(config);
    for (const auto& s : suites)
        if (std::find(kVerifySuites.begin(), kVerifySuites.end(), s) == kVerifySuites.end())
            throw ConfigError("unknown verify suite: " + s);
    auto wants = [&](const char* s) { return std::find(suites.begin(), suites.end(), s) != suites.end(); };

    if (wants("implications")) {
        ExperimentConfig c = config;
        c.suites = {"implications"};
        report_suite(v, "implications", simulate(c).implications);
    }
    if (wants("events")) {
        for (std::int64_t span : config.events.spans)
            for (const FrequencyReport& r :
                 event_frequencies(config.events.ids, span, config.params, config.events.trials, threads)) {
                add(v, !r.flagged,
                    "events " + r.event + " span=" + std::to_string(span) + " failure_rate=" + format_double(r.failure_rate) +
                        " ci_low=" + format_double(r.ci.low) + " bound=" + format_double(r.bound) +
                        (r.vacuous ? " (vacuous)" : ""));
            }
    }
    if (wants("lipschitz")) {
        const LipschitzReport r = lipschitz_check(10000, config.params.seed, threads);
        add(v, r.x_violations == 0 && r.y_violations == 0,
            "lipschitz windows=" + std::to_string(r.windows) + " max_dx=" + format_double(r.max_dx) +
                " max_dy=" + format_double(r.max_dy));
    }
    if (wants("reproducibility")) {
        const std::string a = record_json_string(simulate_one(config, 0));
        const std::string b = record_json_string(simulate_one(config, 0));
        add(v, a == b, "reproducibility record_bytes=" + std::to_string(a.size()));
        ExperimentConfig c = config;
        c.suites = {"implications"};
        c.trials = std::min<std::uint64_t>(config.trials, 4);
        c.threads = 1;
        const auto one = simulate(c);
        c.threads = std::max(2u, threads);
        const auto many = simulate(c);
        add(v, implications_to_json(one.implications) == implications_to_json(many.implications),
            "reproducibility thread_independent trials=" + std::to_string(c.trials));
    }
    if (wants("planted")) {
        const SimRecord planted = plant_violation(simulate_one(config, 0));
        const SuiteOptions options = suite_options(config);
        const SuiteReport rep = planted.prism ? prism_suite(planted, options) : bitcoin_suite(planted, options);
        report_suite(v, "planted", rep);
        // An undetected plant is a failure of the engine, not a pass.
        if (rep.violations() == 0) add(v, false, "planted violation not detected (no premise held; try a longer horizon)");
    }
    return v;
}

} // namespace backbone
