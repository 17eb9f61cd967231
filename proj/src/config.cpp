#include "backbone/config.hpp"

#include "backbone/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace backbone {

using nlohmann::json;

bool ExperimentConfig::wants(const std::string& suite) const
{
    return std::find(suites.begin(), suites.end(), suite) != suites.end();
}

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key \"" + k + "\"");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

const std::set<std::string> kSuites{"bounds", "events", "implications", "latency"};

} // namespace

ExperimentConfig parse_config(const json& j)
{
    only_keys(j, "config", {"schema_version", "protocol", "model", "params", "adversary", "trials", "threads",
                            "suites", "unsafe_override", "output", "bounds", "events", "implications"});
    ExperimentConfig c;
    if (!j.contains("schema_version")) throw ConfigError("config: schema_version is required");
    read(j, "schema_version", c.schema_version, "config");
    if (c.schema_version != kSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));
    read(j, "protocol", c.protocol, "config");
    std::string model = "sync";
    read(j, "model", model, "config");
    if (model != "sync" && model != "bounded") throw ConfigError("config.model: expected sync or bounded");
    c.model = model == "sync" ? Model::synchronous : Model::bounded_delay;
    read(j, "trials", c.trials, "config");
    read(j, "threads", c.threads, "config");
    read(j, "suites", c.suites, "config");
    read(j, "unsafe_override", c.unsafe_override, "config");

    bool has_T = false;
    if (j.contains("params")) {
        const json& p = j["params"];
        only_keys(p, "params", {"n", "t", "p", "q", "T", "m", "horizon", "seed"});
        read(p, "n", c.params.n, "params");
        read(p, "t", c.params.t, "params");
        read(p, "T", c.params.T, "params");
        read(p, "m", c.params.m, "params");
        read(p, "horizon", c.params.horizon, "params");
        read(p, "seed", c.params.seed, "params");
        has_T = p.contains("T");
        if (p.contains("p") && p.contains("q")) throw ConfigError("params: give p or q, not both");
        if (p.contains("p")) read(p, "p", c.params.p, "params");
        if (p.contains("q")) {
            double q = 0;
            read(p, "q", q, "params");
            if (!(q > 0 && q < 1)) throw ConfigError("params.q must be in (0, 1)");
            if (c.params.t >= c.params.n) throw ConfigError("params: t must be below n");
            c.params.p = p_for_q(q, c.params.n - c.params.t);
        }
    }
    if (c.model == Model::synchronous && has_T && c.params.T != 1)
        throw ConfigError("params.T: the sync model requires T = 1");
    if (j.contains("adversary")) {
        const json& a = j["adversary"];
        only_keys(a, "adversary", {"kind", "release_depth", "give_up"});
        read(a, "kind", c.adversary.kind, "adversary");
        read(a, "release_depth", c.adversary.release_depth, "adversary");
        read(a, "give_up", c.adversary.give_up, "adversary");
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        only_keys(o, "output", {"dir", "records"});
        read(o, "dir", c.out_dir, "output");
        read(o, "records", c.write_records, "output");
    }
    if (j.contains("bounds")) {
        const json& b = j["bounds"];
        only_keys(b, "bounds", {"probability", "from", "to", "step", "wait", "eps"});
        read(b, "probability", c.bounds.probability, "bounds");
        read(b, "from", c.bounds.from, "bounds");
        read(b, "to", c.bounds.to, "bounds");
        read(b, "step", c.bounds.step, "bounds");
        read(b, "wait", c.bounds.wait, "bounds");
        read(b, "eps", c.bounds.eps, "bounds");
    }
    if (j.contains("events")) {
        const json& e = j["events"];
        only_keys(e, "events", {"ids", "spans", "trials"});
        read(e, "ids", c.events.ids, "events");
        read(e, "spans", c.events.spans, "events");
        read(e, "trials", c.events.trials, "events");
    }
    if (j.contains("implications")) {
        const json& i = j["implications"];
        only_keys(i, "implications", {"stride", "random_points"});
        read(i, "stride", c.implications.stride, "implications");
        read(i, "random_points", c.implications.random_points, "implications");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& c)
{
    return json{
        {"schema_version", c.schema_version},
        {"protocol", c.protocol},
        {"model", to_string(c.model)},
        {"params",
         {{"n", c.params.n}, {"t", c.params.t}, {"p", c.params.p}, {"T", c.params.T}, {"m", c.params.m},
          {"horizon", c.params.horizon}, {"seed", c.params.seed}}},
        {"adversary",
         {{"kind", c.adversary.kind}, {"release_depth", c.adversary.release_depth}, {"give_up", c.adversary.give_up}}},
        {"trials", c.trials},
        {"threads", c.threads},
        {"suites", c.suites},
        {"unsafe_override", c.unsafe_override},
        {"output", {{"dir", c.out_dir}, {"records", c.write_records}}},
        {"bounds",
         {{"probability", c.bounds.probability}, {"from", c.bounds.from}, {"to", c.bounds.to},
          {"step", c.bounds.step}, {"wait", c.bounds.wait}, {"eps", c.bounds.eps}}},
        {"events", {{"ids", c.events.ids}, {"spans", c.events.spans}, {"trials", c.events.trials}}},
        {"implications", {{"stride", c.implications.stride}, {"random_points", c.implications.random_points}}},
    };
}

std::vector<std::string> validate(ExperimentConfig& c)
{
    std::vector<std::string> warnings;
    if (c.protocol != "bitcoin" && c.protocol != "prism") throw ConfigError("protocol must be bitcoin or prism");
    for (const auto& s : c.suites)
        if (!kSuites.count(s)) throw ConfigError("unknown suite: " + s);
    if (c.model == Model::synchronous) c.params.T = 1;
    if (!c.prism()) c.params.m = 1;
    if (c.trials == 0) throw ConfigError("trials must be positive");
    if (c.implications.stride < 1) throw ConfigError("implications.stride must be positive");
    if (c.bounds.step <= 0 || c.bounds.to < c.bounds.from) throw ConfigError("bounds grid is empty");
    if (c.wants("latency") && !c.prism()) throw ConfigError("the latency suite needs protocol prism");
    if (c.wants("events") && c.events.trials < kMinFrequencyTrials)
        throw ConfigError("events.trials must be at least " + std::to_string(kMinFrequencyTrials));
    try {
        make_adversary(c.adversary);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.prism() && c.adversary.kind == "private_fork") throw ConfigError("private_fork targets the bitcoin protocol");
    DerivedParams d;
    try {
        d = c.unsafe_override ? derive_unchecked(c.params) : derive(c.params);
    } catch (const ParamError& e) {
        throw ConfigError(e.what());
    }
    const bool admissible = c.model == Model::synchronous ? d.sync_admissible : d.bounded_admissible;
    if (!admissible) {
        const std::string msg = "parameters are not admissible for the " + to_string(c.model) + " model (" +
                                describe(c.params) + ")";
        if (!c.unsafe_override) throw ConfigError(msg);
        warnings.push_back(msg + "; proceeding under the unsafe override");
    }
    return warnings;
}

} // namespace backbone
