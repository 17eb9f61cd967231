// Experiment configuration: JSON schema, defaults and validation.
#pragma once

#include "backbone/adversary.hpp"
#include "backbone/bounds.hpp"
#include "backbone/params.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace backbone {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct BoundsGrid {
    std::vector<std::string> probability = {"epsilon_k"}; // lb_prob_E/F/G/J, epsilon_k, delta_k
    double from = 1, to = 100, step = 1;                   // span or k
    std::vector<std::string> wait = {"leader_wait", "tx_wait"};
    std::vector<double> eps = {0.1, 0.05, 0.025, 0.0125};
};

struct EventsSpec {
    std::vector<std::string> ids = {"E", "F", "G", "J"};
    std::vector<std::int64_t> spans = {100, 1000};
    std::uint64_t trials = 1000;
};

struct ImplicationsSpec {
    std::int64_t stride = 50;
    std::uint32_t random_points = 200;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string protocol = "bitcoin"; // bitcoin | prism
    Model model = Model::synchronous;
    ProtocolParams params;
    AdversarySpec adversary;
    std::uint64_t trials = 1;
    unsigned threads = 0; // 0: default_threads()
    std::vector<std::string> suites = {"implications"}; // bounds | events | implications | latency
    bool unsafe_override = false;
    std::string out_dir;
    bool write_records = false;
    BoundsGrid bounds;
    EventsSpec events;
    ImplicationsSpec implications;

    bool prism() const { return protocol == "prism"; }
    bool wants(const std::string& suite) const;
};

// Parses and validates. Unknown keys anywhere are errors, as is a schema
// version other than kSchemaVersion. Params take either "p" or "q" (honest
// success rate, converted to p).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

// Model, suite and parameter checks. model = sync forces T = 1; admissibility
// for the model is required unless unsafe_override is set. Returns warnings.
std::vector<std::string> validate(ExperimentConfig& config);

} // namespace backbone
