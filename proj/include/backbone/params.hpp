// Protocol parameters and the constants derived from them.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace backbone {

struct ProtocolParams {
    std::uint32_t n = 2;       // total miners
    std::uint32_t t = 0;       // adversarial miners
    double p = 0.01;           // per-miner per-round success probability
    std::uint32_t T = 1;       // maximum propagation delay; 1 is the synchronous model
    std::uint32_t m = 1;       // voter chains (Prism)
    std::uint32_t horizon = 1; // last simulated round
    std::uint64_t seed = 0;

    std::uint32_t honest() const { return n - t; }
};

struct DerivedParams {
    double beta = 0.0;
    double xi = 1.0;
    double q = 0.0;
    double eta = 0.0;
    double eta_prime = 0.0;
    double y_rate = 0.0;
    bool sync_admissible = false;
    bool bounded_admissible = false;

    // Copied from the inputs so downstream code needs only this struct.
    std::uint32_t n = 0;
    std::uint32_t t = 0;
    double p = 0.0;
    std::uint32_t T = 1;
};

class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Throws ParamError unless n >= 2, 2t < n, p in (0,1), T >= 1, m >= 1, horizon >= 1.
void check_params(const ProtocolParams& params);
DerivedParams derive(const ProtocolParams& params);
// Same formulas without the honest-majority check (t < n still required).
// Used only for sanity experiments with the adversary in the majority.
DerivedParams derive_unchecked(const ProtocolParams& params);

bool validate_sync(const DerivedParams& d);
bool validate_bounded(const DerivedParams& d, std::uint32_t T);

// Resilience and honest success rate as free functions, for oracles and bindings.
double xi_of(std::uint32_t n, std::uint32_t t);
double q_of(double p, std::uint32_t honest);
// Per-miner p that gives honest success rate q with the given honest count.
double p_for_q(double q, std::uint32_t honest);
double eta_of(double xi, double q);
double eta_prime_of(double xi, double q, std::uint32_t T);

std::string describe(const ProtocolParams& params);

} // namespace backbone
