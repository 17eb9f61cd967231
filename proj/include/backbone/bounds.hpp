// Closed-form probability bounds and confirmation waits.
#pragma once

#include "backbone/params.hpp"

#include <cstdint>
#include <string>

namespace backbone {

enum class Model { synchronous, bounded_delay };

std::string to_string(Model model);
Model model_from_string(const std::string& name);

struct BoundReport {
    Model model = Model::synchronous;
    std::string formula_id;
    // Echoed inputs; fields unused by a formula stay at their defaults.
    double xi = 0.0;
    double q = 0.0;
    std::uint32_t T = 1;
    std::uint32_t m = 1;
    double arg = 0.0; // span, k or epsilon depending on formula_id
    double raw = 0.0; // value before clamping or rounding
    double value = 0.0;
};

class BoundError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Lower bounds on event probabilities, clamped at 0.
double lb_prob_E(double span, const DerivedParams& d);
double lb_prob_F(double span, const DerivedParams& d, std::uint32_t T);
double lb_prob_G(double span, const DerivedParams& d);
double lb_prob_J(double span, const DerivedParams& d, std::uint32_t T);

// Failure probabilities of the individual typical-event conditions over a
// span, as derived from the concentration arguments. Used to check marginals.
double fail_bound_E1(double span, const DerivedParams& d);
double fail_bound_E2(double span, const DerivedParams& d);
double fail_bound_E3(double span, const DerivedParams& d);

double epsilon_k(double k, const DerivedParams& d, std::uint32_t m);
double delta_k(double k, const DerivedParams& d, std::uint32_t m, std::uint32_t T);
double epsilon_k_raw(double k, const DerivedParams& d, std::uint32_t m);
double delta_k_raw(double k, const DerivedParams& d, std::uint32_t m, std::uint32_t T);
// Real k at which the unclamped epsilon_k equals eps.
double epsilon_k_inverse(double eps, const DerivedParams& d, std::uint32_t m);

// Rounds after which a leader sequence (resp. transaction) is eps-permanent.
// The *_real variants return the bound before the ceiling; the integer
// variants saturate at UINT64_MAX.
double leader_wait_real(double eps, const DerivedParams& d, std::uint32_t m, Model model, std::uint32_t T);
double tx_wait_real(double eps, const DerivedParams& d, std::uint32_t m, Model model, std::uint32_t T);
std::uint64_t leader_wait(double eps, const DerivedParams& d, std::uint32_t m, Model model, std::uint32_t T);
std::uint64_t tx_wait(double eps, const DerivedParams& d, std::uint32_t m, Model model, std::uint32_t T);

// Concentration inequalities.
double chernoff_lower(double n_trials, double p_success, double frac);
double chernoff_upper(double n_trials, double p_success, double frac);
double mcdiarmid_tail(double n_coords, double lipschitz, double deviation);

// Report builders used by the CLI and bindings.
BoundReport report_probability(const std::string& formula_id, double arg, const DerivedParams& d,
                               std::uint32_t m, std::uint32_t T);
BoundReport report_wait(const std::string& formula_id, double eps, const DerivedParams& d,
                        std::uint32_t m, Model model, std::uint32_t T);

} // namespace backbone
