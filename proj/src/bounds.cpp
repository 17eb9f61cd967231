#include "backbone/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace backbone {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double require_positive_eta(double eta, const char* what)
{
    if (!(eta > 0.0)) throw BoundError(std::string(what) + ": requires q > 0");
    return eta;
}

double eta_prime_for(const DerivedParams& d, std::uint32_t T)
{
    if (T < 1) throw BoundError("T must be at least 1");
    return require_positive_eta(eta_prime_of(d.xi, d.q, T), "bounded-delay bound");
}

double lb_raw_E(double span, const DerivedParams& d)
{
    return 1.0 - 4.0 * std::exp(-require_positive_eta(d.eta, "lb_prob_E") * span);
}

double lb_raw_G(double span, const DerivedParams& d)
{
    const double eta = require_positive_eta(d.eta, "lb_prob_G");
    return 1.0 - 5.0 / (eta * eta) * std::exp(-eta * span);
}

double lb_raw_F(double span, const DerivedParams& d, std::uint32_t T)
{
    return 1.0 - 4.0 * std::exp(-eta_prime_for(d, T) * span);
}

double lb_raw_J(double span, const DerivedParams& d, std::uint32_t T)
{
    const double ep = eta_prime_for(d, T);
    if (!(span > 2.0 / d.q)) throw BoundError("lb_prob_J: span must exceed 2/q");
    return 1.0 - 5.0 / (ep * ep) * std::exp(-ep * span);
}

void check_span(double span)
{
    if (!(span >= 1.0)) throw BoundError("span must be at least 1");
}

void check_wait_inputs(double eps, const DerivedParams& d, Model model, std::uint32_t T, bool allow_one)
{
    const bool in_range = allow_one ? (eps > 0.0 && eps <= 1.0) : (eps > 0.0 && eps < 1.0);
    if (!in_range) throw BoundError("epsilon outside its allowed range");
    if (!(d.q > 0.0)) throw BoundError("wait formulas require q > 0");
    if (model == Model::synchronous && !validate_sync(d))
        throw BoundError("parameters not admissible for the synchronous model");
    if (model == Model::bounded_delay && !validate_bounded(d, T))
        throw BoundError("parameters not admissible for the bounded-delay model");
}

} // namespace

std::string to_string(Model model)
{
    return model == Model::synchronous ? "sync" : "bounded";
}

Model model_from_string(const std::string& name)
{
    if (name == "sync" || name == "synchronous") return Model::synchronous;
    if (name == "bounded" || name == "bounded_delay") return Model::bounded_delay;
    throw BoundError("unknown model: " + name);
}

double lb_prob_E(double span, const DerivedParams& d)
{
    check_span(span);
    return clamp01(lb_raw_E(span, d));
}

double lb_prob_F(double span, const DerivedParams& d, std::uint32_t T)
{
    check_span(span);
    return clamp01(lb_raw_F(span, d, T));
}

double lb_prob_G(double span, const DerivedParams& d)
{
    check_span(span);
    return clamp01(lb_raw_G(span, d));
}

double lb_prob_J(double span, const DerivedParams& d, std::uint32_t T)
{
    check_span(span);
    return clamp01(lb_raw_J(span, d, T));
}

double fail_bound_E1(double span, const DerivedParams& d)
{
    // Two-sided Chernoff at relative deviation xi/6; the upper tail dominates.
    return clamp01(2.0 * std::exp(-d.xi * d.xi / 108.0 * d.q * span));
}

double fail_bound_E2(double span, const DerivedParams& d)
{
    return clamp01(std::exp(-d.xi * d.xi / 72.0 * (1.0 - d.q) * d.q * span));
}

double fail_bound_E3(double span, const DerivedParams& d)
{
    const double a = d.xi / 12.0;
    return clamp01(std::exp(-a * std::log1p(a) * d.q * span));
}

double epsilon_k_raw(double k, const DerivedParams& d, std::uint32_t m)
{
    const double eta = require_positive_eta(d.eta, "epsilon_k");
    if (!(k >= 1.0)) throw BoundError("epsilon_k: k must be at least 1");
    return 6.0 * m / (eta * eta) * std::exp(-eta * k / (2.0 * d.q));
}

double epsilon_k(double k, const DerivedParams& d, std::uint32_t m)
{
    return clamp01(epsilon_k_raw(k, d, m));
}

double delta_k_raw(double k, const DerivedParams& d, std::uint32_t m, std::uint32_t T)
{
    const double ep = eta_prime_for(d, T);
    if (!(k >= 5.0)) throw BoundError("delta_k: k must be at least 5");
    return 5.0 * m / (ep * ep) * std::exp(-ep * k / (2.0 * d.q) + (2.0 * T + 1.0) * ep);
}

double delta_k(double k, const DerivedParams& d, std::uint32_t m, std::uint32_t T)
{
    return clamp01(delta_k_raw(k, d, m, T));
}

double epsilon_k_inverse(double eps, const DerivedParams& d, std::uint32_t m)
{
    const double eta = require_positive_eta(d.eta, "epsilon_k_inverse");
    if (!(eps > 0.0)) throw BoundError("epsilon_k_inverse: eps must be positive");
    return 2.0 * d.q / eta * std::log(6.0 * m / (eta * eta) / eps);
}

double leader_wait_real(double eps, const DerivedParams& d, std::uint32_t m, Model model, std::uint32_t T)
{
    check_wait_inputs(eps, d, model, T, false);
    const double xi = d.xi;
    if (model == Model::synchronous) {
        const double eta = d.eta;
        return 5.0 / ((1.0 - xi / 6.0) * xi * eta) * std::log(12.0 * m / (eta * eta) / eps);
    }
    const double ep = eta_prime_for(d, T);
    const double decay = std::exp(T * std::log1p(-d.q));
    return 5.0 / ((1.0 - xi / 10.0) * xi * ep * decay) *
           (std::log(10.0 * m / (ep * ep) / eps) + ep * (2.0 * T + 1.0));
}

double tx_wait_real(double eps, const DerivedParams& d, std::uint32_t m, Model model, std::uint32_t T)
{
    check_wait_inputs(eps, d, model, T, true);
    const double xi = d.xi;
    if (model == Model::synchronous) {
        const double eta = d.eta;
        const double c = 1.0 - xi / 6.0;
        return 25.0 / (c * c * xi * xi * eta) * std::log(24.0 * m / (eta * eta) / eps);
    }
    const double ep = eta_prime_for(d, T);
    const double c = 1.0 - xi / 10.0;
    const double decay = std::exp(2.0 * T * std::log1p(-d.q));
    return 25.0 / (c * c * xi * xi * ep * decay) *
           (std::log(20.0 * m / (ep * ep) / eps) + ep * (2.0 * T + 1.0));
}

static std::uint64_t ceil_wait(double x)
{
    // 2^64 saturates; such waits are far beyond any simulated horizon.
    constexpr double kMax = 18446744073709551616.0;
    const double c = std::max(1.0, std::ceil(x));
    return c >= kMax ? UINT64_MAX : static_cast<std::uint64_t>(c);
}

std::uint64_t leader_wait(double eps, const DerivedParams& d, std::uint32_t m, Model model, std::uint32_t T)
{
    return ceil_wait(leader_wait_real(eps, d, m, model, T));
}

std::uint64_t tx_wait(double eps, const DerivedParams& d, std::uint32_t m, Model model, std::uint32_t T)
{
    return ceil_wait(tx_wait_real(eps, d, m, model, T));
}

double chernoff_lower(double n_trials, double p_success, double frac)
{
    if (!(frac > 0.0 && frac <= 1.0)) throw BoundError("chernoff: deviation fraction outside (0,1]");
    return std::exp(-frac * frac * p_success * n_trials / 2.0);
}

double chernoff_upper(double n_trials, double p_success, double frac)
{
    if (!(frac > 0.0 && frac <= 1.0)) throw BoundError("chernoff: deviation fraction outside (0,1]");
    return std::exp(-frac * frac * p_success * n_trials / 3.0);
}

double mcdiarmid_tail(double n_coords, double lipschitz, double deviation)
{
    if (deviation < 0.0) throw BoundError("mcdiarmid: negative deviation");
    if (!(n_coords > 0.0 && lipschitz > 0.0)) throw BoundError("mcdiarmid: coordinates and constant must be positive");
    return std::exp(-2.0 * deviation * deviation / (n_coords * lipschitz * lipschitz));
}

BoundReport report_probability(const std::string& formula_id, double arg, const DerivedParams& d,
                               std::uint32_t m, std::uint32_t T)
{
    BoundReport r;
    r.formula_id = formula_id;
    r.xi = d.xi;
    r.q = d.q;
    r.m = m;
    r.T = T;
    r.arg = arg;
    if (formula_id == "lb_prob_E") {
        check_span(arg);
        r.raw = lb_raw_E(arg, d);
    } else if (formula_id == "lb_prob_G") {
        check_span(arg);
        r.raw = lb_raw_G(arg, d);
    } else if (formula_id == "lb_prob_F") {
        check_span(arg);
        r.model = Model::bounded_delay;
        r.raw = lb_raw_F(arg, d, T);
    } else if (formula_id == "lb_prob_J") {
        check_span(arg);
        r.model = Model::bounded_delay;
        r.raw = lb_raw_J(arg, d, T);
    } else if (formula_id == "epsilon_k") {
        r.raw = epsilon_k_raw(arg, d, m);
    } else if (formula_id == "delta_k") {
        r.model = Model::bounded_delay;
        r.raw = delta_k_raw(arg, d, m, T);
    } else {
        throw BoundError("unknown probability formula: " + formula_id);
    }
    r.value = clamp01(r.raw);
    return r;
}

BoundReport report_wait(const std::string& formula_id, double eps, const DerivedParams& d,
                        std::uint32_t m, Model model, std::uint32_t T)
{
    BoundReport r;
    r.model = model;
    r.formula_id = formula_id;
    r.xi = d.xi;
    r.q = d.q;
    r.m = m;
    r.T = T;
    r.arg = eps;
    if (formula_id == "leader_wait") {
        r.raw = leader_wait_real(eps, d, m, model, T);
    } else if (formula_id == "tx_wait") {
        r.raw = tx_wait_real(eps, d, m, model, T);
    } else {
        throw BoundError("unknown wait formula: " + formula_id);
    }
    r.value = static_cast<double>(ceil_wait(r.raw));
    return r;
}

} // namespace backbone
