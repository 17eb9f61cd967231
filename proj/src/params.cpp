#include "backbone/params.hpp"

#include <cmath>
#include <sstream>

namespace backbone {

namespace {

void check_common(const ProtocolParams& params)
{
    if (params.n < 2) throw ParamError("n must be at least 2");
    if (params.t >= params.n) throw ParamError("t must be below n");
    if (!(params.p > 0.0 && params.p < 1.0)) throw ParamError("p must lie in (0,1)");
    if (params.T < 1) throw ParamError("T must be at least 1");
    if (params.m < 1) throw ParamError("m must be at least 1");
    if (params.horizon < 1) throw ParamError("horizon must be at least 1");
}

DerivedParams compute(const ProtocolParams& params)
{
    DerivedParams d;
    d.n = params.n;
    d.t = params.t;
    d.p = params.p;
    d.T = params.T;
    const std::uint32_t h = params.honest();
    d.beta = static_cast<double>(params.t) / params.n;
    d.xi = xi_of(params.n, params.t);
    d.q = q_of(params.p, h);
    d.eta = eta_of(d.xi, d.q);
    d.eta_prime = eta_prime_of(d.xi, d.q, params.T);
    d.y_rate = h * params.p * std::exp((h - 1.0) * std::log1p(-params.p));
    d.sync_admissible = validate_sync(d);
    d.bounded_admissible = validate_bounded(d, params.T);
    return d;
}

} // namespace

void check_params(const ProtocolParams& params)
{
    check_common(params);
    if (2ULL * params.t >= params.n) throw ParamError("t must be below n/2");
}

DerivedParams derive(const ProtocolParams& params)
{
    check_params(params);
    return compute(params);
}

DerivedParams derive_unchecked(const ProtocolParams& params)
{
    check_common(params);
    return compute(params);
}

bool validate_sync(const DerivedParams& d) { return d.q <= d.xi / 6.0; }

bool validate_bounded(const DerivedParams& d, std::uint32_t T)
{
    return d.q <= d.xi / (20.0 * T);
}

double xi_of(std::uint32_t n, std::uint32_t t)
{
    // (1 - 2t/n) / (1 - t/n) = (n - 2t) / (n - t), exact in integers up to the final division.
    return (static_cast<double>(n) - 2.0 * t) / (static_cast<double>(n) - t);
}

double q_of(double p, std::uint32_t honest)
{
    return -std::expm1(honest * std::log1p(-p));
}

double p_for_q(double q, std::uint32_t honest)
{
    return -std::expm1(std::log1p(-q) / honest);
}

double eta_of(double xi, double q) { return xi * xi * q / 180.0; }

double eta_prime_of(double xi, double q, std::uint32_t T)
{
    const double decay = std::exp((4.0 * T - 2.0) * std::log1p(-q));
    return xi * xi * q * q * decay / (4000.0 * T * T);
}

std::string describe(const ProtocolParams& params)
{
    std::ostringstream os;
    os << "n=" << params.n << " t=" << params.t << " p=" << params.p << " T=" << params.T
       << " m=" << params.m << " horizon=" << params.horizon << " seed=" << params.seed;
    return os.str();
}

} // namespace backbone
