#include "backbone/bounds.hpp"

#include "oracle/mp_bounds.hpp"
#include "oracle/param_gen.hpp"

#include <doctest.h>

#include <cmath>

using namespace backbone;
using oracle::mp;

namespace {

DerivedParams at(std::uint32_t n, std::uint32_t t, double q, std::uint32_t T = 1)
{
    ProtocolParams pp;
    pp.n = n;
    pp.t = t;
    pp.T = T;
    pp.p = p_for_q(q, n - t);
    return derive(pp);
}

// xi = 2/3 with q = 0.1 (n = 100, t = 25).
DerivedParams desk() { return at(100, 25, 0.1); }

} // namespace

TEST_CASE("event lower bounds: limits and clamping")
{
    const auto d = desk();
    CHECK(lb_prob_E(1e9, d) == 1.0);
    CHECK(lb_prob_E(10, d) == 0.0);
    CHECK(lb_prob_G(10, d) == 0.0);
    CHECK_THROWS_AS(lb_prob_E(0.5, d), BoundError);
    CHECK_THROWS_AS(lb_prob_J(5, d, 1), BoundError); // span must exceed 2/q = 20
    const auto r = report_probability("lb_prob_E", 10, d, 1, 1);
    CHECK(r.raw < 0.0);
    CHECK(r.value == 0.0);
}

TEST_CASE("lb_prob_E at xi=2/3, q=0.1, span 20000 matches the high-precision value")
{
    const auto d = desk();
    const auto md = oracle::mp_derive(d.n, d.t, d.p);
    CHECK(oracle::rel_err(d.eta, md.eta) < 1e-12);
    CHECK(d.eta == doctest::Approx(4.0 / 9.0 * 0.1 / 180).epsilon(1e-12));
    CHECK(oracle::rel_err(lb_prob_E(20000, d), oracle::mp_lb_E(md, 20000)) < 1e-12);
}

TEST_CASE("lb_prob_G at xi=1, q=1/6, span 1e7")
{
    const auto d = at(60, 0, 1.0 / 6.0);
    CHECK(d.xi == 1.0);
    CHECK(d.eta == doctest::Approx(1.0 / 1080).epsilon(1e-12));
    const auto md = oracle::mp_derive(d.n, d.t, d.p);
    CHECK(oracle::rel_err(lb_prob_G(1e7, d), oracle::mp_lb_G(md, 1e7)) < 1e-12);
}

TEST_CASE("eta and eta' stay below their ceilings on the admissible region")
{
    CounterRng rng(1, 0, Substream::scratch);
    for (int i = 0; i < 2000; ++i) {
        const auto tuple = oracle::random_admissible(rng, i % 2 == 1);
        CHECK(tuple.d.eta <= 1.0 / 1080);
        CHECK(eta_prime_of(tuple.d.xi, tuple.d.q, tuple.params.T) < 1.0 / 4000);
        for (double span : {10.0, 1e3, 1e5, 1e7}) CHECK(lb_prob_G(span, tuple.d) <= lb_prob_E(span, tuple.d));
    }
}

TEST_CASE("epsilon_k algebra")
{
    const auto d = desk();
    double prev = 1e300;
    for (double k = 1; k < 3000; k += 37) {
        const double e = epsilon_k_raw(k, d, 10);
        CHECK(e < prev);
        prev = e;
        CHECK(epsilon_k_raw(2 * k, d, 10) ==
              doctest::Approx(e * std::exp(-d.eta * k / (2 * d.q))).epsilon(1e-12));
        CHECK(epsilon_k_raw(k, d, 20) == doctest::Approx(2 * e).epsilon(1e-14));
    }
    CHECK(epsilon_k(1, d, 10) == 1.0);
    CHECK_THROWS(epsilon_k(0.5, d, 10));
    CHECK_THROWS(delta_k(4, d, 10, 1));
}

TEST_CASE("epsilon_k inverse reproduces k within one")
{
    const auto d = desk();
    const double k = epsilon_k_inverse(0.01, d, 100);
    const double kc = std::ceil(k);
    CHECK(epsilon_k(kc, d, 100) <= 0.01);
    CHECK(epsilon_k(kc - 1, d, 100) > 0.01);
    // Bisection on the forward formula as an independent inversion.
    double lo = 1, hi = 1e9;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (epsilon_k_raw(mid, d, 100) > 0.01 ? lo : hi) = mid;
    }
    CHECK(std::abs(lo - k) <= 1.0);
}

TEST_CASE("halving epsilon adds a fixed number of rounds to the leader wait")
{
    const auto d = desk();
    const double step = 5.0 / ((1 - d.xi / 6) * d.xi * d.eta) * std::log(2.0);
    for (double eps : {0.5, 0.1, 0.01, 1e-4}) {
        const auto a = leader_wait(eps, d, 10, Model::synchronous, 1);
        const auto b = leader_wait(eps / 2, d, 10, Model::synchronous, 1);
        CHECK(std::abs(double(b - a) - step) <= 1.0);
    }
}

TEST_CASE("leader wait at m=1000, xi=2/3, q=0.1, eps=1e-3")
{
    const auto d = desk();
    const auto md = oracle::mp_derive(d.n, d.t, d.p);
    const double got = leader_wait_real(1e-3, d, 1000, Model::synchronous, 1);
    CHECK(oracle::rel_err(got, oracle::mp_leader_wait_sync(md, 1000, mp(1e-3))) < 1e-12);
    CHECK(leader_wait(1e-3, d, 1000, Model::synchronous, 1) == std::uint64_t(std::ceil(got)));
}

TEST_CASE("tx wait at xi=2/3, q=0.1, m=100, eps=0.01")
{
    const auto d = desk();
    const auto md = oracle::mp_derive(d.n, d.t, d.p);
    CHECK(oracle::rel_err(tx_wait_real(0.01, d, 100, Model::synchronous, 1),
                          oracle::mp_tx_wait_sync(md, 100, mp(0.01))) < 1e-12);
    CHECK(tx_wait(1.0, d, 1, Model::synchronous, 1) >= 1);
    CHECK_THROWS(leader_wait(1.0, d, 1, Model::synchronous, 1));
}

TEST_CASE("wait formulas reject inadmissible parameters")
{
    const auto d = at(100, 25, 0.2); // q above xi/6
    CHECK_THROWS_AS(leader_wait(0.1, d, 1, Model::synchronous, 1), BoundError);
    CHECK_THROWS_AS(tx_wait(0.1, desk(), 1, Model::bounded_delay, 5), BoundError);
}

TEST_CASE("parameter sweeps: bounded >= sync at T=1 and tx wait >= leader wait")
{
    for (std::uint32_t t : {0u, 10u, 25u, 40u})
        for (double frac : {0.01, 0.1, 0.5, 0.99})
            for (std::uint32_t m : {1u, 10u, 1000u})
                for (double eps : {0.5, 0.01, 1e-6}) {
                    const double xi = xi_of(100, t);
                    const auto d = at(100, t, frac * xi / 20);
                    CHECK(leader_wait(eps, d, m, Model::bounded_delay, 1) >= leader_wait(eps, d, m, Model::synchronous, 1));
                    CHECK(tx_wait(eps, d, m, Model::bounded_delay, 1) >= tx_wait(eps, d, m, Model::synchronous, 1));
                    CHECK(tx_wait(eps, d, m, Model::synchronous, 1) >= leader_wait(eps, d, m, Model::synchronous, 1));
                    for (std::uint32_t T : {1u, 2u, 5u}) {
                        const auto db = at(100, t, frac * xi / (20 * T), T);
                        CHECK(tx_wait(eps, db, m, Model::bounded_delay, T) >=
                              leader_wait(eps, db, m, Model::bounded_delay, T));
                    }
                }
}

TEST_CASE("chernoff bound dominates the exact binomial tail")
{
    // P(Bin(100, 0.3) <= 24) by direct summation in extended precision.
    mp tail = 0;
    for (int k = 0; k <= 24; ++k) {
        mp c = 1;
        for (int i = 0; i < k; ++i) c = c * (100 - i) / (i + 1);
        tail += c * pow(mp(0.3), k) * pow(mp(0.7), 100 - k);
    }
    const double bound = chernoff_lower(100, 0.3, 0.2);
    CHECK(bound == doctest::Approx(std::exp(-0.04 * 30 / 2)).epsilon(1e-14));
    CHECK(static_cast<double>(tail) <= bound);
    CHECK(static_cast<double>(tail) > 0.05);

    mp upper = 0; // P(Bin(100, 0.3) >= 36)
    for (int k = 36; k <= 100; ++k) {
        mp c = 1;
        for (int i = 0; i < k; ++i) c = c * (100 - i) / (i + 1);
        upper += c * pow(mp(0.3), k) * pow(mp(0.7), 100 - k);
    }
    CHECK(static_cast<double>(upper) <= chernoff_upper(100, 0.3, 0.2));
    CHECK_THROWS(chernoff_lower(100, 0.3, 0.0));
}

TEST_CASE("mcdiarmid tail")
{
    CHECK(mcdiarmid_tail(100, 1, 0) == 1.0);
    CHECK(mcdiarmid_tail(100, 2, 10) > mcdiarmid_tail(100, 1, 10));
    CHECK(std::log(mcdiarmid_tail(100, 2, 10)) == doctest::Approx(std::log(mcdiarmid_tail(100, 1, 10)) / 4));
    CHECK_THROWS(mcdiarmid_tail(100, 1, -1));
}

TEST_CASE("bounds are monotone in their arguments")
{
    CounterRng rng(2, 0, Substream::scratch);
    for (int i = 0; i < 300; ++i) {
        const auto tuple = oracle::random_admissible(rng, true);
        const auto& d = tuple.d;
        const auto T = tuple.params.T;
        const auto m = tuple.params.m;
        const double base = 4.0 / d.eta;
        CHECK(lb_prob_E(base, d) <= lb_prob_E(2 * base, d));
        CHECK(lb_prob_G(base * 5, d) <= lb_prob_G(base * 6, d));
        const double ep = eta_prime_of(d.xi, d.q, T);
        CHECK(lb_prob_F(4 / ep, d, T) <= lb_prob_F(8 / ep, d, T));
        CHECK(lb_prob_J(30 / ep, d, T) <= lb_prob_J(31 / ep, d, T));
        CHECK(epsilon_k_raw(100, d, m) >= epsilon_k_raw(101, d, m));
        CHECK(delta_k_raw(100, d, m, T) >= delta_k_raw(101, d, m, T));
        CHECK(leader_wait_real(0.1, d, m, Model::synchronous, 1) < leader_wait_real(0.05, d, m, Model::synchronous, 1));
        CHECK(tx_wait_real(0.1, d, m, Model::bounded_delay, T) < tx_wait_real(0.05, d, m, Model::bounded_delay, T));
    }
}

TEST_CASE("random tuples agree with the high-precision evaluation")
{
    CounterRng rng(3, 0, Substream::scratch);
    for (int i = 0; i < 200; ++i) {
        const auto tuple = oracle::random_admissible(rng, true);
        const auto& d = tuple.d;
        const auto T = tuple.params.T;
        const auto m = tuple.params.m;
        const auto md = oracle::mp_derive(d.n, d.t, d.p);
        CHECK(oracle::rel_err(d.q, md.q) < 1e-12);
        CHECK(oracle::rel_err(d.xi, md.xi) < 1e-12);
        CHECK(oracle::rel_err(d.y_rate, md.y_rate) < 1e-12);
        CHECK(oracle::rel_err(eta_prime_of(d.xi, d.q, T), oracle::mp_eta_prime(md, T)) < 1e-12);
        const double span = 10 / d.eta;
        CHECK(oracle::rel_err(lb_prob_E(span, d), oracle::mp_lb_E(md, span)) < 1e-9);
        CHECK(oracle::rel_err(tx_wait_real(0.01, d, m, Model::bounded_delay, T),
                              oracle::mp_tx_wait_bounded(md, m, T, mp(0.01))) < 1e-9);
    }
}
