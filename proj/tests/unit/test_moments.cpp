#include <doctest.h>

#include <cmath>
#include <vector>

#include "boltzlab/dsmc.hpp"
#include "boltzlab/moments.hpp"
#include "boltzlab/numerics.hpp"
#include "boltzlab/rng.hpp"

using namespace boltzlab;

namespace {

MomentVector random_moments(StreamRng& rng, int n, double s, double beta) {
    MomentVector mv;
    mv.s = s;
    mv.beta = beta;
    mv.n = n;
    mv.m.resize(std::size_t(n) + 2);
    for (auto& m : mv.m) m = std::exp(1.5 * gaussian(rng));
    if (beta != s) {
        mv.m_shift.resize(mv.m.size());
        for (auto& m : mv.m_shift) m = std::exp(1.5 * gaussian(rng));
    }
    return mv;
}

MomentVector maxwellian_moments(int n, double T, double m0) {
    InitialDataSpec init;
    init.kind = InitialDataSpec::Kind::Maxwellian;
    init.m0 = m0;
    init.T = T;
    MomentVector mv;
    mv.s = mv.beta = 1.0;
    mv.n = n;
    mv.m.resize(std::size_t(n) + 2);
    for (int p = 0; p <= n + 1; ++p) mv.m[std::size_t(p)] = init.moment(3, double(p));
    return mv;
}

} // namespace

TEST_SUITE("moments") {

TEST_CASE("S-term matches a brute-force evaluation") {
    StreamRng rng(23, 0);
    for (double beta : {1.0, 0.7}) {
        auto mv = random_moments(rng, 10, 1.0, beta);
        for (int p = 2; p <= 9; ++p) {
            double brute = 0.0;
            int kp = int(std::floor((p + 1.0) / 2.0));
            for (int k = 1; k <= kp; ++k)
                brute += binomial(double(p), k) *
                         (mv.shifted(k) * mv.m[std::size_t(p - k)] +
                          mv.m[std::size_t(k)] * mv.shifted(p - k));
            CHECK(s_term(mv, p) == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("truncated exponential sums match a direct evaluation") {
    StreamRng rng(29, 1);
    auto mv = random_moments(rng, 12, 1.0, 1.0);
    double z = 0.3;
    auto series = exp_partial_sums(mv, z, 12);
    double direct_E = 0.0, direct_I = 0.0, zp = 1.0;
    for (int p = 0; p <= 12; ++p) {
        double fact = std::tgamma(double(p) + 1.0);
        direct_E += mv.m[std::size_t(p)] * zp / fact;
        direct_I += mv.shifted(p) * zp / fact;
        zp *= z;
    }
    CHECK(series.E_n == doctest::Approx(direct_E).epsilon(1e-12));
    CHECK(series.I_n == doctest::Approx(direct_I).epsilon(1e-12));
}

TEST_CASE("convolution inequality holds on random positive sequences") {
    StreamRng rng(31, 2);
    for (int trial = 0; trial < 200; ++trial) {
        auto mv = random_moments(rng, 14, 1.0, 1.0);
        for (double z : {0.1, 1.0, 5.0}) {
            auto rep = check_convolution(mv, z, 3, 14);
            CHECK(rep.pass);
            CHECK(rep.lhs <= rep.rhs * (1.0 + 1e-10));
        }
    }
}

TEST_CASE("convolution inequality holds on analytic maxwellian moments") {
    auto mv = maxwellian_moments(20, 1.0, 1.0);
    for (double z : {0.1, 0.5, 2.0}) {
        auto rep = check_convolution(mv, z, 3, 20);
        CHECK(rep.pass);
    }
}

TEST_CASE("binomial bounds: equalities at small integer order") {
    // p = 3: both partial sums equal the expanded middle term exactly
    auto [lo3, hi3] = check_binomial_bounds(2.0, 0.5, 3.0);
    CHECK(lo3);
    CHECK(hi3);
    // generic sweep, including strongly separated magnitudes
    StreamRng rng(37, 3);
    for (int trial = 0; trial < 2000; ++trial) {
        double x = std::exp(3.0 * gaussian(rng));
        double y = std::exp(3.0 * gaussian(rng));
        double p = 1.0 + 39.0 * rng.uniform_pos();
        auto [lo, hi] = check_binomial_bounds(x, y, p);
        CHECK(lo);
        CHECK(hi);
    }
}

TEST_CASE("binomial bounds reject invalid input") {
    CHECK_THROWS(check_binomial_bounds(-1.0, 1.0, 2.0));
    CHECK_THROWS(check_binomial_bounds(1.0, 1.0, 0.5));
}

TEST_CASE("interpolation floor lies below the shifted moment") {
    auto mv = maxwellian_moments(12, 0.7, 1.3);
    for (int p = 1; p <= 11; ++p) {
        double floor = holder_interpolation_floor(mv, p);
        CHECK(floor <= mv.shifted(p) * (1.0 + 1e-10));
    }
}

TEST_CASE("maxwellian moments are log-convex and the vector knows it") {
    auto mv = maxwellian_moments(12, 1.0, 1.0);
    CHECK(mv.nonnegative());
    CHECK(mv.log_convex());
}

TEST_CASE("shifted moments use the grid when beta equals s") {
    auto mv = maxwellian_moments(8, 1.0, 1.0);
    for (int p = 0; p <= 7; ++p) CHECK(mv.shifted(p) == mv.m[std::size_t(p) + 1]);
}

} // TEST_SUITE
