#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "boltzlab/collision_kernel.hpp"
#include "boltzlab/numerics.hpp"

using namespace boltzlab;

namespace {

double dot3(const double* a, const double* b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

} // namespace

TEST_SUITE("collision_kernel") {

TEST_CASE("angular normalization: quadrature mass equals 1/|S^{d-2}|") {
    for (int d : {2, 3}) {
        // nu = 0.25 keeps the power profile integrable in both dimensions
        for (auto spec : {AngularSpec::constant(), AngularSpec::power(0.25)}) {
            AngularKernel k(d, 1.0, spec);
            const auto& q = k.polar_quadrature(256);
            double mass = 0.0;
            for (double w : q.w) mass += w;
            CHECK(mass == doctest::Approx(1.0 / sphere_area(d - 2)).epsilon(1e-8));
        }
    }
}

TEST_CASE("tabulated profile reproduces a constant profile") {
    std::vector<double> z{-1.0, -0.5, 0.0, 0.5, 1.0};
    std::vector<double> b(z.size(), 3.7); // arbitrary scale; normalization removes it
    AngularKernel tab(3, 1.0, AngularSpec::tabulated(z, b));
    AngularKernel ref(3, 1.0, AngularSpec::constant());
    for (double zz : {-0.9, -0.3, 0.2, 0.8})
        CHECK(tab.b(zz) == doctest::Approx(ref.b(zz)).epsilon(1e-8));
    CHECK(std::isfinite(tab.b_sup()));
}

TEST_CASE("post-collision map conserves momentum and energy") {
    StreamRng rng(11, 0);
    for (int trial = 0; trial < 200; ++trial) {
        double v[3], w[3], sigma[3];
        double ns = 0.0;
        for (int j = 0; j < 3; ++j) {
            v[j] = 3.0 * gaussian(rng);
            w[j] = 3.0 * gaussian(rng);
            sigma[j] = gaussian(rng);
            ns += sigma[j] * sigma[j];
        }
        ns = std::sqrt(ns);
        for (int j = 0; j < 3; ++j) sigma[j] /= ns;
        double p_before[3] = {v[0] + w[0], v[1] + w[1], v[2] + w[2]};
        double e_before = dot3(v, v) + dot3(w, w);
        double vp[3] = {v[0], v[1], v[2]}, wp[3] = {w[0], w[1], w[2]};
        post_collide_inplace(vp, wp, sigma, 3);
        double e_after = dot3(vp, vp) + dot3(wp, wp);
        for (int j = 0; j < 3; ++j)
            CHECK(vp[j] + wp[j] == doctest::Approx(p_before[j]).epsilon(1e-13));
        CHECK(e_after == doctest::Approx(e_before).epsilon(1e-12));
        // relative speed is preserved in modulus
        double u_before = 0.0, u_after = 0.0;
        for (int j = 0; j < 3; ++j) {
            u_before += (v[j] - w[j]) * (v[j] - w[j]);
            u_after += (vp[j] - wp[j]) * (vp[j] - wp[j]);
        }
        CHECK(u_after == doctest::Approx(u_before).epsilon(1e-12));
    }
}

TEST_CASE("allocating and in-place post-collision maps agree") {
    std::vector<double> v{1.0, -2.0, 0.5}, w{0.25, 3.0, -1.0};
    std::vector<double> sigma{0.0, 0.6, 0.8};
    auto out = post_collide(v, w, sigma);
    double vp[3] = {v[0], v[1], v[2]}, wp[3] = {w[0], w[1], w[2]};
    post_collide_inplace(vp, wp, sigma.data(), 3);
    for (int j = 0; j < 3; ++j) {
        CHECK(out.v_prime[std::size_t(j)] == doctest::Approx(vp[j]).epsilon(1e-15));
        CHECK(out.v_star_prime[std::size_t(j)] == doctest::Approx(wp[j]).epsilon(1e-15));
    }
}

TEST_CASE("sampled cos(theta) matches quadrature moments") {
    for (auto spec : {AngularSpec::constant(), AngularSpec::power(0.5)}) {
        AngularKernel k(3, 1.0, spec);
        const auto& q = k.polar_quadrature(512);
        double mass = 0.0, mean_q = 0.0, var_q = 0.0;
        for (std::size_t i = 0; i < q.z.size(); ++i) {
            mass += q.w[i];
            mean_q += q.w[i] * q.z[i];
            var_q += q.w[i] * q.z[i] * q.z[i];
        }
        mean_q /= mass;
        var_q = var_q / mass - mean_q * mean_q;
        StreamRng rng(5, 2);
        const int n = 200000;
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double z = k.sample_cos_theta(rng);
            CHECK(z >= -1.0);
            CHECK(z <= 1.0);
            s1 += z;
            s2 += z * z;
        }
        double mean_s = s1 / n;
        double var_s = s2 / n - mean_s * mean_s;
        double se = std::sqrt(var_q / n);
        CHECK(std::abs(mean_s - mean_q) < 5.0 * se + 1e-4);
        CHECK(var_s == doctest::Approx(var_q).epsilon(0.03));
    }
}

TEST_CASE("sampled sigma has the kernel's polar law around u_hat") {
    AngularKernel k(3, 1.0, AngularSpec::power(0.5));
    double u_hat[3] = {1.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0};
    StreamRng rng(9, 4);
    const int n = 100000;
    double s1 = 0.0;
    for (int i = 0; i < n; ++i) {
        double sigma[3];
        sample_sigma_inplace(k, u_hat, 3, rng, sigma);
        CHECK(dot3(sigma, sigma) == doctest::Approx(1.0).epsilon(1e-10));
        s1 += dot3(sigma, u_hat);
    }
    const auto& q = k.polar_quadrature(512);
    double mass = 0.0, mean_q = 0.0;
    for (std::size_t i = 0; i < q.z.size(); ++i) {
        mass += q.w[i];
        mean_q += q.w[i] * q.z[i];
    }
    mean_q /= mass;
    CHECK(s1 / n == doctest::Approx(mean_q).epsilon(0.05));
}

TEST_CASE("pair rate is |v - v*|^beta") {
    std::vector<double> v{1.0, 2.0, 2.0}, w{1.0, 0.0, 0.0}; // |v - w| = sqrt(8)
    for (double beta : {0.5, 1.0, 2.0}) {
        AngularKernel k(3, beta, AngularSpec::constant());
        CHECK(eval_rate(k, v, w) == doctest::Approx(std::pow(8.0, 0.5 * beta)).epsilon(1e-12));
    }
}

TEST_CASE("invalid kernel parameters are rejected") {
    CHECK_THROWS(AngularKernel(3, -1.0, AngularSpec::constant()));
    CHECK_THROWS(AngularKernel(3, 2.5, AngularSpec::constant()));
    CHECK_THROWS(AngularKernel(1, 1.0, AngularSpec::constant()));
    CHECK_THROWS(AngularKernel(3, 1.0, AngularSpec::power(1.5))); // non-integrable in d = 3
}

} // TEST_SUITE
