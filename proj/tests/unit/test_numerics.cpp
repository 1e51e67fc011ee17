#include <doctest.h>

#include <cmath>
#include <numbers>

#include "boltzlab/numerics.hpp"
#include "boltzlab/rng.hpp"

using namespace boltzlab;

TEST_SUITE("numerics") {

TEST_CASE("sphere areas") {
    CHECK(sphere_area(0) == doctest::Approx(2.0));
    CHECK(sphere_area(1) == doctest::Approx(2.0 * std::numbers::pi));
    CHECK(sphere_area(2) == doctest::Approx(4.0 * std::numbers::pi));
    CHECK(sphere_area(3) == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    const auto& q = gauss_legendre(8);
    double w_sum = 0.0, x4 = 0.0, x7 = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        w_sum += q.w[i];
        x4 += q.w[i] * std::pow(q.x[i], 4);
        x7 += q.w[i] * std::pow(q.x[i], 7);
    }
    CHECK(w_sum == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x4 == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(x7 == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("binomial coefficients") {
    CHECK(binomial(5.0, 2) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(binomial(2.5, 1) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(binomial(7.0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    // large orders must not overflow
    double c = binomial(120.0, 60);
    CHECK(std::isfinite(c));
    CHECK(c > 1e34);
    // Pascal recurrence at real order
    double p = 13.7;
    CHECK(binomial(p, 4) ==
          doctest::Approx(binomial(p - 1.0, 3) + binomial(p - 1.0, 4)).epsilon(1e-10));
}

TEST_CASE("monotone cubic stays within data brackets") {
    std::vector<double> x{1.0, 2.0, 3.0, 5.0, 8.0};
    std::vector<double> y{1.0, 0.66, 0.5, 0.33, 0.22};
    MonotoneCubic f(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(f(x[i]) == doctest::Approx(y[i]));
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        for (int j = 1; j < 16; ++j) {
            double xq = x[i] + (x[i + 1] - x[i]) * j / 16.0;
            double v = f(xq);
            CHECK(v <= y[i] + 1e-12);
            CHECK(v >= y[i + 1] - 1e-12);
        }
    }
}

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 14695981039346656037ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("stream rng: reproducible, stream-independent, uniform-ish") {
    StreamRng a(42, 7), b(42, 7), c(42, 8);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    bool differs = false;
    StreamRng a2(42, 7);
    for (int i = 0; i < 100; ++i)
        if (a2() != c()) differs = true;
    CHECK(differs);
    StreamRng r(1, 0);
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("gaussian moments") {
    StreamRng r(3, 1);
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double g = gaussian(r);
        s1 += g;
        s2 += g * g;
        s4 += g * g * g * g;
    }
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

} // TEST_SUITE
