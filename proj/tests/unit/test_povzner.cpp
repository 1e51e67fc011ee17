#include <doctest.h>

#include <cmath>
#include <vector>

#include "boltzlab/povzner.hpp"

using namespace boltzlab;

namespace {

std::vector<double> half_grid(double lo, double hi) {
    std::vector<double> v;
    for (double p = lo; p <= hi + 1e-9; p += 0.5) v.push_back(p);
    return v;
}

} // namespace

TEST_SUITE("povzner") {

TEST_CASE("constant b, d = 3: gamma_p matches 2/(p+1)") {
    AngularKernel k(3, 1.0, AngularSpec::constant());
    auto table = gamma_table(k, half_grid(1.0, 8.0), 4096);
    CHECK(std::abs(table.at(1.0) - 1.0) < 1e-6);
    for (std::size_t i = 0; i < table.orders().size(); ++i) {
        double p = table.orders()[i];
        CHECK(table.gamma()[i] == doctest::Approx(2.0 / (p + 1.0)).epsilon(0.02));
    }
}

TEST_CASE("gamma table is strictly decreasing and bounded by one") {
    AngularKernel k(3, 1.0, AngularSpec::power(0.5));
    auto table = gamma_table(k, half_grid(1.0, 6.0), 2048);
    for (std::size_t i = 0; i < table.gamma().size(); ++i) {
        CHECK(table.gamma()[i] <= 1.0 + 1e-9);
        if (i > 0) CHECK(table.gamma()[i] < table.gamma()[i - 1]);
    }
}

TEST_CASE("interpolated values stay inside the bracketing grid values") {
    AngularKernel k(3, 1.0, AngularSpec::constant());
    auto table = gamma_table(k, half_grid(1.0, 5.0), 2048);
    for (std::size_t i = 0; i + 1 < table.orders().size(); ++i) {
        double mid = 0.5 * (table.orders()[i] + table.orders()[i + 1]);
        double g = table.at(mid);
        CHECK(g <= table.gamma()[i] + 1e-12);
        CHECK(g >= table.gamma()[i + 1] - 1e-12);
    }
}

TEST_CASE("angular average never exceeds the tabulated constant") {
    AngularKernel k(3, 1.0, AngularSpec::constant());
    auto table = gamma_table(k, half_grid(1.0, 6.0), 2048);
    StreamRng rng(17, 0);
    auto report = verify_povzner(k, table, 500, rng);
    CHECK(report.pass);
    CHECK(report.violations == 0);
}

TEST_CASE("symmetric-profile formula is exact at p = 1") {
    AngularKernel k(3, 1.0, AngularSpec::constant());
    CHECK(gamma_symmetric_formula(k, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("angular average at an extreme configuration") {
    // equal-speed orthogonal pair at p = 1: the average must equal gamma_1 = 1
    // times the split-energy factor G_1 <= 1.
    AngularKernel k(3, 1.0, AngularSpec::constant());
    std::vector<double> v{1.0, 0.0, 0.0}, w{0.0, 1.0, 0.0};
    double g = angular_average(k, v, w, 1.0);
    CHECK(g <= 1.0 + 1e-9);
    CHECK(g > 0.0);
}

TEST_CASE("d = 2 table is sane") {
    AngularKernel k(2, 1.0, AngularSpec::constant());
    auto table = gamma_table(k, half_grid(1.0, 4.0), 2048);
    CHECK(std::abs(table.at(1.0) - 1.0) < 1e-6);
    for (std::size_t i = 1; i < table.gamma().size(); ++i)
        CHECK(table.gamma()[i] < table.gamma()[i - 1]);
}

TEST_CASE("bad order grids are rejected") {
    AngularKernel k(3, 1.0, AngularSpec::constant());
    CHECK_THROWS(gamma_table(k, {0.5, 1.0, 2.0}, 512));  // orders must start at >= 1
    CHECK_THROWS(gamma_table(k, {2.0, 1.0}, 512));       // must ascend
}

} // TEST_SUITE
