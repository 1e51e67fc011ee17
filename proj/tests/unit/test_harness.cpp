#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "boltzlab/harness.hpp"

using namespace boltzlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("boltzlab_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("config: sections, comments, overrides, typed access") {
    auto cfg = Config::parse_text("seed = 4\n"
                                  "[kernel]\n"
                                  "beta = 1.5   # inline comment\n"
                                  "; full-line comment\n"
                                  "dimension = 3\n"
                                  "[run]\n"
                                  "t_grid = 0, 1, 2.5\n");
    CHECK(cfg.get_long("seed", 0) == 4);
    CHECK(cfg.get_double("kernel.beta", 0.0) == 1.5);
    CHECK(cfg.get_double("missing.key", 7.5) == 7.5);
    CHECK(cfg.has("run.t_grid"));
    auto grid = cfg.get_grid("run.t_grid", {});
    REQUIRE(grid.size() == 3);
    CHECK(grid[2] == 2.5);
    cfg.set("kernel.beta=2");
    CHECK(cfg.get_double("kernel.beta", 0.0) == 2.0);
}

TEST_CASE("config: linspace and logspace grids") {
    auto cfg = Config::parse_text("[run]\na = linspace(0, 1, 5)\nb = logspace(0.01, 100, 5)\n");
    auto lin = cfg.get_grid("run.a", {});
    REQUIRE(lin.size() == 5);
    CHECK(lin[1] == doctest::Approx(0.25));
    auto lg = cfg.get_grid("run.b", {});
    REQUIRE(lg.size() == 5);
    CHECK(lg[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(lg[4] == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("config: malformed input raises ConfigError") {
    CHECK_THROWS_AS(Config::parse_text("[unterminated\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse_text("no equals sign\n"), ConfigError);
    auto cfg = Config::parse_text("[a]\nx = not_a_number\n");
    CHECK_THROWS_AS(cfg.get_double("a.x", 0.0), ConfigError);
    CHECK_THROWS_AS(cfg.set("missing-equals"), ConfigError);
    CHECK_THROWS_AS(Config::parse_file("/nonexistent/path.ini"), ConfigError);
}

TEST_CASE("config: echo round-trips and hashes are content-stable") {
    auto cfg = Config::parse_text("[b]\ny = 2\n[a]\nx = 1\n");
    auto again = Config::parse_text(cfg.echo());
    CHECK(again.echo() == cfg.echo());
    CHECK(again.content_hash() == cfg.content_hash());
    again.set("a.x", "3");
    CHECK(again.content_hash() != cfg.content_hash());
}

TEST_CASE("kernel and initial-data builders") {
    auto cfg = Config::parse_text("[kernel]\nbeta = 0.5\nangular = power(0.25)\n"
                                  "[initial]\nkind = heavy-tail\ndelta = 0.75\n");
    auto k = kernel_from_config(cfg);
    CHECK(k.beta() == 0.5);
    CHECK(k.dimension() == 3);
    auto init = initial_from_config(cfg);
    CHECK(init.kind == InitialDataSpec::Kind::HeavyTail);
    CHECK(init.delta == 0.75);

    auto bad = Config::parse_text("[kernel]\nangular = frobnicate\n");
    CHECK_THROWS_AS(kernel_from_config(bad), ConfigError);
    auto badkind = Config::parse_text("[initial]\nkind = plasma\n");
    CHECK_THROWS_AS(initial_from_config(badkind), ConfigError);
}

TEST_CASE("point-mixture atoms parse from the config syntax") {
    auto cfg = Config::parse_text("[initial]\nkind = point-mixture\n"
                                  "atoms = 1,0,0 @ 1 | 0,2,0 @ 3\n");
    auto init = initial_from_config(cfg);
    REQUIRE(init.atoms.size() == 2);
    CHECK(init.atoms[1].v[1] == 2.0);
    CHECK(init.atoms[1].mass == 3.0);
}

TEST_CASE("run builder and z-schedule names") {
    auto cfg = Config::parse_text("seed = 9\n[run]\nparticles = 300\nreplicas = 2\n"
                                  "t_grid = 0, 1\nz = creation\n");
    auto rc = run_from_config(cfg);
    CHECK(rc.n_particles == 300);
    CHECK(rc.seed == 9);
    CHECK(rc.z_schedule == ZSchedule::Creation);
    auto bad = Config::parse_text("[run]\nz = sideways\n");
    CHECK_THROWS_AS(run_from_config(bad), ConfigError);
}

TEST_CASE("deterministic inequality suites pass with fixed seeds") {
    for (auto& a : verify_convolution_suite(1, 50, 20)) CHECK(a.pass);
    for (auto& a : verify_binomial_suite(1, 2000)) CHECK(a.pass);
    for (auto& a : verify_kernel_inequalities(1, 20000)) CHECK(a.pass);
}

TEST_CASE("gamma experiment writes its artifacts and reports pass") {
    auto dir = fresh_dir("gamma");
    auto cfg = Config::parse_text("[bounds]\ngamma_max = 6\nbudget = 512\n");
    auto rep = run_experiment(cfg, "gamma", dir.string());
    CHECK(rep.all_pass);
    CHECK(fs::exists(dir / "gamma.csv"));
    CHECK(fs::exists(dir / "report.txt"));
    auto text = slurp(dir / "report.txt");
    CHECK(text.find("result = PASS") != std::string::npos);
    CHECK(text.find("config-hash") != std::string::npos);
    auto head = slurp(dir / "gamma.csv").substr(0, 22);
    CHECK(head == "p,gamma_p,method,slack");
    // plots render from the emitted CSVs
    auto written = emit_plots(dir.string());
    CHECK(!written.empty());
    CHECK(fs::exists(dir / "gamma_plot.svg"));
}

TEST_CASE("simulate experiment emits trajectory, conservation and moments") {
    auto dir = fresh_dir("simulate");
    auto cfg = Config::parse_text("seed = 3\n[run]\nparticles = 400\nreplicas = 2\n"
                                  "t_grid = 0, 0.2\nn = 4\n");
    auto rep = run_experiment(cfg, "simulate", dir.string());
    CHECK(rep.all_pass);
    CHECK(fs::exists(dir / "trajectory.csv"));
    CHECK(fs::exists(dir / "conservation.csv"));
    CHECK(fs::exists(dir / "moments_t000.csv"));
    CHECK(slurp(dir / "trajectory.csv").substr(0, 26) == "time,order,estimate,stderr");
    CHECK(slurp(dir / "conservation.csv").substr(0, 4) == "time");
}

TEST_CASE("unknown mode raises ConfigError") {
    auto dir = fresh_dir("badmode");
    Config cfg;
    CHECK_THROWS_AS(run_experiment(cfg, "frobnicate", dir.string()), ConfigError);
}

TEST_CASE("module failures are reported, not thrown") {
    auto dir = fresh_dir("modfail");
    // propagation needs initial data with finite exponential moments;
    // heavy-tail data violates the hypothesis -> ConfigError (bad setup)
    auto cfg = Config::parse_text("[initial]\nkind = heavy-tail\n[run]\nparticles = 300\n"
                                  "replicas = 2\nt_grid = 0, 0.1\nn = 4\ns = 2\n");
    CHECK_THROWS_AS(run_experiment(cfg, "propagation", dir.string()), ConfigError);
}

} // TEST_SUITE
