// Acceptance gate: one pass/fail line per criterion, grouped so the slow
// particle runs can be scheduled as separate test entries.
//   usage: acceptance <povzner|inequalities|maxwellian|maxwell_molecules|heavy_tail>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "boltzlab/harness.hpp"
#include "boltzlab/ode_bounds.hpp"

using namespace boltzlab;

namespace {

int g_failures = 0;

void criterion(const std::string& id, bool pass, const std::string& what,
               const std::string& detail) {
    if (!pass) ++g_failures;
    std::printf("[criterion %s] %s  %s (%s)\n", id.c_str(), pass ? "PASS" : "FAIL",
                what.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const Assertion* find_assertion(const RunReport& rep, const std::string& name) {
    for (const auto& a : rep.assertions)
        if (a.name == name) return &a;
    return nullptr;
}

void forward_assertion(const RunReport& rep, const std::string& name,
                       const std::string& crit_id, const std::string& what) {
    const Assertion* a = find_assertion(rep, name);
    criterion(crit_id, a != nullptr && a->pass, what,
              a != nullptr ? a->note : "assertion missing from report");
}

std::string scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("boltzlab_acceptance_" + tag);
    std::filesystem::remove_all(dir);
    return dir.string();
}

// -------------------------------------------------------------------------

void group_povzner() {
    AngularKernel k(3, 1.0, AngularSpec::constant());
    std::vector<double> orders;
    for (double p = 1.0; p <= 40.0; p += 1.0) orders.push_back(p);
    auto table = gamma_table(k, orders, 8192);

    bool within = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        double exact = 2.0 / (orders[i] + 1.0);
        double rel = std::abs(table.gamma()[i] - exact) / exact;
        worst = std::max(worst, rel);
        if (rel > 0.02) within = false;
    }
    double g1_err = std::abs(table.at(1.0) - 1.0);
    criterion("1", within && g1_err < 1e-6,
              "sharp constants match 2/(p+1) within 2% for p = 1..40, gamma_1 = 1 +- 1e-6",
              "worst relative error " + fmt(worst) + ", |gamma_1 - 1| = " + fmt(g1_err));

    StreamRng rng(1, 0);
    auto audit = verify_povzner(k, table, 10000, rng);
    criterion("1b", audit.pass, "random-configuration audit: G_p <= gamma_p on 1e4 trials",
              audit.summary());
}

void group_inequalities() {
    auto conv = verify_convolution_suite(1, 1000, 30);
    criterion("2a", conv.size() == 1 && conv[0].pass,
              "discrete convolution inequality on 1e3 random sequences, n = 30, z in {0.1,1,5}",
              conv.empty() ? "no result" : conv[0].note);
    auto binom = verify_binomial_suite(1, 10000);
    criterion("2b", binom.size() == 1 && binom[0].pass,
              "double-sided binomial-sum inequality on 1e4 random (x, y, p)",
              binom.empty() ? "no result" : binom[0].note);
    auto kin = verify_kernel_inequalities(1, 100000);
    criterion("2c", kin.size() == 1 && kin[0].pass,
              "kernel comparison inequalities on 1e5 pairs for five beta values",
              kin.empty() ? "no result" : kin[0].note);
}

void group_maxwellian() {
    AngularKernel k(3, 1.0, AngularSpec::constant());
    InitialDataSpec init; // maxwellian, T = 1, m0 = 1
    RunConfig rc;
    rc.n_particles = 100000;
    rc.replicas = 16;
    rc.seed = 1;
    rc.t_grid = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
    rc.n = 12;
    auto result = run(rc, k, init);

    double worst_e = 0.0, worst_p = 0.0;
    for (const auto& pt : result.points) {
        worst_e = std::max(worst_e, pt.conservation.energy_rel_drift);
        worst_p = std::max(worst_p, pt.conservation.momentum_drift);
    }
    criterion("3", worst_e < 1e-9 && worst_p < 1e-10,
              "conservation at N = 1e5 over t in [0,10]: energy < 1e-9, momentum < 1e-10",
              "energy drift " + fmt(worst_e) + ", momentum drift " + fmt(worst_p));

    const double exact[] = {3.0, 15.0, 105.0}; // m2, m4, m6 at T = 1
    bool stationary = true;
    double worst_z = 0.0;
    for (const auto& pt : result.points)
        for (int i = 0; i < 3; ++i) {
            std::size_t p = std::size_t(2 * i + 2);
            double z = std::abs(pt.moments.m[p] - exact[i]) / pt.moments.stderr_m[p];
            worst_z = std::max(worst_z, z);
            if (z > 3.0) stationary = false;
        }
    criterion("4", stationary, "maxwellian stationarity of m2, m4, m6 within 3 sigma, R = 16",
              "worst |z|-score " + fmt(worst_z));

    // hierarchy envelope (comparison p0, beta = s = 1) must dominate the run
    std::vector<double> orders;
    for (double p = 1.0; p <= 8.0; p += 0.5) orders.push_back(p);
    auto gam = gamma_table(k, orders, 2048);
    ParamOptions opt;
    opt.p0_rule = P0Rule::Minimal;
    auto par = build_params(k, gam, init.m0, init.moment(3, 2.0), opt);
    MomentVector m_init;
    m_init.s = m_init.beta = 1.0;
    m_init.n = rc.n;
    m_init.m.resize(std::size_t(rc.n) + 2);
    for (int p = 0; p <= rc.n + 1; ++p) m_init.m[std::size_t(p)] = init.moment(3, double(p));
    auto env = integrate_hierarchy(par, m_init, rc.n, rc.t_grid);
    bool dominates = true;
    double worst_slack = 1.0;
    for (std::size_t ti = 0; ti < result.points.size(); ++ti)
        for (int p = 1; p <= 12; ++p) {
            double M = env.M[ti][std::size_t(p)];
            double m = result.points[ti].moments.m[std::size_t(p)];
            double sig = result.points[ti].moments.stderr_m[std::size_t(p)];
            double slack = (M - (m - 3.0 * sig)) / M;
            worst_slack = std::min(worst_slack, slack);
            if (slack < 0.0) dominates = false;
        }
    criterion("9a", dominates,
              "hierarchy envelope dominates empirical moments p <= 12 (maxwellian run)",
              "worst relative slack " + fmt(worst_slack));

    // propagation pipeline: s = 2, gaussian-dominated data, E_s(t, a) <= 4 m0
    auto cfg = Config::parse_text("seed = 1\n"
                                  "[initial]\nkind = maxwellian\nT = 0.5\n"
                                  "[run]\nparticles = 20000\nreplicas = 8\n"
                                  "t_grid = 0, 1, 2, 5, 10\nn = 8\ns = 2\n"
                                  "[bounds]\ngamma_max = 40\nbudget = 2048\na0 = 0.25\n");
    auto rep = run_experiment(cfg, "propagation", scratch_dir("propagation"));
    const Assertion* pos = find_assertion(rep, "propagation-weight-positive");
    const Assertion* direct = find_assertion(rep, "exp-moment-bound-direct");
    const Assertion* series = find_assertion(rep, "exp-moment-bound-series");
    bool ok = pos && pos->pass && direct && direct->pass && series && series->pass;
    criterion("8", ok, "propagation: a > 0 and E_s(t, a) <= 4 m0 within 3 sigma on [0,10]",
              (pos ? pos->note : std::string("missing")) + "; " +
                  (direct ? "direct slack " + fmt(direct->slack) : "missing") + "; " +
                  (series ? "series slack " + fmt(series->slack) : "missing"));
}

void group_maxwell_molecules() {
    AngularKernel k(3, 0.0, AngularSpec::constant());
    InitialDataSpec init;
    init.kind = InitialDataSpec::Kind::BiMaxwellian; // isotropic two-temperature mix
    init.T1 = 2.0;
    init.T2 = 0.5;
    init.separation = 0.0;
    RunConfig rc;
    rc.n_particles = 25000;
    rc.replicas = 16;
    rc.seed = 1;
    rc.t_grid = {0.0, 1.0, 2.0, 4.0, 7.0, 10.0};
    rc.n = 6;
    rc.dt_factor = 0.01;
    auto result = run(rc, k, init);

    // closed-form fourth-moment relaxation for isotropic maxwell molecules:
    // dm4/dt = -(m0/3) m4 + (5/9) m2^2, m2 constant
    double m0 = init.m0;
    double m2 = init.moment(3, 2.0);
    double m4_0 = init.moment(3, 4.0);
    double eq = (5.0 / 3.0) * m2 * m2 / m0;
    bool ok = true;
    double worst_z = 0.0;
    for (const auto& pt : result.points) {
        double pred = eq + (m4_0 - eq) * std::exp(-m0 * pt.time / 3.0);
        double z = std::abs(pt.moments.m[4] - pred) / pt.moments.stderr_m[4];
        worst_z = std::max(worst_z, z);
        if (z > 3.0) ok = false;
    }
    criterion("5", ok, "maxwell molecules: m4(t) matches the linear ODE oracle within 3 sigma",
              "worst |z|-score " + fmt(worst_z) + ", equilibrium m4 = " + fmt(eq));
}

void group_heavy_tail() {
    std::string base_cfg = "seed = 1\n"
                           "[initial]\nkind = heavy-tail\ndelta = 0.5\n"
                           "[run]\n"
                           "t_grid = 0, 0.001, 0.00316, 0.01, 0.0316, 0.1, 0.316, 1, 2, 5, 10\n"
                           "lower_s = 0.5, 1\n"
                           "[bounds]\nbudget = 4096\nn = 12\ncreation_order = 4\n";
    auto cfg = Config::parse_text(base_cfg + "[run]\nparticles = 20000\nreplicas = 8\nn = 20\n");
    auto rep = run_experiment(cfg, "creation", scratch_dir("creation"));

    forward_assertion(rep, "moment-creation-rate-p=4", "6",
                      "polynomial creation: m4(t) t^4 <= C_{s,4} within 3 sigma on (0, 1]");

    auto cfg_half = Config::parse_text(base_cfg +
                                       "[run]\nparticles = 8000\nreplicas = 4\nn = 20\n"
                                       "dt_factor = 0.05\n");
    auto rep_half = run_experiment(cfg_half, "creation", scratch_dir("creation_half"));
    forward_assertion(rep_half, "moment-creation-rate-p=4", "6b",
                      "creation bound invariant under dt halving");

    forward_assertion(rep, "exp-moment-bound-direct", "7",
                      "E^n(t, a min{t,1}) <= C on (0, T], direct estimator, n = 20");
    forward_assertion(rep, "exp-moment-bound-series", "7b",
                      "E^n(t, a min{t,1}) <= C on (0, T], truncated series estimator, n = 20");
    forward_assertion(rep, "envelope-dominates-moments", "9b",
                      "hierarchy envelope dominates empirical moments p <= 12 (heavy-tail run)");
    forward_assertion(rep, "lower-bound-c_s-s=0.5", "10",
                      "fitted lower-bound constants c_s, C_{f0,s} > 1e-3 at s = 0.5");
    forward_assertion(rep, "lower-bound-c_s-s=1", "10b",
                      "fitted lower-bound constants c_s, C_{f0,s} > 1e-3 at s = 1");
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr,
                     "usage: acceptance "
                     "<povzner|inequalities|maxwellian|maxwell_molecules|heavy_tail>\n");
        return 2;
    }
    std::string group = argv[1];
    try {
        if (group == "povzner") group_povzner();
        else if (group == "inequalities") group_inequalities();
        else if (group == "maxwellian") group_maxwellian();
        else if (group == "maxwell_molecules") group_maxwell_molecules();
        else if (group == "heavy_tail") group_heavy_tail();
        else {
            std::fprintf(stderr, "unknown group '%s'\n", group.c_str());
            return 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance group '%s' threw: %s\n", group.c_str(), e.what());
        return 1;
    }
    return g_failures == 0 ? 0 : 1;
}
