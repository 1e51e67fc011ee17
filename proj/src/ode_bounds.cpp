#include "boltzlab/ode_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "boltzlab/kahan.hpp"

namespace boltzlab {

namespace {

constexpr double kLogCap = 690.0; // exp(690) ~ 5e299, the envelope value cap

double capped_exp(double x) { return std::exp(std::min(x, kLogCap)); }

double log_interp_bound(const HierarchyParams& par, double order_sp) {
    // m_{sp} <= m0^{1 - sp/2} m2^{sp/2} for sp <= 2 (Hoelder between mass and energy)
    double w = 0.5 * order_sp;
    return (1.0 - w) * std::log(par.m0) + w * std::log(par.m2);
}

// y(t) = m(t)^{-g} along the Bernoulli solution; y0 = 0 encodes m(0+) = +inf.
double bernoulli_y(double y0, double g, double K, double Cp, double t) {
    if (Cp == 0.0) return y0 + g * K * t;
    double decay = std::exp(-g * Cp * t);
    return (K / Cp) * (-std::expm1(-g * Cp * t)) + y0 * decay;
}

double fit_cbar(const ParticleEnsemble& ens, double beta, double m0, double m2) {
    const int grid = 64;
    const double vmax = 10.0 * std::sqrt(m2 / m0);
    double cbar = std::numeric_limits<double>::infinity();
    for (int gi = 0; gi <= grid; ++gi) {
        double r = vmax * double(gi) / double(grid);
        KahanSum conv;
        for (std::size_t i = 0; i < ens.size(); ++i) {
            const double* p = ens.particle(i);
            double u2 = (r - p[0]) * (r - p[0]);
            for (int j = 1; j < ens.d; ++j) u2 += p[j] * p[j];
            conv += std::pow(u2, 0.5 * beta);
        }
        double val = ens.weight * conv.value();
        cbar = std::min(cbar, val / (1.0 + std::pow(r, beta)));
    }
    return cbar;
}

} // namespace

int choose_p0(const GammaTable& gamma, double s, double beta, Branch branch, P0Rule rule,
              bool propagation, double cbar_beta) {
    if (!(s > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("choose_p0: s and beta must be positive");
    int p0 = int(std::floor(2.0 / s)) + 1;
    while (double(p0) * s <= 2.0) ++p0;
    double Cb;
    if (branch == Branch::Fitted) {
        if (!(cbar_beta > 0.0))
            throw std::invalid_argument("choose_p0: fitted branch needs a positive Cbar_beta");
        Cb = cbar_beta;
    } else {
        Cb = std::min(1.0, std::pow(2.0, 1.0 - beta));
    }
    if (rule == P0Rule::Minimal) {
        if (s * p0 / 2.0 > gamma.max_order())
            throw std::runtime_error("choose_p0: table exhausted before the minimal order");
        return p0;
    }
    // Primitive threshold 16 gamma m0 < factor * K1 with K1 = 2 (1-gamma) Cb m0;
    // the mass cancels from both sides.
    const double factor = propagation ? 0.5 : 0.25;
    // The 1e-3 margin keeps the choice deterministic when the computed gamma
    // lands on the threshold boundary (constant b hits it exactly).
    for (; s * p0 / 2.0 <= gamma.max_order(); ++p0) {
        double g = gamma.at(s * p0 / 2.0);
        if (16.0 * g < factor * 2.0 * (1.0 - g) * Cb * (1.0 - 1e-3)) return p0;
    }
    throw std::runtime_error(
        "choose_p0: table exhausted without reaching the threshold; extend the gamma grid");
}

void set_CS(HierarchyParams& par, double C_S) {
    if (!(C_S > 0.0)) throw std::invalid_argument("set_CS: C_S must be positive");
    par.C_S = C_S;
    // gamma at order s/2; below the tabulated range fall back on the sharp
    // pointwise bound gamma_p <= 2^{1-p} (valid for p <= 1, where the split
    // energies e, 1-e give e^p + (1-e)^p <= 2^{1-p}).
    double half = 0.5 * par.s;
    double g_half = half >= par.gamma->orders().front()
                        ? par.gamma->at(half)
                        : std::pow(2.0, 1.0 - half);
    par.C_prime = 2.0 * g_half * C_S * par.m_beta;
    par.K_holder = par.K1 * std::pow(par.m0, -par.beta / (par.s * double(par.p0)));
}

HierarchyParams build_params(const AngularKernel& k, const GammaTable& gamma, double m0,
                             double m2, const ParamOptions& opt,
                             const ParticleEnsemble* ensemble0) {
    if (!(m0 > 0.0) || !(m2 > 0.0))
        throw std::invalid_argument("build_params: mass and energy must be positive");
    HierarchyParams par;
    par.beta = k.beta();
    par.s = opt.s > 0.0 ? opt.s : par.beta;
    par.branch = opt.branch;
    par.gamma = &gamma;
    par.m0 = m0;
    par.m2 = m2;
    par.C_beta = std::min(1.0, std::pow(2.0, 1.0 - par.beta));
    par.m_beta = std::pow(m0, 1.0 - 0.5 * par.beta) * std::pow(m2, 0.5 * par.beta);
    if (par.branch == Branch::Fitted) {
        if (par.beta > 1.0 + 1e-12)
            throw std::invalid_argument("build_params: fitted branch requires beta <= 1");
        if (!ensemble0)
            throw std::invalid_argument("build_params: fitted branch needs an initial ensemble");
        par.Cbar_beta = fit_cbar(*ensemble0, par.beta, m0, m2);
        if (!(par.Cbar_beta > 0.0))
            throw std::runtime_error("build_params: fitted Cbar_beta is not positive");
    }
    par.p0 = choose_p0(gamma, par.s, par.beta, par.branch, opt.p0_rule, opt.propagation,
                       par.Cbar_beta);
    double g0 = gamma.at(par.s * double(par.p0) / 2.0);
    double Cb = par.branch == Branch::Fitted ? par.Cbar_beta : par.C_beta;
    par.K1 = 2.0 * (1.0 - g0) * Cb * m0;
    par.K2 = par.branch == Branch::Fitted ? 0.0 : 2.0 * par.m_beta;
    par.K3 = 4.0 * par.K2 * m0;
    par.a0 = opt.a0;
    par.C0 = opt.C0;
    set_CS(par, opt.C_S);
    return par;
}

double fit_CS(const std::vector<MomentVector>& traj, int p_min, int p_max) {
    double best = 0.0;
    for (const auto& mv : traj) {
        double mb = mv.shifted(0);
        for (int p = p_min; p <= std::min(p_max, mv.n); ++p) {
            double denom = mb * mv.m[std::size_t(p)];
            if (!(denom > 0.0) || !std::isfinite(denom)) continue;
            double S = s_term(mv, p);
            if (std::isfinite(S)) best = std::max(best, S / denom);
        }
    }
    return best;
}

double scalar_log_value(const HierarchyParams& par, double p, double log_m_init, double t) {
    double sp = par.s * p;
    // Low orders never use the initial value: moments of order below 2 may
    // grow in time, while the mass/energy interpolation bound is uniform.
    if (sp <= 2.0 + 1e-12) return log_interp_bound(par, sp);
    if (!(par.K1 > 0.0)) throw std::invalid_argument("scalar_log_value: K1 must be positive");
    double g = par.beta / sp;
    double K = par.K1 * std::pow(par.m0, -g);
    double y0 = std::isinf(log_m_init) ? 0.0 : std::exp(-g * log_m_init);
    double y = bernoulli_y(y0, g, K, par.C_prime, t);
    if (!(y > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log(y) / g;
}

ScalarEnvelope scalar_upper_solution(double p, const HierarchyParams& par, double m_init,
                                     const std::vector<double>& t_grid) {
    const bool creation = std::isinf(m_init);
    if (creation && !(par.s * p > 2.0))
        throw std::invalid_argument("scalar_upper_solution: creation mode needs s*p > 2");
    if (!creation && !(m_init > 0.0))
        throw std::invalid_argument("scalar_upper_solution: m_init must be positive");
    ScalarEnvelope env;
    env.p = p;
    env.t = t_grid;
    double log_init = creation ? std::numeric_limits<double>::infinity() : std::log(m_init);
    for (double t : t_grid) {
        double lm = scalar_log_value(par, p, log_init, t);
        env.log_m.push_back(lm);
        env.m.push_back(capped_exp(lm));
    }
    env.log_C_sp = -std::numeric_limits<double>::infinity();
    if (creation) {
        // sup over (0,1] of m(t) t^{sp/beta}; with y = m^{-g} this is
        // sup exp((log t - log y)/g), plus the t -> 0 limit (g K)^{-1/g}.
        double sp = par.s * p;
        double g = par.beta / sp;
        double K = par.K1 * std::pow(par.m0, -g);
        double best = -std::log(g * K);
        const int pts = 4000;
        for (int i = 0; i <= pts; ++i) {
            double t = std::exp(-12.0 * std::log(10.0) * (1.0 - double(i) / pts));
            double y = bernoulli_y(0.0, g, K, par.C_prime, t);
            if (y > 0.0) best = std::max(best, std::log(t) - std::log(y));
        }
        env.log_C_sp = best / g;
        env.C_sp = capped_exp(env.log_C_sp);
    }
    return env;
}

double hierarchy_derivative(const HierarchyParams& par, const MomentVector& M, int p) {
    double sp = par.s * double(p);
    double g = par.beta / sp;
    double Mp = M.m[std::size_t(p)];
    return 2.0 * par.gamma->at(0.5 * sp) * s_term(M, p) -
           par.K1 * std::pow(par.m0, -g) * std::pow(Mp, 1.0 + g) + par.K2 * Mp;
}

namespace {

struct HierarchyOde {
    const HierarchyParams& par;
    const std::vector<double>& log_init; // log initial data per order, +inf allowed
    int p0, n;

    MomentVector assemble(double t, const std::vector<double>& x) const {
        MomentVector mv;
        mv.s = par.s;
        mv.beta = par.beta;
        mv.n = n;
        mv.time = t;
        mv.m.assign(std::size_t(n) + 2, 0.0);
        for (int q = 0; q < p0; ++q)
            mv.m[std::size_t(q)] = capped_exp(scalar_log_value(par, q, log_init[std::size_t(q)], t));
        for (int q = p0; q <= n; ++q) mv.m[std::size_t(q)] = capped_exp(x[std::size_t(q - p0)]);
        return mv;
    }

    void rhs(double t, const std::vector<double>& x, std::vector<double>& dx) const {
        MomentVector mv = assemble(t, x);
        dx.resize(x.size());
        for (int q = p0; q <= n; ++q)
            dx[std::size_t(q - p0)] =
                hierarchy_derivative(par, mv, q) / mv.m[std::size_t(q)];
    }

    void rk4(double t, double dt, std::vector<double>& x) const {
        std::vector<double> k1, k2, k3, k4, tmp(x.size());
        rhs(t, x, k1);
        for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
        rhs(t + 0.5 * dt, tmp, k2);
        for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
        rhs(t + 0.5 * dt, tmp, k3);
        for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + dt * k3[i];
        rhs(t + dt, tmp, k4);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
};

} // namespace

EnvelopeTrajectory integrate_hierarchy(const HierarchyParams& par, const MomentVector& M_init,
                                       int n, const std::vector<double>& t_grid) {
    if (par.beta != par.s)
        throw std::invalid_argument("integrate_hierarchy: requires beta == s (aligned grid)");
    if (n < par.p0) throw std::invalid_argument("integrate_hierarchy: n must be >= p0");
    if (int(M_init.m.size()) < n + 1)
        throw std::invalid_argument("integrate_hierarchy: initial moment vector too short");
    if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("integrate_hierarchy: bad time grid");

    const int p0 = par.p0;
    std::vector<double> log_init(std::size_t(n) + 1);
    bool creation = false;
    for (int q = 0; q <= n; ++q) {
        double v = M_init.m[std::size_t(q)];
        if (!(v > 0.0) && q > 0)
            throw std::invalid_argument("integrate_hierarchy: nonpositive initial moment");
        log_init[std::size_t(q)] = std::log(v);
        if (q >= p0 && std::isinf(v)) creation = true;
    }

    double t0 = creation ? 1e-6 : t_grid.front();
    if (creation)
        for (double t : t_grid)
            if (t > 0.0) { t0 = std::min(t0, t); break; }

    HierarchyOde ode{par, log_init, p0, n};
    std::vector<double> x(std::size_t(n - p0) + 1);
    for (int q = p0; q <= n; ++q)
        x[std::size_t(q - p0)] = creation
            ? scalar_log_value(par, q, std::numeric_limits<double>::infinity(), t0)
            : log_init[std::size_t(q)];

    EnvelopeTrajectory out;
    out.provenance = EnvelopeTrajectory::Provenance::Hierarchy;
    out.p0 = p0;
    out.n = n;
    out.t_grid = t_grid;

    auto record = [&](double t, bool before_start) {
        std::vector<double> row(std::size_t(n) + 1), lrow(std::size_t(n) + 1);
        for (int q = 0; q <= n; ++q) {
            double lm;
            if (q < p0 || before_start)
                lm = scalar_log_value(par, q, log_init[std::size_t(q)], t);
            else
                lm = x[std::size_t(q - p0)];
            lrow[std::size_t(q)] = lm;
            row[std::size_t(q)] = capped_exp(lm);
            if (std::isinf(lm)) row[std::size_t(q)] = lm;
        }
        out.M.push_back(std::move(row));
        out.log_M.push_back(std::move(lrow));
    };

    double t = t0;
    double dt = 1e-8;
    const double tol = 1e-7;
    for (double target : t_grid) {
        if (target <= t0) {
            record(target, true);
            continue;
        }
        while (t < target * (1.0 - 1e-14)) {
            double h = std::min(dt, target - t);
            std::vector<double> full = x, half = x;
            ode.rk4(t, h, full);
            ode.rk4(t, 0.5 * h, half);
            ode.rk4(t + 0.5 * h, 0.5 * h, half);
            double err = 0.0;
            bool finite = true;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (!std::isfinite(full[i]) || !std::isfinite(half[i])) finite = false;
                err = std::max(err, std::abs(full[i] - half[i]));
            }
            if (!finite || err > tol) {
                dt = 0.5 * h;
                if (dt < 1e-13 * std::max(t, 1e-6)) {
                    char buf[96];
                    std::snprintf(buf, sizeof buf,
                                  "integrate_hierarchy: blow-up near t = %.6g", t);
                    throw std::runtime_error(buf);
                }
                continue;
            }
            x = half;
            t += h;
            if (err < 0.25 * tol) dt = std::min(2.0 * h, 0.05 * std::max(t, 1e-5));
            for (double xi : x)
                if (xi > 800.0) {
                    char buf[96];
                    std::snprintf(buf, sizeof buf,
                                  "integrate_hierarchy: blow-up near t = %.6g", t);
                    throw std::runtime_error(buf);
                }
        }
        t = target;
        record(target, false);
    }
    return out;
}

double creation_low_sum(const HierarchyParams& par) {
    KahanSum acc;
    for (int p = 0; p <= par.p0; ++p) {
        double sp = par.s * double(p);
        if (sp <= 2.0 + 1e-12) {
            acc += std::exp(log_interp_bound(par, sp));
        } else {
            auto env = scalar_upper_solution(double(p), par,
                                             std::numeric_limits<double>::infinity(), {1.0});
            acc += env.C_sp;
        }
    }
    return acc.value();
}

double propagation_low_sum(const HierarchyParams& par, const std::vector<double>& m_init) {
    if (int(m_init.size()) < par.p0 + 1)
        throw std::invalid_argument("propagation_low_sum: need initial moments up to p0");
    KahanSum acc;
    for (int p = 0; p <= par.p0; ++p) {
        double sp = par.s * double(p);
        if (sp <= 2.0 + 1e-12) {
            acc += std::exp(log_interp_bound(par, sp));
            continue;
        }
        if (!(m_init[std::size_t(p)] > 0.0) || std::isinf(m_init[std::size_t(p)]))
            throw std::invalid_argument(
                "propagation_low_sum: initial moments must be positive and finite");
        // Bernoulli solutions are monotone toward the fixed point (C'/K)^{sp/beta}.
        double g = par.beta / sp;
        double K = par.K1 * std::pow(par.m0, -g);
        double log_fp = std::log(par.C_prime / K) / g;
        acc += std::max(m_init[std::size_t(p)], capped_exp(log_fp));
    }
    return acc.value();
}

CreationConstants creation_constants(const HierarchyParams& par, double C_p0) {
    if (!(C_p0 > 0.0) || !std::isfinite(C_p0))
        throw std::invalid_argument("creation_constants: C_p0 must be positive and finite");
    CreationConstants out;
    out.a = std::min({1.0, 0.5 * par.K1, par.m0 / (6.0 * C_p0)});
    if (par.branch == Branch::Fitted) {
        out.T = 1.0;
        out.C = (19.0 / 6.0) * par.m0;
    } else {
        out.T = std::min(1.0, par.m0 / (2.0 * par.K3));
        out.C = (19.0 / 6.0) * par.m0 + par.K3 * out.T;
    }
    return out;
}

PropagationConstants propagation_constants(const HierarchyParams& par, double C_sp0) {
    if (!(C_sp0 > 0.0) || !std::isfinite(C_sp0))
        throw std::invalid_argument("propagation_constants: C_sp0 must be positive and finite");
    PropagationConstants out;
    const double e1 = std::exp(1.0); // conservative stand-in for the implicit e^a, a < 1
    double a;
    if (par.branch == Branch::Fitted) {
        a = std::min({1.0, par.a0, 0.5 * par.K1,
                      3.0 * par.m0 /
                          (2.0 * ((1.0 + par.C_prime / par.K1) * C_sp0 + e1))});
    } else {
        a = std::min({1.0, par.a0, par.K1 / (8.0 * par.K2),
                      par.m0 /
                          (2.0 * ((1.0 + par.K2 / par.K1 + par.C_prime / par.K1) * C_sp0 + e1))});
    }
    out.C = 4.0 * par.m0;
    if (!(a > 0.0)) {
        out.a = 0.0;
        out.diagnostic =
            "no positive weight satisfies the constraint set; C_sp0 is too large, "
            "rerun the envelopes on a finer grid";
    } else {
        out.a = a;
    }
    return out;
}

} // namespace boltzlab
