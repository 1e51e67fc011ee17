#pragma once

#include <vector>

#include "boltzlab/collision_kernel.hpp"
#include "boltzlab/dsmc.hpp"
#include "boltzlab/moments.hpp"
#include "boltzlab/povzner.hpp"

namespace boltzlab {

// Branch of the moment-inequality constants: Elementary keeps the positive
// K2 term and works for beta in (0,2]; Fitted removes it (K2 = 0) using an
// empirical convolution lower bound, valid for beta in (0,1].
enum class Branch { Elementary, Fitted };

// Threshold rule for the cutoff order p0: Threshold enforces the proof's
// smallness condition on gamma_{s p0/2} (creation: 16 gamma m0 < K1/4;
// propagation: 16 gamma m0 < K1/2); Minimal only requires p0 > 2/s, which
// is all the truncated comparison system itself needs.
enum class P0Rule { Threshold, Minimal };

struct HierarchyParams {
    double s = 1.0;
    double beta = 1.0;
    int p0 = 0;
    Branch branch = Branch::Elementary;
    double K1 = 0.0, K2 = 0.0, K3 = 0.0;
    double C_beta = 1.0;     // min{1, 2^{1-beta}}
    double Cbar_beta = 0.0;  // fitted branch only
    const GammaTable* gamma = nullptr;
    double m0 = 0.0, m2 = 0.0, m_beta = 0.0;
    double a = 0.0;          // chosen exponential weight (filled by the constant builders)
    double a0 = 0.0, C0 = 0.0; // propagation hypothesis constants
    double T = 1.0;
    double C_p0 = 0.0;       // low-moment sum bound
    double C_S = 1.0;        // fitted constant in S_{s,p} <= C_S m_beta m_sp
    double C_prime = 0.0;    // scalar ODE growth coefficient 2 gamma_{s/2} C_S m_beta
    double K_holder = 0.0;   // scalar ODE damping at p = p0: K1 m0^{-beta/(s p0)}
};

struct ParamOptions {
    double s = 0.0;          // 0 = inherit the kernel's beta (creation setting)
    Branch branch = Branch::Elementary;
    P0Rule p0_rule = P0Rule::Threshold;
    bool propagation = false; // selects the p0 threshold variant
    double a0 = 1.0, C0 = 1.0;
    double C_S = 1.0;        // initial guess; refreshed a posteriori via set_CS
};

struct EnvelopeTrajectory {
    enum class Provenance { Scalar, Hierarchy };
    std::vector<double> t_grid;
    std::vector<std::vector<double>> M;      // [time][p], p = 0..n; capped at 1e300
    std::vector<std::vector<double>> log_M;  // same data, overflow-safe
    Provenance provenance = Provenance::Hierarchy;
    int p0 = 0;
    int n = 0;
};

// Smallest integer p0 > 2/s passing the branch threshold (P0Rule::Threshold)
// or just the domain constraint (P0Rule::Minimal). cbar_beta is the fitted
// convolution constant, ignored on the elementary branch. Throws
// "table exhausted" when no tabulated order satisfies the threshold.
int choose_p0(const GammaTable& gamma, double s, double beta, Branch branch, P0Rule rule,
              bool propagation, double cbar_beta = 0.0);

// Fills every constant of the moment hierarchy from the kernel, the gamma
// table, and conserved mass/energy. The fitted branch needs an initial
// ensemble to fit Cbar_beta on a radial grid, and requires beta <= 1.
HierarchyParams build_params(const AngularKernel& k, const GammaTable& gamma, double m0,
                             double m2, const ParamOptions& opt,
                             const ParticleEnsemble* ensemble0 = nullptr);

// Refreshes the a-posteriori constant C_S (and the dependent C_prime).
void set_CS(HierarchyParams& par, double C_S);

// Largest realized S_{s,p}/(m_beta * m_sp) over the given moment vectors
// and orders; the honest value to feed back through set_CS.
double fit_CS(const std::vector<MomentVector>& traj, int p_min, int p_max);

// log of the closed-form scalar upper-solution value at time t for order p:
// interpolation bound for sp <= 2, Bernoulli solution of
// dm/dt = C' m - K1 m0^{-g} m^{1+g}, g = beta/(sp), otherwise.
// log_m_init = +inf selects the maximal (creation) solution.
double scalar_log_value(const HierarchyParams& par, double p, double log_m_init, double t);

struct ScalarEnvelope {
    double p = 0.0;
    std::vector<double> t, m, log_m;
    double C_sp = 0.0;      // sup over (0,1] of m(t) min{1, t^{sp/beta}}; creation only
    double log_C_sp = 0.0;
};

// Closed-form Bernoulli envelope on a time grid; m_init = +inf gives the
// creation solution m(t)^{-g} = (K/C')(1 - exp(-C' g t)).
ScalarEnvelope scalar_upper_solution(double p, const HierarchyParams& par, double m_init,
                                     const std::vector<double>& t_grid);

// dM_p/dt of the truncated comparison system evaluated at the moment vector
// M (orders aligned, beta = s); exposed for the integrator and for the
// differential-mechanism checks.
double hierarchy_derivative(const HierarchyParams& par, const MomentVector& M, int p);

// Integrates dM_p/dt = 2 gamma_{sp/2} S_{s,p} - K1 m0^{-b/(sp)} M_p^{1+b/(sp)}
//                      + K2 M_p  for p0 <= p <= n,
// with the scalar closed forms feeding the orders below p0. Infinite entries
// of M_init (creation data) start the block from the closed-form envelope at
// t = 1e-6. Requires beta = s. Reports blow-up time on divergence.
EnvelopeTrajectory integrate_hierarchy(const HierarchyParams& par, const MomentVector& M_init,
                                       int n, const std::vector<double>& t_grid);

// sup over t in (0, T] of sum_{p=0}^{p0} M_p(t) t^p along the creation
// scalar envelopes (the low-moment bound entering the creation constants).
double creation_low_sum(const HierarchyParams& par);

// sum_{p=0}^{p0} sup_t m_sp(t) along propagation scalar envelopes through
// the given initial moments m_init[p] = m_sp(0), p = 0..p0 (analytic values
// of the initial data, not estimates; the theorem-scale p0 exceeds any
// simulated truncation order).
double propagation_low_sum(const HierarchyParams& par, const std::vector<double>& m_init);

struct CreationConstants {
    double a = 0.0, T = 0.0, C = 0.0;
};

// a = min{1, K1/2, m0/(6 C_p0)}; T and C per branch (fitted: T = 1,
// C = (19/6) m0; elementary: T = min{1, m0/(2 K3)}, C = (19/6) m0 + K3 T).
CreationConstants creation_constants(const HierarchyParams& par, double C_p0);

struct PropagationConstants {
    double a = 0.0, C = 0.0; // a = 0 signals an empty constraint set
    std::string diagnostic;
};

// Largest weight satisfying the branch's constraint list with the implicit
// e^a conservatively replaced by e; C = 4 m0.
PropagationConstants propagation_constants(const HierarchyParams& par, double C_sp0);

} // namespace boltzlab
