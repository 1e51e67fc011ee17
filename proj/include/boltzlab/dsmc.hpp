#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boltzlab/collision_kernel.hpp"
#include "boltzlab/moments.hpp"
#include "boltzlab/rng.hpp"

namespace boltzlab {

struct InitialDataSpec {
    enum class Kind { Maxwellian, BiMaxwellian, HeavyTail, PointMixture };

    struct Atom {
        std::vector<double> v;
        double mass = 1.0; // relative; normalized to m0 at sampling time
    };

    Kind kind = Kind::Maxwellian;
    double m0 = 1.0;
    double T = 1.0;            // maxwellian
    std::vector<double> mean;  // maxwellian drift; empty = zero
    double T1 = 1.0, T2 = 1.0, separation = 0.0; // bi-maxwellian, equal-mass halves at -+sep/2 e1
    double delta = 0.5;        // heavy tail: density ~ (1+|v|^2)^{-(d+2+delta)/2}
    std::vector<Atom> atoms;   // point mixture

    // Analytic |v|^q moment (zero-drift kinds); +inf where the moment
    // diverges (heavy tail, q > 2+delta). Throws for drifting kinds.
    double moment(int d, double q) const;
};

// Equal-weight particle surrogate for f(t, .). One independent random
// stream per replica.
struct ParticleEnsemble {
    int d = 3;
    double weight = 0.0; // m0 / N
    double time = 0.0;
    std::uint64_t replica_id = 0;
    StreamRng rng;
    std::vector<double> v; // N x d row-major
    double majorant_speed = 0.0;

    std::size_t size() const { return d > 0 ? v.size() / std::size_t(d) : 0; }
    double* particle(std::size_t i) { return v.data() + i * std::size_t(d); }
    const double* particle(std::size_t i) const { return v.data() + i * std::size_t(d); }

    std::vector<double> total_momentum() const;
    double total_energy() const;
};

ParticleEnsemble sample_initial(const InitialDataSpec& spec, int d, std::size_t N,
                                std::uint64_t master_seed, std::uint64_t replica_id);

struct StepStats {
    std::size_t pairs = 0;
    std::size_t collisions = 0;
    int majorant_regrows = 0;
};

// One Nanbu-Babovsky step: disjoint random pairing, acceptance against
// (N-1) w dt |u|^beta. Returns false (leaving velocities untouched) when a
// pair exceeds the running majorant, after growing it; the caller re-tries
// with a dt consistent with the new majorant.
bool try_step(ParticleEnsemble& ens, const AngularKernel& k, double dt, StepStats& stats);

// Convenience wrapper: grows the majorant and shrinks dt until a step fits.
StepStats step(ParticleEnsemble& ens, const AngularKernel& k, double dt,
               double dt_factor = 0.1);

// dt such that the expected collisions per particle per step stay below
// dt_factor under the majorant rate.
double majorant_dt(const ParticleEnsemble& ens, const AngularKernel& k, double dt_factor);

// Direct exponential-moment estimate weight * sum exp(z |v|^s) for one
// ensemble. Throws std::overflow_error naming |v| if a summand overflows.
double empirical_exp_moment(const ParticleEnsemble& ens, double s, double z);

struct ExpEstimate {
    double z = 0.0;
    double direct = 0.0;        // across-replica mean of the sample estimator
    double direct_stderr = 0.0;
    double series = 0.0;        // truncated-series estimate from empirical moments
    double series_stderr = 0.0;
};

struct ConservationMetrics {
    double energy_rel_drift = 0.0;   // max over replicas
    double momentum_drift = 0.0;     // max over replicas/components, thermal-speed normalized
};

struct TrajectoryPoint {
    double time = 0.0;
    MomentVector moments; // across-replica mean; stderr fields filled
    ExpEstimate exp_moment;
    ConservationMetrics conservation;
};

// Raw convolution values (mean over the ensemble of |r e1 - v*|^s) per
// recorded time and grid radius; the Appendix-style lower-bound data.
struct LowerBoundCurve {
    double s = 0.0;
    std::vector<double> radii;
    std::vector<std::vector<double>> values; // [time][radius]
};

struct LowerBoundReport {
    double s = 0.0;
    std::vector<double> v_grid;
    std::vector<double> ratios;   // min over times, per radius, of value/(1+r^s)
    double fitted_c = 0.0;        // min over (t, r) of value(t,r)/value(0,r)
    double fitted_C_f0_s = 0.0;   // min over (t, r) of value(t,r)/(1+r^s)
    bool positive() const { return fitted_c > 0.0 && fitted_C_f0_s > 0.0; }
};

enum class ZSchedule { None, Creation, Propagation };

struct RunConfig {
    std::size_t n_particles = 100000;
    int replicas = 16;
    std::uint64_t seed = 1;
    int dimension = 3;
    std::vector<double> t_grid;  // ascending record times; 0 recommended first
    int n = 12;                  // moment truncation order
    double s = 1.0;              // moment scale exponent
    ZSchedule z_schedule = ZSchedule::None;
    double a = 0.0;              // z = a*min(t,1) (creation) or z = a (propagation)
    double dt_factor = 0.1;
    std::vector<double> lower_s;     // lower-bound check exponents (empty = skip)
    std::vector<double> lower_radii; // empty = automatic thermal-scaled grid
    int lower_directions = 1;        // >1 averages over axes for anisotropic data
    std::string snapshot_dir;        // empty = no velocity snapshots
};

struct RunResult {
    std::vector<TrajectoryPoint> points;
    std::vector<LowerBoundCurve> lower;
    std::vector<std::vector<MomentVector>> replica_moments; // [time][replica]
    std::size_t total_collisions = 0;
    RunConfig config;
};

RunResult run(const RunConfig& cfg, const AngularKernel& k, const InitialDataSpec& init);

// Fitted Appendix-A.2 constants from a finished run.
LowerBoundReport lower_convolution_check(const RunResult& result, double s);

} // namespace boltzlab
