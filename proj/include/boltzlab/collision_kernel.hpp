#pragma once

#include <span>
#include <string>
#include <vector>

#include "boltzlab/rng.hpp"

namespace boltzlab {

enum class AngularProfile { Constant, Power, Tabulated };

// Unnormalized description of the angular part b(cos theta).
struct AngularSpec {
    AngularProfile profile = AngularProfile::Constant;
    double nu = 0.5;                       // power family b(z) = (1-z)^{-nu}
    std::vector<double> table_z, table_b;  // tabulated profile, ascending z in [-1,1]
    double q_override = 0.0;               // declared L^q exponent; 0 = derive

    static AngularSpec constant() { return {}; }
    static AngularSpec power(double nu);
    static AngularSpec tabulated(std::vector<double> z, std::vector<double> b);
};

// Collision kernel |v-v*|^beta b(cos theta), with b rescaled so that
// the angular mass over the sphere equals one.
class AngularKernel {
public:
    AngularKernel(int d, double beta, AngularSpec spec);

    int dimension() const { return d_; }
    double beta() const { return beta_; }
    double norm_constant() const { return norm_; }
    double b_sup() const { return b_sup_; }  // +inf for the unbounded family
    double q_integrability() const { return q_; }
    const AngularSpec& spec() const { return spec_; }

    // Normalized profile value b(z).
    double b(double z) const;

    // Nodes/weights for integrals of the form
    //   integral b(z) (1-z^2)^{(d-3)/2} g(z) dz  ~=  sum w_i g(z_i),
    // with profile-aware endpoint handling. Sum of weights = 1/|S^{d-2}|.
    // `n` is a node-count floor; the returned set may be larger.
    struct ZQuad {
        std::vector<double> z;
        std::vector<double> w;
    };
    const ZQuad& polar_quadrature(int n = 256) const;

    // cos(theta) of a scattering direction relative to the relative-velocity
    // axis, distributed with density proportional to b(z)(1-z^2)^{(d-3)/2}.
    double sample_cos_theta(StreamRng& rng) const;

    std::string describe() const;

private:
    void build_quadrature(int n) const;
    void build_sampling_cdf();

    int d_;
    double beta_;
    AngularSpec spec_;
    double norm_ = 1.0;   // scale applied to the raw profile
    double b_sup_ = 0.0;
    double q_ = 1.0;
    mutable ZQuad quad_;
    mutable int quad_n_ = 0;
    // tabulated-CDF inversion for profiles without a closed-form inverse
    std::vector<double> cdf_z_, cdf_u_;
    bool closed_form_sampling_ = false;
};

struct CollisionOutcome {
    std::vector<double> v_prime;
    std::vector<double> v_star_prime;
};

// Elastic post-collision map. Conserves momentum exactly up to rounding and
// kinetic energy to relative 1e-12.
CollisionOutcome post_collide(std::span<const double> v, std::span<const double> v_star,
                              std::span<const double> sigma);

// Allocation-free variant for the particle loop; d components each.
void post_collide_inplace(double* v, double* v_star, const double* sigma, int d);

// Scattering direction around u_hat with the kernel's angular law.
std::vector<double> sample_sigma(const AngularKernel& k, std::span<const double> u_hat,
                                 StreamRng& rng);
void sample_sigma_inplace(const AngularKernel& k, const double* u_hat, int d, StreamRng& rng,
                          double* sigma_out);

// Total pair rate |v-v*|^beta (angular integral is 1 by normalization).
double eval_rate(const AngularKernel& k, std::span<const double> v,
                 std::span<const double> v_star);

} // namespace boltzlab
