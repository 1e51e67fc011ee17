#pragma once

#include <span>
#include <string>
#include <vector>

#include "boltzlab/collision_kernel.hpp"
#include "boltzlab/numerics.hpp"
#include "boltzlab/rng.hpp"

namespace boltzlab {

// Computed angular-averaging constants gamma_p, with gamma_1 = 1 and
// gamma_p strictly decreasing in p.
class GammaTable {
public:
    GammaTable() = default;
    GammaTable(std::vector<double> orders, std::vector<double> gamma,
               std::vector<double> slack, std::string method, std::string kernel_id,
               double tolerance);

    const std::vector<double>& orders() const { return orders_; }
    const std::vector<double>& gamma() const { return gamma_; }
    const std::vector<double>& slack() const { return slack_; }
    const std::string& method() const { return method_; }
    const std::string& kernel_id() const { return kernel_id_; }
    double tolerance() const { return tolerance_; }

    // gamma at arbitrary order in [min order, max order]; exact on grid points,
    // monotone piecewise-cubic in between (never above the bracketing values).
    double at(double p) const;
    double max_order() const { return orders_.back(); }

private:
    std::vector<double> orders_, gamma_, slack_;
    std::string method_, kernel_id_;
    double tolerance_ = 1e-6;
    MonotoneCubic interp_;
};

// G_p(v,v*): sphere average of post-collision 2p-moments against b, divided
// by (|v|^2+|v*|^2)^p. Deterministic product quadrature; d in {2,3}.
double angular_average(const AngularKernel& k, std::span<const double> v,
                       std::span<const double> v_star, double p);

// Sharp constants by sup-search over the scale/rotation-reduced two-parameter
// configuration family. `search_budget` caps configuration evaluations.
GammaTable gamma_table(const AngularKernel& k, const std::vector<double>& orders,
                       long search_budget = 8192);

// The symmetric-profile line-integral bound, rescaled to 1 at p = 1. A fast
// relative cross-check for gamma_table, not ground truth.
double gamma_symmetric_formula(const AngularKernel& k, double p);

struct PovznerReport {
    bool pass = true;
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_slack = 0.0;  // min over trials of gamma_p - G_p (tolerance-adjusted)
    double worst_order = 0.0;
    std::string summary() const;
};

// Random-configuration audit of the inequality G_p <= gamma_p (1 + tol).
PovznerReport verify_povzner(const AngularKernel& k, const GammaTable& table, int trials,
                             StreamRng& rng, double tol = 1e-6);

} // namespace boltzlab
