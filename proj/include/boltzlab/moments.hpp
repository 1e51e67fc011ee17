#pragma once

#include <utility>
#include <vector>

namespace boltzlab {

// Moments m_{sp} (and the beta-shifted m_{sp+beta}) of one distribution at
// one time, for p = 0..n+1.
struct MomentVector {
    double s = 1.0;
    double beta = 1.0;
    int n = 0;
    double time = 0.0;
    std::vector<double> m;        // m_{sp}, size n+2
    std::vector<double> m_shift;  // m_{sp+beta}, size n+2; empty when beta == s (grid-aligned)
    std::vector<double> stderr_m; // optional per-order standard errors
    std::vector<double> stderr_shift;

    // m_{sp+beta}. Exact grid value when beta == s; otherwise the directly
    // estimated shifted moment (never interpolated).
    double shifted(int p) const;

    bool nonnegative() const;
    // Log-convexity along the order grid; a violation flags estimator noise
    // rather than being an error.
    bool log_convex(double rel_tol = 1e-9) const;
};

struct ExpMomentSeries {
    double z = 0.0;
    double E_n = 0.0; // truncated exp moment sum
    double I_n = 0.0; // beta-shifted companion sum
    int n = 0;
    int p0 = 0;
};

// S_{s,p} = sum_{k=1}^{k_p} C(p,k) (m_{sk+b} m_{s(p-k)} + m_{sk} m_{s(p-k)+b}),
// k_p = floor((p+1)/2).
double s_term(const MomentVector& mv, int p);

// Truncated series E^n = sum m_{sp} z^p/p! and I^n = sum m_{sp+b} z^p/p!,
// compensated summation. Throws std::overflow_error on non-finite sums.
ExpMomentSeries exp_partial_sums(const MomentVector& mv, double z, int n);

struct ConvolutionReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0; // rhs - lhs
    bool pass = true;
};

// The discrete-convolution inequality: sum_{p=p0}^n z^p/p! S_{s,p} <= 2 E^n I^n.
ConvolutionReport check_convolution(const MomentVector& mv, double z, int p0, int n,
                                    double rel_tol = 1e-12);

// Double-sided binomial-sum inequality with generalized binomial coefficients;
// returns (lower holds, upper holds).
std::pair<bool, bool> check_binomial_bounds(double x, double y, double p);

// Explicit Hoelder floor m_0^{-b/(sp)} m_{sp}^{1+b/(sp)} <= m_{sp+b}.
double holder_interpolation_floor(const MomentVector& mv, int p);

} // namespace boltzlab
