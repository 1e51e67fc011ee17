#include "boltzlab/moments.hpp"

#include <cmath>
#include <stdexcept>

#include "boltzlab/kahan.hpp"
#include "boltzlab/numerics.hpp"

namespace boltzlab {

double MomentVector::shifted(int p) const {
    if (p < 0 || size_t(p) >= m.size())
        throw std::out_of_range("MomentVector::shifted: order out of range");
    if (!m_shift.empty()) return m_shift[size_t(p)];
    if (beta == s) {
        if (size_t(p + 1) >= m.size())
            throw std::out_of_range("MomentVector::shifted: grid-aligned order out of range");
        return m[size_t(p + 1)];
    }
    throw std::logic_error("MomentVector::shifted: shifted moments unavailable (beta != s)");
}

bool MomentVector::nonnegative() const {
    for (double v : m)
        if (!(v >= 0.0)) return false;
    for (double v : m_shift)
        if (!(v >= 0.0)) return false;
    return true;
}

bool MomentVector::log_convex(double rel_tol) const {
    for (size_t p = 1; p + 1 < m.size(); ++p) {
        if (m[p] * m[p] > m[p - 1] * m[p + 1] * (1.0 + rel_tol)) return false;
    }
    return true;
}

double s_term(const MomentVector& mv, int p) {
    if (p < 1) throw std::invalid_argument("s_term: p must be >= 1");
    if (p > mv.n) throw std::invalid_argument("s_term: p exceeds truncation order");
    int kp = (p + 1) / 2;
    KahanSum acc;
    for (int k = 1; k <= kp; ++k) {
        double c = binomial(double(p), k);
        acc += c * (mv.shifted(k) * mv.m[size_t(p - k)] + mv.m[size_t(k)] * mv.shifted(p - k));
    }
    return acc.value();
}

ExpMomentSeries exp_partial_sums(const MomentVector& mv, double z, int n) {
    if (z < 0.0) throw std::invalid_argument("exp_partial_sums: z must be >= 0");
    if (n > mv.n) throw std::invalid_argument("exp_partial_sums: n exceeds truncation order");
    KahanSum E, I;
    double zp = 1.0; // z^p / p!
    for (int p = 0; p <= n; ++p) {
        E += mv.m[size_t(p)] * zp;
        I += mv.shifted(p) * zp;
        zp *= z / double(p + 1);
    }
    ExpMomentSeries out;
    out.z = z;
    out.E_n = E.value();
    out.I_n = I.value();
    out.n = n;
    if (!std::isfinite(out.E_n) || !std::isfinite(out.I_n))
        throw std::overflow_error("exp_partial_sums: non-finite partial sum (z too large)");
    return out;
}

ConvolutionReport check_convolution(const MomentVector& mv, double z, int p0, int n,
                                    double rel_tol) {
    if (p0 < 2.0 / mv.s - 1e-12)
        throw std::invalid_argument("check_convolution: p0 must be >= 2/s");
    if (n < p0 || n > mv.n) throw std::invalid_argument("check_convolution: bad n");
    KahanSum lhs;
    double zp = 1.0;
    for (int p = 1; p <= n; ++p) {
        zp *= z / double(p);
        if (p >= p0) lhs += zp * s_term(mv, p);
    }
    auto series = exp_partial_sums(mv, z, n);
    ConvolutionReport rep;
    rep.lhs = lhs.value();
    rep.rhs = 2.0 * series.E_n * series.I_n;
    rep.slack = rep.rhs - rep.lhs;
    rep.pass = rep.lhs <= rep.rhs * (1.0 + rel_tol) + rel_tol;
    return rep;
}

std::pair<bool, bool> check_binomial_bounds(double x, double y, double p) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("check_binomial_bounds: x, y must be positive");
    if (!(p > 1.0)) throw std::invalid_argument("check_binomial_bounds: p must be > 1");
    int kp = int(std::floor((p + 1.0) / 2.0));
    double mid = std::pow(x + y, p) - std::pow(x, p) - std::pow(y, p);
    KahanSum lower, upper;
    for (int k = 1; k <= kp; ++k) {
        double term = binomial(p, k) *
                      (std::pow(x, k) * std::pow(y, p - k) + std::pow(x, p - k) * std::pow(y, k));
        if (k <= kp - 1) lower += term;
        upper += term;
    }
    const double tol = 1e-10;
    // mid is computed with absolute error ~ eps (x+y)^p, which dominates the
    // difference itself when y << x; budget for it explicitly.
    double scale = std::abs(mid) + std::abs(upper.value()) + 1e-3 * std::pow(x + y, p) + 1.0;
    bool lo = lower.value() <= mid + tol * scale;
    bool hi = mid <= upper.value() + tol * scale;
    return {lo, hi};
}

double holder_interpolation_floor(const MomentVector& mv, int p) {
    if (!(mv.m[0] > 0.0))
        throw std::invalid_argument("holder_interpolation_floor: zero mass");
    if (p < 1 || size_t(p) >= mv.m.size())
        throw std::out_of_range("holder_interpolation_floor: order out of range");
    double expo = mv.beta / (mv.s * double(p));
    return std::pow(mv.m[0], -expo) * std::pow(mv.m[size_t(p)], 1.0 + expo);
}

} // namespace boltzlab
