#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace boltzlab {

// Surface area of the k-dimensional unit sphere S^k embedded in R^{k+1}.
// Gamma-function closed form; valid down to |S^0| = 2.
double sphere_area(int k);

// Gauss-Legendre nodes/weights on [-1,1]. Results are cached per n.
struct Quadrature {
    std::vector<double> x;
    std::vector<double> w;
};
const Quadrature& gauss_legendre(int n);

// Binomial coefficient C(p,k) for real p > 0 and integer 0 <= k, evaluated
// through log-Gamma so orders past p ~ 60 do not overflow.
double binomial(double p, int k);

// Monotone piecewise-cubic (Fritsch-Carlson) interpolant. Used for the
// gamma_p table, where interpolation must never overshoot the data.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double xq) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::vector<double> x_, y_, d_; // nodes, values, endpoint slopes
};

// FNV-1a over a byte string; used for report content hashes.
std::uint64_t fnv1a(const std::string& s);

} // namespace boltzlab
