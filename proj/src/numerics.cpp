#include "boltzlab/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace boltzlab {

double sphere_area(int k) {
    if (k < 0) throw std::invalid_argument("sphere_area: negative dimension");
    double kk = k;
    return 2.0 * std::pow(std::numbers::pi, (kk + 1.0) / 2.0) / std::tgamma((kk + 1.0) / 2.0);
}

namespace {

Quadrature compute_gauss_legendre(int n) {
    Quadrature q;
    q.x.resize(n);
    q.w.resize(n);
    // Newton iteration from the Chebyshev-like initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.x[i] = -x;
        q.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        q.w[i] = w;
        q.w[n - 1 - i] = w;
    }
    return q;
}

} // namespace

const Quadrature& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
    static std::map<int, Quadrature> cache;
    static std::mutex mtx;
    std::lock_guard lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

double binomial(double p, int k) {
    if (k < 0) throw std::invalid_argument("binomial: k < 0");
    if (k == 0) return 1.0;
    // Requires p - k + 1 > 0, which holds for k <= (p+1)/2 and p > 1.
    return std::exp(std::lgamma(p + 1.0) - std::lgamma(double(k) + 1.0) - std::lgamma(p - k + 1.0));
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: bad data");
    std::vector<double> h(n - 1), delta(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        if (h[i] <= 0) throw std::invalid_argument("MonotoneCubic: x not increasing");
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            double w1 = 2.0 * h[i] + h[i - 1];
            double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // Fritsch-Carlson endpoint limiting.
    for (size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            d_[i] = d_[i + 1] = 0.0;
        } else {
            double a = d_[i] / delta[i], b = d_[i + 1] / delta[i];
            double s = a * a + b * b;
            if (s > 9.0) {
                double t = 3.0 / std::sqrt(s);
                d_[i] = t * a * delta[i];
                d_[i + 1] = t * b * delta[i];
            }
        }
    }
}

double MonotoneCubic::operator()(double xq) const {
    size_t n = x_.size();
    if (xq <= x_.front()) return y_.front();
    if (xq >= x_.back()) return y_.back();
    size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        (x_[mid] <= xq ? lo : hi) = mid;
    }
    double h = x_[lo + 1] - x_[lo];
    double t = (xq - x_[lo]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[lo] + h10 * h * d_[lo] + h01 * y_[lo + 1] + h11 * h * d_[lo + 1];
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace boltzlab
