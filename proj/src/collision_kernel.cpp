#include "boltzlab/collision_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "boltzlab/numerics.hpp"

namespace boltzlab {

namespace {

double dot(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
}

} // namespace

AngularSpec AngularSpec::power(double nu) {
    AngularSpec s;
    s.profile = AngularProfile::Power;
    s.nu = nu;
    return s;
}

AngularSpec AngularSpec::tabulated(std::vector<double> z, std::vector<double> b) {
    AngularSpec s;
    s.profile = AngularProfile::Tabulated;
    s.table_z = std::move(z);
    s.table_b = std::move(b);
    return s;
}

AngularKernel::AngularKernel(int d, double beta, AngularSpec spec)
    : d_(d), beta_(beta), spec_(std::move(spec)) {
    if (d_ < 2) throw std::invalid_argument("AngularKernel: dimension must be >= 2");
    // beta = 0 (Maxwell molecules) is admitted for simulation; the moment
    // theory itself requires beta > 0 and checks it separately.
    if (!(beta_ >= 0.0) || beta_ > 2.0)
        throw std::invalid_argument("AngularKernel: beta must lie in [0,2]");

    const double target = 1.0 / sphere_area(d_ - 2);
    switch (spec_.profile) {
    case AngularProfile::Constant: {
        // J_d = integral (1-z^2)^{(d-3)/2} dz, closed form.
        double J = std::sqrt(std::numbers::pi) * std::tgamma((d_ - 1) / 2.0) /
                   std::tgamma(d_ / 2.0);
        norm_ = target / J;
        b_sup_ = norm_;
        q_ = std::numeric_limits<double>::infinity();
        closed_form_sampling_ = (d_ == 2 || d_ == 3);
        break;
    }
    case AngularProfile::Power: {
        double nu = spec_.nu;
        if (nu >= (d_ - 1) / 2.0)
            throw std::invalid_argument(
                "AngularKernel: power profile not integrable (nu too large)");
        // integral (1-z)^{(d-3)/2-nu} (1+z)^{(d-3)/2} dz = 2^{d-2-nu} B(...)
        double a = (d_ - 1) / 2.0 - nu, b2 = (d_ - 1) / 2.0;
        double I = std::pow(2.0, d_ - 2.0 - nu) *
                   std::exp(std::lgamma(a) + std::lgamma(b2) - std::lgamma(a + b2));
        norm_ = target / I;
        b_sup_ = nu > 0 ? std::numeric_limits<double>::infinity() : norm_;
        q_ = nu > 0 ? 1.0 / (nu + 0.01) : std::numeric_limits<double>::infinity();
        closed_form_sampling_ = (d_ == 3);
        break;
    }
    case AngularProfile::Tabulated: {
        auto& tz = spec_.table_z;
        auto& tb = spec_.table_b;
        if (tz.size() < 2 || tz.size() != tb.size())
            throw std::invalid_argument("AngularKernel: bad table");
        if (!std::is_sorted(tz.begin(), tz.end()) || tz.front() < -1.0 || tz.back() > 1.0)
            throw std::invalid_argument("AngularKernel: table abscissae must ascend in [-1,1]");
        for (double v : tb)
            if (!(v >= 0.0)) throw std::invalid_argument("AngularKernel: negative table value");
        double I = 0.0;
        if (d_ == 3) {
            // trapezoid is exact for the piecewise-linear profile
            for (size_t i = 0; i + 1 < tz.size(); ++i)
                I += 0.5 * (tb[i] + tb[i + 1]) * (tz[i + 1] - tz[i]);
        } else {
            const auto& gl = gauss_legendre(16);
            for (size_t i = 0; i + 1 < tz.size(); ++i) {
                double h = 0.5 * (tz[i + 1] - tz[i]), mid = 0.5 * (tz[i] + tz[i + 1]);
                for (size_t k = 0; k < gl.x.size(); ++k) {
                    double z = mid + h * gl.x[k];
                    double t = (z - tz[i]) / (tz[i + 1] - tz[i]);
                    double bb = (1 - t) * tb[i] + t * tb[i + 1];
                    I += h * gl.w[k] * bb * std::pow(std::max(0.0, 1.0 - z * z), (d_ - 3) / 2.0);
                }
            }
        }
        if (!(I > 0.0) || !std::isfinite(I))
            throw std::invalid_argument("AngularKernel: table normalization degenerate");
        norm_ = target / I;
        b_sup_ = norm_ * *std::max_element(tb.begin(), tb.end());
        q_ = std::numeric_limits<double>::infinity();
        closed_form_sampling_ = false;
        break;
    }
    }
    if (spec_.q_override > 0.0) q_ = spec_.q_override;
    if (!closed_form_sampling_) build_sampling_cdf();
}

double AngularKernel::b(double z) const {
    switch (spec_.profile) {
    case AngularProfile::Constant:
        return norm_;
    case AngularProfile::Power:
        return norm_ * std::pow(1.0 - z, -spec_.nu);
    case AngularProfile::Tabulated: {
        auto& tz = spec_.table_z;
        auto& tb = spec_.table_b;
        if (z <= tz.front()) return norm_ * tb.front();
        if (z >= tz.back()) return norm_ * tb.back();
        auto it = std::upper_bound(tz.begin(), tz.end(), z);
        size_t i = size_t(it - tz.begin()) - 1;
        double t = (z - tz[i]) / (tz[i + 1] - tz[i]);
        return norm_ * ((1 - t) * tb[i] + t * tb[i + 1]);
    }
    }
    return 0.0;
}

void AngularKernel::build_quadrature(int n) const {
    ZQuad q;
    auto push = [&](double z, double w) {
        q.z.push_back(z);
        q.w.push_back(w);
    };
    switch (spec_.profile) {
    case AngularProfile::Constant: {
        if (d_ == 2) {
            // z = cos(theta) absorbs the (1-z^2)^{-1/2} weight
            const auto& gl = gauss_legendre(n);
            for (size_t i = 0; i < gl.x.size(); ++i) {
                double th = 0.5 * std::numbers::pi * (gl.x[i] + 1.0);
                push(std::cos(th), norm_ * 0.5 * std::numbers::pi * gl.w[i]);
            }
        } else {
            const auto& gl = gauss_legendre(n);
            for (size_t i = 0; i < gl.x.size(); ++i)
                push(gl.x[i],
                     norm_ * gl.w[i] *
                         std::pow(std::max(0.0, 1.0 - gl.x[i] * gl.x[i]), (d_ - 3) / 2.0));
        }
        break;
    }
    case AngularProfile::Power: {
        if (d_ == 2) {
            // z = cos(theta) removes both (1 -+ z)^{-1/2} factors; theta =
            // phi^k with k = 1/(1 - 2 nu) then absorbs the remaining
            // theta^{-2 nu} profile singularity at theta = 0. The profile is
            // evaluated through sin(theta/2) so 1 - cos(theta) never rounds
            // to zero.
            double kk = 1.0 / (1.0 - 2.0 * spec_.nu);
            const auto& gl = gauss_legendre(n);
            double P = std::pow(std::numbers::pi, 1.0 / kk);
            for (size_t i = 0; i < gl.x.size(); ++i) {
                double phi = 0.5 * P * (gl.x[i] + 1.0);
                double th = std::pow(phi, kk);
                double s2 = std::sin(0.5 * th);
                double bval = norm_ * std::pow(2.0 * s2 * s2, -spec_.nu);
                double w = 0.5 * P * gl.w[i] * kk * std::pow(phi, kk - 1.0) * bval;
                push(std::cos(th), w);
            }
        } else {
            // 1-z = 2 t^{1/m} removes the endpoint singularity at z = 1
            double m = 1.0 + (d_ - 3) / 2.0 - spec_.nu;
            const auto& gl = gauss_legendre(n);
            double pref = norm_ * std::pow(2.0, m) / m;
            for (size_t i = 0; i < gl.x.size(); ++i) {
                double t = 0.5 * (gl.x[i] + 1.0);
                double z = 1.0 - 2.0 * std::pow(t, 1.0 / m);
                double w = pref * 0.5 * gl.w[i];
                if (d_ != 3) w *= std::pow(std::max(0.0, 1.0 + z), (d_ - 3) / 2.0);
                push(z, w);
            }
        }
        break;
    }
    case AngularProfile::Tabulated: {
        auto& tz = spec_.table_z;
        size_t nint = tz.size() - 1;
        int sub = std::max<int>(1, int((n + 4 * nint - 1) / (4 * nint)));
        const auto& gl = gauss_legendre(4);
        for (size_t i = 0; i < nint; ++i) {
            for (int s = 0; s < sub; ++s) {
                double a = tz[i] + (tz[i + 1] - tz[i]) * s / sub;
                double bb = tz[i] + (tz[i + 1] - tz[i]) * (s + 1) / sub;
                double h = 0.5 * (bb - a), mid = 0.5 * (a + bb);
                for (size_t k = 0; k < gl.x.size(); ++k) {
                    double z = mid + h * gl.x[k];
                    push(z, h * gl.w[k] * b(z) *
                                std::pow(std::max(0.0, 1.0 - z * z), (d_ - 3) / 2.0));
                }
            }
        }
        break;
    }
    }
    quad_ = std::move(q);
    quad_n_ = n;
}

const AngularKernel::ZQuad& AngularKernel::polar_quadrature(int n) const {
    if (quad_n_ < n) build_quadrature(n);
    return quad_;
}

void AngularKernel::build_sampling_cdf() {
    const auto& q = polar_quadrature(2048);
    std::vector<size_t> idx(q.z.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b2) { return q.z[a] < q.z[b2]; });
    double total = 0.0;
    cdf_z_.clear();
    cdf_u_.clear();
    cdf_z_.reserve(idx.size());
    cdf_u_.reserve(idx.size());
    for (size_t i : idx) {
        total += q.w[i];
        cdf_z_.push_back(q.z[i]);
        cdf_u_.push_back(total);
    }
    if (!(total > 0.0)) throw std::runtime_error("AngularKernel: degenerate sampling CDF");
    for (double& u : cdf_u_) u /= total;
}

double AngularKernel::sample_cos_theta(StreamRng& rng) const {
    double u = rng.uniform();
    if (closed_form_sampling_) {
        if (spec_.profile == AngularProfile::Constant) {
            if (d_ == 3) return 2.0 * u - 1.0;
            return std::cos(std::numbers::pi * u); // d == 2
        }
        // power family, d == 3
        return 1.0 - 2.0 * std::pow(1.0 - u, 1.0 / (1.0 - spec_.nu));
    }
    auto it = std::lower_bound(cdf_u_.begin(), cdf_u_.end(), u);
    if (it == cdf_u_.end()) return cdf_z_.back();
    size_t i = size_t(it - cdf_u_.begin());
    if (i == 0) return cdf_z_.front();
    double u0 = cdf_u_[i - 1], u1 = cdf_u_[i];
    double t = (u - u0) / std::max(u1 - u0, 1e-300);
    return cdf_z_[i - 1] + t * (cdf_z_[i] - cdf_z_[i - 1]);
}

std::string AngularKernel::describe() const {
    std::ostringstream os;
    os << "d=" << d_ << ",beta=" << beta_ << ",angular=";
    switch (spec_.profile) {
    case AngularProfile::Constant: os << "constant"; break;
    case AngularProfile::Power: os << "power(" << spec_.nu << ")"; break;
    case AngularProfile::Tabulated: os << "table[" << spec_.table_z.size() << "]"; break;
    }
    return os.str();
}

void post_collide_inplace(double* v, double* v_star, const double* sigma, int d) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
        double du = v[i] - v_star[i];
        r2 += du * du;
    }
    double half_r = 0.5 * std::sqrt(r2);
    for (int i = 0; i < d; ++i) {
        double c = 0.5 * (v[i] + v_star[i]);
        double s = half_r * sigma[i];
        v[i] = c + s;
        v_star[i] = c - s;
    }
}

CollisionOutcome post_collide(std::span<const double> v, std::span<const double> v_star,
                              std::span<const double> sigma) {
    int d = int(v.size());
    if (v_star.size() != size_t(d) || sigma.size() != size_t(d))
        throw std::invalid_argument("post_collide: dimension mismatch");
    double s2 = 0.0;
    for (double c : sigma) s2 += c * c;
    if (std::abs(s2 - 1.0) > 1e-10)
        throw std::invalid_argument("post_collide: sigma is not a unit vector");
    CollisionOutcome out;
    out.v_prime.assign(v.begin(), v.end());
    out.v_star_prime.assign(v_star.begin(), v_star.end());
    post_collide_inplace(out.v_prime.data(), out.v_star_prime.data(), sigma.data(), d);
    return out;
}

void sample_sigma_inplace(const AngularKernel& k, const double* u_hat, int d, StreamRng& rng,
                          double* sigma_out) {
    double z = k.sample_cos_theta(rng);
    double st = std::sqrt(std::max(0.0, 1.0 - z * z));
    // Gaussian in the orthogonal complement of u_hat, normalized.
    for (int attempt = 0;; ++attempt) {
        double n2 = 0.0;
        for (int i = 0; i < d; ++i) {
            sigma_out[i] = gaussian(rng);
        }
        double proj = dot(sigma_out, u_hat, d);
        for (int i = 0; i < d; ++i) sigma_out[i] -= proj * u_hat[i];
        for (int i = 0; i < d; ++i) n2 += sigma_out[i] * sigma_out[i];
        if (n2 > 1e-24) {
            double inv = st / std::sqrt(n2);
            for (int i = 0; i < d; ++i) sigma_out[i] = z * u_hat[i] + inv * sigma_out[i];
            return;
        }
        if (attempt > 64) throw std::runtime_error("sample_sigma: degenerate draw loop");
    }
}

std::vector<double> sample_sigma(const AngularKernel& k, std::span<const double> u_hat,
                                 StreamRng& rng) {
    int d = int(u_hat.size());
    double n2 = 0.0;
    for (double c : u_hat) n2 += c * c;
    if (std::abs(n2 - 1.0) > 1e-10)
        throw std::invalid_argument("sample_sigma: u_hat is not a unit vector");
    std::vector<double> sigma(d);
    sample_sigma_inplace(k, u_hat.data(), d, rng, sigma.data());
    return sigma;
}

double eval_rate(const AngularKernel& k, std::span<const double> v,
                 std::span<const double> v_star) {
    double r2 = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        double du = v[i] - v_star[i];
        r2 += du * du;
    }
    if (r2 == 0.0) return 0.0;
    return std::pow(std::sqrt(r2), k.beta());
}

} // namespace boltzlab
