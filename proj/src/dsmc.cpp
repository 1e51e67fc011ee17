#include "boltzlab/dsmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "boltzlab/kahan.hpp"

namespace boltzlab {

namespace {

// Marsaglia-Tsang; shape < 1 via the alpha+1 boost.
double gamma_sample(StreamRng& rng, double shape) {
    if (shape < 1.0) {
        double u = rng.uniform_pos();
        return gamma_sample(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = gaussian(rng);
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = rng.uniform_pos();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double sq_norm(const double* v, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += v[i] * v[i];
    return s;
}

double rel_speed_pow(double u2, double beta) {
    if (beta == 0.0) return 1.0;
    if (beta == 1.0) return std::sqrt(u2);
    if (beta == 2.0) return u2;
    return std::pow(u2, 0.5 * beta);
}

void fisher_yates_pairing(std::vector<std::size_t>& idx, StreamRng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = std::size_t(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

void ensure_majorant(ParticleEnsemble& ens) {
    if (ens.majorant_speed > 0.0) return;
    double max2 = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i)
        max2 = std::max(max2, sq_norm(ens.particle(i), ens.d));
    ens.majorant_speed = 2.0 * std::sqrt(max2);
}

} // namespace

double InitialDataSpec::moment(int d, double q) const {
    if (q == 0.0) return m0;
    auto iso_gaussian = [&](double temp) {
        return m0 * std::exp(0.5 * q * std::log(2.0 * temp) +
                             std::lgamma(0.5 * (q + d)) - std::lgamma(0.5 * d));
    };
    switch (kind) {
        case Kind::Maxwellian: {
            double drift2 = 0.0;
            for (double c : mean) drift2 += c * c;
            if (drift2 == 0.0) return iso_gaussian(T);
            if (q == 2.0) return m0 * (d * T + drift2);
            throw std::logic_error("InitialDataSpec::moment: no closed form for drifting data");
        }
        case Kind::BiMaxwellian: {
            double h = 0.5 * separation;
            if (h == 0.0) return 0.5 * (iso_gaussian(T1) + iso_gaussian(T2));
            if (q == 2.0) return 0.5 * m0 * (d * (T1 + T2) + 2.0 * h * h);
            throw std::logic_error("InitialDataSpec::moment: no closed form for separated halves");
        }
        case Kind::HeavyTail: {
            double nu = 2.0 + delta;
            if (q >= nu) return std::numeric_limits<double>::infinity();
            return m0 * std::exp(std::lgamma(0.5 * (d + q)) + std::lgamma(0.5 * (nu - q)) -
                                 std::lgamma(0.5 * d) - std::lgamma(0.5 * nu));
        }
        case Kind::PointMixture: {
            double total = 0.0;
            for (const auto& a : atoms) total += a.mass;
            KahanSum acc;
            for (const auto& a : atoms) {
                double r2 = 0.0;
                for (double c : a.v) r2 += c * c;
                acc += (a.mass / total) * std::pow(r2, 0.5 * q);
            }
            return m0 * acc.value();
        }
    }
    throw std::logic_error("InitialDataSpec::moment: unknown kind");
}

std::vector<double> ParticleEnsemble::total_momentum() const {
    std::vector<KahanSum> acc(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < size(); ++i) {
        const double* p = particle(i);
        for (int j = 0; j < d; ++j) acc[std::size_t(j)] += p[j];
    }
    std::vector<double> out(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) out[std::size_t(j)] = weight * acc[std::size_t(j)].value();
    return out;
}

double ParticleEnsemble::total_energy() const {
    KahanSum acc;
    for (std::size_t i = 0; i < size(); ++i) acc += sq_norm(particle(i), d);
    return weight * acc.value();
}

ParticleEnsemble sample_initial(const InitialDataSpec& spec, int d, std::size_t N,
                                std::uint64_t master_seed, std::uint64_t replica_id) {
    if (N < 2) throw std::invalid_argument("sample_initial: N must be >= 2");
    if (d < 2) throw std::invalid_argument("sample_initial: d must be >= 2");
    if (!(spec.m0 > 0.0)) throw std::invalid_argument("sample_initial: m0 must be positive");
    if (spec.kind == InitialDataSpec::Kind::HeavyTail && !(spec.delta > 0.0))
        throw std::invalid_argument("sample_initial: heavy-tail requires delta > 0");

    ParticleEnsemble ens;
    ens.d = d;
    ens.weight = spec.m0 / double(N);
    ens.replica_id = replica_id;
    ens.rng = StreamRng(master_seed, replica_id);
    ens.v.resize(N * std::size_t(d));

    switch (spec.kind) {
        case InitialDataSpec::Kind::Maxwellian: {
            double sd = std::sqrt(spec.T);
            for (std::size_t i = 0; i < N; ++i) {
                double* p = ens.particle(i);
                for (int j = 0; j < d; ++j) {
                    p[j] = sd * gaussian(ens.rng);
                    if (std::size_t(j) < spec.mean.size()) p[j] += spec.mean[std::size_t(j)];
                }
            }
            break;
        }
        case InitialDataSpec::Kind::BiMaxwellian: {
            double h = 0.5 * spec.separation;
            for (std::size_t i = 0; i < N; ++i) {
                bool left = (i % 2) == 0;
                double sd = std::sqrt(left ? spec.T1 : spec.T2);
                double* p = ens.particle(i);
                for (int j = 0; j < d; ++j) p[j] = sd * gaussian(ens.rng);
                p[0] += left ? -h : h;
            }
            break;
        }
        case InitialDataSpec::Kind::HeavyTail: {
            // Gaussian scale mixture: v = Z / sqrt(G), G ~ chi^2 with 2+delta
            // degrees of freedom, gives density prop. to (1+|v|^2)^{-(d+2+delta)/2}.
            double half_nu = 0.5 * (2.0 + spec.delta);
            for (std::size_t i = 0; i < N; ++i) {
                double g = 2.0 * gamma_sample(ens.rng, half_nu);
                double scale = 1.0 / std::sqrt(g);
                double* p = ens.particle(i);
                for (int j = 0; j < d; ++j) p[j] = scale * gaussian(ens.rng);
            }
            break;
        }
        case InitialDataSpec::Kind::PointMixture: {
            if (spec.atoms.empty())
                throw std::invalid_argument("sample_initial: point mixture needs atoms");
            double total = 0.0;
            for (const auto& a : spec.atoms) {
                if (a.v.size() != std::size_t(d))
                    throw std::invalid_argument("sample_initial: atom dimension mismatch");
                if (!(a.mass > 0.0))
                    throw std::invalid_argument("sample_initial: atom mass must be positive");
                total += a.mass;
            }
            for (std::size_t i = 0; i < N; ++i) {
                double u = ens.rng.uniform() * total;
                std::size_t pick = 0;
                double cum = 0.0;
                for (std::size_t a = 0; a < spec.atoms.size(); ++a) {
                    cum += spec.atoms[a].mass;
                    if (u < cum) { pick = a; break; }
                    pick = a;
                }
                double* p = ens.particle(i);
                for (int j = 0; j < d; ++j) p[j] = spec.atoms[pick].v[std::size_t(j)];
            }
            break;
        }
    }
    ensure_majorant(ens);
    return ens;
}

double majorant_dt(const ParticleEnsemble& ens, const AngularKernel& k, double dt_factor) {
    double coeff = double(ens.size() - 1) * ens.weight;
    double vpow = rel_speed_pow(ens.majorant_speed * ens.majorant_speed, k.beta());
    if (coeff * vpow <= 0.0) return std::numeric_limits<double>::infinity();
    return dt_factor / (coeff * vpow);
}

bool try_step(ParticleEnsemble& ens, const AngularKernel& k, double dt, StepStats& stats) {
    const std::size_t N = ens.size();
    const int d = ens.d;
    const double beta = k.beta();
    ensure_majorant(ens);

    thread_local std::vector<std::size_t> idx;
    thread_local std::vector<double> u2s;
    idx.resize(N);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    fisher_yates_pairing(idx, ens.rng);

    const std::size_t pairs = N / 2;
    u2s.resize(pairs);
    double vmax2 = ens.majorant_speed * ens.majorant_speed;
    double worst = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        const double* a = ens.particle(idx[2 * p]);
        const double* b = ens.particle(idx[2 * p + 1]);
        double u2 = 0.0;
        for (int j = 0; j < d; ++j) {
            double du = a[j] - b[j];
            u2 += du * du;
        }
        u2s[p] = u2;
        worst = std::max(worst, u2);
    }
    if (worst > vmax2) {
        // Grow the majorant past the offending pair and roll back; no
        // velocity was touched, so the rollback is the early return.
        double grown = ens.majorant_speed;
        double target = std::sqrt(worst);
        while (grown < target) grown *= 1.5;
        ens.majorant_speed = grown;
        ++stats.majorant_regrows;
        return false;
    }

    const double coeff = double(N - 1) * ens.weight * dt;
    double sigma[16];
    double uhat[16];
    if (d > 16) throw std::logic_error("try_step: dimension too large");
    for (std::size_t p = 0; p < pairs; ++p) {
        ++stats.pairs;
        double u2 = u2s[p];
        if (u2 == 0.0) continue; // grazing map is the identity at zero relative speed
        double u = ens.rng.uniform();
        if (beta == 1.0) {
            if (u * u >= coeff * coeff * u2) continue;
        } else {
            if (u >= coeff * rel_speed_pow(u2, beta)) continue;
        }
        double* a = ens.particle(idx[2 * p]);
        double* b = ens.particle(idx[2 * p + 1]);
        double inv = 1.0 / std::sqrt(u2);
        for (int j = 0; j < d; ++j) uhat[j] = (a[j] - b[j]) * inv;
        sample_sigma_inplace(k, uhat, d, ens.rng, sigma);
        post_collide_inplace(a, b, sigma, d);
        ++stats.collisions;
    }
    ens.time += dt;
    return true;
}

StepStats step(ParticleEnsemble& ens, const AngularKernel& k, double dt, double dt_factor) {
    StepStats stats;
    double use = dt;
    while (!try_step(ens, k, use, stats))
        use = std::min(dt, majorant_dt(ens, k, dt_factor));
    return stats;
}

double empirical_exp_moment(const ParticleEnsemble& ens, double s, double z) {
    if (z < 0.0) throw std::invalid_argument("empirical_exp_moment: z must be >= 0");
    KahanSum acc;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        double r = std::sqrt(sq_norm(ens.particle(i), ens.d));
        double arg = z * std::pow(r, s);
        if (arg > 709.0) {
            char buf[96];
            std::snprintf(buf, sizeof buf,
                          "empirical_exp_moment: weight too large at |v| = %.6g", r);
            throw std::overflow_error(buf);
        }
        acc += std::exp(arg);
    }
    return ens.weight * acc.value();
}

namespace {

MomentVector replica_moments(const ParticleEnsemble& ens, double s, double beta, int n) {
    MomentVector mv;
    mv.s = s;
    mv.beta = beta;
    mv.n = n;
    mv.time = ens.time;
    const std::size_t orders = std::size_t(n) + 2;
    std::vector<KahanSum> acc(orders), accs;
    const bool aligned = (beta == s);
    if (!aligned) accs.resize(orders);
    for (std::size_t i = 0; i < ens.size(); ++i) {
        double r2 = sq_norm(ens.particle(i), ens.d);
        double r = std::sqrt(r2);
        double rs = (s == 1.0) ? r : (s == 2.0 ? r2 : std::pow(r, s));
        double rb = aligned ? 0.0 : rel_speed_pow(r2, beta);
        double cur = 1.0;
        for (std::size_t p = 0; p < orders; ++p) {
            acc[p] += cur;
            if (!aligned) accs[p] += cur * rb;
            cur *= rs;
        }
    }
    mv.m.resize(orders);
    for (std::size_t p = 0; p < orders; ++p) mv.m[p] = ens.weight * acc[p].value();
    if (!aligned) {
        mv.m_shift.resize(orders);
        for (std::size_t p = 0; p < orders; ++p) mv.m_shift[p] = ens.weight * accs[p].value();
    }
    return mv;
}

void mean_stderr(const std::vector<double>& x, double& mean, double& se) {
    const std::size_t R = x.size();
    for (double v : x)
        if (!std::isfinite(v)) {
            mean = std::numeric_limits<double>::infinity();
            se = std::numeric_limits<double>::infinity();
            return;
        }
    KahanSum acc;
    for (double v : x) acc += v;
    mean = acc.value() / double(R);
    if (R < 2) { se = 0.0; return; }
    KahanSum var;
    for (double v : x) var += (v - mean) * (v - mean);
    se = std::sqrt(var.value() / double(R - 1) / double(R));
}

void write_snapshot(const std::string& dir, std::size_t ti, std::uint64_t replica,
                    const ParticleEnsemble& ens) {
    std::filesystem::create_directories(dir);
    char name[64];
    std::snprintf(name, sizeof name, "snap_t%03zu_r%02llu.bin", ti,
                  (unsigned long long)replica);
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("write_snapshot: cannot open output file");
    std::int64_t N = std::int64_t(ens.size());
    std::int64_t d = ens.d;
    double t = ens.time;
    out.write(reinterpret_cast<const char*>(&N), sizeof N);
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    out.write(reinterpret_cast<const char*>(&t), sizeof t);
    out.write(reinterpret_cast<const char*>(ens.v.data()),
              std::streamsize(ens.v.size() * sizeof(double)));
}

} // namespace

RunResult run(const RunConfig& cfg, const AngularKernel& k, const InitialDataSpec& init) {
    if (cfg.t_grid.empty()) throw std::invalid_argument("run: empty time grid");
    if (!std::is_sorted(cfg.t_grid.begin(), cfg.t_grid.end()) || cfg.t_grid.front() < 0.0)
        throw std::invalid_argument("run: time grid must be ascending and nonnegative");
    if (cfg.replicas < 1) throw std::invalid_argument("run: need at least one replica");
    if (cfg.n < 1 || !(cfg.s > 0.0)) throw std::invalid_argument("run: bad moment parameters");
    if (k.dimension() != cfg.dimension)
        throw std::invalid_argument("run: kernel dimension mismatch");

    const int R = cfg.replicas;
    const int d = cfg.dimension;
    std::vector<ParticleEnsemble> ens;
    ens.reserve(std::size_t(R));
    for (int r = 0; r < R; ++r)
        ens.push_back(sample_initial(init, d, cfg.n_particles, cfg.seed, std::uint64_t(r)));

    std::vector<double> e0(static_cast<std::size_t>(R));
    std::vector<std::vector<double>> p0(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        e0[std::size_t(r)] = ens[std::size_t(r)].total_energy();
        p0[std::size_t(r)] = ens[std::size_t(r)].total_momentum();
    }
    const double v_th = std::sqrt(std::max(e0[0] / init.m0, 1e-300));

    std::vector<double> radii = cfg.lower_radii;
    if (radii.empty() && !cfg.lower_s.empty())
        for (double f : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) radii.push_back(f * v_th);

    RunResult out;
    out.config = cfg;
    out.lower.resize(cfg.lower_s.size());
    for (std::size_t li = 0; li < cfg.lower_s.size(); ++li) {
        out.lower[li].s = cfg.lower_s[li];
        out.lower[li].radii = radii;
    }

    const std::size_t orders = std::size_t(cfg.n) + 2;
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        const double target = cfg.t_grid[ti];
        for (int r = 0; r < R; ++r) {
            auto& e = ens[std::size_t(r)];
            while (e.time < target * (1.0 - 1e-14) && target - e.time > 1e-300) {
                double dt = std::min(majorant_dt(e, k, cfg.dt_factor), target - e.time);
                StepStats st;
                while (!try_step(e, k, dt, st))
                    dt = std::min(majorant_dt(e, k, cfg.dt_factor), target - e.time);
                out.total_collisions += st.collisions;
            }
            e.time = target;
        }

        double z = 0.0;
        if (cfg.z_schedule == ZSchedule::Creation) z = cfg.a * std::min(target, 1.0);
        else if (cfg.z_schedule == ZSchedule::Propagation) z = cfg.a;

        std::vector<MomentVector> per(static_cast<std::size_t>(R));
        std::vector<double> direct(static_cast<std::size_t>(R)), series(static_cast<std::size_t>(R));
        for (int r = 0; r < R; ++r) {
            auto& e = ens[std::size_t(r)];
            per[std::size_t(r)] = replica_moments(e, cfg.s, k.beta(), cfg.n);
            try {
                direct[std::size_t(r)] = empirical_exp_moment(e, cfg.s, z);
            } catch (const std::overflow_error&) {
                direct[std::size_t(r)] = std::numeric_limits<double>::infinity();
            }
            try {
                series[std::size_t(r)] = exp_partial_sums(per[std::size_t(r)], z, cfg.n).E_n;
            } catch (const std::overflow_error&) {
                series[std::size_t(r)] = std::numeric_limits<double>::infinity();
            }
            if (!cfg.snapshot_dir.empty())
                write_snapshot(cfg.snapshot_dir, ti, std::uint64_t(r), e);
        }

        TrajectoryPoint pt;
        pt.time = target;
        pt.moments.s = cfg.s;
        pt.moments.beta = k.beta();
        pt.moments.n = cfg.n;
        pt.moments.time = target;
        pt.moments.m.resize(orders);
        pt.moments.stderr_m.resize(orders);
        std::vector<double> col(static_cast<std::size_t>(R));
        for (std::size_t p = 0; p < orders; ++p) {
            for (int r = 0; r < R; ++r) col[std::size_t(r)] = per[std::size_t(r)].m[p];
            mean_stderr(col, pt.moments.m[p], pt.moments.stderr_m[p]);
        }
        if (k.beta() != cfg.s) {
            pt.moments.m_shift.resize(orders);
            pt.moments.stderr_shift.resize(orders);
            for (std::size_t p = 0; p < orders; ++p) {
                for (int r = 0; r < R; ++r) col[std::size_t(r)] = per[std::size_t(r)].m_shift[p];
                mean_stderr(col, pt.moments.m_shift[p], pt.moments.stderr_shift[p]);
            }
        }
        pt.exp_moment.z = z;
        mean_stderr(direct, pt.exp_moment.direct, pt.exp_moment.direct_stderr);
        mean_stderr(series, pt.exp_moment.series, pt.exp_moment.series_stderr);

        for (int r = 0; r < R; ++r) {
            auto& e = ens[std::size_t(r)];
            double drift = std::abs(e.total_energy() - e0[std::size_t(r)]) /
                           std::max(e0[std::size_t(r)], 1e-300);
            pt.conservation.energy_rel_drift =
                std::max(pt.conservation.energy_rel_drift, drift);
            auto mom = e.total_momentum();
            for (int j = 0; j < d; ++j) {
                double dm = std::abs(mom[std::size_t(j)] - p0[std::size_t(r)][std::size_t(j)]) /
                            std::max(init.m0 * v_th, 1e-300);
                pt.conservation.momentum_drift =
                    std::max(pt.conservation.momentum_drift, dm);
            }
        }
        out.points.push_back(std::move(pt));
        out.replica_moments.push_back(std::move(per));

        for (std::size_t li = 0; li < cfg.lower_s.size(); ++li) {
            const double sl = cfg.lower_s[li];
            std::vector<double> row(radii.size(), 0.0);
            const int dirs = std::max(1, cfg.lower_directions);
            for (std::size_t ri = 0; ri < radii.size(); ++ri) {
                KahanSum acc;
                for (int dir = 0; dir < dirs; ++dir) {
                    int axis = dir % d;
                    double sign = (dir / d) % 2 == 0 ? 1.0 : -1.0;
                    for (int r = 0; r < R; ++r) {
                        auto& e = ens[std::size_t(r)];
                        KahanSum conv;
                        for (std::size_t i = 0; i < e.size(); ++i) {
                            const double* p = e.particle(i);
                            double u2 = 0.0;
                            for (int j = 0; j < d; ++j) {
                                double du = (j == axis ? sign * radii[ri] : 0.0) - p[j];
                                u2 += du * du;
                            }
                            conv += std::pow(u2, 0.5 * sl);
                        }
                        acc += e.weight * conv.value();
                    }
                }
                row[ri] = acc.value() / double(dirs * R);
            }
            out.lower[li].values.push_back(std::move(row));
        }
    }
    return out;
}

LowerBoundReport lower_convolution_check(const RunResult& result, double s) {
    if (!(s > 0.0) || s > 1.0)
        throw std::invalid_argument("lower_convolution_check: s must lie in (0,1]");
    const LowerBoundCurve* curve = nullptr;
    for (const auto& c : result.lower)
        if (std::abs(c.s - s) < 1e-12) curve = &c;
    if (!curve || curve->values.empty())
        throw std::invalid_argument("lower_convolution_check: no curve recorded for this s");

    LowerBoundReport rep;
    rep.s = s;
    rep.v_grid = curve->radii;
    rep.ratios.assign(curve->radii.size(), std::numeric_limits<double>::infinity());
    rep.fitted_c = std::numeric_limits<double>::infinity();
    rep.fitted_C_f0_s = std::numeric_limits<double>::infinity();
    for (std::size_t ti = 0; ti < curve->values.size(); ++ti) {
        for (std::size_t ri = 0; ri < curve->radii.size(); ++ri) {
            double val = curve->values[ti][ri];
            double envelope = 1.0 + std::pow(curve->radii[ri], s);
            double ratio = val / envelope;
            rep.ratios[ri] = std::min(rep.ratios[ri], ratio);
            rep.fitted_C_f0_s = std::min(rep.fitted_C_f0_s, ratio);
            double base = curve->values[0][ri];
            if (base > 0.0) rep.fitted_c = std::min(rep.fitted_c, val / base);
        }
    }
    return rep;
}

} // namespace boltzlab
