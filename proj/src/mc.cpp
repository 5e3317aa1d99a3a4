#include "fdiff/mc.hpp"

#include "fdiff/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>
#include <utility>

namespace fdiff {

namespace {

constexpr long kBlockSize = 1024;

// Stream domains keep the DV, TGK and equilibrium runs statistically independent for one seed.
constexpr std::uint32_t kDomainEnsemble = 0;
constexpr std::uint32_t kDomainVacf = 1;
constexpr std::uint32_t kDomainEquilibrium = 2;

int worker_count(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(block) for every block index; results must be written to per-block storage.
template <class F>
void for_each_block(long n_blocks, int threads, F&& fn) {
    int workers = static_cast<int>(std::min<long>(worker_count(threads), std::max<long>(n_blocks, 1)));
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            long b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                fn(b);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_blocks);
                return;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

long steps_for(double duration, double dt, const char* what) {
    double ratio = duration / dt;
    long steps = std::lround(ratio);
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * ratio) {
        throw ConfigError(std::string(what) + " must be a whole number of time steps");
    }
    return steps;
}

// Nondimensional setup (v = D = 1) used for stepping; results are rescaled on output.
ScatteringSetup unit_setup(const SimConfig& c) { return ScatteringSetup::from_xi(1.0, 1.0, c.setup.xi()); }

double initial_mu(const ParticleStream& stream) { return 2.0 * stream.uniforms(0)[0] - 1.0; }

constexpr int kLanes = 4;

// Advances kLanes independent particles (lanes >= `lanes` are padding and not reported) by chunks * stride
// steps, calls on_step(lane, mu_before, mu_after) after every geodesic step and on_chunk(c, lane, state)
// after every chunk c = 1..chunks. Interleaving particles only hides arithmetic latency; each
// particle's trajectory depends on its own stream alone. Draw 0 of a stream is reserved for mu(0).
// Geodesic step k uses word k % 4 of draw 1 + k / 4; Euler step k uses normal k % 2 of draw 1 + k / 2.
template <class OnChunk, class OnStep>
void evolve(std::array<PitchState, kLanes>& s, const std::array<ParticleStream, kLanes>& streams, int lanes,
            const SimConfig& config, const ScatteringSetup& unit, double dt, long chunks, long stride,
            OnChunk&& on_chunk, OnStep&& on_step) {
    std::uint64_t k = 0;
    if (config.integrator == Integrator::GeodesicWalk) {
        GeodesicWalk walk(unit, dt);
        std::array<Philox4x32::Counter, kLanes> u{};
        for (long c = 1; c <= chunks; ++c) {
            for (long j = 0; j < stride; ++j, ++k) {
                if ((k & 3) == 0) {
                    for (int l = 0; l < kLanes; ++l) u[l] = streams[l].words(1 + k / 4);
                }
                for (int l = 0; l < kLanes; ++l) {
                    double before = s[l].mu;
                    s[l] = walk(s[l], u[l][k & 3]);
                    on_step(l, before, s[l].mu);
                }
            }
            for (int l = 0; l < lanes; ++l) {
                if (!std::isfinite(s[l].mu) || !std::isfinite(s[l].z)) {
                    throw NumericalFailure("non-finite pitch-angle state");
                }
                on_chunk(c, l, s[l]);
            }
        }
    } else {
        std::array<std::array<double, 2>, kLanes> noise{};
        for (long c = 1; c <= chunks; ++c) {
            for (long j = 0; j < stride; ++j, ++k) {
                if ((k & 1) == 0) {
                    for (int l = 0; l < kLanes; ++l) noise[l] = streams[l].normals(1 + k / 2);
                }
                for (int l = 0; l < kLanes; ++l) s[l] = step(s[l], unit, dt, noise[l][k & 1]);
            }
            for (int l = 0; l < lanes; ++l) on_chunk(c, l, s[l]);
        }
    }
}

template <class OnChunk>
void evolve(std::array<PitchState, kLanes>& s, const std::array<ParticleStream, kLanes>& streams, int lanes,
            const SimConfig& config, const ScatteringSetup& unit, double dt, long chunks, long stride,
            OnChunk&& on_chunk) {
    evolve(s, streams, lanes, config, unit, dt, chunks, stride, std::forward<OnChunk>(on_chunk),
           [](int, double, double) {});
}

// Streams and initial states of particles first .. first + lanes - 1.
struct LaneGroup {
    std::array<ParticleStream, kLanes> streams;
    std::array<PitchState, kLanes> states;
    int lanes;
};

LaneGroup lane_group(const SimConfig& config, std::uint32_t domain, long first, long last) {
    int lanes = static_cast<int>(std::min<long>(kLanes, last - first));
    auto make = [&](int l) {
        return ParticleStream(config.seed, domain, static_cast<std::uint64_t>(first + std::min(l, lanes - 1)));
    };
    LaneGroup g{{make(0), make(1), make(2), make(3)}, {}, lanes};
    for (int l = 0; l < kLanes; ++l) g.states[l] = {0.0, initial_mu(g.streams[l])};
    return g;
}

struct LinearFit {
    double slope = 0.0;
    double slope_se = 0.0;
};

LinearFit weighted_fit(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& w) {
    double sw = 0.0, st = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sw += w[i];
        st += w[i] * t[i];
        sy += w[i] * y[i];
    }
    double tbar = st / sw;
    double ybar = sy / sw;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        stt += w[i] * (t[i] - tbar) * (t[i] - tbar);
        sty += w[i] * (t[i] - tbar) * (y[i] - ybar);
    }
    LinearFit fit;
    fit.slope = sty / stt;
    double rss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double r = y[i] - ybar - fit.slope * (t[i] - tbar);
        rss += w[i] * r * r;
    }
    fit.slope_se = t.size() > 2 ? std::sqrt(rss / static_cast<double>(t.size() - 2) / stt) : 0.0;
    return fit;
}

double mean_of(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double standard_error(const std::vector<double>& x) {
    double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

}  // namespace

std::optional<Integrator> parse_integrator(const std::string& text) {
    if (text == "geodesic") return Integrator::GeodesicWalk;
    if (text == "euler") return Integrator::EulerReflect;
    return std::nullopt;
}

std::string integrator_name(Integrator i) { return i == Integrator::GeodesicWalk ? "geodesic" : "euler"; }

GeodesicWalk::GeodesicWalk(const ScatteringSetup& setup, double dt)
    : cos_(std::exp(-2.0 * setup.dcoeff() * dt)),
      sin_(std::sqrt(-std::expm1(-4.0 * setup.dcoeff() * dt))),
      half_drift_(0.5 * setup.dcoeff() * setup.xi() * dt),
      vdt_(setup.v() * dt) {
    if (setup.model() != ScatteringModel::Isotropic) throw DomainError("geodesic walk needs isotropic scattering");
}

void validate(const SimConfig& c) {
    if (c.n_particles < 1) throw ConfigError("n_particles must be positive");
    if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
    if (c.dt * c.setup.dcoeff() > 0.01 * (1.0 + 1e-12)) throw ConfigError("dt must not exceed 0.01 / D");
    if (!(c.t_max > 0.0)) throw ConfigError("t_max must be positive");
    if (c.n_snapshots < 1) throw ConfigError("n_snapshots must be positive");
    if (!(c.fit_window > 0.0 && c.fit_window <= 1.0)) throw ConfigError("fit_window must lie in (0, 1]");
    if (!(c.vacf_cutoff > 0.0)) throw ConfigError("vacf_cutoff must be positive");
    if (c.vacf_lag_stride < 1) throw ConfigError("vacf_lag_stride must be positive");
    if (c.n_batches < 1) throw ConfigError("n_batches must be positive");
    if (c.threads < 0) throw ConfigError("threads must be nonnegative");
}

EnsembleStats run_ensemble(const SimConfig& config) {
    validate(config);
    const double d = config.setup.dcoeff();
    const double v = config.setup.v();
    const double dt = config.dt * d;
    const long steps = steps_for(config.t_max * d, dt, "t_max");
    if (steps % config.n_snapshots != 0) throw ConfigError("t_max / dt must be a multiple of n_snapshots");
    const long stride = steps / config.n_snapshots;
    const int n_snap = config.n_snapshots + 1;
    const ScatteringSetup unit = unit_setup(config);

    // Per block: power sums of z^1..z^4 at every snapshot.
    const long n_blocks = (config.n_particles + kBlockSize - 1) / kBlockSize;
    std::vector<std::vector<double>> block_sums(static_cast<std::size_t>(n_blocks));
    for_each_block(n_blocks, config.threads, [&](long b) {
        std::vector<double> sums(static_cast<std::size_t>(4 * n_snap), 0.0);
        long first = b * kBlockSize;
        long last = std::min(config.n_particles, first + kBlockSize);
        for (long p = first; p < last; p += kLanes) {
            LaneGroup g = lane_group(config, kDomainEnsemble, p, last);
            evolve(g.states, g.streams, g.lanes, config, unit, dt, config.n_snapshots, stride,
                   [&](long k, int, const PitchState& st) {
                double z = st.z;
                double z2 = z * z;
                double* row = &sums[static_cast<std::size_t>(4 * k)];
                row[0] += z;
                row[1] += z2;
                row[2] += z2 * z;
                row[3] += z2 * z2;
            });
        }
        block_sums[static_cast<std::size_t>(b)] = std::move(sums);
    });

    const int n_batches = static_cast<int>(std::min<long>(config.n_batches, n_blocks));
    std::vector<double> total(static_cast<std::size_t>(4 * n_snap), 0.0);
    std::vector<std::vector<double>> batch_sums(static_cast<std::size_t>(n_batches), total);
    std::vector<long> batch_count(static_cast<std::size_t>(n_batches), 0);
    for (long b = 0; b < n_blocks; ++b) {
        auto& bs = batch_sums[static_cast<std::size_t>(b % n_batches)];
        const auto& src = block_sums[static_cast<std::size_t>(b)];
        for (std::size_t i = 0; i < src.size(); ++i) {
            total[i] += src[i];
            bs[i] += src[i];
        }
        batch_count[static_cast<std::size_t>(b % n_batches)] +=
            std::min(config.n_particles, (b + 1) * kBlockSize) - b * kBlockSize;
    }

    const double zs = v / d;
    const double n = static_cast<double>(config.n_particles);
    EnsembleStats out;
    out.n_particles = config.n_particles;
    auto central = [](const double* s, double count, double& mean, double& m2, double& m4) {
        mean = s[0] / count;
        double e2 = s[1] / count, e3 = s[2] / count, e4 = s[3] / count;
        m2 = std::max(e2 - mean * mean, 0.0);
        m4 = e4 - 4.0 * mean * e3 + 6.0 * mean * mean * e2 - 3.0 * mean * mean * mean * mean;
    };
    for (int k = 0; k < n_snap; ++k) {
        double mean, m2, m4;
        central(&total[static_cast<std::size_t>(4 * k)], n, mean, m2, m4);
        out.times.push_back(static_cast<double>(k * stride) * dt / d);
        out.mean_dz.push_back(mean * zs);
        out.mean_dz2.push_back(total[static_cast<std::size_t>(4 * k + 1)] / n * zs * zs);
        out.variance.push_back(m2 * zs * zs);
        out.se_mean.push_back(std::sqrt(m2 / n) * zs);
        out.se_var.push_back(std::sqrt(std::max(m4 - m2 * m2, 0.0) / n) * zs * zs);
    }
    for (int k = 0; k < n_snap; ++k) {
        int lo = std::max(k - 1, 0);
        int hi = std::min(k + 1, n_snap - 1);
        out.running_kdv.push_back(0.5 * (out.variance[hi] - out.variance[lo]) / (out.times[hi] - out.times[lo]));
    }
    if (n_batches >= 2) {
        for (int j = 0; j < n_batches; ++j) {
            std::vector<double> var(static_cast<std::size_t>(n_snap));
            double cnt = static_cast<double>(batch_count[static_cast<std::size_t>(j)]);
            for (int k = 0; k < n_snap; ++k) {
                double mean, m2, m4;
                central(&batch_sums[static_cast<std::size_t>(j)][static_cast<std::size_t>(4 * k)], cnt, mean, m2, m4);
                var[static_cast<std::size_t>(k)] = m2 * zs * zs;
            }
            out.batch_variance.push_back(std::move(var));
        }
    }
    if (config.t_max * d < 50.0) out.warnings.push_back("t_max below 50 / D; the late-time fit may not be diffusive");
    return out;
}

StatEstimate estimate_kappa_dv(const EnsembleStats& stats, const SimConfig& config) {
    const double t0 = (1.0 - config.fit_window) * stats.times.back();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < stats.times.size(); ++i) {
        if (stats.times[i] >= t0 - 1e-9 * stats.times.back()) idx.push_back(i);
    }
    if (idx.size() < 10) throw ConfigError("fit window holds fewer than 10 snapshots");

    std::vector<double> t, y, w;
    bool weighted = true;
    for (auto i : idx) weighted = weighted && stats.se_var.size() == stats.times.size() && stats.se_var[i] > 0.0;
    for (auto i : idx) {
        t.push_back(stats.times[i]);
        y.push_back(0.5 * stats.variance[i]);
        w.push_back(weighted ? 1.0 / (stats.se_var[i] * stats.se_var[i]) : 1.0);
    }
    LinearFit fit = weighted_fit(t, y, w);
    StatEstimate out{fit.slope, fit.slope_se};
    if (stats.batch_variance.size() >= 2) {
        std::vector<double> slopes;
        for (const auto& bv : stats.batch_variance) {
            std::vector<double> yb;
            for (auto i : idx) yb.push_back(0.5 * bv[i]);
            slopes.push_back(weighted_fit(t, yb, w).slope);
        }
        out.se = standard_error(slopes);
    }
    return out;
}

TgkResult estimate_kappa_tgk(const SimConfig& config) {
    validate(config);
    const double d = config.setup.dcoeff();
    const double v = config.setup.v();
    const double dt = config.dt * d;
    const double cutoff = config.vacf_cutoff * d;
    if (cutoff < 10.0 * (1.0 - 1e-12)) throw ConfigError("vacf_cutoff must be at least 10 / D");
    const long steps = steps_for(cutoff, dt, "vacf_cutoff");
    const long stride = config.vacf_lag_stride;
    if (steps % stride != 0) throw ConfigError("vacf_cutoff / dt must be a multiple of vacf_lag_stride");
    const long n_lags = steps / stride + 1;
    const long tail_start = n_lags - 1 - (n_lags - 1) / 10;
    const long segments = static_cast<long>(std::floor(config.t_max / config.vacf_cutoff + 1e-9));
    const long n_samples = config.n_particles * segments;
    if (n_samples < 2) throw ConfigError("t_max / vacf_cutoff leaves no VACF samples");
    const ScatteringSetup unit = unit_setup(config);
    const double h = static_cast<double>(stride) * dt;

    const bool martingale = config.vacf_control_variates && config.integrator == Integrator::GeodesicWalk;
    const bool regress = config.vacf_control_variates;

    // Per block, per lag: sums of x = mu0 (mu(lag) - M(lag)) and of x mu0, where M is the decayed sum of
    // innovations (zero when the martingale correction is off). Then sums over samples of mu0, mu0^2 and,
    // for the trapezoid integral and its last-10% tail, of y, y^2 and y mu0.
    const std::size_t n_extra = 8;
    const std::size_t width = static_cast<std::size_t>(2 * n_lags) + n_extra;
    const long n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
    std::vector<std::vector<double>> block_sums(static_cast<std::size_t>(n_blocks));
    for_each_block(n_blocks, config.threads, [&](long b) {
        std::vector<double> sums(width, 0.0);
        std::vector<double> corr(static_cast<std::size_t>(n_lags * kLanes));
        const GeodesicWalk* walk_ptr = nullptr;
        std::optional<GeodesicWalk> walk;
        if (martingale) {
            walk.emplace(unit, dt);
            walk_ptr = &*walk;
        }
        long first = b * kBlockSize;
        long last = std::min(n_samples, first + kBlockSize);
        for (long p = first; p < last; p += kLanes) {
            LaneGroup g = lane_group(config, kDomainVacf, p, last);
            std::array<double, kLanes> mu0{};
            std::array<double, kLanes> innov{};
            for (int l = 0; l < kLanes; ++l) {
                mu0[l] = g.states[l].mu;
                corr[static_cast<std::size_t>(l)] = mu0[l] * mu0[l];
            }
            auto on_chunk = [&](long k, int l, const PitchState& st) {
                corr[static_cast<std::size_t>(k * kLanes + l)] = mu0[l] * (st.mu - innov[l]);
            };
            if (walk_ptr) {
                const double r = walk_ptr->decay();
                evolve(g.states, g.streams, g.lanes, config, unit, dt, n_lags - 1, stride, on_chunk,
                       [&](int l, double before, double after) {
                    innov[l] = r * innov[l] + (after - walk_ptr->mean_next(before));
                });
            } else {
                evolve(g.states, g.streams, g.lanes, config, unit, dt, n_lags - 1, stride, on_chunk);
            }
            for (int l = 0; l < g.lanes; ++l) {
                auto at = [&](long j) { return corr[static_cast<std::size_t>(j * kLanes + l)]; };
                double integral = 0.0, tail = 0.0;
                for (long j = 0; j + 1 < n_lags; ++j) {
                    double piece = 0.5 * h * (at(j) + at(j + 1));
                    integral += piece;
                    if (j >= tail_start) tail += piece;
                }
                for (long j = 0; j < n_lags; ++j) {
                    sums[static_cast<std::size_t>(2 * j)] += at(j);
                    sums[static_cast<std::size_t>(2 * j + 1)] += at(j) * mu0[l];
                }
                double* extra = &sums[static_cast<std::size_t>(2 * n_lags)];
                extra[0] += mu0[l];
                extra[1] += mu0[l] * mu0[l];
                extra[2] += integral;
                extra[3] += integral * integral;
                extra[4] += integral * mu0[l];
                extra[5] += tail;
                extra[6] += tail * tail;
                extra[7] += tail * mu0[l];
            }
        }
        block_sums[static_cast<std::size_t>(b)] = std::move(sums);
    });

    std::vector<double> total(width, 0.0);
    for (const auto& bs : block_sums) {
        for (std::size_t i = 0; i < width; ++i) total[i] += bs[i];
    }
    const double n = static_cast<double>(n_samples);
    const double* extra = &total[static_cast<std::size_t>(2 * n_lags)];
    const double mean_mu0 = extra[0] / n;
    const double var_mu0 = extra[1] / n - mean_mu0 * mean_mu0;
    // Mean of y corrected by the regression on mu0 (known mean 0), and the residual variance of one sample.
    auto regressed = [&](double sum_y, double sum_y2, double sum_ymu0) {
        double mean_y = sum_y / n;
        double cov = sum_ymu0 / n - mean_y * mean_mu0;
        double beta = regress && var_mu0 > 0.0 ? cov / var_mu0 : 0.0;
        double var = std::max(sum_y2 / n - mean_y * mean_y - beta * cov, 0.0);
        return std::pair{mean_y - beta * mean_mu0, var};
    };

    TgkResult out;
    out.vacf.n_samples = n_samples;
    double cum = 0.0;
    for (long j = 0; j < n_lags; ++j) {
        double sum_x = total[static_cast<std::size_t>(2 * j)];
        double c = v * v * regressed(sum_x, 0.0, total[static_cast<std::size_t>(2 * j + 1)]).first;
        if (j > 0) cum += 0.5 * (h / d) * (out.vacf.vacf.back() + c);
        out.vacf.lags.push_back(static_cast<double>(j) * h / d);
        out.vacf.vacf.push_back(c);
        out.vacf.cumulative.push_back(cum);
    }
    auto [mean_i, var_i] = regressed(extra[2], extra[3], extra[4]);
    auto [mean_tail, var_tail] = regressed(extra[5], extra[6], extra[7]);
    const double dof = n - (regress ? 2.0 : 1.0);
    double scale = v * v / d;
    out.kappa = {scale * mean_i, scale * std::sqrt(var_i / dof)};
    // The noise floor is the larger of the tail's own noise and the error bar of the full integral.
    double tail_noise = std::max(std::sqrt(var_tail / dof), std::sqrt(var_i / dof));
    if (std::abs(mean_tail) > 3.0 * tail_noise + 1e-12) {
        throw NumericalFailure("VACF integral not converged: last 10% of the cutoff changes it by " +
                               std::to_string(scale * mean_tail) + " (noise " + std::to_string(scale * tail_noise) +
                               ")");
    }
    return out;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(long n, double alpha) {
    if (n < 1 || !(alpha > 0.0 && alpha < 1.0)) throw DomainError("ks_critical_value needs n >= 1 and 0 < alpha < 1");
    double lo = 0.2, hi = 5.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (kolmogorov_survival(mid) > alpha ? lo : hi) = mid;
    }
    double sn = std::sqrt(static_cast<double>(n));
    return 0.5 * (lo + hi) / (sn + 0.12 + 0.11 / sn);
}

EquilibriumCheck equilibrium_check(const SimConfig& config) {
    validate(config);
    const double d = config.setup.dcoeff();
    const double xi = config.setup.xi();
    const double dt = config.dt * d;
    if (config.t_max * d < 10.0 * (1.0 - 1e-12)) throw ConfigError("equilibrium check needs t_max >= 10 / D");
    const long steps = steps_for(config.t_max * d, dt, "t_max");
    const ScatteringSetup unit = unit_setup(config);

    std::vector<double> mu(static_cast<std::size_t>(config.n_particles));
    const long n_blocks = (config.n_particles + kBlockSize - 1) / kBlockSize;
    for_each_block(n_blocks, config.threads, [&](long b) {
        long first = b * kBlockSize;
        long last = std::min(config.n_particles, first + kBlockSize);
        for (long p = first; p < last; p += kLanes) {
            LaneGroup g = lane_group(config, kDomainEquilibrium, p, last);
            evolve(g.states, g.streams, g.lanes, config, unit, dt, 1, steps, [&](long, int l, const PitchState& st) {
                mu[static_cast<std::size_t>(p + l)] = st.mu;
            });
        }
    });

    EquilibriumCheck out;
    out.n = config.n_particles;
    const double n = static_cast<double>(out.n);
    double sum = 0.0, sum2 = 0.0;
    for (double m : mu) {
        sum += m;
        sum2 += m * m;
    }
    out.mean_mu = sum / n;
    out.mean_mu_se = std::sqrt(std::max(sum2 / n - out.mean_mu * out.mean_mu, 0.0) / (n - 1.0));
    out.expected_mean_mu = langevin(xi);

    std::sort(mu.begin(), mu.end());
    auto cdf = [xi](double x) {
        if (xi == 0.0) return 0.5 * (x + 1.0);
        return std::expm1(xi * (x + 1.0)) / std::expm1(2.0 * xi);
    };
    auto ks = [&](auto&& f) {
        double dist = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            double fi = f(mu[i]);
            dist = std::max({dist, static_cast<double>(i + 1) / n - fi, fi - static_cast<double>(i) / n});
        }
        return dist;
    };
    out.ks_distance = ks(cdf);
    out.ks_uniform = ks([](double x) { return 0.5 * (x + 1.0); });
    out.ks_critical_1pct = ks_critical_value(out.n, 0.01);
    double sn = std::sqrt(n);
    out.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * out.ks_distance);
    return out;
}

}  // namespace fdiff
