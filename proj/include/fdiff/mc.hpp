#pragma once

#include "fdiff/errors.hpp"
#include "fdiff/models.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace fdiff {

enum class Integrator {
    // Fixed-angle rotation on the unit sphere of directions with Strang-split focusing drift.
    GeodesicWalk,
    // Euler-Maruyama in mu with a single reflection at mu = +-1 (see step()).
    EulerReflect,
};

std::optional<Integrator> parse_integrator(const std::string& text);
std::string integrator_name(Integrator i);

struct SimConfig {
    ScatteringSetup setup = ScatteringSetup::from_xi(1.0, 1.0, 0.0);
    long n_particles = 10000;
    double dt = 5e-3;     // physical time; must satisfy dt <= 0.01 / D
    double t_max = 100.0;
    int n_snapshots = 200;
    std::uint64_t seed = 1;
    double fit_window = 0.5;  // trailing fraction of [0, t_max] used for the slope fit
    double vacf_cutoff = 20.0;
    int vacf_lag_stride = 10;  // steps between recorded VACF lags
    int n_batches = 20;
    // Zero-mean control variates in the VACF estimator (see estimate_kappa_tgk).
    bool vacf_control_variates = true;
    int threads = 0;  // 0 = hardware concurrency
    Integrator integrator = Integrator::GeodesicWalk;
};

// Checks the documented bounds; throws ConfigError.
void validate(const SimConfig& config);

struct PitchState {
    double z = 0.0;
    double mu = 0.0;
};

// One Euler-Maruyama step of dmu = [dD_mumu/dmu + (v/2L)(1 - mu^2)] dt + sqrt(2 D_mumu) dW, dz = v mu dt,
// with a single reflection at mu = +-1. `noise` is a standard normal.
inline PitchState step(const PitchState& s, const ScatteringSetup& setup, double dt, double noise) {
    double d = setup.dcoeff();
    double one_minus = 1.0 - s.mu * s.mu;
    double drift = -2.0 * d * s.mu + d * setup.xi() * one_minus;
    double amp = std::sqrt(2.0 * d * std::max(one_minus, 0.0) * dt);
    PitchState out{s.z + setup.v() * s.mu * dt, s.mu + drift * dt + amp * noise};
    if (out.mu > 1.0) out.mu = 2.0 - out.mu;
    else if (out.mu < -1.0) out.mu = -2.0 - out.mu;
    if (!std::isfinite(out.mu) || !std::isfinite(out.z)) throw NumericalFailure("non-finite pitch-angle state");
    return out;
}

// cos(phi) for an azimuth phi uniform on [0, 2 pi), from 32 random bits: the top bit is the sign and
// the low 31 bits give an angle t uniform on (0, pi/2), whose cosine is evaluated by its Taylor
// polynomial (truncation below 1e-16 there).
inline double random_cosine(std::uint32_t bits) {
    double t = (static_cast<double>(bits & 0x7fffffffu) + 0.5) * (0.5 * std::numbers::pi * 0x1.0p-31);
    double x = t * t;
    double c = 1.0 / 2432902008176640000.0;  // 1/20!
    c = -1.0 / 6402373705728000.0 + x * c;
    c = 1.0 / 20922789888000.0 + x * c;
    c = -1.0 / 87178291200.0 + x * c;
    c = 1.0 / 479001600.0 + x * c;
    c = -1.0 / 3628800.0 + x * c;
    c = 1.0 / 40320.0 + x * c;
    c = -1.0 / 720.0 + x * c;
    c = 1.0 / 24.0 + x * c;
    c = -0.5 + x * c;
    c = 1.0 + x * c;
    return (bits >> 31) ? -c : c;
}

// Isotropic scattering as a geodesic random walk: each step turns the direction by the fixed angle
// s0 with cos s0 = exp(-2 D dt) towards a uniformly random azimuth, so E[mu'|mu] = mu exp(-2 D dt)
// exactly. The focusing drift D xi (1 - mu^2) is applied in two half steps around the rotation.
class GeodesicWalk {
public:
    GeodesicWalk(const ScatteringSetup& setup, double dt);

    // `bits` fixes the azimuth of the turn (see random_cosine).
    PitchState operator()(const PitchState& s, std::uint32_t bits) const {
        double mu = s.mu + half_drift_ * (1.0 - s.mu * s.mu);
        double root = std::sqrt(std::max(1.0 - mu * mu, 0.0));
        mu = mu * cos_ - root * sin_ * random_cosine(bits);
        mu += half_drift_ * (1.0 - mu * mu);
        return {s.z + vdt_ * s.mu, mu};
    }

    // E[mu' | mu] over the azimuth, in closed form.
    double mean_next(double mu) const {
        double a = mu + half_drift_ * (1.0 - mu * mu);
        double second = a * a * cos_ * cos_ + 0.5 * (1.0 - a * a) * sin_ * sin_;
        return a * cos_ + half_drift_ * (1.0 - second);
    }
    // Per-step decay factor exp(-2 D dt) of mu without focusing.
    double decay() const { return cos_; }

private:
    double cos_;
    double sin_;
    double half_drift_;
    double vdt_;
};

struct EnsembleStats {
    long n_particles = 0;
    std::vector<double> times;
    std::vector<double> mean_dz;
    std::vector<double> mean_dz2;
    std::vector<double> variance;
    std::vector<double> running_kdv;
    std::vector<double> se_mean;
    std::vector<double> se_var;
    // variance(t) of each particle batch (batch = block index mod n_batches).
    std::vector<std::vector<double>> batch_variance;
    std::vector<std::string> warnings;
};

EnsembleStats run_ensemble(const SimConfig& config);

struct StatEstimate {
    double value = 0.0;
    double se = 0.0;
};

// Weighted least-squares slope of variance/2 over the trailing fit window. The standard error
// comes from the spread of batch slopes, or from the fit residuals when no batches are present.
StatEstimate estimate_kappa_dv(const EnsembleStats& stats, const SimConfig& config);

struct VacfRecord {
    std::vector<double> lags;
    std::vector<double> vacf;
    std::vector<double> cumulative;
    long n_samples = 0;
};

struct TgkResult {
    StatEstimate kappa;
    VacfRecord vacf;
};

// v^2 int_0^cutoff <mu(tau) mu(0)> dtau over independent trajectories of length vacf_cutoff, started
// from uniform pitch. The step budget matches the DV run: n_particles * floor(t_max / cutoff)
// trajectories. With vacf_control_variates each sample mu0 mu(tau) is corrected by two terms of
// known zero mean: mu0 times the decayed sum of the walk's innovations mu' - E[mu'|mu] (geodesic
// walk only), and a regression on mu0 itself, whose mean is exactly 0 for uniform pitch.
TgkResult estimate_kappa_tgk(const SimConfig& config);

struct EquilibriumCheck {
    long n = 0;
    double ks_distance = 0.0;     // against normalized e^{xi mu}
    double ks_uniform = 0.0;      // against the uniform distribution
    double ks_critical_1pct = 0.0;
    double p_value = 0.0;
    double mean_mu = 0.0;
    double mean_mu_se = 0.0;
    double expected_mean_mu = 0.0;
    bool accepted() const { return ks_distance < ks_critical_1pct; }
};

// Pitch distribution of the ensemble at t_max.
EquilibriumCheck equilibrium_check(const SimConfig& config);

// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);
// Critical KS distance for sample size n at significance alpha (Stephens' finite-n correction).
double ks_critical_value(long n, double alpha);

}  // namespace fdiff
