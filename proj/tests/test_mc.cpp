#include "fdiff/coefficients.hpp"
#include "fdiff/errors.hpp"
#include "fdiff/mc.hpp"
#include "fdiff/models.hpp"
#include "fdiff/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace fdiff;

namespace {

SimConfig small_config(double xi, long n, double t_max) {
    SimConfig c;
    c.setup = ScatteringSetup::from_xi(1.0, 1.0, xi);
    c.n_particles = n;
    c.t_max = t_max;
    c.n_snapshots = 100;
    c.seed = 11;
    c.threads = 1;
    return c;
}

}  // namespace

TEST_SUITE("mc") {

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("particle streams are pure functions of their coordinates") {
    ParticleStream a(5, 0, 17);
    ParticleStream b(5, 0, 17);
    CHECK(a.words(3) == b.words(3));
    CHECK(a.words(3) != a.words(4));
    CHECK(a.words(3) != ParticleStream(5, 1, 17).words(3));
    CHECK(a.words(3) != ParticleStream(5, 0, 18).words(3));
    CHECK(a.words(3) != ParticleStream(6, 0, 17).words(3));
    CHECK(a.normals(2) == b.normals(2));

    double sum = 0.0, sum2 = 0.0, usum = 0.0;
    const int n = 50000;
    for (int j = 0; j < n; ++j) {
        auto z = a.normals(static_cast<std::uint64_t>(j));
        auto u = a.uniforms(static_cast<std::uint64_t>(j));
        for (double x : z) {
            sum += x;
            sum2 += x * x;
        }
        for (double x : u) {
            CHECK(x > 0.0);
            CHECK(x < 1.0);
            usum += x;
        }
    }
    CHECK(std::abs(sum / (2 * n)) < 4.0 / std::sqrt(2.0 * n));
    CHECK(std::abs(sum2 / (2 * n) - 1.0) < 4.0 * std::sqrt(2.0 / (2 * n)));
    CHECK(std::abs(usum / (2 * n) - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / (2 * n)));
}

TEST_CASE("Euler step examples") {
    auto s = ScatteringSetup::from_xi(1.0, 1.0, 0.0);
    PitchState top = step({0.0, 1.0}, s, 1e-3, 0.0);
    CHECK(top.mu == doctest::Approx(1.0 - 2e-3));
    CHECK(top.z == doctest::Approx(1e-3));

    auto frozen = ScatteringSetup::from_xi(2.0, 1e-300, 0.0);
    PitchState free = step({1.0, 0.4}, frozen, 0.01, 1.7);
    CHECK(free.z == doctest::Approx(1.0 + 2.0 * 0.4 * 0.01));
    CHECK(free.mu == 0.4);

    PitchState reflected = step({0.0, 0.99}, s, 5e-3, 3.0);
    double raw = 0.99 - 2.0 * 0.99 * 5e-3 + std::sqrt(2.0 * (1.0 - 0.99 * 0.99) * 5e-3) * 3.0;
    REQUIRE(raw > 1.0);
    CHECK(reflected.mu == doctest::Approx(2.0 - raw));

    CHECK_THROWS_AS(step({0.0, 0.2}, s, 1e-3, std::nan("")), NumericalFailure);
}

TEST_CASE("random azimuth cosine") {
    for (std::uint32_t bits : {0u, 1u, 12345u, 0x40000000u, 0x7fffffffu, 0x80000000u, 0xdeadbeefu, 0xffffffffu}) {
        double t = (static_cast<double>(bits & 0x7fffffffu) + 0.5) * (0.5 * std::numbers::pi * 0x1.0p-31);
        double expected = (bits >> 31) ? -std::cos(t) : std::cos(t);
        CHECK(std::abs(random_cosine(bits) - expected) < 2e-16);
    }
    double m1 = 0.0, m2 = 0.0;
    const int n = 1 << 16;
    for (int i = 0; i < n; ++i) {
        double c = random_cosine(static_cast<std::uint32_t>(i) * 65536u + 32768u);
        m1 += c;
        m2 += c * c;
    }
    CHECK(std::abs(m1 / n) < 1e-12);
    CHECK(m2 / n == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("geodesic walk keeps the mean pitch decay exact") {
    auto s = ScatteringSetup::from_xi(1.0, 1.0, 0.0);
    const double dt = 5e-3;
    GeodesicWalk walk(s, dt);
    for (double mu : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
        double mean = 0.0;
        const int n = 1 << 12;
        for (int i = 0; i < n; ++i) {
            PitchState out = walk({0.0, mu}, static_cast<std::uint32_t>(i) * (1u << 20) + (1u << 19));
            CHECK(std::abs(out.mu) <= 1.0);
            CHECK(out.z == doctest::Approx(mu * dt));
            mean += out.mu;
        }
        CHECK(mean / n == doctest::Approx(mu * std::exp(-2.0 * dt)).epsilon(1e-9));
    }
}

TEST_CASE("configuration bounds") {
    SimConfig c = small_config(0.0, 100, 10.0);
    c.dt = 0.02;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config(0.0, 100, 10.0);
    c.n_particles = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config(0.0, 100, 10.0);
    c.t_max = 10.0025;
    CHECK_THROWS_AS(run_ensemble(c), ConfigError);
    c = small_config(0.0, 100, 10.0);
    c.n_snapshots = 30;
    CHECK_THROWS_AS(run_ensemble(c), ConfigError);
    CHECK(parse_integrator("euler") == Integrator::EulerReflect);
    CHECK(integrator_name(Integrator::GeodesicWalk) == "geodesic");
    CHECK_FALSE(parse_integrator("rk4").has_value());
}

TEST_CASE("ensemble statistics invariants") {
    for (Integrator integ : {Integrator::GeodesicWalk, Integrator::EulerReflect}) {
        SimConfig c = small_config(0.3, 2000, 10.0);
        c.integrator = integ;
        EnsembleStats st = run_ensemble(c);
        REQUIRE(st.times.size() == 101);
        CHECK(st.mean_dz[0] == 0.0);
        CHECK(st.variance[0] == 0.0);
        for (std::size_t k = 0; k < st.times.size(); ++k) {
            CHECK(st.variance[k] >= 0.0);
            CHECK(st.times[k] == doctest::Approx(0.1 * static_cast<double>(k)));
        }
        CHECK(st.batch_variance.size() == 2);
        CHECK(st.warnings.size() == 1);
        // Mean drift approaches kappa_z t.
        CHECK(st.mean_dz.back() / 10.0 == doctest::Approx(langevin(0.3)).epsilon(0.15));
    }
}

TEST_CASE("results do not depend on the worker count") {
    SimConfig c = small_config(0.2, 3000, 5.0);
    c.threads = 1;
    EnsembleStats one = run_ensemble(c);
    c.threads = 3;
    EnsembleStats three = run_ensemble(c);
    CHECK(one.variance == three.variance);
    CHECK(one.mean_dz == three.mean_dz);
    CHECK(one.se_var == three.se_var);
    CHECK(one.batch_variance == three.batch_variance);

    c.vacf_cutoff = 10.0;
    c.t_max = 10.0;
    c.n_particles = 1500;
    c.threads = 1;
    TgkResult t1 = estimate_kappa_tgk(c);
    c.threads = 4;
    TgkResult t4 = estimate_kappa_tgk(c);
    CHECK(t1.kappa.value == t4.kappa.value);
    CHECK(t1.vacf.vacf == t4.vacf.vacf);

    c.threads = 1;
    EquilibriumCheck e1 = equilibrium_check(c);
    c.threads = 2;
    EquilibriumCheck e2 = equilibrium_check(c);
    CHECK(e1.ks_distance == e2.ks_distance);
    CHECK(e1.mean_mu == e2.mean_mu);

    c.seed = 12;
    CHECK(equilibrium_check(c).mean_mu != e1.mean_mu);
}

TEST_CASE("slope of a synthetic linear variance") {
    EnsembleStats st;
    const double kappa = 0.37;
    for (int k = 0; k <= 40; ++k) {
        double t = 0.5 * k;
        st.times.push_back(t);
        st.variance.push_back(2.0 * kappa * t);
        st.se_var.push_back(0.01 * (1.0 + t));
    }
    SimConfig c;
    c.fit_window = 0.5;
    StatEstimate e = estimate_kappa_dv(st, c);
    CHECK(e.value == doctest::Approx(kappa).epsilon(1e-12));
    CHECK(e.se < 1e-12);

    c.fit_window = 0.2;
    CHECK_THROWS_AS(estimate_kappa_dv(st, c), ConfigError);
}

TEST_CASE("unfocused displacement-variance error bars are honest") {
    // 20 seeds: the 2-sigma interval should cover 1/6 in roughly 95% of the runs.
    int covered = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SimConfig c = small_config(0.0, 10000, 50.0);
        c.dt = 0.01;
        c.seed = seed;
        c.threads = 0;
        StatEstimate e = estimate_kappa_dv(run_ensemble(c), c);
        if (std::abs(e.value - 1.0 / 6.0) <= 2.0 * e.se) ++covered;
    }
    CHECK(covered >= 16);
}

TEST_CASE("velocity autocorrelation record") {
    SimConfig c = small_config(0.0, 2000, 20.0);
    c.vacf_cutoff = 10.0;
    TgkResult r = estimate_kappa_tgk(c);
    CHECK(r.vacf.n_samples == 4000);
    CHECK(r.vacf.lags.front() == 0.0);
    CHECK(r.vacf.lags.back() == doctest::Approx(10.0));
    CHECK(r.vacf.vacf[0] == doctest::Approx(1.0 / 3.0).epsilon(0.05));
    CHECK(r.vacf.cumulative.back() == doctest::Approx(r.kappa.value).epsilon(1e-9));
    CHECK(std::abs(r.kappa.value - 1.0 / 6.0) < 4.0 * r.kappa.se);

    c.vacf_cutoff = 5.0;
    CHECK_THROWS_AS(estimate_kappa_tgk(c), ConfigError);
}

TEST_CASE("VACF control variates keep the estimate and shrink its error bar") {
    for (double xi : {0.0, 0.3}) {
        CAPTURE(xi);
        SimConfig c = small_config(xi, 4000, 20.0);
        c.vacf_cutoff = 10.0;
        TgkResult with = estimate_kappa_tgk(c);
        c.vacf_control_variates = false;
        TgkResult plain = estimate_kappa_tgk(c);
        CHECK(with.kappa.se < 0.3 * plain.kappa.se);
        CHECK(std::abs(with.kappa.value - plain.kappa.value) < 3.0 * plain.kappa.se);
        double expected = kappa_zz_bw(c.setup).value;
        CHECK(std::abs(with.kappa.value - expected) < 4.0 * with.kappa.se);
    }
    SimConfig e = small_config(0.3, 4000, 20.0);
    e.vacf_cutoff = 10.0;
    e.integrator = Integrator::EulerReflect;
    TgkResult euler = estimate_kappa_tgk(e);
    e.vacf_control_variates = false;
    CHECK(euler.kappa.se < estimate_kappa_tgk(e).kappa.se);
}

TEST_CASE("equilibrium pitch distribution") {
    SimConfig c = small_config(0.5, 20000, 10.0);
    EquilibriumCheck e = equilibrium_check(c);
    CHECK(e.accepted());
    CHECK(e.ks_uniform > e.ks_critical_1pct);
    CHECK(e.expected_mean_mu == doctest::Approx(0.1639534137).epsilon(1e-9));
    CHECK(std::abs(e.mean_mu - e.expected_mean_mu) < 4.0 * e.mean_mu_se);

    SimConfig flat = small_config(0.0, 20000, 10.0);
    EquilibriumCheck u = equilibrium_check(flat);
    CHECK(u.accepted());
    CHECK(u.ks_distance == u.ks_uniform);

    c.t_max = 5.0;
    CHECK_THROWS_AS(equilibrium_check(c), ConfigError);
}

TEST_CASE("Kolmogorov distribution") {
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(1.3580986) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(kolmogorov_survival(1.6276236) == doctest::Approx(0.01).epsilon(1e-5));
    long n = 1000000;
    double sn = std::sqrt(static_cast<double>(n));
    CHECK(ks_critical_value(n, 0.01) == doctest::Approx(1.6276236 / (sn + 0.12 + 0.11 / sn)).epsilon(1e-6));
    CHECK_THROWS_AS(ks_critical_value(0, 0.01), DomainError);
}

}
