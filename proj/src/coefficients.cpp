#include "fdiff/coefficients.hpp"

#include "fdiff/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace fdiff {

namespace {

using Vec = Eigen::VectorXd;

// Grid functions shared by every nested coefficient integral.
struct Equilibrium {
    const PitchGrid& grid;
    Vec mu;
    Vec weight;          // e^{M}
    Vec inverse_weight;  // e^{-M}
    Vec reduced;         // D_mumu / (1 - mu^2)
    Vec one_minus_mu2;
    double norm = 0.0;   // int e^M
    double mean_mu = 0.0;

    Equilibrium(const ScatteringSetup& setup, const PitchGrid& g) : grid(g) {
        mu = grid.nodes();
        int n = grid.size();
        weight.resize(n);
        inverse_weight.resize(n);
        reduced.resize(n);
        one_minus_mu2.resize(n);
        for (int i = 0; i < n; ++i) {
            double m = mu_potential(setup, mu[i]);
            weight[i] = std::exp(m);
            inverse_weight[i] = std::exp(-m);
            reduced[i] = setup.dmumu_reduced(mu[i]);
            one_minus_mu2[i] = (1.0 - mu[i]) * (1.0 + mu[i]);
        }
        norm = grid.integrate(weight);
        mean_mu = grid.integrate(mu.cwiseProduct(weight)) / norm;
    }

    // 2 int_{-1}^{nu} e^M / int e^M - 1
    Vec g1() const { return 2.0 * grid.cumulative(weight) / norm - Vec::Ones(grid.size()); }

    // Adjoint of G -> e^M (A_G - <A_G>), A_G' = e^{-M} G / D_mumu:
    // int u e^M (A_G - <A_G>) = -int r_u G with r_u = e^{-M} / D_mumu * int_{-1}^{mu} (u - ubar) e^M.
    // The primitive vanishes at both ends, so r_u is as smooth as u.
    Vec adjoint(const Vec& u) const {
        double ubar = grid.integrate(u.cwiseProduct(weight)) / norm;
        Vec centered = (u - Vec::Constant(grid.size(), ubar)).cwiseProduct(weight);
        Vec primitive = grid.cumulative(centered);
        return primitive.cwiseProduct(inverse_weight).cwiseQuotient(reduced.cwiseProduct(one_minus_mu2));
    }
};

// L (1 - 2 e^M / int e^M) for the isotropic model, written without the 1/xi cancellation.
Vec focusing_length_term(const ScatteringSetup& setup, const Vec& mu) {
    double xi = setup.xi();
    double scale = setup.v() / (2.0 * setup.dcoeff());
    int n = static_cast<int>(mu.size());
    Vec out(n);
    if (xi == 0.0) {
        for (int i = 0; i < n; ++i) out[i] = -scale * mu[i];
        return out;
    }
    double sinh_minus = 0.0;  // sinh(xi) - xi
    if (std::fabs(xi) < 1.0) {
        double term = xi * xi * xi / 6.0;
        for (int k = 1; k < 30 && term != 0.0; ++k) {
            sinh_minus += term;
            term *= xi * xi / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        }
    } else {
        sinh_minus = std::sinh(xi) - xi;
    }
    double denom = xi * std::sinh(xi);
    for (int i = 0; i < n; ++i) {
        out[i] = scale * (sinh_minus - xi * std::expm1(xi * mu[i])) / denom;
    }
    return out;
}

void require_isotropic(const ScatteringSetup& setup, const char* what) {
    if (setup.model() != ScatteringModel::Isotropic) {
        throw DomainError(std::string(what) + " is implemented for the isotropic model only");
    }
}

template <class Fn>
Estimate doubled(const CoefficientOptions& opts, double unit, const char* name, Fn&& fn) {
    auto coarse = pitch_grid(opts.grid_size);
    auto fine = pitch_grid(2 * opts.grid_size);
    double a = fn(*coarse);
    double b = fn(*fine);
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw NumericalFailure(std::string(name) + ": non-finite quadrature result");
    }
    double rounding = 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(a), unit);
    Estimate est{a, std::fabs(a - b) + rounding};
    if (est.error > opts.tolerance * std::max(std::fabs(a), unit)) {
        std::ostringstream msg;
        msg << name << ": grid-doubling error " << est.error << " exceeds tolerance";
        throw NumericalFailure(msg.str());
    }
    return est;
}

}  // namespace

double CoefficientReport::err_max() const {
    return std::max({kappa_z.error, kappa_zz_bw.error, kappa_zz_wq.error, kappa_tz.error, kappa_tzz.error,
                     kappa_parallel0.error, kappa_dv.error});
}

double kappa_z_on_grid(const ScatteringSetup& setup, const PitchGrid& grid) {
    Equilibrium eq(setup, grid);
    return setup.v() * eq.mean_mu;
}

double kappa_zz_bw_on_grid(const ScatteringSetup& setup, const PitchGrid& grid, double mu0) {
    Equilibrium eq(setup, grid);
    // (v^2/4) int (mu - J) e^M A, A(mu) = int_{mu0}^{mu} e^{-M} (1 - nu^2) / D_nunu
    Vec inner = eq.inverse_weight.cwiseQuotient(eq.reduced);
    Vec a = grid.cumulative_from(inner, mu0);
    Vec h = (eq.mu - Vec::Constant(grid.size(), eq.mean_mu)).cwiseProduct(eq.weight);
    return 0.25 * setup.v() * setup.v() * grid.integrate(h.cwiseProduct(a));
}

double kappa_zz_bw_adjoint_on_grid(const ScatteringSetup& setup, const PitchGrid& grid) {
    Equilibrium eq(setup, grid);
    Vec h = (eq.mu - Vec::Constant(grid.size(), eq.mean_mu)).cwiseProduct(eq.weight);
    Vec primitive = grid.cumulative(h);
    Vec integrand = primitive.cwiseProduct(eq.inverse_weight).cwiseQuotient(eq.reduced);
    return -0.25 * setup.v() * setup.v() * grid.integrate(integrand);
}

double kappa_tz_on_grid(const ScatteringSetup& setup, const PitchGrid& grid) {
    return kappa_ntz_on_grid(1, setup, grid);
}

double kappa_tz_reference_point_on_grid(const ScatteringSetup& setup, const PitchGrid& grid, double mu0) {
    if (!(mu0 > -1.0 && mu0 < 1.0)) throw DomainError("reference point must lie strictly inside (-1, 1)");
    Equilibrium eq(setup, grid);
    int n = grid.size();
    // Inner integrand psi / (1 - nu^2), psi = e^{-M} G_1 / reduced D. Split off the endpoint poles:
    // psi/(1-nu^2) = smooth + psi(1)/(2(1-nu)) + psi(-1)/(2(1+nu)).
    Vec psi = eq.inverse_weight.cwiseProduct(eq.g1()).cwiseQuotient(eq.reduced);
    double psi_plus = grid.interpolate(psi, 1.0);
    double psi_minus = grid.interpolate(psi, -1.0);
    Vec smooth(n);
    for (int i = 0; i < n; ++i) {
        double x = eq.mu[i];
        smooth[i] = 0.5 * (psi[i] - psi_plus) / (1.0 - x) + 0.5 * (psi[i] - psi_minus) / (1.0 + x);
    }
    Vec smooth_part = grid.cumulative_from(smooth, mu0);
    Vec h = (eq.mu - Vec::Constant(n, eq.mean_mu)).cwiseProduct(eq.weight);
    double h_total = grid.integrate(h);
    double outer = grid.integrate(h.cwiseProduct(smooth_part));
    outer += 0.5 * psi_plus * (std::log1p(-mu0) * h_total - grid.integrate_log_one_minus(h));
    outer += 0.5 * psi_minus * (grid.integrate_log_one_plus(h) - std::log1p(mu0) * h_total);
    // kappa_tz = (v/2) J int e^M A - (v/2) int mu e^M A
    return -0.5 * setup.v() * outer;
}

double kappa_ntz_on_grid(int n, const ScatteringSetup& setup, const PitchGrid& grid) {
    if (n < 1) throw DomainError("kappa_ntz needs n >= 1");
    Equilibrium eq(setup, grid);
    // kappa_ntz = -(v/2) int mu beta_n with beta_n built from beta_{n-1} by the same
    // "value minus weighted mean" map; transposing each level moves the nesting onto u.
    Vec u = eq.mu;
    for (int level = 1; level < n; ++level) {
        Vec r = eq.adjoint(u);
        u = -grid.tail(r);
    }
    Vec r = eq.adjoint(u);
    return 0.5 * setup.v() * grid.integrate(r.cwiseProduct(eq.g1()));
}

double kappa_tzz_on_grid(const ScatteringSetup& setup, const PitchGrid& grid) {
    require_isotropic(setup, "kappa_tzz");
    Equilibrium eq(setup, grid);
    int n = grid.size();
    double v = setup.v();
    Vec g1 = eq.g1();
    Vec r_mu = eq.adjoint(eq.mu);
    double ktz = 0.5 * v * grid.integrate(r_mu.cwiseProduct(g1));

    // kappa_tzz = -(v/2) int mu T[Q], Q(nu) = kappa_tz + int_{-1}^{nu} (B_1 + v rho beta_1),
    // B_1 = L (1 - 2 e^M / Z) + v T[D_1 - J]; transposing gives the four terms below.
    Vec w = grid.tail(r_mu);
    Vec l_term = focusing_length_term(setup, eq.mu);
    Vec d1 = 2.0 * grid.cumulative(eq.mu.cwiseProduct(eq.weight)) / eq.norm;
    for (int i = 0; i < n; ++i) d1[i] += 0.5 * eq.one_minus_mu2[i] - eq.mean_mu;
    Vec r_w = eq.adjoint(w);
    Vec r_mu_w = eq.adjoint(eq.mu.cwiseProduct(w));

    double sum = ktz * grid.integrate(r_mu);
    sum += grid.integrate(w.cwiseProduct(l_term));
    sum -= v * grid.integrate(r_w.cwiseProduct(d1));
    sum -= v * grid.integrate(r_mu_w.cwiseProduct(g1));
    return 0.5 * v * sum;
}

Estimate kappa_z(const ScatteringSetup& setup) {
    double value = setup.v() * equilibrium_mean_mu(setup);
    return {value, 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(value)};
}

double kappa_parallel0(const ScatteringSetup& setup) {
    switch (setup.model()) {
        case ScatteringModel::Isotropic:
            return setup.v() * setup.v() / (6.0 * setup.dcoeff());
    }
    return 0.0;
}

double eta_020(const ScatteringSetup& setup) {
    return setup.xi() * setup.xi() * kappa_parallel0(setup) / 5.0;
}

Estimate kappa_zz_bw(const ScatteringSetup& setup, const CoefficientOptions& opts) {
    double unit = setup.v() * setup.v() / setup.dcoeff();
    return doubled(opts, unit, "kappa_zz_bw",
                   [&](const PitchGrid& g) { return kappa_zz_bw_on_grid(setup, g, opts.mu0); });
}

Estimate kappa_zz_wq(const ScatteringSetup& setup, const CoefficientOptions& opts) {
    Estimate bw = kappa_zz_bw(setup, opts);
    return {bw.value + eta_020(setup), bw.error};
}

Estimate kappa_tz(const ScatteringSetup& setup, const CoefficientOptions& opts) {
    double unit = setup.v() / setup.dcoeff();
    return doubled(opts, unit, "kappa_tz", [&](const PitchGrid& g) { return kappa_tz_on_grid(setup, g); });
}

Estimate kappa_tzz(const ScatteringSetup& setup, const CoefficientOptions& opts) {
    double unit = setup.v() * setup.v() / (setup.dcoeff() * setup.dcoeff());
    return doubled(opts, unit, "kappa_tzz", [&](const PitchGrid& g) { return kappa_tzz_on_grid(setup, g); });
}

Estimate kappa_ntz(int n, const ScatteringSetup& setup, const CoefficientOptions& opts) {
    if (n < 2) throw DomainError("kappa_ntz needs n >= 2");
    double unit = setup.v() / std::pow(setup.dcoeff(), n);
    return doubled(opts, unit, "kappa_ntz",
                   [&](const PitchGrid& g) { return kappa_ntz_on_grid(n, setup, g); });
}

Estimate kappa_dv_formula(const ScatteringSetup& setup, const CoefficientOptions& opts) {
    Estimate wq = kappa_zz_wq(setup, opts);
    Estimate kz = kappa_z(setup);
    Estimate ktz = kappa_tz(setup, opts);
    double value = wq.value - kz.value * ktz.value;
    double error = wq.error + std::fabs(kz.value) * ktz.error + std::fabs(ktz.value) * kz.error;
    return {value, error};
}

CoefficientReport evaluate_coefficients(const ScatteringSetup& setup, const CoefficientOptions& opts) {
    CoefficientReport rep;
    rep.xi = setup.xi();
    rep.kappa_z = kappa_z(setup);
    rep.kappa_zz_bw = kappa_zz_bw(setup, opts);
    rep.kappa_zz_wq = {rep.kappa_zz_bw.value + eta_020(setup), rep.kappa_zz_bw.error};
    rep.kappa_tz = kappa_tz(setup, opts);
    rep.kappa_tzz = kappa_tzz(setup, opts);
    rep.kappa_parallel0 = {kappa_parallel0(setup), 0.0};
    rep.kappa_dv = {rep.kappa_zz_wq.value - rep.kappa_z.value * rep.kappa_tz.value,
                    rep.kappa_zz_wq.error + std::fabs(rep.kappa_z.value) * rep.kappa_tz.error +
                        std::fabs(rep.kappa_tz.value) * rep.kappa_z.error};
    return rep;
}

SeriesFit series_fit(const std::function<double(double)>& fn, const std::vector<double>& xi_grid,
                     Parity parity, int terms) {
    int m = static_cast<int>(xi_grid.size());
    if (m < 4) throw NumericalFailure("series_fit needs at least 4 abscissae");
    if (terms < 1 || terms >= m) throw NumericalFailure("series_fit needs 1 <= terms < number of abscissae");
    int p = parity == Parity::Even ? 0 : 1;
    Eigen::MatrixXd a(m, terms);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        double x = xi_grid[i];
        if (!std::isfinite(x) || x == 0.0) throw NumericalFailure("series_fit abscissae must be finite and nonzero");
        for (int j = 0; j < terms; ++j) a(i, j) = std::pow(x, p + 2 * j);
        y[i] = fn(x);
    }
    // Column scaling so the condition number reflects the fit, not the units of xi^k.
    Eigen::VectorXd scale = a.colwise().norm().transpose();
    Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(as, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double condition = sv[0] / sv[sv.size() - 1];
    if (!std::isfinite(condition) || condition > 1e10) {
        throw NumericalFailure("series_fit: ill-conditioned design matrix");
    }
    Eigen::VectorXd cs = svd.solve(y);
    Eigen::VectorXd coeffs = cs.cwiseQuotient(scale);
    Eigen::VectorXd resid = y - a * coeffs;

    SeriesFit fit;
    fit.condition = condition;
    fit.residual = resid.norm();
    fit.coefficients.assign(coeffs.data(), coeffs.data() + terms);
    fit.standard_errors.assign(terms, 0.0);
    if (m > terms) {
        double s2 = resid.squaredNorm() / double(m - terms);
        Eigen::MatrixXd vinv = svd.matrixV() * sv.cwiseInverse().asDiagonal();
        Eigen::MatrixXd cov = s2 * vinv * vinv.transpose();
        for (int j = 0; j < terms; ++j) fit.standard_errors[j] = std::sqrt(cov(j, j)) / scale[j];
    }
    return fit;
}

std::vector<double> default_series_grid() { return {0.02, 0.04, 0.06, 0.08, 0.1}; }

NtzTable ntz_table(const ScatteringSetup& setup, int n_max, const CoefficientOptions& opts) {
    if (n_max < 2) throw DomainError("ntz table needs n_max >= 2");
    NtzTable table;
    for (int n = 2; n <= n_max; ++n) table.entries.emplace_back(n, kappa_ntz(n, setup, opts).value);
    for (std::size_t i = 0; i + 1 < table.entries.size(); ++i) {
        table.ratios.push_back(table.entries[i + 1].second / table.entries[i].second * setup.dcoeff());
    }
    return table;
}

NtzTable ntz_leading_table(double v, double dcoeff, int n_max, const std::vector<double>& xi_grid,
                           const CoefficientOptions& opts) {
    if (n_max < 2) throw DomainError("ntz table needs n_max >= 2");
    NtzTable table;
    for (int n = 2; n <= n_max; ++n) {
        auto fn = [&](double xi) { return kappa_ntz(n, ScatteringSetup::from_xi(v, dcoeff, xi), opts).value; };
        SeriesFit fit = series_fit(fn, xi_grid, Parity::Odd, 3);
        table.entries.emplace_back(n, fit.coefficients[0]);
    }
    for (std::size_t i = 0; i + 1 < table.entries.size(); ++i) {
        table.ratios.push_back(table.entries[i + 1].second / table.entries[i].second * dcoeff);
    }
    return table;
}

}  // namespace fdiff
