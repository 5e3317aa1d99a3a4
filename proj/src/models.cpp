#include "fdiff/models.hpp"

#include "fdiff/errors.hpp"

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_legendre.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <string>

namespace fdiff {

namespace {

void check_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(name) + " must be positive and finite");
    }
}

void check_mu(double mu) {
    if (!(mu >= -1.0 && mu <= 1.0)) {
        throw DomainError("pitch cosine " + std::to_string(mu) + " outside [-1, 1]");
    }
}

}  // namespace

ScatteringSetup ScatteringSetup::from_xi(double v, double dcoeff, double xi, ScatteringModel model) {
    check_positive(v, "particle speed v");
    check_positive(dcoeff, "scattering strength D");
    if (!std::isfinite(xi)) throw DomainError("focusing parameter xi must be finite");
    return ScatteringSetup(v, dcoeff, xi, model);
}

ScatteringSetup ScatteringSetup::from_focusing_length(double v, double dcoeff, double focusing_length,
                                                      ScatteringModel model) {
    check_positive(v, "particle speed v");
    check_positive(dcoeff, "scattering strength D");
    if (std::isnan(focusing_length) || focusing_length == 0.0) {
        throw DomainError("focusing length must be nonzero");
    }
    double xi = std::isinf(focusing_length) ? 0.0 : v / (2.0 * dcoeff * focusing_length);
    if (!std::isfinite(xi)) throw DomainError("derived focusing parameter is not finite");
    return ScatteringSetup(v, dcoeff, xi, model);
}

double ScatteringSetup::focusing_length() const {
    if (xi_ == 0.0) return std::numeric_limits<double>::infinity();
    return v_ / (2.0 * dcoeff_ * xi_);
}

double ScatteringSetup::dmumu(double mu) const {
    check_mu(mu);
    return dmumu_reduced(mu) * (1.0 - mu * mu);
}

double ScatteringSetup::dmumu_reduced(double mu) const {
    check_mu(mu);
    switch (model_) {
        case ScatteringModel::Isotropic:
            return dcoeff_;
    }
    return dcoeff_;
}

double mu_potential(const ScatteringSetup& setup, double mu) {
    check_mu(mu);
    switch (setup.model()) {
        case ScatteringModel::Isotropic:
            return setup.xi() * (mu + 1.0);
    }
    return mu_potential_quadrature(setup, mu);
}

double mu_potential_quadrature(const ScatteringSetup& setup, double mu, int order) {
    check_mu(mu);
    if (setup.xi() == 0.0 || mu == -1.0) return 0.0;
    // v / (2L) = D xi; the integrand (1 - nu^2) / D_nunu is 1 / dmumu_reduced.
    double prefactor = setup.dcoeff() * setup.xi();
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(order);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) {
        double x = 0.0;
        double w = 0.0;
        gsl_integration_glfixed_point(-1.0, mu, i, &x, &w, table);
        sum += w / setup.dmumu_reduced(x);
    }
    gsl_integration_glfixed_table_free(table);
    return prefactor * sum;
}

double langevin(double x) {
    double ax = std::fabs(x);
    if (ax < 0.25) {
        // coth x - 1/x = sum_{n>=1} 2^{2n} B_{2n} x^{2n-1} / (2n)!
        double x2 = x * x;
        double power = x;
        double sum = 0.0;
        for (int n = 1; n <= 12; ++n) {
            double coeff = std::ldexp(boost::math::unchecked_bernoulli_b2n<double>(n), 2 * n) /
                           boost::math::factorial<double>(2 * n);
            sum += coeff * power;
            power *= x2;
        }
        return sum;
    }
    if (ax > 20.0) return std::copysign(1.0, x) - 1.0 / x;
    return 1.0 / std::tanh(x) - 1.0 / x;
}

double equilibrium_mean_mu(const ScatteringSetup& setup) {
    switch (setup.model()) {
        case ScatteringModel::Isotropic:
            return langevin(setup.xi());
    }
    return langevin(setup.xi());
}

PitchGrid::PitchGrid(int n) : n_(n) {
    if (n < 2) throw DomainError("pitch grid needs at least 2 nodes");
    nodes_.resize(n);
    weights_.resize(n);
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
    std::vector<std::pair<double, double>> points(n);
    for (int i = 0; i < n; ++i) {
        gsl_integration_glfixed_point(-1.0, 1.0, i, &points[i].first, &points[i].second, table);
    }
    gsl_integration_glfixed_table_free(table);
    std::sort(points.begin(), points.end());
    for (int i = 0; i < n; ++i) {
        nodes_[i] = points[i].first;
        weights_[i] = points[i].second;
    }

    // legendre(i, k) = P_k(x_i), k = 0..n
    Eigen::MatrixXd legendre(n, n + 1);
    std::vector<double> row(n + 1);
    for (int i = 0; i < n; ++i) {
        gsl_sf_legendre_Pl_array(n, nodes_[i], row.data());
        for (int k = 0; k <= n; ++k) legendre(i, k) = row[k];
    }

    analysis_.resize(n, n);
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            analysis_(k, i) = 0.5 * (2.0 * k + 1.0) * weights_[i] * legendre(i, k);
        }
    }

    // int_{-1}^{x} P_0 = x + 1; int_{-1}^{x} P_k = (P_{k+1} - P_{k-1}) / (2k + 1).
    Eigen::MatrixXd antiderivative(n, n);
    for (int i = 0; i < n; ++i) {
        antiderivative(i, 0) = nodes_[i] + 1.0;
        for (int k = 1; k < n; ++k) {
            antiderivative(i, k) = (legendre(i, k + 1) - legendre(i, k - 1)) / (2.0 * k + 1.0);
        }
    }
    cumulative_ = antiderivative * analysis_;

    log_moments_.resize(n);
    log_moments_[0] = 2.0 * std::log(2.0) - 2.0;
    for (int k = 1; k < n; ++k) log_moments_[k] = -2.0 / (double(k) * (k + 1.0));
}

Eigen::VectorXd PitchGrid::tail(const Eigen::VectorXd& f) const {
    Eigen::VectorXd cum = cumulative(f);
    double total = integrate(f);
    return Eigen::VectorXd::Constant(n_, total) - cum;
}

double PitchGrid::interpolate(const Eigen::VectorXd& f, double x) const {
    check_mu(x);
    Eigen::VectorXd coeffs = legendre_coefficients(f);
    std::vector<double> p(n_);
    gsl_sf_legendre_Pl_array(n_ - 1, x, p.data());
    double sum = 0.0;
    for (int k = 0; k < n_; ++k) sum += coeffs[k] * p[k];
    return sum;
}

Eigen::VectorXd PitchGrid::cumulative_from(const Eigen::VectorXd& f, double x0) const {
    check_mu(x0);
    Eigen::VectorXd cum = cumulative(f);
    Eigen::VectorXd coeffs = legendre_coefficients(f);
    // Antiderivative from -1 evaluated at x0 through the same Legendre expansion.
    std::vector<double> p(n_ + 1);
    gsl_sf_legendre_Pl_array(n_, x0, p.data());
    double at_x0 = coeffs[0] * (x0 + 1.0);
    for (int k = 1; k < n_; ++k) at_x0 += coeffs[k] * (p[k + 1] - p[k - 1]) / (2.0 * k + 1.0);
    return cum - Eigen::VectorXd::Constant(n_, at_x0);
}

double PitchGrid::integrate_log_one_minus(const Eigen::VectorXd& f) const {
    return log_moments_.dot(legendre_coefficients(f));
}

double PitchGrid::integrate_log_one_plus(const Eigen::VectorXd& f) const {
    Eigen::VectorXd coeffs = legendre_coefficients(f);
    double sum = 0.0;
    for (int k = 0; k < n_; ++k) sum += (k % 2 == 0 ? 1.0 : -1.0) * log_moments_[k] * coeffs[k];
    return sum;
}

std::shared_ptr<const PitchGrid> pitch_grid(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const PitchGrid>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto grid = std::make_shared<const PitchGrid>(n);
    cache.emplace(n, grid);
    return grid;
}

}  // namespace fdiff
