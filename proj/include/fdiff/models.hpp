#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace fdiff {

enum class ScatteringModel {
    Isotropic,  // D_mumu = D (1 - mu^2)
};

// Physical setup: particle speed v, scattering strength D, focusing length L
// (or the focusing parameter xi = v / (2 D L) directly).
class ScatteringSetup {
public:
    static ScatteringSetup from_xi(double v, double dcoeff, double xi,
                                   ScatteringModel model = ScatteringModel::Isotropic);
    // L = +-infinity is accepted and means no focusing (xi = 0).
    static ScatteringSetup from_focusing_length(double v, double dcoeff, double focusing_length,
                                                ScatteringModel model = ScatteringModel::Isotropic);

    double v() const { return v_; }
    double dcoeff() const { return dcoeff_; }
    double xi() const { return xi_; }
    // Infinite when xi == 0.
    double focusing_length() const;
    ScatteringModel model() const { return model_; }

    // D_mumu(mu) and the reduced form D_mumu / (1 - mu^2), which stays finite at mu = +-1.
    double dmumu(double mu) const;
    double dmumu_reduced(double mu) const;

    ScatteringSetup with_xi(double xi) const { return from_xi(v_, dcoeff_, xi, model_); }

private:
    ScatteringSetup(double v, double dcoeff, double xi, ScatteringModel model)
        : v_(v), dcoeff_(dcoeff), xi_(xi), model_(model) {}

    double v_;
    double dcoeff_;
    double xi_;
    ScatteringModel model_;
};

// M(mu) = (v / 2L) int_{-1}^{mu} (1 - nu^2) / D_nunu dnu, closed form for the isotropic model.
double mu_potential(const ScatteringSetup& setup, double mu);

// Same quantity evaluated by Gauss-Legendre quadrature of the general integral.
double mu_potential_quadrature(const ScatteringSetup& setup, double mu, int order = 64);

// coth(x) - 1/x with a series branch near zero.
double langevin(double x);

// int mu e^M dmu / int e^M dmu.
double equilibrium_mean_mu(const ScatteringSetup& setup);

// Gauss-Legendre grid on [-1, 1] with spectral (Legendre) cumulative integration.
// Immutable after construction.
class PitchGrid {
public:
    explicit PitchGrid(int n);

    int size() const { return n_; }
    const Eigen::VectorXd& nodes() const { return nodes_; }
    const Eigen::VectorXd& weights() const { return weights_; }

    template <class F>
    Eigen::VectorXd map(F&& fn) const {
        Eigen::VectorXd out(n_);
        for (int i = 0; i < n_; ++i) out[i] = fn(nodes_[i]);
        return out;
    }

    // int_{-1}^{1} f dmu.
    double integrate(const Eigen::VectorXd& f) const { return weights_.dot(f); }
    // Values of int_{-1}^{mu_i} f at every node.
    Eigen::VectorXd cumulative(const Eigen::VectorXd& f) const { return cumulative_ * f; }
    // Values of int_{mu_i}^{1} f at every node.
    Eigen::VectorXd tail(const Eigen::VectorXd& f) const;
    Eigen::VectorXd legendre_coefficients(const Eigen::VectorXd& f) const { return analysis_ * f; }
    // Evaluate the interpolating polynomial of f at an arbitrary point of [-1, 1].
    double interpolate(const Eigen::VectorXd& f, double x) const;
    // Antiderivative of f vanishing at x0, evaluated at every node.
    Eigen::VectorXd cumulative_from(const Eigen::VectorXd& f, double x0) const;
    // int f(mu) log(1 - mu) dmu and int f(mu) log(1 + mu) dmu (product integration).
    double integrate_log_one_minus(const Eigen::VectorXd& f) const;
    double integrate_log_one_plus(const Eigen::VectorXd& f) const;

private:
    int n_;
    Eigen::VectorXd nodes_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd analysis_;    // nodal values -> Legendre coefficients
    Eigen::MatrixXd cumulative_;  // nodal values -> int_{-1}^{x_i}
    Eigen::VectorXd log_moments_; // int P_k(x) log(1 - x) dx
};

// Shared, lazily built grids keyed by size. Safe to call concurrently.
std::shared_ptr<const PitchGrid> pitch_grid(int n);

}  // namespace fdiff
