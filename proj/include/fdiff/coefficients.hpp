#pragma once

#include "fdiff/models.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace fdiff {

struct CoefficientOptions {
    int grid_size = 256;
    // Reference point replacing the divergent lower limit -1 in inner antiderivatives.
    double mu0 = 0.0;
    // Relative tolerance on the grid-doubling error, measured in the coefficient's natural unit.
    double tolerance = 1e-8;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

struct CoefficientReport {
    double xi = 0.0;
    Estimate kappa_z;
    Estimate kappa_zz_bw;
    Estimate kappa_zz_wq;
    Estimate kappa_tz;
    Estimate kappa_tzz;
    Estimate kappa_parallel0;
    Estimate kappa_dv;

    double err_max() const;
};

struct NtzTable {
    std::vector<std::pair<int, double>> entries;  // (n, kappa_ntz) starting at n = 2
    std::vector<double> ratios;                   // kappa_{(n+1)tz} / kappa_ntz * D
};

// Single-grid evaluations (no error estimate). The grid must outlive the call.
double kappa_z_on_grid(const ScatteringSetup& setup, const PitchGrid& grid);
double kappa_zz_bw_on_grid(const ScatteringSetup& setup, const PitchGrid& grid, double mu0);
// Same coefficient after integrating the outer integral by parts (no reference point).
double kappa_zz_bw_adjoint_on_grid(const ScatteringSetup& setup, const PitchGrid& grid);
double kappa_tz_on_grid(const ScatteringSetup& setup, const PitchGrid& grid);
// Literal nested form with the log-divergent inner antiderivative anchored at mu0.
double kappa_tz_reference_point_on_grid(const ScatteringSetup& setup, const PitchGrid& grid, double mu0);
double kappa_tzz_on_grid(const ScatteringSetup& setup, const PitchGrid& grid);
// kappa_ntz for n >= 1 (n = 1 is kappa_tz).
double kappa_ntz_on_grid(int n, const ScatteringSetup& setup, const PitchGrid& grid);

// Grid-doubling estimates: value on N nodes, error |value(N) - value(2N)|.
// Throw NumericalFailure when the error exceeds the tolerance.
Estimate kappa_z(const ScatteringSetup& setup);
double kappa_parallel0(const ScatteringSetup& setup);
Estimate kappa_zz_bw(const ScatteringSetup& setup, const CoefficientOptions& opts = {});
Estimate kappa_zz_wq(const ScatteringSetup& setup, const CoefficientOptions& opts = {});
Estimate kappa_tz(const ScatteringSetup& setup, const CoefficientOptions& opts = {});
Estimate kappa_tzz(const ScatteringSetup& setup, const CoefficientOptions& opts = {});
Estimate kappa_ntz(int n, const ScatteringSetup& setup, const CoefficientOptions& opts = {});
Estimate kappa_dv_formula(const ScatteringSetup& setup, const CoefficientOptions& opts = {});

// xi^2 kappa_parallel0 / 5, the quoted small-xi correction between kappa_zz and kappa_zz_bw.
double eta_020(const ScatteringSetup& setup);

CoefficientReport evaluate_coefficients(const ScatteringSetup& setup, const CoefficientOptions& opts = {});

enum class Parity { Even, Odd };

struct SeriesFit {
    // coefficients[j] multiplies xi^(p + 2j) with p = 0 (even) or 1 (odd).
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    double residual = 0.0;
    double condition = 0.0;
};

SeriesFit series_fit(const std::function<double(double)>& fn, const std::vector<double>& xi_grid,
                     Parity parity, int terms = 3);

std::vector<double> default_series_grid();

// kappa_ntz values at the setup's xi.
NtzTable ntz_table(const ScatteringSetup& setup, int n_max, const CoefficientOptions& opts = {});
// Leading (linear in xi) coefficients of kappa_ntz from series_fit.
NtzTable ntz_leading_table(double v, double dcoeff, int n_max, const std::vector<double>& xi_grid,
                           const CoefficientOptions& opts = {});

}  // namespace fdiff
