#pragma once

// Linear stability of the constant steady state (u0, v0) on [0, L] with
// u = v = 0 at x = 0 and u_x = v_x = 0 at x = L.
//
// Perturbations e^{sigma t} sin(lambda x) satisfy
//   sigma^2 + b sigma + c_coef = 0
// with
//   b      = (D lambda^2 / 2 + mu lambda^2 / 2 + d_deg) / tau
//   c_coef = lambda^2 / tau^2 * (mu D lambda^2 / 4 + mu d_deg / 2 - a beta u0 / v0).

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chemoband/model.hpp"

namespace chemoband {

enum class ModeFamily {
    Even,           ///< (2 pi n + pi/2) / L, the even-indexed members of the full set
    SturmLiouville, ///< (n + 1/2) pi / L, every eigenfunction of the mixed problem
};

double eigen_lambda(unsigned n, double ell, ModeFamily family = ModeFamily::Even);

enum class StabilityClass { Stable, Unstable, Marginal };

std::string_view to_string(StabilityClass cls);

/// |c_coef| at or below this fraction of its largest contributing term is
/// classified as Marginal.
inline constexpr double kMarginalTolerance = 1e-12;

struct DispersionResult {
    std::optional<unsigned> n;
    double lambda = 0.0;
    double b = 0.0;
    double c_coef = 0.0;
    std::complex<double> sigma1; ///< (-b - sqrt(b^2 - 4 c_coef)) / 2
    std::complex<double> sigma2; ///< (-b + sqrt(b^2 - 4 c_coef)) / 2
    StabilityClass cls = StabilityClass::Stable;
    /// max_i |sigma_i^2 + b sigma_i + c_coef| relative to the largest term.
    double root_residual = 0.0;
};

DispersionResult dispersion_relation(const ModelParams& mp, const PerturbParams& pp, double lambda);
DispersionResult dispersion_mode(const ModelParams& mp, const PerturbParams& pp, unsigned n,
                                 ModeFamily family = ModeFamily::Even);

/// Eigenvector (u*, v*) with u* = 1 for growth rate sigma at wavenumber lambda.
std::array<double, 2> mode_shape(const ModelParams& mp, const PerturbParams& pp, double lambda, double sigma);

/// a* = v0 mu (D lambda^2 / 2 + d_deg) / (2 u0 beta); c_coef changes sign at a = a*.
double instability_threshold(const ModelParams& mp, const PerturbParams& pp, double lambda);
double instability_threshold_mode(const ModelParams& mp, const PerturbParams& pp, unsigned n,
                                  ModeFamily family = ModeFamily::Even);
/// n = 0 form: v0 mu (D pi^2 / L^2 + 8 d_deg) / (16 u0 beta).
double instability_threshold_n0(const ModelParams& mp, const PerturbParams& pp);

/// Sufficient conditions for L2 and H1 decay of the linearized system and the
/// resulting rates.
struct EnergyCertificate {
    bool mu_dominates_coupling = false;        ///< 2 u0 beta / v0 <= mu
    bool diffusion_dominates_coupling = false; ///< 2 u0 beta / v0 <= D
    bool motility_bounds_production = false;   ///< 4 a <= C_p mu
    bool diffusion_bounds_production = false;  ///< 4 a <= C_p D + d_deg
    double c_p = 0.0;                          ///< Poincare constant 2 / L^2
    std::optional<double> rate_l2;             ///< A = min(C_p mu / 4, C_p D / 4 + 7 d_deg / 4) / tau
    std::optional<double> rate_h1;             ///< B = a / tau
    double sup_bound_coeff = 0.0;              ///< 2 sqrt(L)
    bool instability_predicted = false;        ///< a exceeds the n = 0 threshold
    /// False when the certificate holds while instability is predicted.
    bool consistent = true;

    bool certified() const noexcept
    {
        return mu_dominates_coupling && diffusion_dominates_coupling && motility_bounds_production
            && diffusion_bounds_production;
    }
};

EnergyCertificate energy_certificate(const ModelParams& mp, const PerturbParams& pp);

struct EnergyNorms {
    double l2_sq = 0.0;    ///< integral of u^2 + v^2
    double h1_sq = 0.0;    ///< integral of u_x^2 + v_x^2
    double sup_norm = 0.0; ///< max|u| + max|v|
};

/// Trapezoidal integrals on the state's grid; derivatives by second-order
/// central differences inside and one-sided differences at the ends.
EnergyNorms energy_norms(const FieldState& state);

struct EnergyTrace {
    std::vector<double> times;
    std::vector<double> l2_sq;
    std::vector<double> h1_sq;
    std::vector<double> sup_norm;

    void push(double t, const EnergyNorms& n);
    std::size_t size() const noexcept { return times.size(); }
};

/// Worst-case ratios of a trace to the certificate's bounds
///   l2_sq(t) <= l2_sq(0) e^{-A t}
///   sup_norm(t) <= 2 sqrt(L) sqrt(h1_sq(0)) e^{-B t / 2}
/// with t measured from the first sample. A ratio <= 1 means the bound holds.
struct EnergyBoundCheck {
    double max_l2_ratio = 0.0;
    double max_sup_ratio = 0.0;
    double t_worst_l2 = 0.0;
    double t_worst_sup = 0.0;
};

/// Throws InvalidArgument when the certificate does not hold or the trace
/// is empty.
EnergyBoundCheck check_energy_bounds(const EnergyTrace& trace, const EnergyCertificate& cert);

enum class TraceField { L2, H1, Sup };

struct FitWindow {
    double t0 = 0.0;
    double t1 = 0.0;
};

/// Least-squares slope of log(field) against t over the window, negated so
/// decay is positive. The default window is [0.1 t_end, t_end]. Throws
/// Error(NonPositiveTraceValue) if a value inside the window is not positive.
double fit_decay_rate(const EnergyTrace& trace, TraceField field, std::optional<FitWindow> window = {});

/// Least-squares slope of log(y) against t.
double log_linear_slope(std::span<const double> t, std::span<const double> y);

} // namespace chemoband
