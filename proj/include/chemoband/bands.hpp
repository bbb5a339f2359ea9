#pragma once

// Closed-form traveling bands and the numerical machinery used to
// cross-check them.
//
// The profiles are functions of the moving coordinate zeta = x - c t. For
// both substrate regimes the tails decay like exp(-rate * |zeta|) with
// rate = 2 tau c / mu, so every routine below measures lengths in units of
// 1 / rate.

#include <optional>
#include <span>
#include <vector>

#include "chemoband/model.hpp"

namespace chemoband {

/// Exponents |rate * zeta| above this are replaced by the exact asymptotic
/// limit of the profile.
inline constexpr double kExponentCap = 700.0;

/// U and V of the unlimited-substrate band (d >= 1) with first and second
/// derivatives. Regime must be UnlimitedGeneral or UnlimitedCritical.
BandProfile eval_unlimited(const ModelParams& mp, const BandParams& bp, std::span<const double> zeta);

/// U and V of the limited-substrate band with first and second derivatives.
BandProfile eval_limited(const ModelParams& mp, const BandParams& bp, std::span<const double> zeta);

/// Dispatches on bp.regime.
BandProfile eval_band(const ModelParams& mp, const BandParams& bp, std::span<const double> zeta);

struct BandExtrema {
    double u_max = 0.0;  ///< closed-form maximum of U
    double zeta0 = 0.0;  ///< closed-form location of the maximum
    double u_max_numeric = 0.0;
    double zeta0_numeric = 0.0;
};

/// Closed-form peak of the unlimited band, confirmed by an independent
/// numerical maximisation of eval_unlimited.
BandExtrema band_extrema(const ModelParams& mp, const BandParams& bp);

struct QuadratureConfig {
    double rel_tol = 1e-10;
    unsigned max_depth = 30;
    /// When set, integrate over [centre - w/rate, centre + w/rate] only and
    /// charge analytic tail bounds to the error estimate. Otherwise the whole
    /// line is mapped onto (-1, 1).
    std::optional<double> window;
};

struct SpeedEstimate {
    double c_est = 0.0;
    double error_estimate = 0.0;
    double mass = 0.0; ///< integral of U over the real line
};

/// Band speed recovered from c = (k / V_inf) * integral of U. Unlimited
/// regimes only. Throws QuadratureNotConverged when the error estimate
/// exceeds rel_tol * |c_est|.
SpeedEstimate band_speed_from_mass(const ModelParams& mp, const BandParams& bp,
                                   const QuadratureConfig& cfg = {});

struct OdeResidual {
    std::vector<double> res_u; ///< bacteria equation residual
    std::vector<double> res_v; ///< substrate equation residual
    /// Limited regime only: U' - C3 U (U - C4).
    std::vector<double> res_first_order;
    double scale_u = 0.0; ///< largest magnitude of any individual term, bacteria equation
    double scale_v = 0.0;
    double scale_first_order = 0.0;
    double max_abs_u = 0.0;
    double max_abs_v = 0.0;
    double max_abs_first_order = 0.0;

    /// max over equations of max|res| / term scale.
    double max_relative() const noexcept;
};

/// Pointwise residual of the traveling-wave ODE system evaluated from the
/// analytic derivative arrays in `profile`. Throws MissingDerivatives when
/// second derivatives are absent.
OdeResidual traveling_ode_residual(const ModelParams& mp, const BandParams& bp, const BandProfile& profile);

/// Qualitative branches of the limited-band first-order ODE.
enum class LimitedCase { None, Constant, Band, Blowup };

struct BandInitialCondition {
    double u = 0.0;
    double v = 0.0;
};

struct BandSpan {
    double zeta_a = -20.0;
    double zeta_b = 20.0;
    std::size_t n_out = 401;
};

struct StepConfig {
    double rel_tol = 1e-13;
    double abs_tol = 1e-13;
    double initial_step = 1e-3;
    double min_step = 1e-14;
    std::size_t max_steps = 2'000'000;
    /// Limited regime: blow-up is declared once U exceeds this multiple of C4.
    double blowup_factor = 1e8;
};

struct BandOdeResult {
    BandProfile profile;
    LimitedCase limited_case = LimitedCase::None;
};

/// Integrates the first-order traveling-wave system from zeta_a with an
/// explicit adaptive Runge-Kutta scheme and samples it at n_out uniformly
/// spaced points of the span. Profiles carry first derivatives only.
///
/// Unlimited:  U' = (d V'/V - rate) U,  V' = k U / c.
/// Limited:    U' = C3 U (U - C4),      V' = k U V / c.
///
/// Throws BlowupDetected (limited, U(zeta_a) > C4) and StepSizeUnderflow.
BandOdeResult integrate_band_ode(const ModelParams& mp, const BandParams& bp, BandInitialCondition ic,
                                 const BandSpan& span = {}, const StepConfig& cfg = {});

class BlowupDetected : public Error {
public:
    BlowupDetected(BandProfile partial, double zeta_max);

    const BandProfile& partial_profile() const noexcept { return partial_; }
    double zeta_max() const noexcept { return zeta_max_; }

private:
    BandProfile partial_;
    double zeta_max_;
};

/// Uniformly spaced samples in [a, b], endpoints included.
std::vector<double> linspace(double a, double b, std::size_t n);

} // namespace chemoband
