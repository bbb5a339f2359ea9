#pragma once

// Parameter and field types shared by every module.
//
// Units follow the fixed CGS-hour convention: lengths in cm, times in hours,
// concentrations in arbitrary but consistent units. Nothing here enforces
// units; all quantities are plain doubles.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "chemoband/error.hpp"

namespace chemoband {

/// |d - 1| below this selects the d = 1 closed form.
inline constexpr double kCriticalRatioTolerance = 1e-9;

struct ModelParams {
    double tau = 0.0;   ///< collision-time interval [hour]
    double mu = 0.0;    ///< bacterial motility [cm^2/hour]
    double beta = 0.0;  ///< chemotactic coefficient [cm^2/hour]
    double big_d = 0.0; ///< substrate diffusion [cm^2/hour]
    double k = 0.0;     ///< consumption rate constant

    /// Dimensionless chemotaxis-to-motility ratio d = 2 beta / mu.
    double d_ratio() const noexcept { return 2.0 * beta / mu; }
};

enum class Regime { UnlimitedGeneral, UnlimitedCritical, Limited };

std::string_view to_string(Regime regime);
bool is_unlimited(Regime regime) noexcept;

/// Picks UnlimitedCritical when d is within kCriticalRatioTolerance of 1 and
/// UnlimitedGeneral otherwise. Does not check d > 1.
Regime unlimited_regime_for(double d_ratio) noexcept;

struct BandParams {
    double c = 0.0;     ///< band speed [cm/hour]
    double c0 = 0.0;    ///< integration constant C0
    double v_inf = 0.0; ///< asymptotic substrate level
    Regime regime = Regime::UnlimitedGeneral;
};

struct DerivedParams {
    double d_ratio = 0.0; ///< 2 beta / mu
    double c3 = 0.0;      ///< 2 beta k / (c mu)
    double c4 = 0.0;      ///< tau c^2 / (beta k), limited-band plateau
    double q_unlim = 0.0; ///< C0 V_inf, normalisation of unlimited profiles
    double q_lim = 0.0;   ///< 2 tau c^2 / (k beta), normalisation of limited profiles
    double rate = 0.0;    ///< 2 tau c / mu, exponential rate of the band tails
    double amplitude = 0.0; ///< C0 k mu / (2 c^2 tau), coefficient of exp(-rate zeta) in V
};

struct PerturbParams {
    double u0 = 0.0;    ///< equilibrium bacteria concentration
    double v0 = 0.0;    ///< equilibrium substrate concentration
    double a = 0.0;     ///< substrate production rate [1/hour]
    double d_deg = 0.0; ///< substrate degradation rate [1/hour]
    double ell = 0.0;   ///< domain length L [cm]
};

/// Validates a model/band pair and computes the derived constants.
///
/// Throws Error(NonPositiveParameter) naming the field, or
/// Error(RegimeMismatch) when the regime does not fit d = 2 beta / mu.
/// big_d may be zero here; the traveling-band closed forms assume it is.
DerivedParams validate(const ModelParams& mp, const BandParams& bp);

/// Positivity checks for the model alone, as needed by the PDE solver: tau
/// and mu must be positive; beta, k and big_d may be zero (big_d must be
/// positive when `require_diffusion` is set).
void validate_model(const ModelParams& mp, bool require_diffusion);

/// Positivity of every perturbation parameter and of mp, including beta and
/// big_d.
void validate_perturbation(const ModelParams& mp, const PerturbParams& pp);

/// Uniform grid x_i = x0 + i h, i = 0..n-1.
class Grid1D {
public:
    Grid1D(double x0, double x1, std::size_t n);

    double x0() const noexcept { return x0_; }
    double x1() const noexcept { return x1_; }
    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return h_; }
    double x(std::size_t i) const noexcept;
    std::vector<double> nodes() const;

    bool operator==(const Grid1D&) const = default;

private:
    double x0_;
    double x1_;
    std::size_t n_;
    double h_;
};

/// Sampled traveling-band profile. Derivative arrays are either empty or the
/// same length as `zeta`.
struct BandProfile {
    std::vector<double> zeta;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> du;
    std::vector<double> dv;
    std::vector<double> d2u;
    std::vector<double> d2v;
    /// Samples whose exponent exceeded the overflow cap and were replaced by
    /// the exact asymptotic limit.
    std::size_t guarded = 0;

    std::size_t size() const noexcept { return zeta.size(); }
    bool has_first_derivatives() const noexcept;
    bool has_second_derivatives() const noexcept;
};

struct FieldState {
    Grid1D grid;
    std::vector<double> u;
    std::vector<double> v;
    double t = 0.0;
};

/// Checks array lengths and finiteness; with `require_positive_v` also v > 0.
void validate_state(const FieldState& state, bool require_positive_v);

} // namespace chemoband
