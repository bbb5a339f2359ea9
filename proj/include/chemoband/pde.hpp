#pragma once

// Finite-difference solvers for the nonlinear chemotaxis system
//
//   u_t = mu / (2 tau_u) u_xx - beta / tau_u (u (ln v)_x)_x
//   v_t = D / (2 tau_v) v_xx - k(u, v) u
//
// and for its linearization about a constant state (u0, v0)
//
//   u_t = mu / (2 tau) u_xx - beta u0 / (v0 tau) v_xx
//   v_t = D / (2 tau) v_xx + (a / tau) u - (d_deg / tau) v.
//
// The grid is node centred. Zero-flux ends use a mirrored ghost node, so the
// trapezoidal mass sum h (u_0 / 2 + u_1 + ... + u_{n-1} / 2) is conserved
// exactly by both the diffusion and the chemotaxis flux.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "chemoband/model.hpp"
#include "chemoband/stability.hpp"

namespace chemoband {

enum class Scheme { SemiImplicit, FullyExplicit };
enum class Consumption { None, Unlimited, Limited };
enum class TauConvention {
    UnitSubstrate, ///< tau_u = tau, tau_v = 1
    Common,        ///< tau_u = tau_v = tau
};
/// How the linearized solver treats the u-v coupling and reaction terms.
enum class Coupling { ExplicitReaction, ImplicitBlock };

std::string_view to_string(Scheme s);
std::string_view to_string(Consumption c);
std::string_view to_string(TauConvention t);
std::string_view to_string(Coupling c);

/// Boundary values for one end of the interval.
struct EndCondition {
    enum class Kind { Neumann, Dirichlet };
    Kind kind = Kind::Neumann;
    /// Dirichlet (u, v) as a function of time.
    std::function<std::array<double, 2>(double)> value;

    static EndCondition neumann();
    static EndCondition dirichlet(double u, double v);
    /// Values of the analytic band U(x - c t), V(x - c t) at position x.
    static EndCondition traced_band(const ModelParams& mp, const BandParams& bp, double x);
};

struct BoundarySpec {
    EndCondition left = EndCondition::neumann();
    EndCondition right = EndCondition::neumann();

    /// u = v = 0 at the left end, zero flux at the right end.
    static BoundarySpec dirichlet_neumann();
};

struct SolverConfig {
    Grid1D grid{0.0, 1.0, 3};
    double dt = 1e-3;
    double t_end = 0.0;
    Scheme scheme = Scheme::SemiImplicit;
    /// SemiImplicit: 1 = IMEX Euler, 2 = ARS(2,2,2). FullyExplicit: 1 = forward
    /// Euler, 2 = Heun.
    int order = 2;
    BoundarySpec bc;
    double v_floor = 1e-12;
    TauConvention tau_convention = TauConvention::UnitSubstrate;
    Coupling coupling = Coupling::ImplicitBlock;
    /// u below -positivity_tol * max|u| after a nonlinear step is an error.
    double positivity_tol = 1e-10;
    /// Store a snapshot every this many steps (0: initial and final only).
    std::size_t snapshot_every = 0;
};

/// Checks dt, t_end, v_floor, order and the explicit stability guard
/// dt <= h^2 min(tau_u / mu, tau_v / D).
void validate_config(const SolverConfig& cfg, const ModelParams& mp);

struct StepStats {
    std::size_t clamp_events = 0; ///< v values raised to v_floor
};

FieldState step_nonlinear(const FieldState& state, const ModelParams& mp, Consumption consumption,
                          const SolverConfig& cfg, StepStats* stats = nullptr);

/// The state holds perturbations (u-bar, v-bar). Requires Dirichlet zero data
/// on the left and zero flux on the right.
FieldState step_linearized(const FieldState& state, const ModelParams& mp, const PerturbParams& pp,
                           const SolverConfig& cfg);

struct NonlinearProblem {
    ModelParams mp;
    Consumption consumption = Consumption::Limited;
};

struct LinearizedProblem {
    ModelParams mp;
    PerturbParams pp;
};

using Problem = std::variant<NonlinearProblem, LinearizedProblem>;

struct Diagnostics {
    double t = 0.0;
    double mass_u = 0.0;
    double mass_v = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double min_v = 0.0;
    double max_v = 0.0;
    EnergyNorms norms;
};

struct Trajectory {
    std::vector<FieldState> snapshots;
    std::vector<Diagnostics> diagnostics; ///< one entry per step, initial state included
    std::size_t clamp_events = 0;
    std::size_t steps = 0;

    EnergyTrace energy_trace() const;
};

Diagnostics diagnose(const FieldState& state);

/// Runs from `initial` to cfg.t_end. The last step is shortened to land on
/// t_end. Step failures are rethrown with the failing time attached.
Trajectory run(const Problem& problem, const SolverConfig& cfg, const FieldState& initial);

enum class TrackedFeature { Peak, Front };

struct WaveSpeedEstimate {
    double c_est = 0.0;
    TrackedFeature feature = TrackedFeature::Peak;
    std::vector<double> times;
    std::vector<double> positions;
};

/// Follows the interior maximum of u (parabolic sub-grid refinement) and
/// fits position against time. Monotone fronts without an interior maximum
/// are followed through the steepest point of u instead. Throws
/// NoBandDetected when u has no interior feature.
WaveSpeedEstimate measure_wave_speed(const Trajectory& traj);

/// Trapezoidal integral of values over the grid.
double trapezoid(const Grid1D& grid, std::span<const double> values);

/// Analytic band sampled at x - c t on the grid.
FieldState band_state(const ModelParams& mp, const BandParams& bp, const Grid1D& grid, double t = 0.0);

/// u = amp_u sin(lambda x), v = amp_v sin(lambda x), measured from grid.x0().
FieldState mode_state(const Grid1D& grid, double lambda, double amp_u, double amp_v);

/// Smooth random data compatible with u = v = 0 at x0 and zero flux at x1:
/// u and v are sums of the first n_modes modes sin((j + 1/2) pi (x - x0) / L)
/// with coefficients uniform in [-1, 1] scaled by 1 / (j + 1)^2.
FieldState random_mode_state(const Grid1D& grid, unsigned n_modes, std::uint64_t seed);

} // namespace chemoband
