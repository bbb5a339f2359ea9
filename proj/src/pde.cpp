#include "chemoband/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "chemoband/bands.hpp"
#include "chemoband/tridiagonal.hpp"

namespace chemoband {

std::string_view to_string(Scheme s)
{
    return s == Scheme::SemiImplicit ? "semi-implicit" : "fully-explicit";
}

std::string_view to_string(Consumption c)
{
    switch (c) {
    case Consumption::None: return "none";
    case Consumption::Unlimited: return "unlimited";
    case Consumption::Limited: return "limited";
    }
    return "unknown";
}

std::string_view to_string(TauConvention t)
{
    return t == TauConvention::UnitSubstrate ? "unit-substrate" : "common";
}

std::string_view to_string(Coupling c)
{
    return c == Coupling::ImplicitBlock ? "implicit-block" : "explicit-reaction";
}

EndCondition EndCondition::neumann()
{
    return {};
}

EndCondition EndCondition::dirichlet(double u, double v)
{
    EndCondition e;
    e.kind = Kind::Dirichlet;
    e.value = [u, v](double) { return std::array<double, 2>{u, v}; };
    return e;
}

EndCondition EndCondition::traced_band(const ModelParams& mp, const BandParams& bp, double x)
{
    validate(mp, bp);
    EndCondition e;
    e.kind = Kind::Dirichlet;
    e.value = [mp, bp, x](double t) {
        const double zeta = x - bp.c * t;
        const BandProfile p = eval_band(mp, bp, std::span<const double>(&zeta, 1));
        return std::array<double, 2>{p.u[0], p.v[0]};
    };
    return e;
}

BoundarySpec BoundarySpec::dirichlet_neumann()
{
    return {EndCondition::dirichlet(0.0, 0.0), EndCondition::neumann()};
}

namespace {

using Fields = std::array<std::vector<double>, 2>;

struct Taus {
    double u;
    double v;
};

Taus taus_for(const ModelParams& mp, TauConvention conv)
{
    return {mp.tau, conv == TauConvention::UnitSubstrate ? 1.0 : mp.tau};
}

void validate_config_with(const SolverConfig& cfg, const ModelParams& mp, Taus taus)
{
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw Error(ErrorCode::InvalidArgument, "time step must be positive", "dt");
    if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end))
        throw Error(ErrorCode::InvalidArgument, "final time must be non-negative", "t_end");
    if (!(cfg.v_floor > 0.0))
        throw Error(ErrorCode::InvalidArgument, "v_floor must be positive", "v_floor");
    if (cfg.order != 1 && cfg.order != 2)
        throw Error(ErrorCode::InvalidArgument, "time integration order must be 1 or 2", "order");
    if (!(cfg.positivity_tol >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "positivity tolerance must be non-negative", "positivity_tol");
    for (const EndCondition* e : {&cfg.bc.left, &cfg.bc.right}) {
        if (e->kind == EndCondition::Kind::Dirichlet && !e->value)
            throw Error(ErrorCode::InvalidArgument, "Dirichlet end condition without values", "bc");
    }
    if (cfg.scheme == Scheme::FullyExplicit) {
        const double h = cfg.grid.spacing();
        double limit = h * h * taus.u / mp.mu;
        if (mp.big_d > 0.0)
            limit = std::min(limit, h * h * taus.v / mp.big_d);
        if (cfg.dt > limit) {
            std::ostringstream os;
            os << "explicit scheme needs dt <= " << limit << " on this grid (got " << cfg.dt << ")";
            throw Error(ErrorCode::InvalidArgument, os.str(), "dt");
        }
    }
}

bool is_dirichlet(const EndCondition& e)
{
    return e.kind == EndCondition::Kind::Dirichlet;
}

/// Second difference with mirrored ghosts at zero-flux ends; zero on
/// Dirichlet nodes.
std::vector<double> laplacian(std::span<const double> f, double h, const BoundarySpec& bc)
{
    const std::size_t n = f.size();
    const double ih2 = 1.0 / (h * h);
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * ih2;
    out[0] = is_dirichlet(bc.left) ? 0.0 : 2.0 * (f[1] - f[0]) * ih2;
    out[n - 1] = is_dirichlet(bc.right) ? 0.0 : 2.0 * (f[n - 2] - f[n - 1]) * ih2;
    return out;
}

/// Solves (I - theta (alpha Delta - r)) x = rhs, Dirichlet rows replaced by
/// the boundary values.
std::vector<double> solve_diffusion(std::vector<double> rhs, double theta, double alpha, double r, double h,
                                    const BoundarySpec& bc, std::optional<double> left_value,
                                    std::optional<double> right_value)
{
    const std::size_t n = rhs.size();
    if (left_value)
        rhs[0] = *left_value;
    if (right_value)
        rhs[n - 1] = *right_value;
    if (alpha == 0.0 && r == 0.0)
        return rhs;

    const double off = -theta * alpha / (h * h);
    const double dia = 1.0 + 2.0 * theta * alpha / (h * h) + theta * r;
    std::vector<double> lower(n, off);
    std::vector<double> diag(n, dia);
    std::vector<double> upper(n, off);
    if (is_dirichlet(bc.left)) {
        diag[0] = 1.0;
        upper[0] = 0.0;
    } else {
        upper[0] = 2.0 * off;
    }
    if (is_dirichlet(bc.right)) {
        diag[n - 1] = 1.0;
        lower[n - 1] = 0.0;
    } else {
        lower[n - 1] = 2.0 * off;
    }
    return solve_tridiagonal(lower, diag, upper, rhs);
}

void axpy(std::vector<double>& y, double a, std::span<const double> x)
{
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] += a * x[i];
}

/// Splitting y' = L y + N(y) for one model on one grid.
struct Split {
    std::function<Fields(const Fields&)> explicit_part;
    std::function<Fields(const Fields&)> implicit_apply;
    /// Solves (I - theta L) x = rhs with boundary data at time t.
    std::function<Fields(Fields, double theta, double t)> implicit_solve;
    /// Applies Dirichlet data at time t (explicit stages only).
    std::function<void(Fields&, double t)> impose;
    std::function<void(Fields&)> post_stage;
};

Fields combine(const Fields& y, std::initializer_list<std::pair<double, const Fields*>> terms)
{
    Fields out = y;
    for (const auto& [a, f] : terms) {
        axpy(out[0], a, (*f)[0]);
        axpy(out[1], a, (*f)[1]);
    }
    return out;
}

Fields advance(const Split& sp, const Fields& y, double t, double dt, Scheme scheme, int order)
{
    if (scheme == Scheme::FullyExplicit) {
        const auto rate = [&sp](const Fields& f) {
            Fields r = sp.implicit_apply(f);
            const Fields nf = sp.explicit_part(f);
            axpy(r[0], 1.0, nf[0]);
            axpy(r[1], 1.0, nf[1]);
            return r;
        };
        const Fields k1 = rate(y);
        Fields y1 = combine(y, {{dt, &k1}});
        sp.impose(y1, t + dt);
        sp.post_stage(y1);
        if (order == 1)
            return y1;
        const Fields k2 = rate(y1);
        Fields y2 = combine(y, {{0.5 * dt, &k1}, {0.5 * dt, &k2}});
        sp.impose(y2, t + dt);
        sp.post_stage(y2);
        return y2;
    }

    const Fields n0 = sp.explicit_part(y);
    if (order == 1) {
        Fields y1 = sp.implicit_solve(combine(y, {{dt, &n0}}), dt, t + dt);
        sp.post_stage(y1);
        return y1;
    }

    // ARS(2,2,2): L-stable SDIRK part, second-order explicit part.
    const double gamma = 1.0 - 1.0 / std::sqrt(2.0);
    const double delta = 1.0 - 1.0 / (2.0 * gamma);
    Fields y1 = sp.implicit_solve(combine(y, {{gamma * dt, &n0}}), gamma * dt, t + gamma * dt);
    sp.post_stage(y1);
    const Fields n1 = sp.explicit_part(y1);
    const Fields l1 = sp.implicit_apply(y1);
    Fields rhs = combine(y, {{delta * dt, &n0}, {(1.0 - delta) * dt, &n1}, {(1.0 - gamma) * dt, &l1}});
    Fields y2 = sp.implicit_solve(std::move(rhs), gamma * dt, t + dt);
    sp.post_stage(y2);
    return y2;
}

void check_grid(const FieldState& state, const SolverConfig& cfg)
{
    if (!(state.grid == cfg.grid))
        throw Error(ErrorCode::GridMismatch, "state grid differs from the solver grid");
}

} // namespace

void validate_config(const SolverConfig& cfg, const ModelParams& mp)
{
    validate_config_with(cfg, mp, taus_for(mp, cfg.tau_convention));
}

FieldState step_nonlinear(const FieldState& state, const ModelParams& mp, Consumption consumption,
                          const SolverConfig& cfg, StepStats* stats)
{
    validate_model(mp, false);
    const Taus taus = taus_for(mp, cfg.tau_convention);
    validate_config_with(cfg, mp, taus);
    check_grid(state, cfg);
    validate_state(state, true);

    const std::size_t n = state.grid.size();
    const double h = state.grid.spacing();
    const BoundarySpec& bc = cfg.bc;
    const double alpha_u = mp.mu / (2.0 * taus.u);
    const double alpha_v = mp.big_d / (2.0 * taus.v);
    const double chi = mp.beta / taus.u;
    std::size_t clamps = 0;

    const auto clamp_v = [&](Fields& f) {
        for (double& v : f[1]) {
            if (v < cfg.v_floor) {
                v = cfg.v_floor;
                ++clamps;
            }
        }
    };

    Split sp;
    sp.explicit_part = [&](const Fields& f) {
        const auto& u = f[0];
        const auto& v = f[1];
        Fields out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
        // F_{i+1/2} = mean(u) (ln v_{i+1} - ln v_i) / h
        std::vector<double> flux(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            flux[i] = 0.5 * (u[i] + u[i + 1]) * (std::log(v[i + 1]) - std::log(v[i])) / h;
        for (std::size_t i = 1; i + 1 < n; ++i)
            out[0][i] = -chi * (flux[i] - flux[i - 1]) / h;
        if (!is_dirichlet(bc.left))
            out[0][0] = -chi * 2.0 * flux[0] / h;
        if (!is_dirichlet(bc.right))
            out[0][n - 1] = chi * 2.0 * flux[n - 2] / h;
        if (consumption != Consumption::None) {
            for (std::size_t i = 0; i < n; ++i)
                out[1][i] = consumption == Consumption::Limited ? -mp.k * u[i] * v[i] : -mp.k * u[i];
            if (is_dirichlet(bc.left))
                out[1][0] = 0.0;
            if (is_dirichlet(bc.right))
                out[1][n - 1] = 0.0;
        }
        return out;
    };
    sp.implicit_apply = [&](const Fields& f) {
        Fields out{laplacian(f[0], h, bc), laplacian(f[1], h, bc)};
        for (double& x : out[0])
            x *= alpha_u;
        for (double& x : out[1])
            x *= alpha_v;
        return out;
    };
    sp.implicit_solve = [&](Fields rhs, double theta, double t) {
        std::optional<std::array<double, 2>> lv;
        std::optional<std::array<double, 2>> rv;
        if (is_dirichlet(bc.left))
            lv = bc.left.value(t);
        if (is_dirichlet(bc.right))
            rv = bc.right.value(t);
        const auto pick = [](const std::optional<std::array<double, 2>>& o, int k) -> std::optional<double> {
            if (!o)
                return std::nullopt;
            return (*o)[k];
        };
        Fields out;
        out[0] = solve_diffusion(std::move(rhs[0]), theta, alpha_u, 0.0, h, bc, pick(lv, 0), pick(rv, 0));
        out[1] = solve_diffusion(std::move(rhs[1]), theta, alpha_v, 0.0, h, bc, pick(lv, 1), pick(rv, 1));
        return out;
    };
    sp.impose = [&](Fields& f, double t) {
        if (is_dirichlet(bc.left)) {
            const auto b = bc.left.value(t);
            f[0][0] = b[0];
            f[1][0] = b[1];
        }
        if (is_dirichlet(bc.right)) {
            const auto b = bc.right.value(t);
            f[0][n - 1] = b[0];
            f[1][n - 1] = b[1];
        }
    };
    sp.post_stage = clamp_v;

    Fields y{state.u, state.v};
    clamp_v(y);
    Fields next = advance(sp, y, state.t, cfg.dt, cfg.scheme, cfg.order);

    double umax = 0.0;
    double umin = 0.0;
    for (double u : next[0]) {
        if (!std::isfinite(u))
            throw Error(ErrorCode::PositivityViolation, "non-finite bacteria density after step");
        umax = std::max(umax, std::abs(u));
        umin = std::min(umin, u);
    }
    if (umin < -cfg.positivity_tol * umax) {
        std::ostringstream os;
        os << "bacteria density went negative (min u = " << umin << ", max |u| = " << umax << ")";
        throw Error(ErrorCode::PositivityViolation, os.str());
    }
    if (stats)
        stats->clamp_events += clamps;
    return FieldState{state.grid, std::move(next[0]), std::move(next[1]), state.t + cfg.dt};
}

FieldState step_linearized(const FieldState& state, const ModelParams& mp, const PerturbParams& pp,
                           const SolverConfig& cfg)
{
    validate_perturbation(mp, pp);
    validate_config_with(cfg, mp, Taus{mp.tau, mp.tau});
    check_grid(state, cfg);
    validate_state(state, false);
    const BoundarySpec& bc = cfg.bc;
    if (!is_dirichlet(bc.left) || is_dirichlet(bc.right))
        throw Error(ErrorCode::InvalidArgument,
                    "linearized problem needs a Dirichlet left end and a zero-flux right end", "bc");
    const auto left = bc.left.value(state.t);
    if (left[0] != 0.0 || left[1] != 0.0)
        throw Error(ErrorCode::InvalidArgument, "linearized problem needs zero Dirichlet data", "bc");

    const std::size_t n = state.grid.size();
    const double h = state.grid.spacing();
    const double tau = mp.tau;
    const double alpha_u = mp.mu / (2.0 * tau);
    const double alpha_v = mp.big_d / (2.0 * tau);
    const double kappa = mp.beta * pp.u0 / (pp.v0 * tau);
    const double prod = pp.a / tau;
    const double decay = pp.d_deg / tau;
    const bool block = cfg.coupling == Coupling::ImplicitBlock && cfg.scheme == Scheme::SemiImplicit;

    const auto coupling_terms = [&](const Fields& f) {
        Fields out{laplacian(f[1], h, bc), f[0]};
        for (double& x : out[0])
            x *= -kappa;
        for (double& x : out[1])
            x *= prod;
        out[1][0] = 0.0;
        return out;
    };
    const auto diffusion_terms = [&](const Fields& f) {
        Fields out{laplacian(f[0], h, bc), laplacian(f[1], h, bc)};
        for (double& x : out[0])
            x *= alpha_u;
        for (std::size_t i = 0; i < n; ++i)
            out[1][i] = alpha_v * out[1][i] - decay * f[1][i];
        out[1][0] = 0.0;
        return out;
    };

    Split sp;
    if (block) {
        sp.explicit_part = [n](const Fields&) {
            return Fields{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
        };
        sp.implicit_apply = [&](const Fields& f) {
            Fields a = diffusion_terms(f);
            const Fields c = coupling_terms(f);
            axpy(a[0], 1.0, c[0]);
            axpy(a[1], 1.0, c[1]);
            return a;
        };
        sp.implicit_solve = [&](Fields rhs, double theta, double) {
            const double ih2 = 1.0 / (h * h);
            const Block2 off{-theta * alpha_u * ih2, theta * kappa * ih2, 0.0, -theta * alpha_v * ih2};
            const Block2 dia{1.0 + 2.0 * theta * alpha_u * ih2, -2.0 * theta * kappa * ih2, -theta * prod,
                             1.0 + 2.0 * theta * alpha_v * ih2 + theta * decay};
            std::vector<Block2> lower(n, off);
            std::vector<Block2> diag(n, dia);
            std::vector<Block2> upper(n, off);
            std::vector<Vec2> r(n);
            for (std::size_t i = 0; i < n; ++i)
                r[i] = {rhs[0][i], rhs[1][i]};
            diag[0] = {1.0, 0.0, 0.0, 1.0};
            upper[0] = {0.0, 0.0, 0.0, 0.0};
            r[0] = {0.0, 0.0};
            for (double& x : lower[n - 1])
                x *= 2.0;
            const std::vector<Vec2> x = solve_block_tridiagonal(lower, diag, upper, r);
            Fields out{std::vector<double>(n), std::vector<double>(n)};
            for (std::size_t i = 0; i < n; ++i) {
                out[0][i] = x[i][0];
                out[1][i] = x[i][1];
            }
            return out;
        };
    } else {
        sp.explicit_part = coupling_terms;
        sp.implicit_apply = diffusion_terms;
        sp.implicit_solve = [&](Fields rhs, double theta, double) {
            Fields out;
            out[0] = solve_diffusion(std::move(rhs[0]), theta, alpha_u, 0.0, h, bc, 0.0, std::nullopt);
            out[1] = solve_diffusion(std::move(rhs[1]), theta, alpha_v, decay, h, bc, 0.0, std::nullopt);
            return out;
        };
    }
    sp.impose = [](Fields& f, double) {
        f[0][0] = 0.0;
        f[1][0] = 0.0;
    };
    sp.post_stage = [](Fields&) {};

    Fields next = advance(sp, Fields{state.u, state.v}, state.t, cfg.dt, cfg.scheme, cfg.order);
    return FieldState{state.grid, std::move(next[0]), std::move(next[1]), state.t + cfg.dt};
}

double trapezoid(const Grid1D& grid, std::span<const double> values)
{
    if (values.size() != grid.size())
        throw Error(ErrorCode::GridMismatch, "values do not match the grid size");
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        s += values[i];
    return s * grid.spacing();
}

Diagnostics diagnose(const FieldState& state)
{
    Diagnostics d;
    d.t = state.t;
    d.mass_u = trapezoid(state.grid, state.u);
    d.mass_v = trapezoid(state.grid, state.v);
    const auto [umin, umax] = std::minmax_element(state.u.begin(), state.u.end());
    const auto [vmin, vmax] = std::minmax_element(state.v.begin(), state.v.end());
    d.min_u = *umin;
    d.max_u = *umax;
    d.min_v = *vmin;
    d.max_v = *vmax;
    d.norms = energy_norms(state);
    return d;
}

EnergyTrace Trajectory::energy_trace() const
{
    EnergyTrace tr;
    for (const Diagnostics& d : diagnostics)
        tr.push(d.t, d.norms);
    return tr;
}

Trajectory run(const Problem& problem, const SolverConfig& cfg, const FieldState& initial)
{
    const bool nonlinear = std::holds_alternative<NonlinearProblem>(problem);
    validate_state(initial, nonlinear);
    check_grid(initial, cfg);
    if (const auto* p = std::get_if<NonlinearProblem>(&problem))
        validate_config(cfg, p->mp);
    if (cfg.t_end < initial.t)
        throw Error(ErrorCode::InvalidArgument, "final time precedes the initial state", "t_end");

    Trajectory traj;
    traj.snapshots.push_back(initial);
    traj.diagnostics.push_back(diagnose(initial));

    const double span = cfg.t_end - initial.t;
    if (span <= 0.0)
        return traj;
    const auto n_steps = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));

    SolverConfig step_cfg = cfg;
    FieldState state = initial;
    StepStats stats;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double t_next = k == n_steps ? cfg.t_end : initial.t + static_cast<double>(k) * cfg.dt;
        step_cfg.dt = t_next - state.t;
        try {
            if (const auto* p = std::get_if<NonlinearProblem>(&problem))
                state = step_nonlinear(state, p->mp, p->consumption, step_cfg, &stats);
            else {
                const auto& lp = std::get<LinearizedProblem>(problem);
                state = step_linearized(state, lp.mp, lp.pp, step_cfg);
            }
        } catch (const Error& e) {
            throw e.with_time(state.t);
        }
        state.t = t_next;
        traj.diagnostics.push_back(diagnose(state));
        if (k == n_steps || (cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0))
            traj.snapshots.push_back(state);
    }
    traj.steps = n_steps;
    traj.clamp_events = stats.clamp_events;
    return traj;
}

namespace {

/// Index of the largest value plus the parabolic vertex offset in units of h.
std::optional<double> refined_argmax(std::span<const double> f, std::size_t lo, std::size_t hi)
{
    std::size_t best = lo;
    for (std::size_t i = lo; i <= hi; ++i) {
        if (f[i] > f[best])
            best = i;
    }
    if (best == lo || best == hi)
        return std::nullopt;
    const double fm = f[best - 1];
    const double f0 = f[best];
    const double fp = f[best + 1];
    const double denom = fm - 2.0 * f0 + fp;
    double offset = 0.0;
    if (denom < 0.0)
        offset = 0.5 * (fm - fp) / denom;
    return static_cast<double>(best) + std::clamp(offset, -0.5, 0.5);
}

} // namespace

WaveSpeedEstimate measure_wave_speed(const Trajectory& traj)
{
    const auto& snaps = traj.snapshots;
    if (snaps.size() < 3)
        throw Error(ErrorCode::InvalidArgument, "wave speed needs at least three snapshots");

    const auto locate = [](const FieldState& s, TrackedFeature feature) -> std::optional<double> {
        const std::size_t n = s.u.size();
        const auto [mn, mx] = std::minmax_element(s.u.begin(), s.u.end());
        const double scale = std::max(std::abs(*mn), std::abs(*mx));
        if (!(*mx - *mn > 1e-13 * scale))
            return std::nullopt;
        if (feature == TrackedFeature::Peak)
            return refined_argmax(s.u, 0, n - 1);
        std::vector<double> slope(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i)
            slope[i] = std::abs(s.u[i + 1] - s.u[i - 1]);
        return refined_argmax(slope, 1, n - 2);
    };

    for (TrackedFeature feature : {TrackedFeature::Peak, TrackedFeature::Front}) {
        WaveSpeedEstimate est;
        est.feature = feature;
        bool ok = true;
        for (const FieldState& s : snaps) {
            const auto idx = locate(s, feature);
            if (!idx) {
                ok = false;
                break;
            }
            est.times.push_back(s.t);
            est.positions.push_back(s.grid.x0() + *idx * s.grid.spacing());
        }
        if (!ok)
            continue;
        const double n = static_cast<double>(est.times.size());
        double mt = 0.0;
        double mx = 0.0;
        for (std::size_t i = 0; i < est.times.size(); ++i) {
            mt += est.times[i];
            mx += est.positions[i];
        }
        mt /= n;
        mx /= n;
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t i = 0; i < est.times.size(); ++i) {
            sxy += (est.times[i] - mt) * (est.positions[i] - mx);
            sxx += (est.times[i] - mt) * (est.times[i] - mt);
        }
        if (!(sxx > 0.0))
            throw Error(ErrorCode::InvalidArgument, "snapshots must have distinct times");
        est.c_est = sxy / sxx;
        return est;
    }
    throw Error(ErrorCode::NoBandDetected, "u has no interior maximum or front in every snapshot");
}

FieldState band_state(const ModelParams& mp, const BandParams& bp, const Grid1D& grid, double t)
{
    std::vector<double> zeta = grid.nodes();
    for (double& z : zeta)
        z -= bp.c * t;
    BandProfile p = eval_band(mp, bp, zeta);
    return FieldState{grid, std::move(p.u), std::move(p.v), t};
}

FieldState mode_state(const Grid1D& grid, double lambda, double amp_u, double amp_v)
{
    FieldState s{grid, std::vector<double>(grid.size()), std::vector<double>(grid.size()), 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double phi = std::sin(lambda * (grid.x(i) - grid.x0()));
        s.u[i] = amp_u * phi;
        s.v[i] = amp_v * phi;
    }
    return s;
}

FieldState random_mode_state(const Grid1D& grid, unsigned n_modes, std::uint64_t seed)
{
    if (n_modes == 0)
        throw Error(ErrorCode::InvalidArgument, "random_mode_state needs at least one mode", "n_modes");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double ell = grid.x1() - grid.x0();
    FieldState s{grid, std::vector<double>(grid.size(), 0.0), std::vector<double>(grid.size(), 0.0), 0.0};
    for (unsigned j = 0; j < n_modes; ++j) {
        const double scale = 1.0 / ((j + 1.0) * (j + 1.0));
        const double cu = scale * coef(rng);
        const double cv = scale * coef(rng);
        const double lambda = (j + 0.5) * std::numbers::pi / ell;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double phi = std::sin(lambda * (grid.x(i) - grid.x0()));
            s.u[i] += cu * phi;
            s.v[i] += cv * phi;
        }
    }
    return s;
}

} // namespace chemoband
