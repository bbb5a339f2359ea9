#include "chemoband/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "chemoband/bands.hpp"
#include "chemoband/cli/output.hpp"
#include "chemoband/pde.hpp"
#include "chemoband/sensitivity.hpp"
#include "chemoband/stability.hpp"
#include "chemoband/walk.hpp"

namespace chemoband::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

json derived_json(const DerivedParams& dp)
{
    return json{{"d", dp.d_ratio}, {"c3", dp.c3},          {"c4", dp.c4},
                {"q_unlim", dp.q_unlim}, {"q_lim", dp.q_lim}, {"rate", dp.rate},
                {"amplitude", dp.amplitude}};
}

json certificate_json(const EnergyCertificate& c)
{
    json j{{"mu_dominates_coupling", c.mu_dominates_coupling},
           {"diffusion_dominates_coupling", c.diffusion_dominates_coupling},
           {"motility_bounds_production", c.motility_bounds_production},
           {"diffusion_bounds_production", c.diffusion_bounds_production},
           {"certified", c.certified()},
           {"c_p", c.c_p},
           {"sup_bound_coeff", c.sup_bound_coeff},
           {"instability_predicted", c.instability_predicted},
           {"consistent", c.consistent}};
    j["rate_l2"] = c.rate_l2 ? json(*c.rate_l2) : json(nullptr);
    j["rate_h1"] = c.rate_h1 ? json(*c.rate_h1) : json(nullptr);
    return j;
}

std::vector<double> zeta_points(const RunSpec& spec)
{
    return linspace(spec.zeta.zeta_min, spec.zeta.zeta_max, spec.zeta.n_points);
}

Grid1D solver_grid(const RunSpec& spec)
{
    return Grid1D(spec.solver.x0, spec.solver.x1, spec.solver.n_nodes);
}

double solver_dt(const RunSpec& spec, const Grid1D& grid)
{
    return spec.solver.dt > 0.0 ? spec.solver.dt : 0.25 * grid.spacing();
}

std::size_t snapshot_stride(const RunSpec& spec, double dt)
{
    if (spec.solver.snapshot_every > 0)
        return spec.solver.snapshot_every;
    const double steps = std::ceil(spec.solver.t_end / dt);
    return std::max<std::size_t>(1, static_cast<std::size_t>(steps / 10.0));
}

SolverConfig base_solver_config(const RunSpec& spec, const Grid1D& grid)
{
    SolverConfig cfg;
    cfg.grid = grid;
    cfg.dt = solver_dt(spec, grid);
    cfg.t_end = spec.solver.t_end;
    cfg.scheme = spec.solver.scheme;
    cfg.order = spec.solver.order;
    cfg.tau_convention = spec.solver.tau_convention;
    cfg.coupling = spec.solver.coupling;
    cfg.v_floor = spec.solver.v_floor;
    cfg.snapshot_every = snapshot_stride(spec, cfg.dt);
    return cfg;
}

json cmd_band(const RunSpec& spec, OutputSet& out)
{
    const DerivedParams dp = validate(spec.model, spec.band);
    const std::vector<double> zeta = zeta_points(spec);
    const BandProfile p = eval_band(spec.model, spec.band, zeta);
    const bool unlimited = is_unlimited(spec.band.regime);
    const double q = unlimited ? dp.q_unlim : dp.q_lim;

    Table t{{"zeta", "zeta_bar", "U", "V", "U_norm", "V_norm"}, {}};
    for (std::size_t i = 0; i < p.size(); ++i)
        t.add_row({p.zeta[i], spec.band.c * p.zeta[i] / spec.model.mu, p.u[i], p.v[i], p.u[i] / q,
                   p.v[i] / spec.band.v_inf});
    out.write_primary(t);

    json summary{{"command", "band"},
                 {"regime", to_string(spec.band.regime)},
                 {"derived", derived_json(dp)},
                 {"normalisation", q},
                 {"guarded_samples", p.guarded}};
    if (unlimited) {
        const BandExtrema ex = band_extrema(spec.model, spec.band);
        summary["extrema"] = json{{"u_max", ex.u_max},
                                  {"zeta0", ex.zeta0},
                                  {"u_max_numeric", ex.u_max_numeric},
                                  {"zeta0_numeric", ex.zeta0_numeric},
                                  {"u_max_rel_diff", std::abs(ex.u_max_numeric - ex.u_max) / ex.u_max}};
        QuadratureConfig qc;
        qc.rel_tol = spec.run.quad_rel_tol;
        const SpeedEstimate se = band_speed_from_mass(spec.model, spec.band, qc);
        summary["speed_identity"] = json{{"c", spec.band.c},
                                         {"c_est", se.c_est},
                                         {"rel_err", std::abs(se.c_est - spec.band.c) / spec.band.c},
                                         {"error_estimate", se.error_estimate},
                                         {"mass", se.mass}};
    } else {
        summary["plateau"] = dp.c4;
    }
    out.write_json("summary", summary);
    return summary;
}

json cmd_ode_oracle(const RunSpec& spec, OutputSet& out)
{
    const DerivedParams dp = validate(spec.model, spec.band);
    const double za = spec.run.ode_zeta_start;
    const BandProfile start = eval_band(spec.model, spec.band, std::vector<double>{za});
    BandInitialCondition ic{start.u[0], start.v[0]};
    if (spec.run.ode_ic_u > 0.0)
        ic.u = spec.run.ode_ic_u;
    const BandSpan span{za, spec.zeta.zeta_max, spec.zeta.n_points};
    if (!(span.zeta_b > span.zeta_a))
        throw Error(ErrorCode::ValidationError, "'ode_zeta_start' must lie below zeta_max", "ode_zeta_start");

    json summary{{"command", "ode-oracle"},
                 {"regime", to_string(spec.band.regime)},
                 {"ic", {{"zeta", za}, {"u", ic.u}, {"v", ic.v}}}};

    BandProfile num;
    LimitedCase lc = LimitedCase::None;
    try {
        BandOdeResult r = integrate_band_ode(spec.model, spec.band, ic, span);
        num = std::move(r.profile);
        lc = r.limited_case;
    } catch (const BlowupDetected& e) {
        num = e.partial_profile();
        lc = LimitedCase::Blowup;
        summary["zeta_blowup"] = e.zeta_max();
        // U(za) = C4 / (1 - K e^{s za}) is singular where K e^{s zeta} = 1.
        summary["zeta_blowup_predicted"] = za - std::log(1.0 - dp.c4 / ic.u) / dp.rate;
    }
    const char* case_names[] = {"none", "constant", "band", "blowup"};
    summary["limited_case"] = case_names[static_cast<int>(lc)];

    const BandProfile exact = eval_band(spec.model, spec.band, num.zeta);
    Table t{{"zeta", "U_ode", "V_ode", "U_exact", "V_exact", "err_u", "err_v"}, {}};
    for (std::size_t i = 0; i < num.size(); ++i)
        t.add_row({num.zeta[i], num.u[i], num.v[i], exact.u[i], exact.v[i], num.u[i] - exact.u[i],
                   num.v[i] - exact.v[i]});
    out.write_primary(t);
    summary["sup_err_u"] = max_abs_diff(num.u, exact.u);
    summary["sup_err_v"] = max_abs_diff(num.v, exact.v);
    summary["samples"] = num.size();
    out.write_json("summary", summary);
    return summary;
}

json cmd_simulate(const RunSpec& spec, OutputSet& out)
{
    validate(spec.model, spec.band);
    const Grid1D grid = solver_grid(spec);
    SolverConfig cfg = base_solver_config(spec, grid);
    cfg.v_floor = spec.solver.v_floor * spec.band.v_inf;
    cfg.bc.left = EndCondition::traced_band(spec.model, spec.band, grid.x0());
    cfg.bc.right = EndCondition::traced_band(spec.model, spec.band, grid.x1());
    const FieldState init = band_state(spec.model, spec.band, grid, 0.0);
    const Trajectory traj = run(NonlinearProblem{spec.model, spec.consumption()}, cfg, init);

    Table snaps{{"t", "x", "u", "v", "u_band", "v_band"}, {}};
    for (const FieldState& s : traj.snapshots) {
        const FieldState ref = band_state(spec.model, spec.band, grid, s.t);
        for (std::size_t i = 0; i < grid.size(); ++i)
            snaps.add_row({s.t, grid.x(i), s.u[i], s.v[i], ref.u[i], ref.v[i]});
    }
    out.write_primary(snaps);

    std::string lines;
    for (const Diagnostics& d : traj.diagnostics) {
        lines += json{{"t", d.t},
                      {"mass_u", d.mass_u},
                      {"mass_v", d.mass_v},
                      {"min_u", d.min_u},
                      {"max_u", d.max_u},
                      {"min_v", d.min_v},
                      {"max_v", d.max_v},
                      {"l2_sq", d.norms.l2_sq},
                      {"h1_sq", d.norms.h1_sq},
                      {"sup_norm", d.norms.sup_norm}}
                     .dump();
        lines += '\n';
    }
    out.write_text("diagnostics.jsonl", lines);

    const FieldState& last = traj.snapshots.back();
    const FieldState ref = band_state(spec.model, spec.band, grid, last.t);
    json summary{{"command", "simulate"},
                 {"consumption", to_string(spec.consumption())},
                 {"steps", traj.steps},
                 {"dt", cfg.dt},
                 {"t_end", last.t},
                 {"clamp_events", traj.clamp_events},
                 {"final_sup_err_u", max_abs_diff(last.u, ref.u)},
                 {"final_sup_err_v", max_abs_diff(last.v, ref.v)}};
    try {
        const WaveSpeedEstimate ws = measure_wave_speed(traj);
        summary["wave_speed"] = json{{"c_est", ws.c_est},
                                     {"c", spec.band.c},
                                     {"feature", ws.feature == TrackedFeature::Peak ? "peak" : "front"}};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoBandDetected)
            throw;
        summary["wave_speed"] = nullptr;
    }
    out.write_json("summary", summary);
    return summary;
}

json cmd_linstab(const RunSpec& spec, OutputSet& out)
{
    validate_perturbation(spec.model, spec.perturb);
    Table t{{"n", "lambda", "b", "c_coef", "re_sigma1", "im_sigma1", "re_sigma2", "im_sigma2", "class", "a_star",
             "root_residual"},
            {}};
    json modes = json::array();
    for (unsigned n = 0; n < spec.n_modes; ++n) {
        const DispersionResult r = dispersion_mode(spec.model, spec.perturb, n, spec.family);
        const double a_star = instability_threshold_mode(spec.model, spec.perturb, n, spec.family);
        t.add_row({static_cast<std::int64_t>(n), r.lambda, r.b, r.c_coef, r.sigma1.real(), r.sigma1.imag(),
                   r.sigma2.real(), r.sigma2.imag(), std::string(to_string(r.cls)), a_star, r.root_residual});
        modes.push_back(json{{"n", n}, {"class", to_string(r.cls)}, {"sigma2", r.sigma2.real()}, {"a_star", a_star}});
    }
    out.write_primary(t);
    json summary{{"command", "linstab"},
                 {"family", spec.family == ModeFamily::Even ? "even" : "sturm-liouville"},
                 {"a", spec.perturb.a},
                 {"a_star_n0", instability_threshold_n0(spec.model, spec.perturb)},
                 {"modes", std::move(modes)},
                 {"certificate", certificate_json(energy_certificate(spec.model, spec.perturb))}};
    out.write_json("summary", summary);
    return summary;
}

json cmd_energy(const RunSpec& spec, OutputSet& out)
{
    validate_perturbation(spec.model, spec.perturb);
    const Grid1D grid(0.0, spec.perturb.ell, spec.solver.n_nodes);
    SolverConfig cfg = base_solver_config(spec, grid);
    cfg.bc = BoundarySpec::dirichlet_neumann();
    const FieldState init = random_mode_state(grid, spec.n_modes, spec.run.seed);
    const Trajectory traj = run(LinearizedProblem{spec.model, spec.perturb}, cfg, init);
    const EnergyTrace trace = traj.energy_trace();
    const EnergyCertificate cert = energy_certificate(spec.model, spec.perturb);

    Table t{{"t", "l2_sq", "h1_sq", "sup_norm", "l2_bound", "sup_bound"}, {}};
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double dt = trace.times[i] - trace.times.front();
        const double l2b = cert.rate_l2 ? trace.l2_sq.front() * std::exp(-*cert.rate_l2 * dt) : NAN;
        const double supb = cert.rate_h1
                              ? cert.sup_bound_coeff * std::sqrt(trace.h1_sq.front()) * std::exp(-0.5 * *cert.rate_h1 * dt)
                              : NAN;
        t.add_row({trace.times[i], trace.l2_sq[i], trace.h1_sq[i], trace.sup_norm[i], l2b, supb});
    }
    out.write_primary(t);

    json fits = json::object();
    const std::pair<const char*, TraceField> fields[] = {
        {"l2_sq", TraceField::L2}, {"h1_sq", TraceField::H1}, {"sup_norm", TraceField::Sup}};
    for (const auto& [name, f] : fields) {
        try {
            fits[name] = fit_decay_rate(trace, f);
        } catch (const Error&) {
            fits[name] = nullptr;
        }
    }
    json summary{{"command", "energy"},
                 {"steps", traj.steps},
                 {"dt", cfg.dt},
                 {"certificate", certificate_json(cert)},
                 {"fitted_rates", fits}};
    if (cert.certified()) {
        const EnergyBoundCheck chk = check_energy_bounds(trace, cert);
        summary["bounds"] = json{{"max_l2_ratio", chk.max_l2_ratio},
                                 {"max_sup_ratio", chk.max_sup_ratio},
                                 {"t_worst_l2", chk.t_worst_l2},
                                 {"t_worst_sup", chk.t_worst_sup}};
    }
    out.write_json("summary", summary);
    return summary;
}

json pair_json(const std::optional<std::pair<ParamVector, ParamVector>>& p)
{
    if (!p)
        return nullptr;
    return json{{"w1", p->first}, {"w2", p->second}};
}

json cmd_sensitivity(const RunSpec& spec, OutputSet& out)
{
    validate(spec.model, spec.band);
    const BandFamily family = is_unlimited(spec.band.regime) ? BandFamily::Unlimited : BandFamily::Limited;
    const ParamVector w = encode(family, spec.model, spec.band);
    ParamBox box{family, w, w};
    for (std::size_t i = 0; i < w.size(); ++i) {
        box.lo[i] = w[i] * (1.0 - spec.run.box_rel_width);
        box.hi[i] = w[i] * (1.0 + spec.run.box_rel_width);
    }
    const std::vector<double> grid = make_probe_grid(spec.model, spec.band);
    const LipschitzResult lip = lipschitz_probe(box, spec.run.n_pairs, grid, spec.run.seed);

    json summary{{"command", "sensitivity"},
                 {"family", family == BandFamily::Unlimited ? "unlimited" : "limited"},
                 {"lipschitz",
                  {{"k_u", lip.k_u},
                   {"k_v", lip.k_v},
                   {"k_emp", lip.k_emp},
                   {"worst_pair_u", pair_json(lip.worst_pair_u)},
                   {"worst_pair_v", pair_json(lip.worst_pair_v)},
                   {"pairs_evaluated", lip.pairs_evaluated},
                   {"pairs_skipped", lip.pairs_skipped}}}};
    std::vector<std::string> names;
    for (const auto n : parameter_names(family))
        names.emplace_back(n);
    summary["parameter_names"] = names;

    Table trends{{"quantity", "parameter", "value"}, {}};
    if (family == BandFamily::Unlimited) {
        for (const double tau : {0.05, 0.02, 0.005}) {
            ModelParams mp = spec.model;
            mp.tau = tau;
            trends.add_row({std::string("scaled_band_width"), tau, scaled_band_width(mp, spec.band)});
        }
        std::vector<double> deltas;
        for (std::size_t i = 0; i < spec.run.n_deltas; ++i)
            deltas.push_back(spec.run.delta0 / std::ldexp(1.0, static_cast<int>(i)));
        BandParams bp1 = spec.band;
        bp1.regime = Regime::UnlimitedCritical;
        ModelParams mp1 = spec.model;
        mp1.beta = 0.5 * mp1.mu;
        const ConvergenceReport rep = uniform_convergence_probe(mp1, bp1, deltas, make_probe_grid(mp1, bp1));
        Table conv{{"delta", "err_u", "err_v", "err_u_over_delta", "err_v_over_delta"}, {}};
        for (const auto& r : rep.rows)
            conv.add_row({r.delta, r.err_u, r.err_v, r.err_u / r.delta, r.err_v / r.delta});
        out.write_table("convergence", conv);
        summary["convergence"] = json{{"u_decreasing", rep.u_decreasing},
                                      {"v_decreasing", rep.v_decreasing},
                                      {"u_ratio_spread", rep.u_ratio_spread},
                                      {"v_ratio_spread", rep.v_ratio_spread}};
    }
    for (const double d : {0.3, 1.0, 3.0, 10.0}) {
        ModelParams mp = spec.model;
        mp.beta = 0.5 * d * mp.mu;
        BandParams bp = spec.band;
        bp.regime = Regime::Limited;
        trends.add_row({std::string("limited_plateau"), d, limited_plateau(mp, bp)});
    }
    out.write_primary(trends);
    out.write_json("summary", summary);
    return summary;
}

json cmd_walk(const RunSpec& spec, OutputSet& out)
{
    validate(spec.model, spec.band);
    const Grid1D grid = solver_grid(spec);
    const FieldState band = band_state(spec.model, spec.band, grid, 0.0);
    const double var = spec.run.walk_variance > 0.0 ? spec.run.walk_variance : spec.model.mu;
    const double t_end = static_cast<double>(spec.run.walk_steps) * spec.model.tau;

    FrozenSubstrateRun ref_run;
    ref_run.tau = spec.model.tau;
    ref_run.mu = var;
    ref_run.beta = spec.model.beta;
    ref_run.grid = grid;
    ref_run.v = band.v;
    ref_run.start_mean = 0.0;
    ref_run.start_variance = spec.run.walk_start_sd * spec.run.walk_start_sd;
    ref_run.t_end = t_end;
    ref_run.dt = solver_dt(spec, grid);
    const std::vector<double> u_ref = frozen_substrate_solution(ref_run);

    // Bins cover six standard deviations of the reference solution either
    // side of its mean, clipped to the grid.
    std::vector<double> xu(grid.size());
    std::vector<double> x2u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        xu[i] = grid.x(i) * u_ref[i];
        x2u[i] = grid.x(i) * grid.x(i) * u_ref[i];
    }
    const double mass = trapezoid(grid, u_ref);
    const double mean = trapezoid(grid, xu) / mass;
    const double sd = std::sqrt(std::max(trapezoid(grid, x2u) / mass - mean * mean, 0.0));
    HistogramLayout layout = layout_for(mean, sd);
    const double lo = std::max(layout.x_lo, grid.x0());
    const double hi = std::min(layout.x_hi(), grid.x1());
    if (spec.run.n_bins > 0)
        layout.n_bins = spec.run.n_bins;
    layout.x_lo = lo;
    layout.bin_width = (hi - lo) / static_cast<double>(layout.n_bins);
    const std::vector<double> reference = bin_average(grid, u_ref, layout);

    std::vector<double> start(spec.run.n_particles);
    std::seed_seq seq{static_cast<std::uint32_t>(spec.run.seed), static_cast<std::uint32_t>(spec.run.seed >> 32),
                      0xA5A5A5A5u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, spec.run.walk_start_sd);
    for (double& x : start)
        x = normal(rng);

    WalkConfig wc;
    wc.n_particles = spec.run.n_particles;
    wc.tau_step = spec.model.tau;
    wc.jump = GaussianJump{var};
    wc.drift = DriftField::log_gradient(spec.model.beta, grid, band.v);
    wc.n_steps = spec.run.walk_steps;
    wc.layout = layout;
    wc.seed = spec.run.seed;
    const WalkResult res = simulate_walk(wc, start);
    const Histogram& h = res.histograms.back();
    const std::vector<double> dens = h.density();
    const std::vector<double> se = h.standard_error();
    const DensityComparison cmp = compare_density(h, reference);

    double ref_mass = 0.0;
    for (const double r : reference)
        ref_mass += r * layout.bin_width;
    Table t{{"bin_center", "density", "stderr", "pde_density"}, {}};
    for (std::size_t i = 0; i < layout.n_bins; ++i)
        t.add_row({layout.center(i), dens[i], se[i], ref_mass > 0.0 ? reference[i] / ref_mass : 0.0});
    out.write_primary(t);

    const WalkMoments& m = res.moments.back();
    json summary{{"command", "walk"},
                 {"n_particles", spec.run.n_particles},
                 {"steps", spec.run.walk_steps},
                 {"t_end", t_end},
                 {"jump_variance", var},
                 {"moments", {{"mean", m.mean}, {"variance", m.variance}, {"skewness", m.skewness}}},
                 {"pde_moments", {{"mean", mean}, {"variance", sd * sd}}},
                 {"l1_err", cmp.l1_err},
                 {"sup_err", cmp.sup_err},
                 {"below", h.below},
                 {"above", h.above}};
    out.write_json("summary", summary);
    return summary;
}

/// A manifest written by this tool holds the full spec; use it directly.
std::string config_text_from(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open config file '" + path + "'", "config");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const json doc = json::parse(text, nullptr, false);
        if (doc.is_object() && doc.contains("spec_hash") && doc.contains("spec"))
            return doc.at("spec").dump();
    }
    return text;
}

} // namespace

std::vector<std::string> command_names()
{
    return {"band", "ode-oracle", "simulate", "linstab", "energy", "sensitivity", "walk"};
}

std::string default_preset(std::string_view command)
{
    if (command == "linstab")
        return "dispersion";
    if (command == "energy")
        return "energy";
    return "table1";
}

int exit_code_for(ErrorCategory category)
{
    switch (category) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::Io: return 4;
    }
    return 1;
}

json error_json(const Error& e)
{
    json j{{"code", to_string(e.code())},
           {"exit_code", exit_code_for(e.category())},
           {"message", e.what()}};
    j["field"] = e.field().empty() ? json(nullptr) : json(e.field());
    j["time"] = e.time() ? json(*e.time()) : json(nullptr);
    return json{{"error", j}};
}

void run_command(std::string_view command, const RunSpec& spec, const fs::path& out, std::ostream& log)
{
    validate_spec(spec);
    OutputSet outputs(out, std::string(command), spec.run.format);
    json summary;
    if (command == "band")
        summary = cmd_band(spec, outputs);
    else if (command == "ode-oracle")
        summary = cmd_ode_oracle(spec, outputs);
    else if (command == "simulate")
        summary = cmd_simulate(spec, outputs);
    else if (command == "linstab")
        summary = cmd_linstab(spec, outputs);
    else if (command == "energy")
        summary = cmd_energy(spec, outputs);
    else if (command == "sensitivity")
        summary = cmd_sensitivity(spec, outputs);
    else if (command == "walk")
        summary = cmd_walk(spec, outputs);
    else
        throw Error(ErrorCode::ValidationError, "unknown command '" + std::string(command) + "'", "command");
    const fs::path manifest = outputs.write_manifest(spec);
    summary["manifest"] = manifest.string();
    log << summary.dump(2) << '\n';
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"Traveling chemotactic bands: closed forms, PDE solver, stability and random-walk checks", "chemoband"};
    app.set_version_flag("--version", CHEMOBAND_VERSION);
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path;
    std::string preset_name;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::string format;
    std::optional<double> d_override;
    app.add_option("--config", config_path, "JSON or INI spec; a manifest from an earlier run also works");
    app.add_option("--preset", preset_name, "Parameter preset")->check(CLI::IsMember(preset_names()));
    app.add_option("--out", out_path, "Output directory, or a .csv/.json file for the primary table");
    app.add_option("--seed", seed, "Seed for random sampling");
    app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--d", d_override, "Chemotaxis ratio d = 2 beta / mu; sets beta");

    std::string verify_path;
    auto* verify = app.add_subcommand("verify", "Check that every file listed in a manifest exists and matches");
    verify->add_option("manifest", verify_path)->required();

    for (const std::string& name : command_names())
        app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        std::cerr << json{{"error",
                           {{"code", "ParseError"}, {"exit_code", 2}, {"message", e.what()}, {"field", nullptr},
                            {"time", nullptr}}}}
                         .dump()
                  << '\n';
        return 2;
    }

    const auto subs = app.get_subcommands();
    if (subs.empty()) {
        std::cout << app.help();
        return 0;
    }
    const std::string command = subs.front()->get_name();

    try {
        if (command == "verify") {
            const std::vector<std::string> bad = verify_manifest(verify_path);
            std::cout << json{{"manifest", verify_path}, {"ok", bad.empty()}, {"mismatched", bad}}.dump(2) << '\n';
            return bad.empty() ? 0 : 4;
        }
        RunSpec spec = preset(preset_name.empty() ? default_preset(command) : preset_name);
        if (!config_path.empty())
            spec = parse_config_text(config_text_from(config_path), spec);
        if (seed)
            spec.run.seed = *seed;
        if (!format.empty())
            spec.run.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
        if (d_override) {
            if (!(*d_override > 0.0))
                throw Error(ErrorCode::ValidationError, "'d' must be strictly positive", "d");
            spec.model.beta = 0.5 * *d_override * spec.model.mu;
        }
        spec.resolve_regime();
        run_command(command, spec, out_path.empty() ? fs::path(command + "_out") : fs::path(out_path), std::cout);
        return 0;
    } catch (const Error& e) {
        std::cerr << error_json(e).dump() << '\n';
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << json{{"error",
                           {{"code", "Internal"}, {"exit_code", 3}, {"message", e.what()}, {"field", nullptr},
                            {"time", nullptr}}}}
                         .dump()
                  << '\n';
        return 3;
    }
}

} // namespace chemoband::cli
