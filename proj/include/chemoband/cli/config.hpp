#pragma once

// Run specification for the command line tool.
//
// A spec is read from a JSON object or from an INI-style file with the
// sections [model], [band], [perturb], [solver] and [run]:
//
//   [model]
//   regime = limited
//   beta = 0.25
//
//   [solver]
//   t_end = 1.0
//
// Every key has a default, so any subset may be given. Unknown sections and
// keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chemoband/model.hpp"
#include "chemoband/pde.hpp"
#include "chemoband/stability.hpp"

namespace chemoband::cli {

enum class OutputFormat { Csv, Json };

struct ZetaSpec {
    double zeta_min = -20.0;
    double zeta_max = 20.0;
    std::size_t n_points = 401;
};

struct SolverSpec {
    double x0 = -15.0;
    double x1 = 15.0;
    std::size_t n_nodes = 6001;
    double dt = 0.0; ///< 0 selects 0.25 h
    double t_end = 1.0;
    Scheme scheme = Scheme::SemiImplicit;
    int order = 2;
    double v_floor = 1e-12; ///< relative to v_inf
    TauConvention tau_convention = TauConvention::UnitSubstrate;
    Coupling coupling = Coupling::ImplicitBlock;
    std::size_t snapshot_every = 0; ///< 0 selects ten snapshots over the run
    std::string consumption = "auto";
};

struct RunSection {
    std::uint64_t seed = 0;
    OutputFormat format = OutputFormat::Csv;
    double quad_rel_tol = 1e-10;
    double ode_zeta_start = -20.0;
    double ode_ic_u = 0.0; ///< 0 takes U(ode_zeta_start) from the closed form
    std::size_t n_pairs = 200;
    double box_rel_width = 0.1;
    double delta0 = 0.5;
    std::size_t n_deltas = 9;
    std::size_t n_particles = 100'000;
    std::size_t walk_steps = 100;
    double walk_start_sd = 0.1; ///< spread of the Gaussian starting cloud
    double walk_variance = 0.0; ///< 0 uses mu
    std::size_t n_bins = 0;     ///< 0 picks ~0.5 standard deviations per bin
};

struct RunSpec {
    ModelParams model{0.05, 0.25, 0.1625, 0.0, 1.0};
    std::string regime = "auto";
    BandParams band{1.5, 4.0, 1.0, Regime::UnlimitedGeneral};
    ZetaSpec zeta;
    PerturbParams perturb{1.0, 1.0, 1.0, 0.5, 1.0};
    unsigned n_modes = 6;
    ModeFamily family = ModeFamily::Even;
    SolverSpec solver;
    RunSection run;

    /// Resolves band.regime from `regime` and the model's d.
    void resolve_regime();
    /// Consumption law for PDE runs: "auto" follows the band regime.
    Consumption consumption() const;
};

/// Preset names accepted by preset().
std::vector<std::string> preset_names();
/// Throws Error(ValidationError) for an unknown name.
RunSpec preset(std::string_view name);

/// Overlays a JSON or INI document on `base`. The format is JSON when the
/// first non-blank character is '{'. Throws Error(ParseError) with line and
/// column for syntax errors and unknown keys, Error(ValidationError) for
/// values that fail parameter checks.
RunSpec parse_config_text(std::string_view text, RunSpec base = {});
RunSpec parse_config_file(const std::string& path, RunSpec base = {});

/// Positivity and range checks on every section; regime-specific checks are
/// left to the commands. Throws Error(ValidationError) naming the field.
void validate_spec(const RunSpec& spec);

/// Canonical echo of the spec. Keys are sorted, so the dump is stable.
nlohmann::json to_json(const RunSpec& spec);

} // namespace chemoband::cli
