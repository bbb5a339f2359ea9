#pragma once

// Monte Carlo jump process behind the diffusion-drift equation. Every
// tau_step each particle moves by Delta = m(x) + xi, where m is the mean jump
// evaluated at the pre-jump position and xi is a zero-mean draw from the
// jump density. In the continuum limit the density obeys
//
//   w_t = var / (2 tau) w_xx - ((m / tau) w)_x.
//
// For chemotaxis toward a frozen substrate profile, m = beta (ln v)_x and
// var = mu reproduce the bacteria equation of the PDE solver.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "chemoband/model.hpp"

namespace chemoband {

struct GaussianJump {
    double variance = 0.0;
};

/// Density of the zero-mean part of the jump, tabulated at increasing
/// abscissae and linearly interpolated in between.
struct TabulatedJump {
    std::vector<double> x;
    std::vector<double> density;
};

using JumpDensity = std::variant<GaussianJump, TabulatedJump>;

/// Variance of the jump density; throws InvalidArgument for a malformed table.
double jump_variance(const JumpDensity& jump);

class DriftField {
public:
    DriftField() = default;

    static DriftField constant(double m);
    /// m(x) = beta (ln v)'(x) from v sampled on a grid; zero outside the grid.
    static DriftField log_gradient(double beta, const Grid1D& grid, std::span<const double> v);

    double operator()(double x) const;

private:
    double constant_ = 0.0;
    double x0_ = 0.0;
    double h_ = 0.0;
    std::vector<double> samples_;
};

struct HistogramLayout {
    double x_lo = -1.0;
    double bin_width = 0.1;
    std::size_t n_bins = 20;

    double x_hi() const noexcept { return x_lo + bin_width * static_cast<double>(n_bins); }
    double center(std::size_t i) const noexcept { return x_lo + (static_cast<double>(i) + 0.5) * bin_width; }
    std::vector<double> centers() const;
};

/// Layout of width ~ 0.5 sd covering mean +- span_sd sd.
HistogramLayout layout_for(double mean, double sd, double span_sd = 6.0);

struct Histogram {
    HistogramLayout layout;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0; ///< all particles, including those outside the bins
    std::uint64_t below = 0;
    std::uint64_t above = 0;

    std::uint64_t in_range() const noexcept { return total - below - above; }
    /// counts / (in_range * bin_width); integrates to one over the bins.
    std::vector<double> density() const;
    /// Binomial standard error of density().
    std::vector<double> standard_error() const;
};

struct WalkMoments {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
};

struct WalkConfig {
    std::size_t n_particles = 10'000;
    double tau_step = 1.0;
    JumpDensity jump = GaussianJump{1.0};
    DriftField drift;
    std::size_t n_steps = 0;
    HistogramLayout layout;
    /// Steps at which histograms are recorded; empty means the last step only.
    std::vector<std::size_t> record_steps;
    std::uint64_t seed = 0;
};

struct WalkResult {
    std::vector<std::size_t> steps;
    std::vector<double> times;
    std::vector<Histogram> histograms;
    std::vector<WalkMoments> moments;
};

/// Runs the walk. `initial_positions` holds either one position shared by all
/// particles or one per particle. Particles are processed in fixed-size
/// chunks with independently seeded generators, so results depend on the
/// seed only and not on the number of threads.
WalkResult simulate_walk(const WalkConfig& cfg, std::span<const double> initial_positions);

struct DensityComparison {
    double l1_err = 0.0;
    double sup_err = 0.0;
};

/// Distances between the empirical density and a reference sampled on the
/// same bins. The reference is renormalized to unit mass over the bins.
/// Throws GridMismatch when the sizes differ.
DensityComparison compare_density(const Histogram& hist, std::span<const double> reference);
/// As above, also checking that `centers` are the histogram bin centres.
DensityComparison compare_density(const Histogram& hist, std::span<const double> centers,
                                  std::span<const double> reference);

/// Bin averages of the piecewise-linear interpolant of grid values. Throws
/// GridMismatch when a bin leaves the grid.
std::vector<double> bin_average(const Grid1D& grid, std::span<const double> values, const HistogramLayout& layout);

/// Exact bin averages of the normal density N(mean, variance).
std::vector<double> gaussian_bin_density(const HistogramLayout& layout, double mean, double variance);

/// Continuum counterpart of a walk drifting up a frozen substrate profile.
struct FrozenSubstrateRun {
    double tau = 0.0;
    double mu = 0.0;
    double beta = 0.0;
    Grid1D grid{0.0, 1.0, 3};
    std::vector<double> v; ///< substrate on grid, strictly positive
    double start_mean = 0.0;
    double start_variance = 0.0;
    double t_end = 0.0;
    double dt = 0.0;
};

/// Solves u_t = mu / (2 tau) u_xx - beta / tau (u (ln v)_x)_x with v held
/// fixed and zero flux at both ends, starting from a normal density.
/// Returns u(t_end) on the grid.
std::vector<double> frozen_substrate_solution(const FrozenSubstrateRun& run);

/// Bin averages of frozen_substrate_solution.
std::vector<double> frozen_substrate_density(const FrozenSubstrateRun& run, const HistogramLayout& layout);

} // namespace chemoband
