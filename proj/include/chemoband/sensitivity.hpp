#pragma once

// Numerical probes of how the closed-form bands depend on their parameters.
//
// Parameter vectors:
//   unlimited  W = (d, C0, k, c, tau, mu, V_inf), beta = d mu / 2
//   limited    W = (C0, k, tau, c, beta, mu, V_inf)

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chemoband/model.hpp"

namespace chemoband {

using ParamVector = std::array<double, 7>;

enum class BandFamily { Unlimited, Limited };

/// Names of the W components in order.
std::array<std::string_view, 7> parameter_names(BandFamily family);

/// Model and band parameters encoded by W. For the unlimited family the
/// regime follows d; for the limited family big_d is set to zero.
std::pair<ModelParams, BandParams> decode(BandFamily family, const ParamVector& w);
ParamVector encode(BandFamily family, const ModelParams& mp, const BandParams& bp);

struct ParamBox {
    BandFamily family = BandFamily::Unlimited;
    ParamVector lo{};
    ParamVector hi{};
};

struct LipschitzResult {
    double k_u = 0.0; ///< max over pairs of sup|U1 - U2| / |W1 - W2|
    double k_v = 0.0;
    double k_emp = 0.0; ///< max(k_u, k_v)
    std::optional<std::pair<ParamVector, ParamVector>> worst_pair_u;
    std::optional<std::pair<ParamVector, ParamVector>> worst_pair_v;
    std::size_t pairs_evaluated = 0;
    std::size_t pairs_skipped = 0; ///< identical draws, where the ratio is 0/0
};

/// Difference quotients of one pair: sup over zeta of |U1 - U2| and |V1 - V2|
/// divided by the Euclidean distance. Returns nullopt when W1 == W2.
std::optional<std::array<double, 2>> pair_ratio(BandFamily family, const ParamVector& w1, const ParamVector& w2,
                                                std::span<const double> zeta);

/// Samples n_pairs uniform pairs in the box and reports the largest
/// difference quotients. Dimensions with lo == hi stay fixed. Throws
/// DegenerateBox when every dimension is fixed, when lo > hi, or when the
/// box leaves the admissible domain (d > 1 for the unlimited family, C0 > 1
/// for the limited one, all other components positive).
LipschitzResult lipschitz_probe(const ParamBox& box, std::size_t n_pairs, std::span<const double> zeta,
                                std::uint64_t seed);

/// Uniform core of n_core points on [-M, M], M = 20 mu / (2 tau c), plus
/// the points +-M 10^j for j = 1..tail_decades.
std::vector<double> make_probe_grid(const ModelParams& mp, const BandParams& bp, std::size_t n_core = 4001,
                                    unsigned tail_decades = 3);

struct ConvergenceRow {
    double delta = 0.0;
    double err_u = 0.0;
    double err_v = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool u_decreasing = false;
    bool v_decreasing = false;
    /// max / min of err_v / delta over rows with delta > 0.
    double v_ratio_spread = 0.0;
    double u_ratio_spread = 0.0;
};

/// sup over zeta of |U_{1+delta} - U_1| and |V_{1+delta} - V_1| with beta set
/// to (1 + delta) mu / 2 and everything else from (mp, bp). delta = 0 uses
/// the d = 1 closed form on both sides. delta_seq must be non-negative and
/// strictly decreasing.
ConvergenceReport uniform_convergence_probe(const ModelParams& mp, const BandParams& bp,
                                            std::span<const double> delta_seq, std::span<const double> zeta);

/// Full width at half maximum of U in the scaled variable c zeta / mu.
double scaled_band_width(const ModelParams& mp, const BandParams& bp);

/// max over zeta of U / (C0 V_inf).
double normalized_peak(const ModelParams& mp, const BandParams& bp);

/// U of the limited band far behind the front, where rate * zeta = -40.
double limited_plateau(const ModelParams& mp, const BandParams& bp);

} // namespace chemoband
