#include "chemoband/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "chemoband/bands.hpp"
#include "chemoband/parallel.hpp"

namespace chemoband {

std::array<std::string_view, 7> parameter_names(BandFamily family)
{
    if (family == BandFamily::Unlimited)
        return {"d", "c0", "k", "c", "tau", "mu", "v_inf"};
    return {"c0", "k", "tau", "c", "beta", "mu", "v_inf"};
}

std::pair<ModelParams, BandParams> decode(BandFamily family, const ParamVector& w)
{
    ModelParams mp;
    BandParams bp;
    if (family == BandFamily::Unlimited) {
        mp.tau = w[4];
        mp.mu = w[5];
        mp.beta = 0.5 * w[0] * w[5];
        mp.k = w[2];
        bp.c0 = w[1];
        bp.c = w[3];
        bp.v_inf = w[6];
        bp.regime = unlimited_regime_for(w[0]);
    } else {
        mp.tau = w[2];
        mp.mu = w[5];
        mp.beta = w[4];
        mp.k = w[1];
        bp.c0 = w[0];
        bp.c = w[3];
        bp.v_inf = w[6];
        bp.regime = Regime::Limited;
    }
    return {mp, bp};
}

ParamVector encode(BandFamily family, const ModelParams& mp, const BandParams& bp)
{
    if (family == BandFamily::Unlimited)
        return {mp.d_ratio(), bp.c0, mp.k, bp.c, mp.tau, mp.mu, bp.v_inf};
    return {bp.c0, mp.k, mp.tau, bp.c, mp.beta, mp.mu, bp.v_inf};
}

namespace {

void check_box(const ParamBox& box)
{
    const auto names = parameter_names(box.family);
    bool any_width = false;
    for (std::size_t i = 0; i < 7; ++i) {
        const double lo = box.lo[i];
        const double hi = box.hi[i];
        std::ostringstream why;
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
            why << "box bounds for '" << names[i] << "' must be finite with lo <= hi";
        else if (!(lo > 0.0))
            why << "box for '" << names[i] << "' must stay positive";
        else if (names[i] == "d" && !(lo > 1.0))
            why << "unlimited box needs d > 1";
        else if (names[i] == "c0" && box.family == BandFamily::Limited && !(lo > 1.0))
            why << "limited box needs c0 > 1";
        if (!why.str().empty())
            throw Error(ErrorCode::DegenerateBox, why.str(), std::string(names[i]));
        any_width = any_width || hi > lo;
    }
    if (!any_width)
        throw Error(ErrorCode::DegenerateBox, "every dimension of the box has zero width");
}

} // namespace

std::optional<std::array<double, 2>> pair_ratio(BandFamily family, const ParamVector& w1, const ParamVector& w2,
                                                std::span<const double> zeta)
{
    double dist2 = 0.0;
    for (std::size_t i = 0; i < 7; ++i)
        dist2 += (w1[i] - w2[i]) * (w1[i] - w2[i]);
    if (dist2 == 0.0)
        return std::nullopt;
    const auto [mp1, bp1] = decode(family, w1);
    const auto [mp2, bp2] = decode(family, w2);
    const BandProfile p1 = eval_band(mp1, bp1, zeta);
    const BandProfile p2 = eval_band(mp2, bp2, zeta);
    double du = 0.0;
    double dv = 0.0;
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        du = std::max(du, std::abs(p1.u[i] - p2.u[i]));
        dv = std::max(dv, std::abs(p1.v[i] - p2.v[i]));
    }
    const double dist = std::sqrt(dist2);
    return std::array<double, 2>{du / dist, dv / dist};
}

LipschitzResult lipschitz_probe(const ParamBox& box, std::size_t n_pairs, std::span<const double> zeta,
                                std::uint64_t seed)
{
    check_box(box);
    if (zeta.empty())
        throw Error(ErrorCode::InvalidArgument, "probe grid is empty", "zeta");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto draw = [&] {
        ParamVector w;
        for (std::size_t i = 0; i < 7; ++i)
            w[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
        return w;
    };
    std::vector<std::pair<ParamVector, ParamVector>> pairs(n_pairs);
    for (auto& p : pairs) {
        p.first = draw();
        p.second = draw();
    }

    std::vector<std::optional<std::array<double, 2>>> ratios(n_pairs);
    parallel_for(n_pairs, [&](std::size_t i) {
        ratios[i] = pair_ratio(box.family, pairs[i].first, pairs[i].second, zeta);
    });

    LipschitzResult res;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        if (!ratios[i]) {
            ++res.pairs_skipped;
            continue;
        }
        ++res.pairs_evaluated;
        const auto [ru, rv] = *ratios[i];
        if (!res.worst_pair_u || ru > res.k_u) {
            res.k_u = ru;
            res.worst_pair_u = pairs[i];
        }
        if (!res.worst_pair_v || rv > res.k_v) {
            res.k_v = rv;
            res.worst_pair_v = pairs[i];
        }
    }
    res.k_emp = std::max(res.k_u, res.k_v);
    return res;
}

std::vector<double> make_probe_grid(const ModelParams& mp, const BandParams& bp, std::size_t n_core,
                                    unsigned tail_decades)
{
    const DerivedParams dp = validate(mp, bp);
    if (n_core < 2)
        throw Error(ErrorCode::InvalidArgument, "probe grid needs at least two core points", "n_core");
    const double m = 20.0 / dp.rate;
    std::vector<double> z = linspace(-m, m, n_core);
    double scale = m;
    for (unsigned j = 1; j <= tail_decades; ++j) {
        scale *= 10.0;
        z.push_back(-scale);
        z.push_back(scale);
    }
    std::sort(z.begin(), z.end());
    return z;
}

ConvergenceReport uniform_convergence_probe(const ModelParams& mp, const BandParams& bp,
                                            std::span<const double> delta_seq, std::span<const double> zeta)
{
    for (std::size_t i = 0; i < delta_seq.size(); ++i) {
        if (!(delta_seq[i] >= 0.0) || !std::isfinite(delta_seq[i]))
            throw Error(ErrorCode::InvalidArgument, "delta values must be non-negative", "delta");
        if (i > 0 && !(delta_seq[i] < delta_seq[i - 1]))
            throw Error(ErrorCode::InvalidArgument, "delta values must be strictly decreasing", "delta");
    }

    ModelParams base_mp = mp;
    base_mp.beta = 0.5 * mp.mu;
    BandParams base_bp = bp;
    base_bp.regime = Regime::UnlimitedCritical;
    const BandProfile base = eval_unlimited(base_mp, base_bp, zeta);

    ConvergenceReport rep;
    for (double delta : delta_seq) {
        ModelParams m = mp;
        m.beta = 0.5 * (1.0 + delta) * mp.mu;
        BandParams b = bp;
        b.regime = delta == 0.0 ? Regime::UnlimitedCritical : unlimited_regime_for(1.0 + delta);
        const BandProfile p = eval_unlimited(m, b, zeta);
        ConvergenceRow row;
        row.delta = delta;
        for (std::size_t i = 0; i < zeta.size(); ++i) {
            row.err_u = std::max(row.err_u, std::abs(p.u[i] - base.u[i]));
            row.err_v = std::max(row.err_v, std::abs(p.v[i] - base.v[i]));
        }
        rep.rows.push_back(row);
    }

    rep.u_decreasing = true;
    rep.v_decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        rep.u_decreasing = rep.u_decreasing && rep.rows[i].err_u < rep.rows[i - 1].err_u;
        rep.v_decreasing = rep.v_decreasing && rep.rows[i].err_v < rep.rows[i - 1].err_v;
    }
    const auto spread = [&rep](auto get) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const ConvergenceRow& r : rep.rows) {
            if (r.delta > 0.0) {
                const double q = get(r) / r.delta;
                lo = std::min(lo, q);
                hi = std::max(hi, q);
            }
        }
        return lo > 0.0 && std::isfinite(lo) ? hi / lo : 0.0;
    };
    rep.u_ratio_spread = spread([](const ConvergenceRow& r) { return r.err_u; });
    rep.v_ratio_spread = spread([](const ConvergenceRow& r) { return r.err_v; });
    return rep;
}

namespace {

double u_at(const ModelParams& mp, const BandParams& bp, double zeta)
{
    return eval_band(mp, bp, std::span<const double>(&zeta, 1)).u[0];
}

/// Point where U crosses `level` between a (U above) and b (U below).
double crossing(const ModelParams& mp, const BandParams& bp, double a, double b, double level)
{
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b)
            break;
        (u_at(mp, bp, m) > level ? a : b) = m;
    }
    return 0.5 * (a + b);
}

} // namespace

double scaled_band_width(const ModelParams& mp, const BandParams& bp)
{
    const BandExtrema ex = band_extrema(mp, bp);
    const double rate = validate(mp, bp).rate;
    const double half = 0.5 * ex.u_max_numeric;
    const double z0 = ex.zeta0_numeric;
    double step = 1.0 / rate;
    double left = z0 - step;
    while (u_at(mp, bp, left) > half) {
        step *= 2.0;
        left = z0 - step;
    }
    step = 1.0 / rate;
    double right = z0 + step;
    while (u_at(mp, bp, right) > half) {
        step *= 2.0;
        right = z0 + step;
    }
    const double zl = crossing(mp, bp, z0, left, half);
    const double zr = crossing(mp, bp, z0, right, half);
    return (zr - zl) * bp.c / mp.mu;
}

double normalized_peak(const ModelParams& mp, const BandParams& bp)
{
    return band_extrema(mp, bp).u_max_numeric / (bp.c0 * bp.v_inf);
}

double limited_plateau(const ModelParams& mp, const BandParams& bp)
{
    if (bp.regime != Regime::Limited)
        throw Error(ErrorCode::RegimeMismatch, "plateau is defined for the limited band");
    const double rate = validate(mp, bp).rate;
    return u_at(mp, bp, -40.0 / rate);
}

} // namespace chemoband
