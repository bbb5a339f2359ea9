#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "chemoband/bands.hpp"
#include "chemoband/sensitivity.hpp"
#include "test_support.hpp"

using namespace chemoband;
using namespace test_support;

namespace {

const ModelParams kTable1{kTau, kMu, kBeta13, 0.0, 1.0};
const BandParams kBand13{kC, kC0, 1.0, Regime::UnlimitedGeneral};

ParamBox point_box(BandFamily family, const ParamVector& w)
{
    return ParamBox{family, w, w};
}

} // namespace

TEST_CASE("encode and decode are inverse")
{
    const ParamVector w = encode(BandFamily::Unlimited, kTable1, kBand13);
    CHECK(w[0] == doctest::Approx(1.3));
    const auto [mp, bp] = decode(BandFamily::Unlimited, w);
    CHECK(mp.d_ratio() == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(bp.c0 == kC0);
    CHECK(bp.regime == Regime::UnlimitedGeneral);
    const ModelParams lm{0.05, 0.25, 0.25, 0.0, 1.0};
    const BandParams lb{1.5, 4.0, 1.0, Regime::Limited};
    const auto [mp2, bp2] = decode(BandFamily::Limited, encode(BandFamily::Limited, lm, lb));
    CHECK(mp2.beta == lm.beta);
    CHECK(bp2.regime == Regime::Limited);
}

TEST_CASE("probe grid layout")
{
    const auto z = make_probe_grid(kTable1, kBand13);
    REQUIRE(z.size() == 4007);
    const double m = 20.0 * kTable1.mu / (2.0 * kTable1.tau * kBand13.c);
    CHECK(std::find(z.begin(), z.end(), -m) != z.end());
    CHECK(*std::max_element(z.begin(), z.end()) == doctest::Approx(1000.0 * m));
}

TEST_CASE("identical pairs are skipped and ratios are symmetric")
{
    const auto z = make_probe_grid(kTable1, kBand13);
    const ParamVector w1 = encode(BandFamily::Unlimited, kTable1, kBand13);
    CHECK_FALSE(pair_ratio(BandFamily::Unlimited, w1, w1, z).has_value());
    ParamVector w2 = w1;
    w2[0] = 1.5;
    w2[6] = 1.2;
    const auto a = pair_ratio(BandFamily::Unlimited, w1, w2, z);
    const auto b = pair_ratio(BandFamily::Unlimited, w2, w1, z);
    REQUIRE(a.has_value());
    CHECK((*a)[0] == (*b)[0]);
    CHECK((*a)[1] == (*b)[1]);
}

TEST_CASE("V_inf-only box is bounded by the derivative of V in V_inf")
{
    const auto z = make_probe_grid(kTable1, kBand13);
    const ParamVector w = encode(BandFamily::Unlimited, kTable1, kBand13);
    ParamBox box = point_box(BandFamily::Unlimited, w);
    box.lo[6] = 0.5;
    box.hi[6] = 2.0;
    const LipschitzResult r = lipschitz_probe(box, 200, z, 17);
    CHECK(r.pairs_evaluated == 200);

    double bound = 0.0;
    const double eps = 1e-6;
    for (int j = 1; j <= 10; ++j) {
        const double vinf = 0.5 + 1.5 * j / 11.0;
        BandParams lo = kBand13;
        BandParams hi = kBand13;
        lo.v_inf = vinf - eps;
        hi.v_inf = vinf + eps;
        const BandProfile pl = eval_unlimited(kTable1, lo, z);
        const BandProfile ph = eval_unlimited(kTable1, hi, z);
        for (std::size_t i = 0; i < z.size(); ++i)
            bound = std::max(bound, std::abs(ph.v[i] - pl.v[i]) / (2.0 * eps));
    }
    CHECK(r.k_v <= bound * (1.0 + 1e-3));
    CHECK(r.k_v > 0.5 * bound);
}

TEST_CASE("probe stays finite as d approaches 1")
{
    const auto z = make_probe_grid(kTable1, kBand13);
    ParamBox box = point_box(BandFamily::Unlimited, encode(BandFamily::Unlimited, kTable1, kBand13));
    box.lo[0] = 1.001;
    box.hi[0] = 1.5;
    const LipschitzResult r = lipschitz_probe(box, 100, z, 23);
    CHECK(std::isfinite(r.k_emp));
    CHECK(r.k_emp > 0.0);
    REQUIRE(r.worst_pair_u.has_value());
    CHECK(r.worst_pair_u->first[0] >= 1.001);
}

TEST_CASE("probe result does not depend on the thread count")
{
    const auto z = make_probe_grid(kTable1, kBand13);
    const ParamVector w = encode(BandFamily::Unlimited, kTable1, kBand13);
    ParamBox box{BandFamily::Unlimited, w, w};
    for (std::size_t i = 0; i < w.size(); ++i) {
        box.lo[i] = 0.9 * w[i];
        box.hi[i] = 1.1 * w[i];
    }
    setenv("CHEMOBAND_THREADS", "1", 1);
    const LipschitzResult one = lipschitz_probe(box, 64, z, 99);
    setenv("CHEMOBAND_THREADS", "4", 1);
    const LipschitzResult four = lipschitz_probe(box, 64, z, 99);
    unsetenv("CHEMOBAND_THREADS");
    CHECK(one.k_u == four.k_u);
    CHECK(one.k_v == four.k_v);
    CHECK(one.worst_pair_u == four.worst_pair_u);
}

TEST_CASE("degenerate and inadmissible boxes")
{
    const auto z = make_probe_grid(kTable1, kBand13);
    const ParamVector w = encode(BandFamily::Unlimited, kTable1, kBand13);
    CHECK(error_code_of([&] { lipschitz_probe(point_box(BandFamily::Unlimited, w), 10, z, 1); })
          == ErrorCode::DegenerateBox);
    ParamBox flipped = point_box(BandFamily::Unlimited, w);
    flipped.lo[1] = 5.0;
    flipped.hi[1] = 3.0;
    CHECK(error_code_of([&] { lipschitz_probe(flipped, 10, z, 1); }) == ErrorCode::DegenerateBox);
    ParamBox below_one = point_box(BandFamily::Unlimited, w);
    below_one.lo[0] = 0.9;
    below_one.hi[0] = 1.2;
    CHECK(error_code_of([&] { lipschitz_probe(below_one, 10, z, 1); }) == ErrorCode::DegenerateBox);
}

TEST_CASE("uniform convergence as d decreases to 1")
{
    // Reference values from tests/oracles/reference_values.py.
    const double ref[9][3] = {
        {0.5, 0.074637821992921426, 0.11607522568075764},
        {0.25, 0.048505421803983805, 0.062468345102053641},
        {0.125, 0.028097249295051875, 0.032480975455869356},
        {0.0625, 0.015191591499166033, 0.016571658785776777},
        {0.03125, 0.0079085667560664513, 0.0083712322120052666},
        {0.015625, 0.0040362068894801789, 0.0042072684036020733},
        {0.0078125, 0.0020392121899401382, 0.0021090864080828654},
        {0.00390625, 0.0010248863127785691, 0.0010559237986700062},
        {0.001953125, 0.00051376316299521317, 0.00052830707955962543},
    };
    ModelParams mp = kTable1;
    mp.beta = 0.5 * mp.mu;
    BandParams bp = kBand13;
    bp.regime = Regime::UnlimitedCritical;
    std::vector<double> deltas;
    for (const auto& row : ref)
        deltas.push_back(row[0]);
    const ConvergenceReport rep = uniform_convergence_probe(mp, bp, deltas, make_probe_grid(mp, bp));
    REQUIRE(rep.rows.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(rel_err(rep.rows[i].err_u, ref[i][1]) < 1e-9);
        CHECK(rel_err(rep.rows[i].err_v, ref[i][2]) < 1e-9);
    }
    CHECK(rep.u_decreasing);
    CHECK(rep.v_decreasing);
    CHECK(rep.v_ratio_spread <= 4.0);
}

TEST_CASE("delta = 0 compares the d = 1 form with itself")
{
    ModelParams mp = kTable1;
    mp.beta = 0.5 * mp.mu;
    BandParams bp = kBand13;
    bp.regime = Regime::UnlimitedCritical;
    const std::vector<double> deltas{0.1, 0.0};
    const std::vector<double> z{-1e6, -3.0, 0.0, 4.0};
    const ConvergenceReport rep = uniform_convergence_probe(mp, bp, deltas, z);
    CHECK(rep.rows[1].err_u == 0.0);
    CHECK(rep.rows[1].err_v == 0.0);
    const ConvergenceReport tail = uniform_convergence_probe(mp, bp, std::vector<double>{0.5}, std::vector<double>{-1e6});
    CHECK(tail.rows[0].err_u == 0.0);
    CHECK(tail.rows[0].err_v == 0.0);
}

TEST_CASE("peaks rise as d decreases towards 1")
{
    double prev = 0.0;
    for (double delta : {0.5, 0.25, 0.1}) {
        ModelParams mp = kTable1;
        mp.beta = 0.5 * (1.0 + delta) * mp.mu;
        const double peak = normalized_peak(mp, kBand13);
        CHECK(peak > prev);
        prev = peak;
    }
}

TEST_CASE("bands widen as tau decreases")
{
    double prev = 0.0;
    for (double tau : {0.05, 0.02, 0.005}) {
        ModelParams mp = kTable1;
        mp.tau = tau;
        const double w = scaled_band_width(mp, kBand13);
        CHECK(w > prev);
        prev = w;
    }
}

TEST_CASE("limited plateau falls with d")
{
    double prev = HUGE_VAL;
    for (double d : {0.3, 1.0, 3.0, 10.0}) {
        ModelParams mp = kTable1;
        mp.beta = 0.5 * d * mp.mu;
        const BandParams bp{kC, kC0, 1.0, Regime::Limited};
        const double p = limited_plateau(mp, bp);
        CHECK(rel_err(p, mp.tau * kC * kC / (mp.beta * mp.k)) < 1e-9);
        CHECK(p < prev);
        prev = p;
    }
}
