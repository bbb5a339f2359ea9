#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "chemoband/pde.hpp"
#include "chemoband/walk.hpp"
#include "test_support.hpp"

using namespace chemoband;
using namespace test_support;

namespace {

WalkConfig gaussian_walk(std::size_t particles, double var, std::size_t steps, double drift = 0.0)
{
    WalkConfig cfg;
    cfg.n_particles = particles;
    cfg.tau_step = 0.01;
    cfg.jump = GaussianJump{var};
    cfg.drift = DriftField::constant(drift);
    cfg.n_steps = steps;
    cfg.layout = layout_for(static_cast<double>(steps) * drift, std::sqrt(static_cast<double>(steps) * var));
    cfg.seed = 12345;
    return cfg;
}

} // namespace

TEST_CASE("zero drift spreads with variance n mu")
{
    const double mu = 4e-4;
    const std::size_t n = 50;
    const std::size_t np = 40'000;
    const WalkResult r = simulate_walk(gaussian_walk(np, mu, n), std::vector<double>{0.0});
    REQUIRE(r.moments.size() == 1);
    const double expect = static_cast<double>(n) * mu;
    const double se_var = expect * std::sqrt(2.0 / static_cast<double>(np));
    CHECK(std::abs(r.moments[0].variance - expect) < 3.0 * se_var);
    CHECK(std::abs(r.moments[0].mean) < 3.0 * std::sqrt(expect / static_cast<double>(np)));
    CHECK(std::abs(r.moments[0].skewness) < 3.0 * std::sqrt(6.0 / static_cast<double>(np)));
    CHECK(r.times[0] == doctest::Approx(0.5));
}

TEST_CASE("constant drift moves the mean by n m")
{
    const double mu = 4e-4;
    const double m = 3e-3;
    const std::size_t n = 40;
    const std::size_t np = 40'000;
    const WalkResult r = simulate_walk(gaussian_walk(np, mu, n, m), std::vector<double>{0.0});
    const double se = std::sqrt(static_cast<double>(n) * mu / static_cast<double>(np));
    CHECK(std::abs(r.moments[0].mean - static_cast<double>(n) * m) < 3.0 * se);
}

TEST_CASE("histogram matches the heat kernel")
{
    const double mu = 4e-4;
    const std::size_t n = 100;
    const WalkConfig cfg = gaussian_walk(100'000, mu, n);
    const WalkResult r = simulate_walk(cfg, std::vector<double>{0.0});
    const Histogram& h = r.histograms[0];
    CHECK(h.total == cfg.n_particles);
    CHECK(h.in_range() + h.below + h.above == h.total);
    const auto ref = gaussian_bin_density(cfg.layout, 0.0, static_cast<double>(n) * mu);
    const DensityComparison cmp = compare_density(h, cfg.layout.centers(), ref);
    CHECK(cmp.l1_err <= 0.02);

    const auto d = h.density();
    const double mass = std::accumulate(d.begin(), d.end(), 0.0) * cfg.layout.bin_width;
    CHECK(std::abs(mass - 1.0) < 1e-12);

    // Twice the diffusivity is clearly distinguishable.
    const auto wide = gaussian_bin_density(cfg.layout, 0.0, 2.0 * static_cast<double>(n) * mu);
    CHECK(compare_density(h, wide).l1_err >= 0.1);
}

TEST_CASE("recorded steps")
{
    WalkConfig cfg = gaussian_walk(2'000, 1.0, 10);
    cfg.record_steps = {0, 5, 10};
    const WalkResult r = simulate_walk(cfg, std::vector<double>{0.0});
    REQUIRE(r.steps.size() == 3);
    CHECK(r.moments[0].variance == 0.0);
    CHECK(r.times[2] == doctest::Approx(0.1));
    for (const auto& h : r.histograms)
        CHECK(h.total == 2'000);
}

TEST_CASE("results do not depend on the thread count")
{
    const WalkConfig cfg = gaussian_walk(20'000, 1e-3, 20, 1e-3);
    setenv("CHEMOBAND_THREADS", "1", 1);
    const WalkResult one = simulate_walk(cfg, std::vector<double>{0.0});
    setenv("CHEMOBAND_THREADS", "3", 1);
    const WalkResult three = simulate_walk(cfg, std::vector<double>{0.0});
    unsetenv("CHEMOBAND_THREADS");
    CHECK(one.histograms[0].counts == three.histograms[0].counts);
    CHECK(one.moments[0].mean == three.moments[0].mean);
    WalkConfig other = cfg;
    other.seed = cfg.seed + 1;
    CHECK(simulate_walk(other, std::vector<double>{0.0}).moments[0].mean != one.moments[0].mean);
}

TEST_CASE("tabulated jump density")
{
    // Triangle on [-1, 1]: variance 1/6.
    const TabulatedJump tri{{-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
    CHECK(jump_variance(tri) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(jump_variance(GaussianJump{0.3}) == 0.3);
    CHECK(error_code_of([] { jump_variance(TabulatedJump{{0.0, 1.0}, {1.0}}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { jump_variance(TabulatedJump{{1.0, 0.0}, {1.0, 1.0}}); }) == ErrorCode::InvalidArgument);

    WalkConfig cfg = gaussian_walk(40'000, 1.0, 30);
    cfg.jump = tri;
    const WalkResult r = simulate_walk(cfg, std::vector<double>{0.0});
    const double expect = 30.0 / 6.0;
    CHECK(std::abs(r.moments[0].variance - expect) < 3.0 * expect * std::sqrt(2.0 / 40'000.0));
}

TEST_CASE("log-gradient drift")
{
    const Grid1D g(-1.0, 1.0, 201);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        v[i] = std::exp(2.0 * g.x(i));
    const DriftField d = DriftField::log_gradient(0.5, g, v);
    CHECK(d(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d(0.37) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d(5.0) == 0.0);
    v[3] = 0.0;
    CHECK(error_code_of([&] { DriftField::log_gradient(0.5, g, v); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("density comparison")
{
    const HistogramLayout l{0.0, 0.5, 4};
    Histogram h;
    h.layout = l;
    h.counts = {1, 3, 3, 1};
    h.total = 8;
    const auto d = h.density();
    const DensityComparison same = compare_density(h, d);
    CHECK(same.l1_err == 0.0);
    CHECK(same.sup_err == 0.0);
    CHECK(error_code_of([&] { compare_density(h, std::vector<double>{1.0, 2.0}); }) == ErrorCode::GridMismatch);
    const std::vector<double> shifted{0.1, 0.6, 1.1, 1.6};
    CHECK(error_code_of([&] { compare_density(h, shifted, d); }) == ErrorCode::GridMismatch);
}

TEST_CASE("bin averages of grid data")
{
    const Grid1D g(0.0, 2.0, 201);
    std::vector<double> lin(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        lin[i] = 3.0 * g.x(i) + 1.0;
    const HistogramLayout l{0.25, 0.3, 5};
    const auto avg = bin_average(g, lin, l);
    for (std::size_t i = 0; i < l.n_bins; ++i)
        CHECK(avg[i] == doctest::Approx(3.0 * l.center(i) + 1.0).epsilon(1e-12));
    const HistogramLayout out{1.5, 0.3, 5};
    CHECK(error_code_of([&] { bin_average(g, lin, out); }) == ErrorCode::GridMismatch);

    const auto gd = gaussian_bin_density(layout_for(0.0, 1.0, 8.0), 0.0, 1.0);
    CHECK(std::accumulate(gd.begin(), gd.end(), 0.0) * layout_for(0.0, 1.0, 8.0).bin_width
          == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frozen substrate solution drifts with the walk")
{
    // ln v linear: constant drift beta * slope per step.
    FrozenSubstrateRun run;
    run.tau = 0.01;
    run.mu = 4e-4;
    run.beta = 4e-4;
    run.grid = Grid1D(-1.0, 1.0, 801);
    run.v.resize(run.grid.size());
    for (std::size_t i = 0; i < run.grid.size(); ++i)
        run.v[i] = std::exp(5.0 * run.grid.x(i));
    run.start_mean = 0.0;
    run.start_variance = 0.01;
    run.t_end = 1.0;
    run.dt = 1e-3;
    const auto u = frozen_substrate_solution(run);
    CHECK(trapezoid(run.grid, u) == doctest::Approx(1.0).epsilon(1e-6));
    std::vector<double> xu(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        xu[i] = run.grid.x(i) * u[i];
    const double steps = run.t_end / run.tau;
    CHECK(trapezoid(run.grid, xu) == doctest::Approx(steps * run.beta * 5.0).epsilon(1e-3));

    run.v.pop_back();
    CHECK(error_code_of([&] { frozen_substrate_solution(run); }) == ErrorCode::GridMismatch);
}
