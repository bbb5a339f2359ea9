#include "chemoband/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "chemoband/parallel.hpp"
#include "chemoband/pde.hpp"

namespace chemoband {

namespace {

constexpr std::size_t kChunk = 8192;

struct TableMoments {
    double mass = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

TableMoments table_moments(const TabulatedJump& t)
{
    if (t.x.size() < 2 || t.x.size() != t.density.size())
        throw Error(ErrorCode::InvalidArgument, "jump table needs at least two (x, density) pairs", "jump");
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i + 1 < t.x.size(); ++i) {
        const double a = t.x[i];
        const double b = t.x[i + 1];
        if (!(b > a))
            throw Error(ErrorCode::InvalidArgument, "jump table abscissae must increase", "jump");
        const double fa = t.density[i];
        const double fb = t.density[i + 1];
        if (!(fa >= 0.0) || !(fb >= 0.0))
            throw Error(ErrorCode::InvalidArgument, "jump density must be non-negative", "jump");
        // Simpson's rule is exact for polynomials of degree <= 3.
        const double m = 0.5 * (a + b);
        const double fm = 0.5 * (fa + fb);
        const double w = (b - a) / 6.0;
        m0 += w * (fa + 4.0 * fm + fb);
        m1 += w * (a * fa + 4.0 * m * fm + b * fb);
        m2 += w * (a * a * fa + 4.0 * m * m * fm + b * b * fb);
    }
    if (!(m0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "jump density has zero mass", "jump");
    TableMoments tm;
    tm.mass = m0;
    tm.mean = m1 / m0;
    tm.variance = m2 / m0 - tm.mean * tm.mean;
    return tm;
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

} // namespace

double jump_variance(const JumpDensity& jump)
{
    if (const auto* g = std::get_if<GaussianJump>(&jump))
        return g->variance;
    return table_moments(std::get<TabulatedJump>(jump)).variance;
}

DriftField DriftField::constant(double m)
{
    DriftField d;
    d.constant_ = m;
    return d;
}

DriftField DriftField::log_gradient(double beta, const Grid1D& grid, std::span<const double> v)
{
    if (v.size() != grid.size())
        throw Error(ErrorCode::GridMismatch, "substrate samples do not match the grid");
    const std::size_t n = v.size();
    std::vector<double> lv(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(v[i] > 0.0))
            throw Error(ErrorCode::InvalidArgument, "substrate must be positive for a log-gradient drift", "v");
        lv[i] = std::log(v[i]);
    }
    const double h = grid.spacing();
    DriftField d;
    d.x0_ = grid.x0();
    d.h_ = h;
    d.samples_.resize(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        d.samples_[i] = beta * (lv[i + 1] - lv[i - 1]) / (2.0 * h);
    d.samples_[0] = beta * (lv[1] - lv[0]) / h;
    d.samples_[n - 1] = beta * (lv[n - 1] - lv[n - 2]) / h;
    return d;
}

double DriftField::operator()(double x) const
{
    if (samples_.empty())
        return constant_;
    const double s = (x - x0_) / h_;
    const double last = static_cast<double>(samples_.size() - 1);
    if (!(s >= 0.0) || !(s <= last))
        return 0.0;
    const auto i = std::min(static_cast<std::size_t>(s), samples_.size() - 2);
    const double f = s - static_cast<double>(i);
    return (1.0 - f) * samples_[i] + f * samples_[i + 1];
}

std::vector<double> HistogramLayout::centers() const
{
    std::vector<double> c(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        c[i] = center(i);
    return c;
}

HistogramLayout layout_for(double mean, double sd, double span_sd)
{
    if (!(sd > 0.0) || !(span_sd > 0.0))
        throw Error(ErrorCode::InvalidArgument, "histogram layout needs a positive spread");
    HistogramLayout l;
    l.n_bins = static_cast<std::size_t>(std::ceil(2.0 * span_sd / 0.5));
    l.bin_width = 2.0 * span_sd * sd / static_cast<double>(l.n_bins);
    l.x_lo = mean - span_sd * sd;
    return l;
}

std::vector<double> Histogram::density() const
{
    std::vector<double> d(counts.size(), 0.0);
    const std::uint64_t n = in_range();
    if (n == 0)
        return d;
    const double norm = 1.0 / (static_cast<double>(n) * layout.bin_width);
    for (std::size_t i = 0; i < counts.size(); ++i)
        d[i] = static_cast<double>(counts[i]) * norm;
    return d;
}

std::vector<double> Histogram::standard_error() const
{
    std::vector<double> e(counts.size(), 0.0);
    const std::uint64_t n = in_range();
    if (n == 0)
        return e;
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double p = static_cast<double>(counts[i]) / nn;
        e[i] = std::sqrt(p * (1.0 - p) / nn) / layout.bin_width;
    }
    return e;
}

WalkResult simulate_walk(const WalkConfig& cfg, std::span<const double> initial_positions)
{
    if (cfg.n_particles == 0)
        throw Error(ErrorCode::InvalidArgument, "walk needs at least one particle", "n_particles");
    if (!(cfg.tau_step > 0.0))
        throw Error(ErrorCode::NonPositiveParameter, "jump interval must be positive", "tau_step");
    if (!(cfg.layout.bin_width > 0.0) || cfg.layout.n_bins == 0)
        throw Error(ErrorCode::InvalidArgument, "histogram needs positive bin width and at least one bin",
                    "bin_width");
    if (initial_positions.size() != 1 && initial_positions.size() != cfg.n_particles)
        throw Error(ErrorCode::InvalidArgument, "initial positions must be one shared value or one per particle");

    double table_mean = 0.0;
    if (const auto* t = std::get_if<TabulatedJump>(&cfg.jump)) {
        const TableMoments tm = table_moments(*t);
        if (!(tm.variance > 0.0))
            throw Error(ErrorCode::NonPositiveParameter, "jump variance must be positive", "variance");
        table_mean = tm.mean;
    } else if (!(std::get<GaussianJump>(cfg.jump).variance > 0.0)) {
        throw Error(ErrorCode::NonPositiveParameter, "jump variance must be positive", "variance");
    }

    std::vector<std::size_t> record = cfg.record_steps;
    if (record.empty())
        record.push_back(cfg.n_steps);
    std::sort(record.begin(), record.end());
    record.erase(std::unique(record.begin(), record.end()), record.end());
    if (record.back() > cfg.n_steps)
        throw Error(ErrorCode::InvalidArgument, "record step beyond n_steps", "record_steps");

    const std::size_t n_rec = record.size();
    const std::size_t n_bins = cfg.layout.n_bins;
    const std::size_t n_chunks = (cfg.n_particles + kChunk - 1) / kChunk;

    struct ChunkResult {
        std::vector<std::uint64_t> counts; // n_rec x n_bins
        std::vector<std::uint64_t> below, above;
        std::vector<std::array<double, 3>> sums; // sum of x, x^2, x^3 per record
    };
    std::vector<ChunkResult> chunks(n_chunks);

    // Moments are accumulated about the mean starting position to limit
    // cancellation in the third moment.
    double origin = 0.0;
    for (double x : initial_positions)
        origin += x;
    origin /= static_cast<double>(initial_positions.size());

    const auto seed_lo = static_cast<std::uint32_t>(cfg.seed & 0xffffffffu);
    const auto seed_hi = static_cast<std::uint32_t>(cfg.seed >> 32);

    parallel_for(n_chunks, [&](std::size_t c) {
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(cfg.n_particles, begin + kChunk);
        std::vector<double> x(end - begin);
        for (std::size_t p = begin; p < end; ++p)
            x[p - begin] = initial_positions.size() == 1 ? initial_positions[0] : initial_positions[p];

        std::seed_seq seq{seed_lo, seed_hi, static_cast<std::uint32_t>(c)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::piecewise_linear_distribution<double> table;
        double sd = 0.0;
        const bool tabulated = std::holds_alternative<TabulatedJump>(cfg.jump);
        if (tabulated) {
            const auto& t = std::get<TabulatedJump>(cfg.jump);
            table = std::piecewise_linear_distribution<double>(t.x.begin(), t.x.end(), t.density.begin());
        } else {
            sd = std::sqrt(std::get<GaussianJump>(cfg.jump).variance);
        }

        ChunkResult& out = chunks[c];
        out.counts.assign(n_rec * n_bins, 0);
        out.below.assign(n_rec, 0);
        out.above.assign(n_rec, 0);
        out.sums.assign(n_rec, {0.0, 0.0, 0.0});

        const auto tally = [&](std::size_t r) {
            for (double xi : x) {
                const double dx = xi - origin;
                out.sums[r][0] += dx;
                out.sums[r][1] += dx * dx;
                out.sums[r][2] += dx * dx * dx;
                const double s = (xi - cfg.layout.x_lo) / cfg.layout.bin_width;
                if (s < 0.0)
                    ++out.below[r];
                else if (s >= static_cast<double>(n_bins))
                    ++out.above[r];
                else
                    ++out.counts[r * n_bins + static_cast<std::size_t>(s)];
            }
        };

        std::size_t r = 0;
        for (std::size_t step = 0; step <= cfg.n_steps && r < n_rec; ++step) {
            if (step > 0) {
                for (double& xi : x) {
                    const double noise = tabulated ? table(rng) - table_mean : sd * gauss(rng);
                    xi += cfg.drift(xi) + noise;
                }
            }
            while (r < n_rec && record[r] == step)
                tally(r++);
        }
    });

    WalkResult res;
    const double n = static_cast<double>(cfg.n_particles);
    for (std::size_t r = 0; r < n_rec; ++r) {
        Histogram h;
        h.layout = cfg.layout;
        h.counts.assign(n_bins, 0);
        h.total = cfg.n_particles;
        std::array<double, 3> s{0.0, 0.0, 0.0};
        for (const ChunkResult& cr : chunks) {
            for (std::size_t b = 0; b < n_bins; ++b)
                h.counts[b] += cr.counts[r * n_bins + b];
            h.below += cr.below[r];
            h.above += cr.above[r];
            for (int k = 0; k < 3; ++k)
                s[k] += cr.sums[r][k];
        }
        const double m1 = s[0] / n;
        const double m2 = s[1] / n;
        const double m3 = s[2] / n;
        WalkMoments mo;
        mo.mean = origin + m1;
        mo.variance = m2 - m1 * m1;
        const double mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
        mo.skewness = mo.variance > 0.0 ? mu3 / std::pow(mo.variance, 1.5) : 0.0;

        res.steps.push_back(record[r]);
        res.times.push_back(static_cast<double>(record[r]) * cfg.tau_step);
        res.histograms.push_back(std::move(h));
        res.moments.push_back(mo);
    }
    return res;
}

DensityComparison compare_density(const Histogram& hist, std::span<const double> reference)
{
    const std::size_t n = hist.layout.n_bins;
    if (reference.size() != n || hist.counts.size() != n)
        throw Error(ErrorCode::GridMismatch, "reference density does not match the histogram bins");
    const double w = hist.layout.bin_width;
    double mass = 0.0;
    for (double r : reference)
        mass += r * w;
    if (!(mass > 0.0))
        throw Error(ErrorCode::InvalidArgument, "reference density has no mass on the histogram bins");
    const std::vector<double> emp = hist.density();
    DensityComparison cmp;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = std::abs(emp[i] - reference[i] / mass);
        cmp.l1_err += diff * w;
        cmp.sup_err = std::max(cmp.sup_err, diff);
    }
    return cmp;
}

DensityComparison compare_density(const Histogram& hist, std::span<const double> centers,
                                  std::span<const double> reference)
{
    const std::size_t n = hist.layout.n_bins;
    if (centers.size() != n)
        throw Error(ErrorCode::GridMismatch, "reference grid does not match the histogram bins");
    const double tol = 1e-9 * hist.layout.bin_width;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(centers[i] - hist.layout.center(i)) > tol) {
            std::ostringstream os;
            os << "reference node " << i << " at " << centers[i] << " is not the bin centre "
               << hist.layout.center(i);
            throw Error(ErrorCode::GridMismatch, os.str());
        }
    }
    return compare_density(hist, reference);
}

std::vector<double> bin_average(const Grid1D& grid, std::span<const double> values, const HistogramLayout& layout)
{
    if (values.size() != grid.size())
        throw Error(ErrorCode::GridMismatch, "values do not match the grid size");
    const double tol = 1e-12 * std::max(1.0, grid.x1() - grid.x0());
    if (layout.x_lo < grid.x0() - tol || layout.x_hi() > grid.x1() + tol)
        throw Error(ErrorCode::GridMismatch, "histogram bins extend beyond the grid");

    const std::size_t n = values.size();
    const double h = grid.spacing();
    std::vector<double> cumulative(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        cumulative[i] = cumulative[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
    const auto integral_to = [&](double x) {
        const double s = std::clamp((x - grid.x0()) / h, 0.0, static_cast<double>(n - 1));
        const auto j = std::min(static_cast<std::size_t>(s), n - 2);
        const double f = s - static_cast<double>(j);
        const double fx = (1.0 - f) * values[j] + f * values[j + 1];
        return cumulative[j] + 0.5 * f * h * (values[j] + fx);
    };

    std::vector<double> avg(layout.n_bins);
    for (std::size_t b = 0; b < layout.n_bins; ++b) {
        const double a = layout.x_lo + static_cast<double>(b) * layout.bin_width;
        avg[b] = (integral_to(a + layout.bin_width) - integral_to(a)) / layout.bin_width;
    }
    return avg;
}

std::vector<double> gaussian_bin_density(const HistogramLayout& layout, double mean, double variance)
{
    if (!(variance > 0.0))
        throw Error(ErrorCode::NonPositiveParameter, "variance must be positive", "variance");
    const double sd = std::sqrt(variance);
    std::vector<double> d(layout.n_bins);
    for (std::size_t b = 0; b < layout.n_bins; ++b) {
        const double a = layout.x_lo + static_cast<double>(b) * layout.bin_width;
        d[b] = (normal_cdf((a + layout.bin_width - mean) / sd) - normal_cdf((a - mean) / sd)) / layout.bin_width;
    }
    return d;
}

std::vector<double> frozen_substrate_solution(const FrozenSubstrateRun& run)
{
    if (run.v.size() != run.grid.size())
        throw Error(ErrorCode::GridMismatch, "substrate profile does not match the grid");
    if (!(run.start_variance > 0.0))
        throw Error(ErrorCode::NonPositiveParameter, "start_variance must be positive", "start_variance");
    const ModelParams mp{run.tau, run.mu, run.beta, 0.0, 1.0};
    SolverConfig cfg;
    cfg.grid = run.grid;
    cfg.dt = run.dt;
    cfg.t_end = run.t_end;
    FieldState init{run.grid, std::vector<double>(run.grid.size()), run.v, 0.0};
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * run.start_variance);
    for (std::size_t i = 0; i < run.grid.size(); ++i) {
        const double z = run.grid.x(i) - run.start_mean;
        init.u[i] = norm * std::exp(-0.5 * z * z / run.start_variance);
    }
    const Trajectory traj = chemoband::run(NonlinearProblem{mp, Consumption::None}, cfg, init);
    return traj.snapshots.back().u;
}

std::vector<double> frozen_substrate_density(const FrozenSubstrateRun& run, const HistogramLayout& layout)
{
    return bin_average(run.grid, frozen_substrate_solution(run), layout);
}

} // namespace chemoband
