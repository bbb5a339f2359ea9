#include "chemoband/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace chemoband {

std::string_view to_string(StabilityClass cls)
{
    switch (cls) {
    case StabilityClass::Stable: return "stable";
    case StabilityClass::Unstable: return "unstable";
    case StabilityClass::Marginal: return "marginal";
    }
    return "unknown";
}

double eigen_lambda(unsigned n, double ell, ModeFamily family)
{
    if (!(ell > 0.0) || !std::isfinite(ell))
        throw Error(ErrorCode::NonPositiveParameter, "domain length must be positive", "ell");
    const double pi = std::numbers::pi;
    const double nn = static_cast<double>(n);
    if (family == ModeFamily::SturmLiouville)
        return (nn + 0.5) * pi / ell;
    return (2.0 * pi * nn + 0.5 * pi) / ell;
}

DispersionResult dispersion_relation(const ModelParams& mp, const PerturbParams& pp, double lambda)
{
    validate_perturbation(mp, pp);
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorCode::InvalidArgument, "wavenumber must be positive", "lambda");

    const double tau = mp.tau;
    const double l2 = lambda * lambda;
    const double p = 0.5 * mp.mu * l2;               // bacterial diffusion
    const double q = 0.5 * mp.big_d * l2 + pp.d_deg; // substrate diffusion + decay
    const double coupling = pp.a * mp.beta * pp.u0 / pp.v0;

    DispersionResult r;
    r.lambda = lambda;
    r.b = (p + q) / tau;
    const double positive_part = 0.25 * mp.mu * mp.big_d * l2 + 0.5 * mp.mu * pp.d_deg;
    r.c_coef = l2 / (tau * tau) * (positive_part - coupling);

    // b^2 - 4 c_coef = ((p - q)^2 + 4 coupling lambda^2) / tau^2, written
    // without the cancellation of the textbook form.
    const double disc = ((p - q) * (p - q) + 4.0 * coupling * l2) / (tau * tau);
    const double root = std::sqrt(disc);
    const double s1 = -0.5 * (r.b + root);
    r.sigma1 = {s1, 0.0};
    r.sigma2 = {r.c_coef / s1, 0.0};

    const double scale = l2 / (tau * tau) * std::max(positive_part, coupling);
    if (std::abs(r.c_coef) <= kMarginalTolerance * scale) {
        r.cls = StabilityClass::Marginal;
        r.c_coef = 0.0;
        r.sigma2 = {0.0, 0.0};
    } else {
        r.cls = r.c_coef > 0.0 ? StabilityClass::Stable : StabilityClass::Unstable;
    }

    for (const auto& s : {r.sigma1, r.sigma2}) {
        const std::complex<double> val = s * s + r.b * s + r.c_coef;
        const double term = std::max({std::norm(s), r.b * std::abs(s), std::abs(r.c_coef)});
        if (term > 0.0)
            r.root_residual = std::max(r.root_residual, std::abs(val) / term);
    }
    return r;
}

DispersionResult dispersion_mode(const ModelParams& mp, const PerturbParams& pp, unsigned n, ModeFamily family)
{
    DispersionResult r = dispersion_relation(mp, pp, eigen_lambda(n, pp.ell, family));
    r.n = n;
    return r;
}

std::array<double, 2> mode_shape(const ModelParams& mp, const PerturbParams& pp, double lambda, double sigma)
{
    validate_perturbation(mp, pp);
    const double l2 = lambda * lambda;
    // First row of the mode equations: (tau sigma + mu lambda^2 / 2) u* = (beta u0 / v0) lambda^2 v*.
    const double v_star = (mp.tau * sigma + 0.5 * mp.mu * l2) / (mp.beta * pp.u0 / pp.v0 * l2);
    return {1.0, v_star};
}

double instability_threshold(const ModelParams& mp, const PerturbParams& pp, double lambda)
{
    validate_perturbation(mp, pp);
    return pp.v0 / (2.0 * pp.u0) * (mp.mu / mp.beta) * (0.5 * mp.big_d * lambda * lambda + pp.d_deg);
}

double instability_threshold_mode(const ModelParams& mp, const PerturbParams& pp, unsigned n, ModeFamily family)
{
    return instability_threshold(mp, pp, eigen_lambda(n, pp.ell, family));
}

double instability_threshold_n0(const ModelParams& mp, const PerturbParams& pp)
{
    validate_perturbation(mp, pp);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return pp.v0 / (16.0 * pp.u0) * (mp.mu / mp.beta)
         * (mp.big_d * pi2 / (pp.ell * pp.ell) + 8.0 * pp.d_deg);
}

EnergyCertificate energy_certificate(const ModelParams& mp, const PerturbParams& pp)
{
    validate_perturbation(mp, pp);
    EnergyCertificate cert;
    cert.c_p = 2.0 / (pp.ell * pp.ell);
    const double coupling = 2.0 * pp.u0 * mp.beta / pp.v0;
    cert.mu_dominates_coupling = coupling <= mp.mu;
    cert.diffusion_dominates_coupling = coupling <= mp.big_d;
    cert.motility_bounds_production = 4.0 * pp.a <= cert.c_p * mp.mu;
    cert.diffusion_bounds_production = 4.0 * pp.a <= cert.c_p * mp.big_d + pp.d_deg;
    cert.sup_bound_coeff = 2.0 * std::sqrt(pp.ell);
    if (cert.certified()) {
        const double c = std::min(cert.c_p * mp.mu / 4.0, cert.c_p * mp.big_d / 4.0 + 7.0 * pp.d_deg / 4.0);
        cert.rate_l2 = c / mp.tau;
        cert.rate_h1 = pp.a / mp.tau;
    }
    cert.instability_predicted = pp.a > instability_threshold_n0(mp, pp);
    cert.consistent = !(cert.certified() && cert.instability_predicted);
    return cert;
}

namespace {

std::vector<double> gradient(std::span<const double> f, double h)
{
    const std::size_t n = f.size();
    std::vector<double> g(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return g;
}

double trapezoid_sq(std::span<const double> f, double h)
{
    double s = 0.5 * (f.front() * f.front() + f.back() * f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i)
        s += f[i] * f[i];
    return s * h;
}

double max_abs(std::span<const double> f)
{
    double m = 0.0;
    for (double x : f)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace

EnergyNorms energy_norms(const FieldState& state)
{
    validate_state(state, false);
    const double h = state.grid.spacing();
    EnergyNorms n;
    n.l2_sq = trapezoid_sq(state.u, h) + trapezoid_sq(state.v, h);
    n.h1_sq = trapezoid_sq(gradient(state.u, h), h) + trapezoid_sq(gradient(state.v, h), h);
    n.sup_norm = max_abs(state.u) + max_abs(state.v);
    return n;
}

void EnergyTrace::push(double t, const EnergyNorms& n)
{
    times.push_back(t);
    l2_sq.push_back(n.l2_sq);
    h1_sq.push_back(n.h1_sq);
    sup_norm.push_back(n.sup_norm);
}

double log_linear_slope(std::span<const double> t, std::span<const double> y)
{
    if (t.size() != y.size() || t.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "slope fit needs at least two matching samples");
    const double n = static_cast<double>(t.size());
    double mt = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > 0.0)) {
            std::ostringstream os;
            os << "trace value " << y[i] << " at t = " << t[i] << " is not positive";
            throw Error(ErrorCode::NonPositiveTraceValue, os.str());
        }
        mt += t[i];
        my += std::log(y[i]);
    }
    mt /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double dt = t[i] - mt;
        sxy += dt * (std::log(y[i]) - my);
        sxx += dt * dt;
    }
    if (!(sxx > 0.0))
        throw Error(ErrorCode::InvalidArgument, "slope fit needs distinct sample times");
    return sxy / sxx;
}

EnergyBoundCheck check_energy_bounds(const EnergyTrace& trace, const EnergyCertificate& cert)
{
    if (!cert.certified() || !cert.rate_l2 || !cert.rate_h1)
        throw Error(ErrorCode::InvalidArgument, "energy bounds need a certificate whose conditions hold");
    if (trace.size() == 0)
        throw Error(ErrorCode::InvalidArgument, "energy trace is empty");
    EnergyBoundCheck out;
    const double t0 = trace.times.front();
    const double l2_0 = trace.l2_sq.front();
    const double sup_0 = cert.sup_bound_coeff * std::sqrt(trace.h1_sq.front());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double t = trace.times[i] - t0;
        const double l2_bound = l2_0 * std::exp(-*cert.rate_l2 * t);
        const double sup_bound = sup_0 * std::exp(-0.5 * *cert.rate_h1 * t);
        const double r2 = l2_bound > 0.0 ? trace.l2_sq[i] / l2_bound : (trace.l2_sq[i] > 0.0 ? HUGE_VAL : 0.0);
        const double rs = sup_bound > 0.0 ? trace.sup_norm[i] / sup_bound : (trace.sup_norm[i] > 0.0 ? HUGE_VAL : 0.0);
        if (r2 > out.max_l2_ratio) {
            out.max_l2_ratio = r2;
            out.t_worst_l2 = trace.times[i];
        }
        if (rs > out.max_sup_ratio) {
            out.max_sup_ratio = rs;
            out.t_worst_sup = trace.times[i];
        }
    }
    return out;
}

double fit_decay_rate(const EnergyTrace& trace, TraceField field, std::optional<FitWindow> window)
{
    if (trace.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "trace needs at least two samples");
    const std::vector<double>& values = field == TraceField::L2   ? trace.l2_sq
                                      : field == TraceField::H1   ? trace.h1_sq
                                                                  : trace.sup_norm;
    const FitWindow w = window.value_or(FitWindow{0.1 * trace.times.back(), trace.times.back()});
    const double eps = 1e-12 * std::max(1.0, std::abs(w.t1));
    std::vector<double> t;
    std::vector<double> y;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.times[i] >= w.t0 - eps && trace.times[i] <= w.t1 + eps) {
            t.push_back(trace.times[i]);
            y.push_back(values[i]);
        }
    }
    return -log_linear_slope(t, y);
}

} // namespace chemoband
