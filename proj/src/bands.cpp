#include "chemoband/bands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

namespace chemoband {

namespace {

/// log(1 + exp(z)) without overflow.
double softplus(double z)
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

struct PointSample {
    double u = 0.0, v = 0.0, du = 0.0, dv = 0.0, d2u = 0.0, d2v = 0.0;
    bool guarded = false;
};

// Unlimited band written in log form:
//   y      = A0 V_inf^delta exp(-s zeta),   delta = d - 1
//   log V  = log V_inf - log(1 + delta y) / delta     (delta > 0)
//   log V  = log V_inf - y                            (delta = 0)
//   log U  = log C0 + d log V - s zeta
//   g      = V'/V = s A0 exp(-s zeta) V^delta
struct UnlimitedForm {
    double s, ln_a0, d, delta, ln_vinf, ln_c0, v_inf;
    bool critical;

    UnlimitedForm(const ModelParams& mp, const BandParams& bp, const DerivedParams& dp)
        : s(dp.rate), ln_a0(std::log(dp.amplitude)), d(dp.d_ratio), delta(dp.d_ratio - 1.0),
          ln_vinf(std::log(bp.v_inf)), ln_c0(std::log(bp.c0)), v_inf(bp.v_inf),
          critical(bp.regime == Regime::UnlimitedCritical)
    {
        (void)mp;
        if (critical) {
            d = 1.0;
            delta = 0.0;
        }
    }

    double log_v(double zeta) const
    {
        const double ln_y = ln_a0 - s * zeta + delta * ln_vinf;
        if (critical)
            return ln_vinf - std::exp(ln_y);
        return ln_vinf - softplus(std::log(delta) + ln_y) / delta;
    }

    double log_u(double zeta) const { return ln_c0 + d * log_v(zeta) - s * zeta; }

    /// d/dzeta log U = d g - s.
    double dlog_u(double zeta) const
    {
        const double lv = log_v(zeta);
        const double ln_g = std::log(s) + ln_a0 - s * zeta + (critical ? 0.0 : delta * lv);
        return d * std::exp(ln_g) - s;
    }

    PointSample sample(double zeta) const
    {
        PointSample p;
        const double x = s * zeta;
        if (x > kExponentCap) {
            p.v = v_inf;
            p.guarded = true;
            return p;
        }
        if (x < -kExponentCap) {
            p.guarded = true;
            return p;
        }
        const double lv = log_v(zeta);
        const double lu = ln_c0 + d * lv - x;
        const double lg = std::log(s) + ln_a0 - x + (critical ? 0.0 : delta * lv);
        p.u = std::exp(lu);
        p.v = std::exp(lv);
        // Products are formed in log space so that 0 * inf never appears in
        // the far tails.
        const double ug = std::exp(lu + lg);
        const double ug2 = std::exp(lu + 2.0 * lg);
        const double vg = std::exp(lv + lg);
        const double vg2 = std::exp(lv + 2.0 * lg);
        p.du = d * ug - s * p.u;
        p.d2u = d * d * ug2 - 2.0 * d * s * ug + s * s * p.u - d * s * ug + d * (d - 1.0) * ug2;
        p.dv = vg;
        p.d2v = -s * vg + d * vg2;
        return p;
    }
};

// Limited band with P = C0 exp(s zeta) and w = P / (1 + P):
//   U = C4 / (1 + P),  V = V_inf (1 + 1/P)^(-1/d)
//   U' = -s U w,  V'/V = (s/d)(1 - w)
struct LimitedForm {
    double s, ln_c0, d, c4, v_inf, ln_vinf;

    LimitedForm(const BandParams& bp, const DerivedParams& dp)
        : s(dp.rate), ln_c0(std::log(bp.c0)), d(dp.d_ratio), c4(dp.c4), v_inf(bp.v_inf),
          ln_vinf(std::log(bp.v_inf))
    {
    }

    PointSample sample(double zeta) const
    {
        PointSample p;
        const double x = s * zeta;
        if (x > kExponentCap) {
            p.v = v_inf;
            p.guarded = true;
            return p;
        }
        if (x < -kExponentCap) {
            p.u = c4;
            p.guarded = true;
            return p;
        }
        const double ln_p = ln_c0 + x;
        const double sp = softplus(ln_p);
        const double w = std::exp(ln_p - sp);
        const double one_minus_w = std::exp(-sp);
        p.u = c4 * one_minus_w;
        p.v = std::exp(ln_vinf - softplus(-ln_p) / d);
        p.du = -s * p.u * w;
        p.d2u = s * s * p.u * w * (2.0 * w - 1.0);
        const double g = (s / d) * one_minus_w;
        const double dg = -(s / d) * s * w * one_minus_w;
        p.dv = g * p.v;
        p.d2v = p.v * (dg + g * g);
        return p;
    }
};

template <class Form>
BandProfile fill_profile(const Form& form, std::span<const double> zeta)
{
    BandProfile prof;
    const std::size_t n = zeta.size();
    prof.zeta.assign(zeta.begin(), zeta.end());
    prof.u.resize(n);
    prof.v.resize(n);
    prof.du.resize(n);
    prof.dv.resize(n);
    prof.d2u.resize(n);
    prof.d2v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PointSample p = form.sample(zeta[i]);
        prof.u[i] = p.u;
        prof.v[i] = p.v;
        prof.du[i] = p.du;
        prof.dv[i] = p.dv;
        prof.d2u[i] = p.d2u;
        prof.d2v[i] = p.d2v;
        if (p.guarded)
            ++prof.guarded;
    }
    return prof;
}

void require_unlimited(const BandParams& bp, const char* op)
{
    if (!is_unlimited(bp.regime)) {
        std::ostringstream os;
        os << op << " requires an unlimited-substrate regime (got " << to_string(bp.regime) << ")";
        throw Error(ErrorCode::RegimeMismatch, os.str());
    }
}

/// Golden-section maximisation of f on [a, b] down to the given bracket width.
template <class F>
std::pair<double, double> golden_section_max(F&& f, double a, double b, double width)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > width) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        if (x1 == x2)
            break;
    }
    return {a, b};
}

} // namespace

std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> xs(n);
    if (n == 1) {
        xs[0] = a;
        return xs;
    }
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = a + static_cast<double>(i) * h;
    if (n > 1)
        xs.back() = b;
    return xs;
}

BandProfile eval_unlimited(const ModelParams& mp, const BandParams& bp, std::span<const double> zeta)
{
    require_unlimited(bp, "eval_unlimited");
    const DerivedParams dp = validate(mp, bp);
    return fill_profile(UnlimitedForm(mp, bp, dp), zeta);
}

BandProfile eval_limited(const ModelParams& mp, const BandParams& bp, std::span<const double> zeta)
{
    if (bp.regime != Regime::Limited)
        throw Error(ErrorCode::RegimeMismatch, "eval_limited requires the limited regime");
    const DerivedParams dp = validate(mp, bp);
    return fill_profile(LimitedForm(bp, dp), zeta);
}

BandProfile eval_band(const ModelParams& mp, const BandParams& bp, std::span<const double> zeta)
{
    return bp.regime == Regime::Limited ? eval_limited(mp, bp, zeta) : eval_unlimited(mp, bp, zeta);
}

BandExtrema band_extrema(const ModelParams& mp, const BandParams& bp)
{
    require_unlimited(bp, "band_extrema");
    const DerivedParams dp = validate(mp, bp);
    const UnlimitedForm form(mp, bp, dp);
    const double s = dp.rate;
    const double peak_scale = 2.0 * bp.c * bp.c * mp.tau * bp.v_inf / (mp.k * mp.mu);

    BandExtrema out;
    if (bp.regime == Regime::UnlimitedCritical) {
        out.u_max = peak_scale * std::exp(-1.0);
        out.zeta0 = std::log(dp.amplitude) / s;
    } else {
        const double d = dp.d_ratio;
        out.u_max = peak_scale * std::pow(d, -d / (d - 1.0));
        out.zeta0 = (std::log(dp.amplitude) + (d - 1.0) * std::log(bp.v_inf)) / s;
    }

    // Numerical confirmation: coarse scan, golden-section refinement of log U,
    // then bisection on the sign of (log U)'.
    const double half_width =
        (60.0 + std::abs(form.ln_a0) + std::abs(form.delta * form.ln_vinf)) / s;
    const std::size_t n_scan = 4001;
    const std::vector<double> scan = linspace(-half_width, half_width, n_scan);
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_scan; ++i) {
        const double val = form.log_u(scan[i]);
        if (val > best_val) {
            best_val = val;
            best = i;
        }
    }
    double lo = scan[best == 0 ? 0 : best - 1];
    double hi = scan[best + 1 == n_scan ? best : best + 1];
    const auto log_u = [&form](double z) { return form.log_u(z); };
    std::tie(lo, hi) = golden_section_max(log_u, lo, hi, 1e-8 / s);

    // log U is flat to rounding over a wider interval than the golden-section
    // bracket, so widen until the derivative changes sign.
    double w = hi - lo;
    double a = lo - w;
    double b = hi + w;
    for (int it = 0; it < 60 && !(form.dlog_u(a) > 0.0); ++it, w *= 2.0)
        a -= w;
    w = hi - lo;
    for (int it = 0; it < 60 && !(form.dlog_u(b) < 0.0); ++it, w *= 2.0)
        b += w;
    if (form.dlog_u(a) > 0.0 && form.dlog_u(b) < 0.0) {
        for (int it = 0; it < 200 && b - a > 0.0; ++it) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b)
                break;
            (form.dlog_u(m) > 0.0 ? a : b) = m;
        }
        out.zeta0_numeric = 0.5 * (a + b);
    } else {
        out.zeta0_numeric = 0.5 * (lo + hi);
    }
    out.u_max_numeric = std::exp(form.log_u(out.zeta0_numeric));
    return out;
}

SpeedEstimate band_speed_from_mass(const ModelParams& mp, const BandParams& bp, const QuadratureConfig& cfg)
{
    require_unlimited(bp, "band_speed_from_mass");
    const DerivedParams dp = validate(mp, bp);
    if (!(cfg.rel_tol > 0.0))
        throw Error(ErrorCode::InvalidArgument, "quadrature tolerance must be positive", "rel_tol");
    const UnlimitedForm form(mp, bp, dp);
    const double s = dp.rate;
    const double scale = 1.0 / s;
    const double centre = (form.ln_a0 + form.delta * form.ln_vinf) / s;

    const auto u_at = [&form, s](double zeta) {
        const double x = s * zeta;
        if (std::abs(x) > kExponentCap)
            return 0.0;
        return std::exp(form.log_u(zeta));
    };

    using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
    double integral = 0.0;
    double error = 0.0;
    if (!cfg.window) {
        // zeta = centre + scale * t / (1 - t^2) maps (-1, 1) onto the real
        // line; exponential tails become smooth and flat at t = +-1.
        const auto integrand = [&](double t) {
            const double one_m = 1.0 - t * t;
            if (one_m <= 0.0)
                return 0.0;
            const double zeta = centre + scale * t / one_m;
            const double jac = scale * (1.0 + t * t) / (one_m * one_m);
            const double u = u_at(zeta);
            return u == 0.0 ? 0.0 : u * jac;
        };
        integral = Integrator::integrate(integrand, -1.0, 1.0, cfg.max_depth, 0.1 * cfg.rel_tol, &error);
    } else {
        const double w = *cfg.window;
        if (!(w > 0.0))
            throw Error(ErrorCode::InvalidArgument, "truncation window must be positive", "window");
        const double zlo = centre - w * scale;
        const double zhi = centre + w * scale;
        integral = Integrator::integrate(u_at, zlo, zhi, cfg.max_depth, 0.1 * cfg.rel_tol, &error);

        // Right tail: U <= C0 V_inf^d exp(-s zeta).
        const double right = std::exp(form.ln_c0 + form.d * form.ln_vinf - s * zhi) / s;
        double left = 0.0;
        if (bp.regime == Regime::UnlimitedCritical) {
            // Exact: C0 V_inf exp(-A0 E_lo) / (A0 s), E_lo = exp(-s zlo).
            const double a0 = dp.amplitude;
            left = bp.c0 * bp.v_inf * std::exp(-a0 * std::exp(-s * zlo)) / (a0 * s);
        } else {
            // V^d <= (A0 (d-1) E)^(-d/(d-1)) gives U <= C0 (A0 (d-1))^(-d/(d-1)) exp(s zeta/(d-1)).
            const double d = form.d;
            const double dm1 = d - 1.0;
            const double ln_left = form.ln_c0 - d / dm1 * (form.ln_a0 + std::log(dm1)) + std::log(dm1 / s)
                                 + s * zlo / dm1;
            left = std::exp(ln_left);
        }
        error += left + right;
    }

    SpeedEstimate est;
    est.mass = integral;
    est.c_est = mp.k / bp.v_inf * integral;
    est.error_estimate = mp.k / bp.v_inf * error;
    const double requested = cfg.rel_tol * std::abs(est.c_est);
    if (!std::isfinite(est.c_est) || !(est.error_estimate <= requested))
        throw QuadratureNotConverged(est.error_estimate, requested);
    return est;
}

double OdeResidual::max_relative() const noexcept
{
    const auto rel = [](double num, double den) { return den > 0.0 ? num / den : num; };
    double r = std::max(rel(max_abs_u, scale_u), rel(max_abs_v, scale_v));
    if (!res_first_order.empty())
        r = std::max(r, rel(max_abs_first_order, scale_first_order));
    return r;
}

OdeResidual traveling_ode_residual(const ModelParams& mp, const BandParams& bp, const BandProfile& profile)
{
    if (!profile.has_second_derivatives())
        throw Error(ErrorCode::MissingDerivatives,
                    "traveling_ode_residual needs first and second derivative arrays");
    const DerivedParams dp = validate(mp, bp);
    const bool limited = bp.regime == Regime::Limited;
    const std::size_t n = profile.size();
    if (profile.u.size() != n || profile.v.size() != n)
        throw Error(ErrorCode::InvalidArgument, "profile arrays differ in length");

    OdeResidual r;
    r.res_u.resize(n);
    r.res_v.resize(n);
    if (limited)
        r.res_first_order.resize(n);

    const double c = bp.c;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = profile.u[i];
        const double v = profile.v[i];
        const double du = profile.du[i];
        const double d2u = profile.d2u[i];
        const double dv = profile.dv[i];
        double g = 0.0;
        double dg = 0.0;
        if (v > 0.0) {
            g = dv / v;
            dg = profile.d2v[i] / v - g * g;
        }
        // tau c U' - beta (U (ln V)')' + (mu/2) U''
        const double t1 = mp.tau * c * du;
        const double t2 = mp.beta * (du * g + u * dg);
        const double t3 = 0.5 * mp.mu * d2u;
        r.res_u[i] = t1 - t2 + t3;
        r.scale_u = std::max({r.scale_u, std::abs(t1), std::abs(t2), std::abs(t3)});
        r.max_abs_u = std::max(r.max_abs_u, std::abs(r.res_u[i]));

        const double s1 = c * dv;
        const double s2 = limited ? mp.k * u * v : mp.k * u;
        r.res_v[i] = s1 - s2;
        r.scale_v = std::max({r.scale_v, std::abs(s1), std::abs(s2)});
        r.max_abs_v = std::max(r.max_abs_v, std::abs(r.res_v[i]));

        if (limited) {
            const double rhs = dp.c3 * u * (u - dp.c4);
            r.res_first_order[i] = du - rhs;
            r.scale_first_order = std::max({r.scale_first_order, std::abs(du), std::abs(rhs)});
            r.max_abs_first_order = std::max(r.max_abs_first_order, std::abs(r.res_first_order[i]));
        }
    }
    return r;
}

namespace {

std::string blowup_message(double zeta_max)
{
    std::ostringstream os;
    os.precision(10);
    os << "U blows up at finite zeta_max ~ " << zeta_max;
    return os.str();
}

} // namespace

BlowupDetected::BlowupDetected(BandProfile partial, double zeta_max)
    : Error(ErrorCode::BlowupDetected, blowup_message(zeta_max)), partial_(std::move(partial)),
      zeta_max_(zeta_max)
{
}

BandOdeResult integrate_band_ode(const ModelParams& mp, const BandParams& bp, BandInitialCondition ic,
                                 const BandSpan& span, const StepConfig& cfg)
{
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;

    const DerivedParams dp = validate(mp, bp);
    if (!(ic.v > 0.0) || !std::isfinite(ic.v))
        throw Error(ErrorCode::InvalidArgument, "initial V must be positive", "v");
    if (!(ic.u > 0.0) || !std::isfinite(ic.u))
        throw Error(ErrorCode::InvalidArgument, "initial U must be positive", "u");
    if (!(span.zeta_b > span.zeta_a) || span.n_out < 2)
        throw Error(ErrorCode::InvalidArgument, "span must satisfy zeta_a < zeta_b and n_out >= 2");

    const bool limited = bp.regime == Regime::Limited;
    const double s = dp.rate;
    const double d = bp.regime == Regime::UnlimitedCritical ? 1.0 : dp.d_ratio;
    const double k_over_c = mp.k / bp.c;

    BandOdeResult result;
    if (limited) {
        const double rel = (ic.u - dp.c4) / dp.c4;
        if (std::abs(rel) <= 1e-9) {
            result.limited_case = LimitedCase::Constant;
            ic.u = dp.c4;
        } else {
            result.limited_case = rel < 0.0 ? LimitedCase::Band : LimitedCase::Blowup;
        }
    }

    // State is (log U, log V).
    const auto rhs = [&](const State& y, State& dydz, double /*zeta*/) {
        const double u = std::exp(y[0]);
        if (limited) {
            dydz[0] = dp.c3 * (u - dp.c4);
            dydz[1] = k_over_c * u;
        } else {
            const double ratio = std::exp(y[0] - y[1]);
            dydz[0] = d * k_over_c * ratio - s;
            dydz[1] = k_over_c * ratio;
        }
    };

    const std::vector<double> out_z = linspace(span.zeta_a, span.zeta_b, span.n_out);
    BandProfile& prof = result.profile;
    const auto record = [&](double z, const State& y) {
        State dy{};
        rhs(y, dy, z);
        const double u = std::exp(y[0]);
        const double v = std::exp(y[1]);
        prof.zeta.push_back(z);
        prof.u.push_back(u);
        prof.v.push_back(v);
        prof.du.push_back(u * dy[0]);
        prof.dv.push_back(v * dy[1]);
    };

    State y{std::log(ic.u), std::log(ic.v)};
    double z = span.zeta_a;
    record(z, y);

    auto stepper = ode::make_controlled(cfg.abs_tol, cfg.rel_tol, ode::runge_kutta_dopri5<State>());
    const double log_blowup = std::log(cfg.blowup_factor * dp.c4);
    double dz = cfg.initial_step;
    std::size_t steps = 0;

    for (std::size_t j = 1; j < out_z.size(); ++j) {
        const double target = out_z[j];
        while (z < target) {
            const bool capped = dz >= target - z;
            double trial = capped ? target - z : dz;
            const double before = z;
            const ode::controlled_step_result res = stepper.try_step(rhs, y, z, trial);
            if (res == ode::fail) {
                if (trial < cfg.min_step) {
                    std::ostringstream os;
                    os << "step size underflow at zeta = " << z << " (step " << trial << ")";
                    throw Error(ErrorCode::StepSizeUnderflow, os.str());
                }
                dz = trial;
                continue;
            }
            if (capped && z != target && target - z < 1e-15 * std::max(1.0, std::abs(target)))
                z = target;
            dz = capped ? std::max(dz, trial) : trial;
            if (++steps > cfg.max_steps)
                throw Error(ErrorCode::StepSizeUnderflow, "step budget exhausted before reaching the span end");
            if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
                throw BlowupDetected(prof, before);
            if (limited && y[0] > log_blowup) {
                // Near the pole U' ~ C3 U^2, so 1/U ~ C3 (zeta_max - zeta).
                const double u = std::exp(y[0]);
                record(z, y);
                throw BlowupDetected(prof, z + 1.0 / (dp.c3 * u));
            }
        }
        record(target, y);
    }
    return result;
}

} // namespace chemoband
