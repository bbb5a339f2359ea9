#include "chemoband/model.hpp"

#include <cmath>
#include <sstream>

namespace chemoband {

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "parameter '" << name << "' must be strictly positive and finite (got " << value << ")";
        throw Error(ErrorCode::NonPositiveParameter, os.str(), name);
    }
}

void require_non_negative(double value, const char* name)
{
    if (!(value >= 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "parameter '" << name << "' must be non-negative and finite (got " << value << ")";
        throw Error(ErrorCode::NonPositiveParameter, os.str(), name);
    }
}

} // namespace

std::string_view to_string(Regime regime)
{
    switch (regime) {
    case Regime::UnlimitedGeneral: return "unlimited-general";
    case Regime::UnlimitedCritical: return "unlimited-critical";
    case Regime::Limited: return "limited";
    }
    return "unknown";
}

bool is_unlimited(Regime regime) noexcept
{
    return regime == Regime::UnlimitedGeneral || regime == Regime::UnlimitedCritical;
}

Regime unlimited_regime_for(double d_ratio) noexcept
{
    return std::abs(d_ratio - 1.0) <= kCriticalRatioTolerance ? Regime::UnlimitedCritical
                                                              : Regime::UnlimitedGeneral;
}

void validate_model(const ModelParams& mp, bool require_diffusion)
{
    require_positive(mp.tau, "tau");
    require_positive(mp.mu, "mu");
    require_non_negative(mp.beta, "beta");
    if (require_diffusion)
        require_positive(mp.big_d, "big_d");
    else
        require_non_negative(mp.big_d, "big_d");
    require_non_negative(mp.k, "k");
}

DerivedParams validate(const ModelParams& mp, const BandParams& bp)
{
    validate_model(mp, false);
    require_positive(mp.beta, "beta");
    require_positive(mp.k, "k");
    require_positive(bp.c, "c");
    require_positive(bp.c0, "c0");
    require_positive(bp.v_inf, "v_inf");

    const double d = mp.d_ratio();
    std::ostringstream why;
    switch (bp.regime) {
    case Regime::UnlimitedGeneral:
        if (!(d > 1.0 + kCriticalRatioTolerance))
            why << "unlimited-general regime requires d = 2 beta / mu > 1 (got d = " << d << ")";
        break;
    case Regime::UnlimitedCritical:
        if (std::abs(d - 1.0) > kCriticalRatioTolerance)
            why << "unlimited-critical regime requires d = 1 (got d = " << d << ")";
        break;
    case Regime::Limited:
        if (!(bp.c0 > 1.0))
            why << "limited regime requires c0 > 1 (got c0 = " << bp.c0 << ")";
        break;
    }
    if (!why.str().empty())
        throw Error(ErrorCode::RegimeMismatch, why.str());

    DerivedParams dp;
    dp.d_ratio = d;
    dp.c3 = 2.0 * mp.beta * mp.k / (bp.c * mp.mu);
    dp.c4 = mp.tau * bp.c * bp.c / (mp.beta * mp.k);
    dp.q_unlim = bp.c0 * bp.v_inf;
    dp.q_lim = 2.0 * mp.tau * bp.c * bp.c / (mp.k * mp.beta);
    dp.rate = 2.0 * mp.tau * bp.c / mp.mu;
    dp.amplitude = bp.c0 * mp.k * mp.mu / (2.0 * bp.c * bp.c * mp.tau);
    return dp;
}

void validate_perturbation(const ModelParams& mp, const PerturbParams& pp)
{
    validate_model(mp, true);
    require_positive(mp.beta, "beta");
    require_positive(pp.u0, "u0");
    require_positive(pp.v0, "v0");
    require_positive(pp.a, "a");
    require_positive(pp.d_deg, "d_deg");
    require_positive(pp.ell, "ell");
}

Grid1D::Grid1D(double x0, double x1, std::size_t n) : x0_(x0), x1_(x1), n_(n), h_(0.0)
{
    if (n < 3)
        throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 nodes", "n");
    if (!std::isfinite(x0) || !std::isfinite(x1) || !(x1 > x0))
        throw Error(ErrorCode::InvalidArgument, "grid endpoints must satisfy x0 < x1", "x1");
    h_ = (x1 - x0) / static_cast<double>(n - 1);
}

double Grid1D::x(std::size_t i) const noexcept
{
    // Pin the last node exactly to x1.
    return i + 1 == n_ ? x1_ : x0_ + static_cast<double>(i) * h_;
}

std::vector<double> Grid1D::nodes() const
{
    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i)
        xs[i] = x(i);
    return xs;
}

bool BandProfile::has_first_derivatives() const noexcept
{
    return du.size() == zeta.size() && dv.size() == zeta.size() && !zeta.empty();
}

bool BandProfile::has_second_derivatives() const noexcept
{
    return has_first_derivatives() && d2u.size() == zeta.size() && d2v.size() == zeta.size();
}

void validate_state(const FieldState& state, bool require_positive_v)
{
    const std::size_t n = state.grid.size();
    if (state.u.size() != n || state.v.size() != n)
        throw Error(ErrorCode::InvalidArgument, "field arrays do not match the grid size");
    if (!std::isfinite(state.t))
        throw Error(ErrorCode::InvalidArgument, "state time is not finite");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(state.u[i]) || !std::isfinite(state.v[i])) {
            std::ostringstream os;
            os << "non-finite field value at node " << i;
            throw Error(ErrorCode::InvalidArgument, os.str());
        }
        if (require_positive_v && !(state.v[i] > 0.0)) {
            std::ostringstream os;
            os << "substrate must be positive everywhere (v = " << state.v[i] << " at node " << i << ")";
            throw Error(ErrorCode::InvalidArgument, os.str(), "v");
        }
    }
}

} // namespace chemoband
