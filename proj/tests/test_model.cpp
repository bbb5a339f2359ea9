#include <doctest.h>

#include "chemoband/model.hpp"
#include "test_support.hpp"

using namespace chemoband;
using namespace test_support;

TEST_CASE("d ratio of the table1 preset is 1.3")
{
    const ModelParams mp{kTau, kMu, kBeta13, 0.0, 1.0};
    const DerivedParams dp = validate(mp, BandParams{kC, kC0, 1.0, Regime::UnlimitedGeneral});
    CHECK(dp.d_ratio == doctest::Approx(1.3).epsilon(1e-15));
}

TEST_CASE("beta = mu / 2 gives d = 1 exactly and the critical regime")
{
    const ModelParams mp{kTau, 0.25, 0.125, 0.0, 1.0};
    CHECK(mp.d_ratio() == 1.0);
    CHECK(unlimited_regime_for(mp.d_ratio()) == Regime::UnlimitedCritical);
    CHECK_NOTHROW(validate(mp, BandParams{kC, kC0, 1.0, Regime::UnlimitedCritical}));
    CHECK(error_code_of([&] { validate(mp, BandParams{kC, kC0, 1.0, Regime::UnlimitedGeneral}); })
          == ErrorCode::RegimeMismatch);
}

TEST_CASE("limited plateau c4")
{
    const ModelParams mp{0.05, 0.25, 0.25, 0.0, 1.0};
    const DerivedParams dp = validate(mp, BandParams{1.5, 4.0, 1.0, Regime::Limited});
    // reference: c4
    CHECK(rel_err(dp.c4, 0.45) < 1e-15);
}

TEST_CASE("c3 * c4 equals the tail rate")
{
    for (double beta : {0.05, 0.125, 0.3, 1.7}) {
        for (double c : {0.3, 1.5, 4.0}) {
            const ModelParams mp{0.07, 0.21, beta, 0.0, 2.5};
            const DerivedParams dp = validate(mp, BandParams{c, 3.0, 1.0, Regime::Limited});
            CHECK(rel_err(dp.c3 * dp.c4, 2.0 * mp.tau * c / mp.mu) < 1e-12);
        }
    }
}

TEST_CASE("non-positive parameters are named")
{
    const BandParams bp{kC, kC0, 1.0, Regime::UnlimitedGeneral};
    const auto field_of = [&](ModelParams mp) -> std::string {
        try {
            validate(mp, bp);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonPositiveParameter);
            return e.field();
        }
        return "";
    };
    CHECK(field_of({kTau, -0.25, kBeta13, 0.0, 1.0}) == "mu");
    CHECK(field_of({0.0, kMu, kBeta13, 0.0, 1.0}) == "tau");
    CHECK(field_of({kTau, kMu, kBeta13, 0.0, 0.0}) == "k");
}

TEST_CASE("unlimited closed forms need d >= 1; d < 1 is limited only")
{
    const ModelParams mp{kTau, kMu, 0.0375, 0.0, 1.0}; // d = 0.3
    CHECK(error_code_of([&] { validate(mp, BandParams{kC, kC0, 1.0, Regime::UnlimitedGeneral}); })
          == ErrorCode::RegimeMismatch);
    CHECK_NOTHROW(validate(mp, BandParams{kC, kC0, 1.0, Regime::Limited}));
    CHECK(error_code_of([&] { validate(mp, BandParams{kC, 0.5, 1.0, Regime::Limited}); })
          == ErrorCode::RegimeMismatch);
}

TEST_CASE("grid spacing and pinned end node")
{
    const Grid1D g(-15.0, 15.0, 6001);
    CHECK(g.spacing() == doctest::Approx(0.005));
    CHECK(g.x(0) == -15.0);
    CHECK(g.x(6000) == 15.0);
    CHECK(error_code_of([] { Grid1D(0.0, 1.0, 2); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { Grid1D(1.0, 0.0, 5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("state validation rejects NaN and non-positive substrate")
{
    const Grid1D g(0.0, 1.0, 5);
    FieldState s{g, std::vector<double>(5, 1.0), std::vector<double>(5, 1.0), 0.0};
    CHECK_NOTHROW(validate_state(s, true));
    s.u[2] = std::nan("");
    CHECK(error_code_of([&] { validate_state(s, true); }) == ErrorCode::InvalidArgument);
    s.u[2] = 1.0;
    s.v[4] = 0.0;
    CHECK_NOTHROW(validate_state(s, false));
    CHECK(error_code_of([&] { validate_state(s, true); }) == ErrorCode::InvalidArgument);
}
