#pragma once

#include <cmath>
#include <functional>

#include <doctest.h>

#include "chemoband/error.hpp"

namespace test_support {

inline double rel_err(double got, double want)
{
    return std::abs(got - want) / std::abs(want);
}

/// Runs fn and returns the code of the chemoband::Error it throws.
inline chemoband::ErrorCode error_code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const chemoband::Error& e) {
        return e.code();
    }
    FAIL("expected a chemoband::Error");
    return chemoband::ErrorCode::InvalidArgument;
}

/// table1 preset parameters, d = 1.3.
inline constexpr double kTau = 0.05;
inline constexpr double kMu = 0.25;
inline constexpr double kBeta13 = 0.1625;
inline constexpr double kC = 1.5;
inline constexpr double kC0 = 4.0;

} // namespace test_support
