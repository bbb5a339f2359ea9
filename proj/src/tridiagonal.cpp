#include "chemoband/tridiagonal.hpp"

#include <cmath>
#include <sstream>

#include "chemoband/error.hpp"

namespace chemoband {

namespace {

[[noreturn]] void singular(std::size_t row)
{
    std::ostringstream os;
    os << "singular pivot in tridiagonal solve at row " << row;
    throw Error(ErrorCode::LinearSolveFailure, os.str());
}

void check_sizes(std::size_t a, std::size_t b, std::size_t c, std::size_t d)
{
    if (a != d || b != d || c != d || d == 0)
        throw Error(ErrorCode::InvalidArgument, "tridiagonal bands and right-hand side differ in length");
}

Block2 mul(const Block2& a, const Block2& b)
{
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Vec2 mul(const Block2& a, const Vec2& x) { return {a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]}; }

Block2 sub(const Block2& a, const Block2& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}; }

Block2 inverse(const Block2& m, std::size_t row)
{
    const double det = m[0] * m[3] - m[1] * m[2];
    const double scale = std::abs(m[0] * m[3]) + std::abs(m[1] * m[2]);
    if (!std::isfinite(det) || det == 0.0 || std::abs(det) <= 1e-15 * scale)
        singular(row);
    return {m[3] / det, -m[1] / det, -m[2] / det, m[0] / det};
}

} // namespace

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs)
{
    const std::size_t n = rhs.size();
    check_sizes(lower.size(), diag.size(), upper.size(), n);
    std::vector<double> cp(n);
    std::vector<double> x(n);

    double piv = diag[0];
    if (piv == 0.0 || !std::isfinite(piv))
        singular(0);
    cp[0] = upper[0] / piv;
    x[0] = rhs[0] / piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = diag[i] - lower[i] * cp[i - 1];
        if (piv == 0.0 || !std::isfinite(piv))
            singular(i);
        cp[i] = upper[i] / piv;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] -= cp[i] * x[i + 1];
    return x;
}

std::vector<Vec2> solve_block_tridiagonal(std::span<const Block2> lower, std::span<const Block2> diag,
                                          std::span<const Block2> upper, std::span<const Vec2> rhs)
{
    const std::size_t n = rhs.size();
    check_sizes(lower.size(), diag.size(), upper.size(), n);
    std::vector<Block2> cp(n);
    std::vector<Vec2> x(n);

    Block2 inv = inverse(diag[0], 0);
    cp[0] = mul(inv, upper[0]);
    x[0] = mul(inv, rhs[0]);
    for (std::size_t i = 1; i < n; ++i) {
        inv = inverse(sub(diag[i], mul(lower[i], cp[i - 1])), i);
        cp[i] = mul(inv, upper[i]);
        const Vec2 lx = mul(lower[i], x[i - 1]);
        x[i] = mul(inv, Vec2{rhs[i][0] - lx[0], rhs[i][1] - lx[1]});
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        const Vec2 cx = mul(cp[i], x[i + 1]);
        x[i][0] -= cx[0];
        x[i][1] -= cx[1];
    }
    return x;
}

} // namespace chemoband
