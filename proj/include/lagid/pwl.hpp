#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <type_traits>
#include <string>
#include <vector>

#include "lagid/error.hpp"
#include "lagid/least_squares.hpp"

namespace lagid {

enum class Monotonicity { Increasing, Decreasing, NonMonotonic };

[[nodiscard]] inline const char* to_string(Monotonicity m) noexcept
{
    switch (m) {
    case Monotonicity::Increasing: return "increasing";
    case Monotonicity::Decreasing: return "decreasing";
    case Monotonicity::NonMonotonic: return "non-monotonic";
    }
    return "unknown";
}

/// Continuous piecewise-linear map through (breakpoint, value) nodes. Outside
/// the node range the end segments are continued linearly.
template <typename Scalar = double>
class PwlFunction {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    static constexpr Scalar kMinGap = Scalar(1e-12);
    static constexpr Scalar kFlatSlope = Scalar(1e-12);

    PwlFunction() = default;

    PwlFunction(Vector breakpoints, Vector values)
        : breakpoints_(std::move(breakpoints))
        , values_(std::move(values))
    {
        if (breakpoints_.size() < 2)
            throw Error(ErrorKind::Argument, "piecewise-linear function needs at least 2 nodes");
        if (breakpoints_.size() != values_.size())
            throw Error(ErrorKind::Argument, "breakpoint and value arrays differ in length");
        for (Eigen::Index i = 0; i < breakpoints_.size(); ++i) {
            if (!std::isfinite(double(breakpoints_(i))) || !std::isfinite(double(values_(i))))
                throw Error(ErrorKind::Argument, "piecewise-linear nodes must be finite");
            if (i > 0 && !(breakpoints_(i) - breakpoints_(i - 1) > kMinGap))
                throw Error(ErrorKind::Argument, "breakpoints must be strictly increasing");
        }
        identity_ = breakpoints_ == values_;
    }

    static PwlFunction identity(const Vector& breakpoints) { return PwlFunction(breakpoints, breakpoints); }

    [[nodiscard]] const Vector& breakpoints() const { return breakpoints_; }
    [[nodiscard]] const Vector& values() const { return values_; }
    [[nodiscard]] int nodes() const { return int(breakpoints_.size()); }
    [[nodiscard]] int segments() const { return nodes() - 1; }

    [[nodiscard]] Scalar slope(int segment) const
    {
        return (values_(segment + 1) - values_(segment)) / (breakpoints_(segment + 1) - breakpoints_(segment));
    }

    // Segment whose line is used at x, end segments extended outward.
    [[nodiscard]] int segment_of(Scalar x) const
    {
        const auto* first = breakpoints_.data();
        const auto* last = first + breakpoints_.size();
        const auto it = std::upper_bound(first + 1, last - 1, x);
        return int(it - first) - 1;
    }

    // True when every node lies on the diagonal; evaluation then returns x exactly.
    [[nodiscard]] bool is_identity() const { return identity_; }

    [[nodiscard]] Scalar operator()(Scalar x) const
    {
        if (identity_)
            return x;
        const int s = segment_of(x);
        const Scalar t = (x - breakpoints_(s)) / (breakpoints_(s + 1) - breakpoints_(s));
        return values_(s) + t * (values_(s + 1) - values_(s));
    }

    friend bool operator==(const PwlFunction& a, const PwlFunction& b)
    {
        return a.breakpoints_ == b.breakpoints_ && a.values_ == b.values_;
    }

private:
    Vector breakpoints_;
    Vector values_;
    bool identity_{false};
};

template <typename Scalar>
[[nodiscard]] Scalar pwl_eval(const PwlFunction<Scalar>& f, Scalar x)
{
    return f(x);
}

template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pwl_eval(const PwlFunction<Scalar>& f,
                                                                std::type_identity_t<std::span<const Scalar>> xs)
{
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
        out(Eigen::Index(i)) = f(xs[i]);
    return out;
}

/// Uniform grid of `nodes` points over [lo, hi] widened by `margin` times the
/// span on each side. A degenerate range is widened to unit span around its centre.
template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> uniform_grid(Scalar lo, Scalar hi, int nodes,
                                                                    Scalar margin = Scalar(0.01))
{
    if (nodes < 2)
        throw Error(ErrorKind::Argument, "grid needs at least 2 nodes");
    if (!(hi >= lo))
        throw Error(ErrorKind::Argument, "grid range is empty");
    Scalar span = hi - lo;
    if (span <= Scalar(1e-9) * std::max(Scalar(1), std::abs(lo) + std::abs(hi))) {
        const Scalar centre = Scalar(0.5) * (lo + hi);
        lo = centre - Scalar(0.5);
        hi = centre + Scalar(0.5);
        span = Scalar(1);
    }
    lo -= margin * span;
    hi += margin * span;
    return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::LinSpaced(nodes, lo, hi);
}

/// Uniform grid over the [trim, 1 - trim] quantile range of a signal. Trimming
/// keeps a handful of start-up samples from stretching the grid over regions
/// that hold almost no data; samples outside the grid use the end segments.
template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grid_over(std::span<const Scalar> signal, int nodes,
                                                                 Scalar margin, Scalar trim = Scalar(0))
{
    if (signal.empty())
        throw Error(ErrorKind::Argument, "cannot place a grid over an empty signal");
    if (!(trim >= Scalar(0) && trim < Scalar(0.5)))
        throw Error(ErrorKind::Argument, "grid trim fraction must lie in [0, 0.5)");
    std::vector<Scalar> sorted(signal.begin(), signal.end());
    std::sort(sorted.begin(), sorted.end());
    const double last = double(sorted.size() - 1);
    const auto lo = sorted[std::size_t(std::floor(double(trim) * last))];
    const auto hi = sorted[std::size_t(std::ceil((1.0 - double(trim)) * last))];
    return uniform_grid(lo, hi, nodes, margin);
}

/// Hat-function design matrix: row i holds the interpolation weights of
/// xs[i] on the nodes, so that f(xs) = H * values for any PWL f on the grid.
template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
hat_basis(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& breakpoints, std::type_identity_t<std::span<const Scalar>> xs)
{
    const PwlFunction<Scalar> locator(breakpoints, breakpoints);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis
        = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(Eigen::Index(xs.size()), breakpoints.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const int s = locator.segment_of(xs[i]);
        const Scalar t = (xs[i] - breakpoints(s)) / (breakpoints(s + 1) - breakpoints(s));
        basis(Eigen::Index(i), s) = Scalar(1) - t;
        basis(Eigen::Index(i), s + 1) = t;
    }
    return basis;
}

// Segments with no samples strictly inside or on their closed interval.
template <typename Scalar>
[[nodiscard]] std::vector<int> starved_segments(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& breakpoints,
                                                std::type_identity_t<std::span<const Scalar>> xs)
{
    std::vector<int> counts(std::size_t(breakpoints.size() - 1), 0);
    const PwlFunction<Scalar> locator(breakpoints, breakpoints);
    for (const Scalar x : xs)
        ++counts[std::size_t(locator.segment_of(x))];
    std::vector<int> starved;
    for (std::size_t s = 0; s < counts.size(); ++s)
        if (counts[s] == 0)
            starved.push_back(int(s));
    return starved;
}

template <typename Scalar>
[[noreturn]] void throw_starved(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& breakpoints,
                                std::type_identity_t<std::span<const Scalar>> xs)
{
    std::string detail;
    for (const int s : starved_segments(breakpoints, xs))
        detail += (detail.empty() ? "" : ", ") + std::to_string(s);
    throw Error(ErrorKind::Singularity, "piecewise-linear fit is singular; starved segments: ["
                                            + (detail.empty() ? std::string("none, samples collinear") : detail)
                                            + "]");
}

/// Node values minimizing sum (ys - f(xs))^2 over PWL functions on the given grid.
template <typename Scalar>
[[nodiscard]] PwlFunction<Scalar> pwl_fit(std::type_identity_t<std::span<const Scalar>> xs, std::type_identity_t<std::span<const Scalar>> ys,
                                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& breakpoints)
{
    if (xs.size() != ys.size())
        throw Error(ErrorKind::Argument, "pwl_fit inputs differ in length");
    if (xs.size() < std::size_t(breakpoints.size()))
        throw Error(ErrorKind::Argument, "pwl_fit needs at least as many samples as nodes");
    const auto basis = hat_basis(breakpoints, xs);
    if (is_rank_deficient(basis))
        throw_starved(breakpoints, xs);
    const Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> target(ys.data(), Eigen::Index(ys.size()));
    return PwlFunction<Scalar>(breakpoints, basis.householderQr().solve(target));
}

template <typename Scalar>
[[nodiscard]] Monotonicity is_monotonic(const PwlFunction<Scalar>& f)
{
    bool up = true;
    bool down = true;
    for (int s = 0; s < f.segments(); ++s) {
        const Scalar slope = f.slope(s);
        up = up && slope > PwlFunction<Scalar>::kFlatSlope;
        down = down && slope < -PwlFunction<Scalar>::kFlatSlope;
    }
    if (up)
        return Monotonicity::Increasing;
    if (down)
        return Monotonicity::Decreasing;
    return Monotonicity::NonMonotonic;
}

/// x with f(x) = y for strictly monotone f, end segments extended.
template <typename Scalar>
[[nodiscard]] Scalar pwl_inverse(const PwlFunction<Scalar>& f, Scalar y)
{
    const Monotonicity direction = is_monotonic(f);
    if (direction == Monotonicity::NonMonotonic)
        throw Error(ErrorKind::Argument, "cannot invert a non-monotonic piecewise-linear function");
    if (f.is_identity())
        return y;

    const auto& v = f.values();
    const int last = f.nodes() - 1;
    // Position of y among the node values, in the direction of increase.
    int s = 0;
    if (direction == Monotonicity::Increasing) {
        while (s < last - 1 && y > v(s + 1))
            ++s;
    } else {
        while (s < last - 1 && y < v(s + 1))
            ++s;
    }
    const Scalar slope = f.slope(s);
    if (std::abs(slope) < PwlFunction<Scalar>::kFlatSlope)
        throw Error(ErrorKind::Argument, "degenerate zero-slope segment " + std::to_string(s));
    return f.breakpoints()(s) + (y - v(s)) / slope;
}

template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pwl_inverse(const PwlFunction<Scalar>& f,
                                                                   std::type_identity_t<std::span<const Scalar>> ys)
{
    if (is_monotonic(f) == Monotonicity::NonMonotonic)
        throw Error(ErrorKind::Argument, "cannot invert a non-monotonic piecewise-linear function");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < ys.size(); ++i)
        out(Eigen::Index(i)) = pwl_inverse(f, ys[i]);
    return out;
}

} // namespace lagid
