#pragma once

#include <Eigen/Dense>

#include <string>

#include "lagid/error.hpp"

namespace lagid {

// Relative singular-value threshold below which a regressor matrix counts as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

template <typename Derived>
[[nodiscard]] bool is_rank_deficient(const Eigen::MatrixBase<Derived>& regressors,
                                     double tolerance = kRankTolerance)
{
    using Scalar = typename Derived::Scalar;
    if (regressors.rows() < regressors.cols())
        return true;
    const Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(regressors);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(0) > Scalar(0)))
        return true;
    return sv(sv.size() - 1) < Scalar(tolerance) * sv(0);
}

// argmin_theta |y - R theta|^2 via Householder QR. Rank-deficient R is an
// error rather than a silent minimum-norm solution.
template <typename DerivedR, typename DerivedY>
[[nodiscard]] Eigen::Matrix<typename DerivedR::Scalar, Eigen::Dynamic, 1>
batch_least_squares(const Eigen::MatrixBase<DerivedR>& regressors, const Eigen::MatrixBase<DerivedY>& y)
{
    if (regressors.rows() != y.size())
        throw Error(ErrorKind::Argument, "regressor rows and observation count differ");
    if (regressors.cols() < 1)
        throw Error(ErrorKind::Argument, "least squares needs at least one regressor column");
    if (regressors.rows() < regressors.cols())
        throw Error(ErrorKind::Singularity, "fewer observations (" + std::to_string(regressors.rows())
                                                + ") than parameters (" + std::to_string(regressors.cols()) + ")");
    if (is_rank_deficient(regressors))
        throw Error(ErrorKind::Singularity, "regressor matrix is rank deficient");
    return regressors.householderQr().solve(y);
}

} // namespace lagid
