#pragma once

#include <Eigen/Dense>

#include "lagid/error.hpp"

namespace lagid {

// Covariance-form exponentially weighted recursive least squares.
template <typename Scalar = double>
struct RlsState {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vector theta;
    Matrix covariance;
    Scalar lambda{1};
    long count{0};

    [[nodiscard]] int size() const { return int(theta.size()); }
};

template <typename Scalar>
[[nodiscard]] RlsState<Scalar> rls_init(int n, Scalar delta, Scalar lambda)
{
    if (n < 1)
        throw Error(ErrorKind::Argument, "RLS parameter count must be at least 1");
    if (!(delta > Scalar(0)))
        throw Error(ErrorKind::Argument, "RLS initial covariance scale must be positive");
    if (!(lambda > Scalar(0) && lambda <= Scalar(1)))
        throw Error(ErrorKind::Argument, "RLS forgetting factor must lie in (0, 1]");

    RlsState<Scalar> state;
    state.theta = RlsState<Scalar>::Vector::Zero(n);
    state.covariance = delta * RlsState<Scalar>::Matrix::Identity(n, n);
    state.lambda = lambda;
    return state;
}

// One update in place; returns the a-priori error y - phi^T theta_old.
template <typename Scalar, typename Derived>
Scalar rls_update(RlsState<Scalar>& state, const Eigen::MatrixBase<Derived>& regressor, Scalar y)
{
    if (regressor.size() != state.size())
        throw Error(ErrorKind::Argument, "RLS regressor length does not match parameter count");

    const Scalar error = y - regressor.dot(state.theta);
    ++state.count;
    if (regressor.isZero(Scalar(0)))
        return error;

    const typename RlsState<Scalar>::Vector p_phi = state.covariance * regressor;
    const Scalar denominator = state.lambda + regressor.dot(p_phi);
    if (!(denominator > Scalar(0)))
        throw Error(ErrorKind::NumericalBreakdown, "RLS covariance lost positive definiteness");

    const typename RlsState<Scalar>::Vector gain = p_phi / denominator;
    state.theta += gain * error;
    state.covariance -= gain * p_phi.transpose();
    state.covariance /= state.lambda;
    state.covariance = (Scalar(0.5) * (state.covariance + state.covariance.transpose())).eval();
    return error;
}

} // namespace lagid
