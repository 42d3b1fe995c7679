#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <type_traits>
#include <string>

#include "lagid/error.hpp"

namespace lagid {

/**
 * Discrete-time Laguerre network in state-space form
 *
 *     L[k+1] = Phi L[k] + Gamma u[k]
 *     y[k]   = c^T L[k]
 *
 * Phi is lower triangular with the scaling factor psi on the diagonal,
 * theta = 1 - psi^2 on the subdiagonal and (-psi)^(i-j-1) theta below it.
 * Gamma = sqrt(theta) [1, -psi, psi^2, ...]^T. With that normalization the
 * impulse responses of the state components are orthonormal in l2.
 */
template <typename Scalar = double>
class LaguerreNetwork {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    LaguerreNetwork() = default;

    LaguerreNetwork(int order, Scalar psi)
    {
        if (order < 1)
            throw Error(ErrorKind::Argument, "Laguerre order must be at least 1");
        if (!(psi >= Scalar(0) && psi < Scalar(1)))
            throw Error(ErrorKind::Stability,
                        "Laguerre scaling factor psi=" + std::to_string(double(psi)) + " outside [0, 1)");

        psi_ = psi;
        const Scalar theta = Scalar(1) - psi * psi;

        phi_ = Matrix::Zero(order, order);
        gamma_ = Vector::Zero(order);
        Scalar power(1); // (-psi)^n, n = i - j - 1 and n = i respectively
        const Scalar root_theta = std::sqrt(theta);
        for (int n = 0; n < order; ++n) {
            gamma_(n) = root_theta * power;
            for (int j = 0; j + n + 1 < order; ++j)
                phi_(j + n + 1, j) = power * theta;
            power *= -psi;
        }
        phi_.diagonal().setConstant(psi);

        c_ = Vector::Zero(order);
        state_ = Vector::Zero(order);
    }

    [[nodiscard]] int order() const { return int(c_.size()); }
    [[nodiscard]] Scalar psi() const { return psi_; }
    [[nodiscard]] Scalar theta() const { return Scalar(1) - psi_ * psi_; }
    [[nodiscard]] const Matrix& phi() const { return phi_; }
    [[nodiscard]] const Vector& gamma() const { return gamma_; }
    [[nodiscard]] const Vector& coefficients() const { return c_; }
    [[nodiscard]] const Vector& state() const { return state_; }

    template <typename Derived>
    void set_coefficients(const Eigen::MatrixBase<Derived>& c)
    {
        if (c.size() != order())
            throw Error(ErrorKind::Argument, "coefficient vector length does not match Laguerre order");
        c_ = c;
    }

    template <typename Derived>
    void set_state(const Eigen::MatrixBase<Derived>& state)
    {
        if (state.size() != order())
            throw Error(ErrorKind::Argument, "state vector length does not match Laguerre order");
        state_ = state;
    }

    void reset() { state_.setZero(); }

    // Advances one sample. The returned output is read from the state
    // before the update, i.e. y[k] = c^T L[k].
    Scalar step(Scalar u)
    {
        const Scalar y = c_.dot(state_);
        state_ = phi_ * state_ + gamma_ * u;
        return y;
    }

    // c^T (I - Phi)^{-1} Gamma
    [[nodiscard]] Scalar steady_state_gain() const
    {
        const Matrix i_minus_phi = Matrix::Identity(order(), order()) - phi_;
        const Vector dc_state = i_minus_phi.template triangularView<Eigen::Lower>().solve(gamma_);
        return c_.dot(dc_state);
    }

    friend bool operator==(const LaguerreNetwork& a, const LaguerreNetwork& b)
    {
        return a.psi_ == b.psi_ && a.phi_ == b.phi_ && a.gamma_ == b.gamma_ && a.c_ == b.c_
               && a.state_ == b.state_;
    }

private:
    Scalar psi_{0};
    Matrix phi_;
    Vector gamma_;
    Vector c_;
    Vector state_;
};

template <typename Scalar>
[[nodiscard]] LaguerreNetwork<Scalar> build_network(int order, Scalar psi)
{
    return LaguerreNetwork<Scalar>(order, psi);
}

// Runs the network from its stored state over the whole input, leaving the
// final state in `net`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> simulate_linear(LaguerreNetwork<Scalar>& net,
                                                         std::type_identity_t<std::span<const Scalar>> u)
{
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(static_cast<Eigen::Index>(u.size()));
    for (std::size_t k = 0; k < u.size(); ++k)
        y(Eigen::Index(k)) = net.step(u[k]);
    return y;
}

// Regressor matrix of pre-update states: row k holds L[k]^T for the network
// driven by u from a zero initial state, so that y = R c.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> state_regressors(const LaguerreNetwork<Scalar>& net,
                                                                       std::type_identity_t<std::span<const Scalar>> u)
{
    const Eigen::Index n = static_cast<Eigen::Index>(u.size());
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rows(n, net.order());
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> state = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(net.order());
    for (Eigen::Index k = 0; k < n; ++k) {
        rows.row(k) = state.transpose();
        state = net.phi() * state + net.gamma() * u[std::size_t(k)];
    }
    return rows;
}

// Column j is the trajectory of l_j[1..horizon] after a unit impulse at k = 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> impulse_response_matrix(int order, Scalar psi, int horizon)
{
    if (horizon < 1)
        throw Error(ErrorKind::Argument, "impulse response horizon must be at least 1");
    const LaguerreNetwork<Scalar> net(order, psi);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> responses(horizon, order);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> state = net.gamma();
    for (int k = 0; k < horizon; ++k) {
        responses.row(k) = state.transpose();
        state = net.phi() * state;
    }
    return responses;
}

} // namespace lagid
