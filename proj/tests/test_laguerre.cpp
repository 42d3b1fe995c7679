#include "doctest.h"

#include <cmath>
#include <vector>

#include "lagid/laguerre.hpp"

using namespace lagid;

namespace {

// Laguerre state responses from the cascade of scalar filters
// sqrt(theta) z^-1 / (1 - psi z^-1) followed by all-pass sections
// (z^-1 - psi) / (1 - psi z^-1). Entry [j][k] is l_(j+1)[k] for an impulse at k = 0.
std::vector<std::vector<double>> cascade_responses(int order, double psi, int horizon)
{
    const double root_theta = std::sqrt(1.0 - psi * psi);
    std::vector<double> x(std::size_t(horizon) + 1, 0.0);
    x[0] = 1.0;
    std::vector<std::vector<double>> out;
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t k = 1; k < x.size(); ++k)
        y[k] = psi * y[k - 1] + root_theta * x[k - 1];
    out.push_back(y);
    for (int j = 1; j < order; ++j) {
        const std::vector<double> in = out.back();
        std::vector<double> next(in.size(), 0.0);
        next[0] = -psi * in[0];
        for (std::size_t k = 1; k < in.size(); ++k)
            next[k] = psi * next[k - 1] + in[k - 1] - psi * in[k];
        out.push_back(next);
    }
    return out;
}

} // namespace

TEST_CASE("build_network: delay line at psi = 0")
{
    const auto net = build_network(3, 0.0);
    Eigen::Matrix3d phi;
    phi << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    CHECK(net.phi() == phi);
    CHECK(net.gamma() == Eigen::Vector3d(1, 0, 0));
    CHECK(net.coefficients().isZero());
    CHECK(net.state().isZero());
}

TEST_CASE("build_network: hand-evaluated entries")
{
    const auto two = build_network(2, 0.5);
    CHECK(two.theta() == doctest::Approx(0.75));
    CHECK(two.phi()(0, 0) == 0.5);
    CHECK(two.phi()(0, 1) == 0.0);
    CHECK(two.phi()(1, 0) == doctest::Approx(0.75));
    CHECK(two.phi()(1, 1) == 0.5);
    CHECK(two.gamma()(0) == doctest::Approx(0.86603).epsilon(1e-5));
    CHECK(two.gamma()(1) == doctest::Approx(-0.43301).epsilon(1e-5));

    const auto one = build_network(1, 0.9);
    CHECK(one.phi()(0, 0) == 0.9);
    CHECK(one.gamma()(0) == doctest::Approx(0.43589).epsilon(1e-5));
}

TEST_CASE("build_network: rejects invalid order and unstable psi")
{
    CHECK_THROWS_AS((void)build_network(0, 0.5), Error);
    for (const double psi : {-0.1, 1.0, 1.5, std::nan("")}) {
        try {
            (void)build_network(2, psi);
            FAIL("accepted psi = " << psi);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Stability);
        }
    }
}

TEST_CASE("phi and gamma follow the lower-triangular pattern")
{
    for (const int p : {1, 2, 5, 8}) {
        for (const double psi : {0.0, 0.3, 0.7, 0.95}) {
            const auto net = build_network(p, psi);
            const double theta = 1.0 - psi * psi;
            for (int i = 0; i < p; ++i) {
                CHECK(net.gamma()(i) == doctest::Approx(std::sqrt(theta) * std::pow(-psi, i)));
                for (int j = 0; j < p; ++j) {
                    double expected = 0.0;
                    if (i == j)
                        expected = psi;
                    else if (i > j)
                        expected = std::pow(-psi, i - j - 1) * theta;
                    CHECK(net.phi()(i, j) == doctest::Approx(expected));
                }
            }
        }
    }
}

TEST_CASE("step: examples")
{
    auto zero = build_network(3, 0.4);
    CHECK(zero.step(0.0) == 0.0);
    CHECK(zero.state().isZero());

    auto one = build_network(1, 0.5);
    one.set_coefficients(Eigen::VectorXd::Constant(1, 1.0));
    one.set_state(Eigen::VectorXd::Constant(1, 1.0));
    CHECK(one.step(0.0) == 1.0);
    CHECK(one.state()(0) == 0.5);

    auto shift = build_network(2, 0.0);
    shift.set_coefficients(Eigen::Vector2d(0, 1));
    shift.set_state(Eigen::Vector2d(1, 0));
    CHECK(shift.step(1.0) == 0.0);
    CHECK(shift.state() == Eigen::Vector2d(1, 1));
}

TEST_CASE("simulate_linear: examples")
{
    auto net = build_network(3, 0.6);
    net.set_coefficients(Eigen::Vector3d(1, -2, 0.5));
    CHECK(simulate_linear(net, std::vector<double>(20, 0.0)).isZero());
    CHECK(simulate_linear(net, std::vector<double>{}).size() == 0);

    const std::vector<double> impulse{1, 0, 0, 0, 0};
    auto delay = build_network(1, 0.0);
    delay.set_coefficients(Eigen::VectorXd::Constant(1, 1.0));
    const Eigen::VectorXd y0 = simulate_linear(delay, impulse);
    CHECK(y0 == (Eigen::VectorXd(5) << 0, 1, 0, 0, 0).finished());

    auto decay = build_network(1, 0.5);
    decay.set_coefficients(Eigen::VectorXd::Constant(1, 1.0));
    const Eigen::VectorXd y1 = simulate_linear(decay, impulse);
    CHECK(y1(0) == 0.0);
    CHECK(y1(1) == doctest::Approx(0.86603).epsilon(1e-5));
    CHECK(y1(2) == doctest::Approx(0.43301).epsilon(1e-5));
    CHECK(y1(3) == doctest::Approx(0.21651).epsilon(1e-4));
    CHECK(decay.state()(0) == doctest::Approx(std::sqrt(0.75) * std::pow(0.5, 4)));
}

TEST_CASE("impulse_response_matrix: examples")
{
    const Eigen::MatrixXd m = impulse_response_matrix(1, 0.0, 3);
    CHECK(m.col(0) == Eigen::Vector3d(1, 0, 0));

    const Eigen::MatrixXd d = impulse_response_matrix(2, 0.0, 2);
    CHECK(d.col(0).dot(d.col(1)) == 0.0);
    CHECK(d == Eigen::Matrix2d::Identity());

    CHECK_THROWS_AS((void)impulse_response_matrix(2, 0.5, 0), Error);
}

TEST_CASE("impulse responses match the scalar filter cascade")
{
    for (const int p : {1, 3, 6}) {
        for (const double psi : {0.0, 0.45, 0.8}) {
            const int horizon = 60;
            const Eigen::MatrixXd m = impulse_response_matrix(p, psi, horizon);
            const auto oracle = cascade_responses(p, psi, horizon);
            for (int j = 0; j < p; ++j)
                for (int k = 0; k < horizon; ++k)
                    CHECK(m(k, j) == doctest::Approx(oracle[std::size_t(j)][std::size_t(k) + 1]).scale(1.0));
        }
    }
}

TEST_CASE("impulse responses are orthonormal")
{
    for (const int p : {1, 2, 4, 6, 8}) {
        for (const double psi : {0.0, 0.3, 0.7, 0.9}) {
            const Eigen::MatrixXd m = impulse_response_matrix(p, psi, 10000);
            const Eigen::MatrixXd gram = m.transpose() * m;
            CHECK((gram - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("single precision network is orthonormal to float accuracy")
{
    const Eigen::MatrixXf m = impulse_response_matrix(4, 0.7f, 2000);
    const Eigen::MatrixXf gram = m.transpose() * m;
    CHECK((gram - Eigen::MatrixXf::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-4f);
}

TEST_CASE("spectral radius equals psi")
{
    // Triangular, so the eigenvalues are exactly the diagonal entries.
    for (const double psi : {0.0, 0.25, 0.7, 0.9}) {
        const auto net = build_network(5, psi);
        CHECK(net.phi().triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero());
        CHECK((net.phi().diagonal().array() == psi).all());
        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(5, 5);
        for (int i = 0; i < 400; ++i)
            power = power * net.phi();
        CHECK(power.norm() < 1e-6);
    }
}

TEST_CASE("bounded input keeps the state bounded")
{
    for (const double psi : {0.0, 0.5, 0.9, 0.99}) {
        auto net = build_network(6, psi);
        double peak = 0.0;
        for (int k = 0; k < 100000; ++k) {
            (void)net.step(((k / 37) % 2) ? 1.0 : -1.0);
            peak = std::max(peak, net.state().norm());
        }
        CHECK(std::isfinite(peak));
        // ||L|| <= ||Gamma|| / (1 - psi) summed over the geometric tail is a loose cap.
        CHECK(peak < 10.0 / (1.0 - psi));
    }
}

TEST_CASE("simulation is bitwise reproducible")
{
    std::vector<double> u(500);
    for (std::size_t k = 0; k < u.size(); ++k)
        u[k] = std::sin(0.01 * double(k * k));
    auto a = build_network(4, 0.7);
    auto b = build_network(4, 0.7);
    a.set_coefficients(Eigen::Vector4d(1, 0.6, 0.25, 0.1));
    b.set_coefficients(Eigen::Vector4d(1, 0.6, 0.25, 0.1));
    const Eigen::VectorXd ya = simulate_linear(a, u);
    const Eigen::VectorXd yb = simulate_linear(b, u);
    CHECK(ya == yb);
    CHECK(a.state() == b.state());
}

TEST_CASE("steady-state gain equals the settled step response")
{
    auto net = build_network(4, 0.7);
    net.set_coefficients(Eigen::Vector4d(1, 0.6, 0.25, 0.1));
    const Eigen::VectorXd y = simulate_linear(net, std::vector<double>(400, 1.0));
    CHECK(net.steady_state_gain() == doctest::Approx(y(399)).epsilon(1e-12));
}
