#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lagid/models.hpp"
#include "lagid/plantlab.hpp"

namespace lagid::test {

inline std::span<const double> view(const Eigen::VectorXd& v)
{
    return {v.data(), std::size_t(v.size())};
}

inline Dataset dataset_of(std::vector<double> u, const Eigen::VectorXd& y)
{
    Dataset d;
    d.u = std::move(u);
    d.y.assign(y.data(), y.data() + y.size());
    return d;
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

// Random model of a random structure with monotone maps on [-1, 1] and [-3, 3].
inline BlockModel random_model(Rng& rng)
{
    const auto structure = Structure(1 + rng.next() % 3);
    LinearBlock linear;
    if (rng.next() % 3 == 0) {
        ArxModel arx;
        arx.na = 2;
        arx.nb = 2;
        arx.delay = 1;
        const double r = rng.uniform(0.2, 0.8);
        arx.a = Eigen::Vector2d(2.0 * r * std::cos(0.3), -r * r);
        arx.b = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(0.2, 1.0));
        linear = arx;
    } else {
        const int p = 1 + int(rng.next() % 6);
        Eigen::VectorXd c(p);
        for (int i = 0; i < p; ++i)
            c(i) = rng.uniform(-1.0, 1.0);
        c(0) += c(0) < 0 ? -0.5 : 0.5;
        LaguerreNetwork<double> net(p, rng.uniform(0.0, 0.95));
        net.set_coefficients(c);
        linear = net;
    }
    const auto random_map = [&](double lo, double hi) {
        const int n = 2 + int(rng.next() % 8);
        Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, lo, hi);
        Eigen::VectorXd v(n);
        v(0) = rng.uniform(-2.0, 2.0);
        for (int i = 1; i < n; ++i)
            v(i) = v(i - 1) + rng.uniform(0.1, 2.0);
        return Pwl(b, v);
    };
    BlockModel m{structure, std::nullopt, linear, std::nullopt};
    if (structure != Structure::Wiener)
        m.input_nl = random_map(-1.0, 1.0);
    if (structure != Structure::Hammerstein)
        m.output_nl = random_map(-3.0, 3.0);
    return m;
}

// Random strictly monotone map with 2 to 10 nodes.
inline Pwl random_monotone(Rng& rng, bool increasing)
{
    const int n = 2 + int(rng.next() % 9);
    Eigen::VectorXd b(n);
    Eigen::VectorXd v(n);
    b(0) = rng.uniform(-10.0, 10.0);
    v(0) = rng.uniform(-10.0, 10.0);
    for (int i = 1; i < n; ++i) {
        b(i) = b(i - 1) + rng.uniform(0.05, 3.0);
        const double rise = rng.uniform(0.01, 5.0);
        v(i) = v(i - 1) + (increasing ? rise : -rise);
    }
    return Pwl(b, v);
}

// Ground truth for a noiseless round trip. The maps live on the grids the
// identification itself places (default node counts, trim and margin), the
// linear block has unit DC gain and a Hammerstein-Wiener input map has its end
// nodes on the diagonal, so the truth is already in the identified convention.
struct RoundTripCase {
    BlockModel truth;
    Dataset data;
    IdentConfig cfg;
};

inline RoundTripCase round_trip_case(Structure structure, LinearKind kind, std::uint64_t seed = 7)
{
    const IdentConfig defaults;
    const std::vector<double> u = generate_excitation(ExcitationKind::PrbsSteps, 2000, 8.0, 16.0, seed, 50);

    LinearBlock linear;
    if (kind == LinearKind::Laguerre) {
        LaguerreNetwork<double> net(4, 0.6);
        Eigen::Vector4d c(1.0, 0.5, -0.2, 0.1);
        net.set_coefficients(c);
        net.set_coefficients(c / net.steady_state_gain());
        linear = net;
    } else {
        ArxModel arx;
        arx.a = Eigen::Vector2d(1.2, -0.36);
        arx.b = Eigen::Vector2d(0.1, 0.06);
        arx.b /= arx.steady_state_gain();
        linear = arx;
    }

    const Eigen::VectorXd gi = grid_over<double>(u, defaults.input_nodes, defaults.grid_margin, defaults.grid_trim);
    const Eigen::Index n = gi.size();
    Eigen::VectorXd vi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = double(i) / double(n - 1);
        vi(i) = gi(0) + (gi(n - 1) - gi(0)) * (0.7 * t * t * (3.0 - 2.0 * t) + 0.3 * t);
    }
    const bool has_input = structure == Structure::Hammerstein || structure == Structure::HammersteinWiener;
    const bool has_output = structure == Structure::Wiener || structure == Structure::HammersteinWiener;

    BlockModel truth{structure, std::nullopt, linear, std::nullopt};
    if (has_input)
        truth.input_nl = Pwl(gi, vi);
    if (has_output) {
        const BlockModel front{has_input ? Structure::Hammerstein : Structure::Linear, truth.input_nl, linear,
                               std::nullopt};
        const Eigen::VectorXd w = simulate(front, u);
        const Eigen::VectorXd go = grid_over<double>(view(w), defaults.output_nodes, defaults.grid_margin,
                                                     defaults.grid_trim);
        Eigen::VectorXd vo(go.size());
        for (Eigen::Index i = 0; i < go.size(); ++i) {
            const double t = double(i) / double(go.size() - 1);
            vo(i) = 40.0 + 50.0 * (1.0 - std::exp(-2.0 * t)) / (1.0 - std::exp(-2.0));
        }
        truth.output_nl = Pwl(go, vo);
    }

    RoundTripCase rt;
    rt.truth = truth;
    rt.data = dataset_of(u, simulate(truth, u));
    rt.cfg.structure = structure;
    rt.cfg.linear_kind = kind;
    return rt;
}

// Largest node discrepancy between two maps on the same number of nodes.
inline double node_error(const Pwl& a, const Pwl& b)
{
    return std::max(max_abs_diff(a.breakpoints(), b.breakpoints()), max_abs_diff(a.values(), b.values()));
}

} // namespace lagid::test
