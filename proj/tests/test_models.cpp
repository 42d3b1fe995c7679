#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lagid/models.hpp"
#include "lagid/plantlab.hpp"
#include "support.hpp"

using namespace lagid;
using test::random_model;
using test::view;

namespace {

Pwl line(double lo, double hi, int nodes, double slope, double offset)
{
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(nodes, lo, hi);
    return Pwl(b, (slope * b.array() + offset).matrix());
}

LaguerreNetwork<double> laguerre(double psi, Eigen::VectorXd c)
{
    LaguerreNetwork<double> net(int(c.size()), psi);
    net.set_coefficients(c);
    return net;
}

Dataset reference_record(double sigma, std::uint64_t seed = 1)
{
    const ReferencePlant plant = make_reference_plant(42);
    const auto u = generate_excitation(ExcitationKind::PrbsSteps, 2000, plant.input_min, plant.input_max, seed, 50);
    return run_experiment(plant, u, sigma, seed + 1000);
}

} // namespace

TEST_CASE("simulate: identity maps reduce to the bare linear block")
{
    Rng rng(1);
    std::vector<double> u(300);
    for (double& x : u)
        x = rng.uniform(-2.0, 2.0);
    auto net = laguerre(0.6, Eigen::Vector3d(1.0, -0.4, 0.2));
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, -3.0, 3.0);
    const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(5, -9.0, 9.0);
    const BlockModel hw{Structure::HammersteinWiener, Pwl::identity(b), net, Pwl::identity(w)};
    const Eigen::VectorXd bare = simulate_linear(net, u);
    CHECK(simulate(hw, u) == bare);

    // Identity by values rather than by construction: still exact.
    const BlockModel spelled{Structure::HammersteinWiener, Pwl(b, b), net, Pwl(w, w)};
    CHECK(test::max_abs_diff(simulate(spelled, u), bare) < 1e-12);
}

TEST_CASE("simulate: doubling input map equals doubled input")
{
    std::vector<double> u(200);
    std::vector<double> doubled(200);
    for (std::size_t k = 0; k < u.size(); ++k) {
        u[k] = std::sin(0.05 * double(k)) + 0.3;
        doubled[k] = 2.0 * u[k];
    }
    ArxModel arx;
    arx.a = Eigen::Vector2d(0.5, -0.1);
    arx.b = Eigen::Vector2d(1.0, 0.4);
    for (const LinearBlock& linear : {LinearBlock(laguerre(0.5, Eigen::Vector2d(1.0, 0.3))), LinearBlock(arx)}) {
        const BlockModel ham{Structure::Hammerstein, line(-1.0, 1.0, 3, 2.0, 0.0), linear, std::nullopt};
        const Eigen::VectorXd expected = simulate_linear(linear, doubled);
        CHECK(test::max_abs_diff(simulate(ham, u), expected) < 1e-12);
    }
}

TEST_CASE("simulate: shifted output map on zero input")
{
    const BlockModel wiener{Structure::Wiener, std::nullopt, laguerre(0.3, Eigen::Vector2d(1.0, 2.0)),
                            line(-1.0, 1.0, 4, 1.0, 1.0)};
    const Eigen::VectorXd y = simulate(wiener, std::vector<double>(50, 0.0));
    CHECK((y.array() == 1.0).all());
}

TEST_CASE("validate rejects maps that contradict the structure tag")
{
    const auto net = laguerre(0.5, Eigen::Vector2d(1.0, 0.0));
    const Pwl map = line(0.0, 1.0, 3, 1.0, 0.0);
    CHECK_THROWS_AS((void)(BlockModel{Structure::Hammerstein, std::nullopt, net, std::nullopt}.validate()), Error);
    CHECK_THROWS_AS((void)(BlockModel{Structure::Hammerstein, map, net, map}.validate()), Error);
    CHECK_THROWS_AS((void)(BlockModel{Structure::Wiener, map, net, std::nullopt}.validate()), Error);
    CHECK_THROWS_AS((void)(BlockModel{Structure::HammersteinWiener, map, net, std::nullopt}.validate()), Error);
    CHECK_THROWS_AS((void)(BlockModel{Structure::Linear, map, net, std::nullopt}.validate()), Error);
    CHECK_NOTHROW((void)(BlockModel{Structure::HammersteinWiener, map, net, map}.validate()));
}

TEST_CASE("normalize_model: examples")
{
    auto net = laguerre(0.5, Eigen::Vector2d(1.0, 0.5));
    net.set_coefficients(net.coefficients() * (2.0 / net.steady_state_gain()));
    const BlockModel ham{Structure::Hammerstein, line(0.0, 4.0, 5, 1.0, 0.0), net, std::nullopt};
    const BlockModel norm = normalize_model(ham);
    CHECK(steady_state_gain(norm.linear) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm.normalized);
    for (int s = 0; s < norm.input_nl->segments(); ++s)
        CHECK(norm.input_nl->slope(s) == doctest::Approx(2.0));
    std::vector<double> u(100);
    for (std::size_t k = 0; k < u.size(); ++k)
        u[k] = 2.0 + std::cos(0.3 * double(k));
    CHECK(test::max_abs_diff(simulate(ham, u), simulate(norm, u)) < 1e-9);

    const BlockModel again = normalize_model(norm);
    CHECK(test::max_abs_diff(again.input_nl->values(), norm.input_nl->values()) < 1e-12);
    CHECK(steady_state_gain(again.linear) == doctest::Approx(1.0).epsilon(1e-12));

    const BlockModel dead{Structure::Hammerstein, line(0.0, 4.0, 5, 1.0, 0.0),
                          laguerre(0.5, Eigen::Vector2d::Zero()), std::nullopt};
    try {
        (void)normalize_model(dead);
        FAIL("zero gain normalized");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Normalization);
    }
}

TEST_CASE("normalization preserves the input-output map")
{
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const BlockModel model = random_model(rng);
        std::vector<double> u(500);
        for (double& x : u)
            x = rng.uniform(-1.2, 1.2);
        const BlockModel norm = normalize_model(model);
        CHECK(steady_state_gain(norm.linear) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(test::max_abs_diff(simulate(model, u), simulate(norm, u)) < 1e-9);
    }
}

TEST_CASE("identify_hammerstein: noiseless round trip")
{
    const auto rt = test::round_trip_case(Structure::Hammerstein, LinearKind::Laguerre);
    const IdentResult result = identify_hammerstein(rt.data, rt.cfg);
    CHECK(result.mse < 1e-8);
    CHECK(result.model.normalized);
    const BlockModel truth = normalize_model(rt.truth);
    CHECK(test::node_error(*result.model.input_nl, *truth.input_nl) < 1e-6);
    CHECK(std::get<LaguerreNetwork<double>>(result.model.linear).psi() == 0.6);
}

TEST_CASE("identify_hammerstein: linear plant gives an affine input map")
{
    const auto u = generate_excitation(ExcitationKind::PrbsSteps, 2000, 8.0, 16.0, 3, 50);
    auto net = laguerre(0.6, Eigen::Vector3d(0.5, 0.2, -0.1));
    const Dataset data = test::dataset_of(u, simulate_linear(net, u));
    IdentConfig cfg;
    cfg.structure = Structure::Hammerstein;
    const IdentResult result = identify_hammerstein(data, cfg);
    const Pwl& map = *result.model.input_nl;
    for (int s = 1; s < map.segments(); ++s)
        CHECK(std::abs(map.slope(s) - map.slope(0)) < 1e-6);
}

TEST_CASE("identify_hammerstein: silent output")
{
    const auto u = generate_excitation(ExcitationKind::PrbsSteps, 1000, 8.0, 16.0, 3, 50);
    Dataset data;
    data.u = u;
    data.y.assign(u.size(), 0.0);
    IdentConfig cfg;
    cfg.structure = Structure::Hammerstein;
    const IdentResult result = identify_hammerstein(data, cfg);
    CHECK(std::get<LaguerreNetwork<double>>(result.model.linear).coefficients().isZero());
    CHECK(result.model.input_nl->values() == result.model.input_nl->breakpoints());
    CHECK(std::find(result.model.warnings.begin(), result.model.warnings.end(), "zero_gain")
          != result.model.warnings.end());
    CHECK(result.mse == 0.0);
}

TEST_CASE("overparameterized Hammerstein estimate agrees with the alternation")
{
    const auto rt = test::round_trip_case(Structure::Hammerstein, LinearKind::Laguerre);
    const IdentConfig defaults;
    const Eigen::VectorXd grid = grid_over<double>(rt.data.input(), defaults.input_nodes, defaults.grid_margin,
                                                   defaults.grid_trim);
    const BlockModel oracle = identify_hammerstein_overparameterized(rt.data, 4, 0.6, grid);
    const BlockModel truth = normalize_model(rt.truth);
    CHECK(test::node_error(*oracle.input_nl, *truth.input_nl) < 1e-6);
    const IdentResult als = identify_hammerstein(rt.data, rt.cfg);
    CHECK(test::max_abs_diff(simulate(oracle, rt.data.u), simulate(als.model, rt.data.u)) < 1e-4);
}

TEST_CASE("identify_wiener: noiseless round trip")
{
    const auto rt = test::round_trip_case(Structure::Wiener, LinearKind::Laguerre);
    const IdentResult result = identify_wiener(rt.data, rt.cfg);
    CHECK(result.mse < 1e-8);
    CHECK(test::node_error(*result.model.output_nl, *normalize_model(rt.truth).output_nl) < 1e-4);
}

TEST_CASE("identify_wiener: frozen identity output map is plain Laguerre identification")
{
    const auto u = generate_excitation(ExcitationKind::PrbsSteps, 2000, 8.0, 16.0, 5, 50);
    Rng rng(6);
    Eigen::VectorXd y = simulate_linear(laguerre(0.45, Eigen::Vector3d(2.0, 0.4, -0.3)), u);
    for (Eigen::Index k = 0; k < y.size(); ++k)
        y(k) += 0.05 * rng.gaussian();
    const Dataset data = test::dataset_of(u, y);
    IdentConfig cfg;
    cfg.structure = Structure::Wiener;
    cfg.freeze_output_nl = true;
    const IdentResult result = identify_wiener(data, cfg);
    const PsiSelection direct = select_psi(u, view(y), cfg.laguerre_order, cfg.psi_grid, cfg.rls);
    const auto& net = std::get<LaguerreNetwork<double>>(result.model.linear);
    CHECK(net.psi() == direct.psi);
    LaguerreNetwork<double> plain(cfg.laguerre_order, direct.psi);
    plain.set_coefficients(direct.c);
    CHECK(test::max_abs_diff(simulate(result.model, u), simulate_linear(plain, u)) < 1e-9);
}

TEST_CASE("identify_wiener: heavy noise on the reference plant")
{
    const Dataset noisy = reference_record(5.0);
    IdentConfig cfg;
    cfg.structure = Structure::Wiener;
    try {
        const IdentResult wiener = identify_wiener(noisy, cfg);
        cfg.structure = Structure::HammersteinWiener;
        const IdentResult hw = identify_hw(noisy, cfg);
        CHECK(wiener.mse > hw.mse);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Sensitivity);
        REQUIRE(e.location().has_value());
        CHECK(*e.location() >= 1);
    }
}

TEST_CASE("identify_hw: noiseless round trips")
{
    for (const LinearKind kind : {LinearKind::Laguerre, LinearKind::Arx}) {
        CAPTURE(to_string(kind));
        const auto rt = test::round_trip_case(Structure::HammersteinWiener, kind);
        const IdentResult result = identify_hw(rt.data, rt.cfg);
        CHECK(result.mse < 1e-8);
        const BlockModel truth = normalize_model(rt.truth);
        CHECK(test::node_error(*result.model.input_nl, *truth.input_nl) < 1e-4);
        CHECK(test::node_error(*result.model.output_nl, *truth.output_nl) < 1e-4);
    }
}

TEST_CASE("identify_hw: beats the single-sided structures on the reference plant")
{
    const Dataset data = reference_record(0.01);
    IdentConfig cfg;
    cfg.structure = Structure::HammersteinWiener;
    const double hw = identify(data, cfg).mse;
    cfg.structure = Structure::Hammerstein;
    const double ham = identify(data, cfg).mse;
    cfg.structure = Structure::Wiener;
    const double wiener = identify(data, cfg).mse;
    CHECK(hw < ham);
    CHECK(hw < wiener);
}

TEST_CASE("identify_hw: identity maps in the truth reduce to linear identification")
{
    const auto u = generate_excitation(ExcitationKind::PrbsSteps, 2000, 8.0, 16.0, 9, 50);
    const auto net = laguerre(0.6, Eigen::Vector4d(0.6, 0.3, -0.1, 0.05));
    const Dataset data = test::dataset_of(u, simulate_linear(net, u));
    IdentConfig cfg;
    cfg.structure = Structure::Linear;
    const IdentResult linear = identify(data, cfg);
    cfg.structure = Structure::HammersteinWiener;
    const IdentResult hw = identify(data, cfg);
    CHECK(test::max_abs_diff(simulate(hw.model, u), simulate(linear.model, u)) < 1e-6);
}

TEST_CASE("identify_hw: ARX variant degrades under heavy noise")
{
    const ReferencePlant plant = make_reference_plant(42);
    IdentConfig cfg;
    cfg.structure = Structure::HammersteinWiener;
    cfg.linear_kind = LinearKind::Arx;
    const auto truth_error = [&](double sigma) {
        const Dataset data = reference_record(sigma);
        const IdentResult r = identify(data, cfg);
        const Eigen::VectorXd clean = simulate(plant.truth, data.u);
        return (simulate(r.model, data.u) - clean).squaredNorm() / double(clean.size());
    };
    const double low = truth_error(0.01);
    double high = 0.0;
    try {
        high = truth_error(5.0);
    } catch (const Error&) {
        high = std::numeric_limits<double>::infinity();
    }
    CHECK(high > 2.0 * low);
}

TEST_CASE("reported MSE is the best iterate")
{
    const Dataset data = reference_record(0.5);
    for (const Structure s : {Structure::Hammerstein, Structure::Wiener, Structure::HammersteinWiener}) {
        IdentConfig cfg;
        cfg.structure = s;
        const IdentResult r = identify(data, cfg);
        REQUIRE(!r.mse_history.empty());
        CHECK(int(r.mse_history.size()) == r.iterations);
        const double best = *std::min_element(r.mse_history.begin(), r.mse_history.end());
        CHECK(r.mse == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("alternation does not increase the error on noiseless data")
{
    const auto rt = test::round_trip_case(Structure::Hammerstein, LinearKind::Laguerre);
    const IdentResult r = identify_hammerstein(rt.data, rt.cfg);
    // Once the error reaches the roundoff level of the recursion it only jitters.
    for (std::size_t i = 1; i < r.mse_history.size(); ++i)
        CHECK(r.mse_history[i] <= r.mse_history[i - 1] * (1.0 + 1e-9) + 1e-15);
}

TEST_CASE("identification rejects short records and bad settings")
{
    const auto rt = test::round_trip_case(Structure::Hammerstein, LinearKind::Laguerre);
    Dataset shortened = rt.data;
    shortened.u.resize(100);
    shortened.y.resize(100);
    CHECK_THROWS_AS((void)identify(shortened, rt.cfg), Error);

    IdentConfig bad = rt.cfg;
    bad.input_nodes = 1;
    CHECK_THROWS_AS((void)identify(rt.data, bad), Error);
    bad = rt.cfg;
    bad.psi_grid = {1.2};
    CHECK_THROWS_AS((void)identify(rt.data, bad), Error);
}
