#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lagid/dataset.hpp"
#include "lagid/estimators.hpp"
#include "lagid/laguerre.hpp"
#include "lagid/pwl.hpp"

namespace lagid {

enum class Structure { Linear, Hammerstein, Wiener, HammersteinWiener };
enum class LinearKind { Laguerre, Arx };

[[nodiscard]] const char* to_string(Structure s) noexcept;
[[nodiscard]] const char* to_string(LinearKind k) noexcept;
[[nodiscard]] Structure parse_structure(const std::string& tag);
[[nodiscard]] LinearKind parse_linear_kind(const std::string& tag);

using Pwl = PwlFunction<double>;
using LinearBlock = std::variant<LaguerreNetwork<double>, ArxModel>;

[[nodiscard]] LinearKind kind_of(const LinearBlock& block);
[[nodiscard]] Eigen::VectorXd simulate_linear(const LinearBlock& block, std::span<const double> u);
[[nodiscard]] double steady_state_gain(const LinearBlock& block);
[[nodiscard]] LinearBlock scaled(const LinearBlock& block, double factor);
[[nodiscard]] int parameter_count(const LinearBlock& block);

/// Block-oriented model: optional input map, linear dynamics, optional output map.
struct BlockModel {
    Structure structure{Structure::Linear};
    std::optional<Pwl> input_nl;
    LinearBlock linear;
    std::optional<Pwl> output_nl;
    bool normalized{false};
    std::vector<std::string> warnings;

    // Throws Argument errors when the present maps do not match the structure tag.
    void validate() const;
};

[[nodiscard]] Eigen::VectorXd simulate(const BlockModel& model, std::span<const double> u);

// Rescales the linear block to unit steady-state gain and moves the removed
// gain into the input map (Hammerstein) or the output breakpoints (Wiener, HW)
// so the input-output map is unchanged. Linear-only models are returned as is.
[[nodiscard]] BlockModel normalize_model(const BlockModel& model);

struct IdentConfig {
    Structure structure{Structure::HammersteinWiener};
    LinearKind linear_kind{LinearKind::Laguerre};
    int laguerre_order{4};
    std::vector<double> psi_grid{default_psi_grid()};
    int arx_na{2};
    int arx_nb{2};
    int arx_delay{1};
    int input_nodes{8};
    int output_nodes{8};
    double grid_margin{0.01};
    // Quantile trimmed from each end of a signal before placing its grid.
    double grid_trim{0.01};
    RlsSettings rls{};
    double tol{1e-6};
    int max_iters{50};
    // Joint Levenberg-Marquardt steps after the alternation (Hammerstein-Wiener only).
    int refine_iters{20};
    bool freeze_input_nl{false};
    bool freeze_output_nl{false};
    // Zero selects 10x the total parameter count.
    int min_samples{0};
    bool parallel{true};

    [[nodiscard]] int parameter_count() const;
    void validate() const;
};

struct IdentResult {
    BlockModel model;
    double mse{0.0};
    int iterations{0};
    bool converged{false};
    std::vector<double> mse_history;
};

[[nodiscard]] IdentResult identify_linear(const Dataset& data, const IdentConfig& cfg);
[[nodiscard]] IdentResult identify_hammerstein(const Dataset& data, const IdentConfig& cfg);
[[nodiscard]] IdentResult identify_wiener(const Dataset& data, const IdentConfig& cfg);
[[nodiscard]] IdentResult identify_hw(const Dataset& data, const IdentConfig& cfg);
// Dispatches on cfg.structure.
[[nodiscard]] IdentResult identify(const Dataset& data, const IdentConfig& cfg);

// Hammerstein estimate through the over-parameterized regression
// y[k] = sum_ij theta_ij (Laguerre state i driven by hat j) and a rank-one
// factorization theta = c alpha^T. Returns the normalized model.
[[nodiscard]] BlockModel identify_hammerstein_overparameterized(const Dataset& data, int order, double psi,
                                                                const Eigen::VectorXd& input_grid);

} // namespace lagid
