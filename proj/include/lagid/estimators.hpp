#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "lagid/dataset.hpp"
#include "lagid/least_squares.hpp"
#include "lagid/rls.hpp"

namespace lagid {

struct RlsSettings {
    double lambda{0.999};
    double delta{1e4};
    // Coefficient snapshots are taken every `checkpoint_stride` samples and
    // the one with the lowest full-record MSE is kept (the final estimate wins ties).
    int checkpoint_stride{100};
};

struct RlsFit {
    Eigen::VectorXd theta;
    Eigen::VectorXd error_trace; // a-priori prediction errors, one per sample
    double mse{0.0};             // of the selected snapshot over the whole record
    long selected_sample{0};     // number of updates behind the selected snapshot
};

// Streams (row k of `regressors`, y[k]) through RLS and applies snapshot selection.
[[nodiscard]] RlsFit rls_fit(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& y,
                             const RlsSettings& settings);

struct LaguerreFit {
    Eigen::VectorXd c;
    Eigen::VectorXd error_trace;
    double mse{0.0};
};

[[nodiscard]] LaguerreFit rls_identify_laguerre(std::span<const double> u, std::span<const double> y, int order,
                                                double psi, const RlsSettings& settings = {});
[[nodiscard]] LaguerreFit rls_identify_laguerre(const Dataset& data, int order, double psi,
                                                const RlsSettings& settings = {});

/// y[k] = sum_i a[i] y[k-i] + sum_j b[j] u[k-delay-j+1], i, j starting at 1.
struct ArxModel {
    int na{2};
    int nb{2};
    int delay{1};
    Eigen::VectorXd a;
    Eigen::VectorXd b;

    void validate() const;
    [[nodiscard]] double steady_state_gain() const;

    friend bool operator==(const ArxModel& l, const ArxModel& r)
    {
        return l.na == r.na && l.nb == r.nb && l.delay == r.delay && l.a == r.a && l.b == r.b;
    }
};

// Equation-error regressors built from measured y; rows with incomplete
// history are skipped, the first kept row corresponds to sample `first_row`.
struct ArxRegression {
    Eigen::MatrixXd regressors;
    Eigen::VectorXd target;
    long first_row{0};
};

[[nodiscard]] ArxRegression arx_regression(std::span<const double> u, std::span<const double> y, int na, int nb,
                                           int delay);

[[nodiscard]] ArxModel fit_arx(std::span<const double> u, std::span<const double> y, int na, int nb, int delay);
[[nodiscard]] ArxModel fit_arx(const Dataset& data, int na, int nb, int delay);

// Output-error simulation from zero initial conditions.
[[nodiscard]] Eigen::VectorXd simulate_arx(const ArxModel& model, std::span<const double> u);

struct PsiSelection {
    double psi{0.0};
    Eigen::VectorXd c;
    double mse{0.0};
    // Per grid point, empty where the estimator failed.
    std::vector<std::optional<double>> grid_mse;
};

[[nodiscard]] std::vector<double> default_psi_grid();

[[nodiscard]] PsiSelection select_psi(std::span<const double> u, std::span<const double> y, int order,
                                      std::span<const double> psi_grid, const RlsSettings& settings = {},
                                      bool parallel = true);
[[nodiscard]] PsiSelection select_psi(const Dataset& data, int order, std::span<const double> psi_grid,
                                      const RlsSettings& settings = {}, bool parallel = true);

} // namespace lagid
