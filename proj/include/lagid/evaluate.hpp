#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lagid/error.hpp"

namespace lagid {

// (1/N) sum (y_i - yhat_i)^2
template <typename DerivedA, typename DerivedB>
[[nodiscard]] typename DerivedA::Scalar mse(const Eigen::MatrixBase<DerivedA>& y,
                                            const Eigen::MatrixBase<DerivedB>& yhat)
{
    if (y.size() != yhat.size())
        throw Error(ErrorKind::Argument, "mse: sequences differ in length");
    if (y.size() == 0)
        throw Error(ErrorKind::Argument, "mse: empty sequences");
    return (y - yhat).squaredNorm() / typename DerivedA::Scalar(y.size());
}

[[nodiscard]] inline double mse(std::span<const double> y, std::span<const double> yhat)
{
    return mse(Eigen::Map<const Eigen::VectorXd>(y.data(), Eigen::Index(y.size())),
               Eigen::Map<const Eigen::VectorXd>(yhat.data(), Eigen::Index(yhat.size())));
}

// Population standard deviation (divides by the count).
[[nodiscard]] double dispersion(std::span<const double> values);

enum class DivergenceReason { None, Overflow, NonFinite, Ratio };

[[nodiscard]] const char* to_string(DivergenceReason reason) noexcept;

struct StabilityVerdict {
    bool stable{true};
    DivergenceReason reason{DivergenceReason::None};
};

inline constexpr double kOverflowBound = 1e6;
inline constexpr double kRatioBound = 100.0;

// Unstable when any |e| exceeds 1e6, any value is non-finite, or the MSE of
// the terminal 10% window exceeds 100 * max(baseline, 1e-12).
[[nodiscard]] StabilityVerdict detect_divergence(std::span<const double> error_trace, double baseline);

// Model families of the robustness table.
enum class Family { Hammerstein, Wiener, HwLaguerre, HwArx };

[[nodiscard]] const char* to_string(Family family) noexcept;
[[nodiscard]] Family parse_family(const std::string& tag);
[[nodiscard]] std::vector<Family> all_families();

struct SweepCell {
    Family family{Family::HwLaguerre};
    double sigma{0.0};
    double mse{0.0};       // held-out excitation, against the noiseless plant output
    double mse_ident{0.0}; // identification record, against its noisy output
    bool stable{true};
    std::string reason; // sensitivity | divergence | singularity when unstable
    std::string detail;
    int iterations{0};
    double wall_time_s{0.0};
};

struct SweepReport {
    std::vector<double> sigmas;
    std::vector<Family> families;
    std::vector<SweepCell> cells; // sigma-major, families in report order
    double dispersion_max_sigma{1.0};
    std::string config_json; // effective configuration echoed into the outputs

    [[nodiscard]] const SweepCell& cell(Family family, double sigma) const;
    // MSE values of stable cells with sigma <= dispersion_max_sigma.
    [[nodiscard]] std::vector<double> subrange_mses(Family family) const;
    [[nodiscard]] std::optional<double> dispersion_of(Family family) const;
    [[nodiscard]] std::optional<double> mean_of(Family family) const;
};

} // namespace lagid
