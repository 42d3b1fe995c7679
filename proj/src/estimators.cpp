#include "lagid/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lagid/laguerre.hpp"
#include "lagid/parallel.hpp"

namespace lagid {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> s)
{
    return {s.data(), Eigen::Index(s.size())};
}

void check_pair(std::span<const double> u, std::span<const double> y)
{
    if (u.size() != y.size())
        throw Error(ErrorKind::Argument, "input and output records differ in length");
    if (u.empty())
        throw Error(ErrorKind::Argument, "empty record");
}

} // namespace

RlsFit rls_fit(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& y, const RlsSettings& settings)
{
    if (regressors.rows() != y.size())
        throw Error(ErrorKind::Argument, "regressor rows and observation count differ");
    if (regressors.rows() == 0)
        throw Error(ErrorKind::Argument, "empty record");
    if (settings.checkpoint_stride < 1)
        throw Error(ErrorKind::Argument, "checkpoint stride must be at least 1");

    auto state = rls_init<double>(int(regressors.cols()), settings.delta, settings.lambda);
    RlsFit fit;
    fit.error_trace.resize(y.size());

    std::vector<std::pair<long, Eigen::VectorXd>> snapshots;
    for (Eigen::Index k = 0; k < regressors.rows(); ++k) {
        fit.error_trace(k) = rls_update(state, regressors.row(k).transpose(), y(k));
        if ((k + 1) % settings.checkpoint_stride == 0 && k + 1 < regressors.rows())
            snapshots.emplace_back(k + 1, state.theta);
    }

    auto record_mse = [&](const Eigen::VectorXd& theta) {
        return (y - regressors * theta).squaredNorm() / double(y.size());
    };

    fit.theta = state.theta;
    fit.mse = record_mse(state.theta);
    fit.selected_sample = long(regressors.rows());
    for (const auto& [count, theta] : snapshots) {
        const double candidate = record_mse(theta);
        if (candidate < fit.mse) {
            fit.mse = candidate;
            fit.theta = theta;
            fit.selected_sample = count;
        }
    }
    return fit;
}

LaguerreFit rls_identify_laguerre(std::span<const double> u, std::span<const double> y, int order, double psi,
                                  const RlsSettings& settings)
{
    check_pair(u, y);
    const LaguerreNetwork<double> net(order, psi);
    const Eigen::MatrixXd regressors = state_regressors(net, u);
    RlsFit fit = rls_fit(regressors, as_vector(y), settings);
    return {std::move(fit.theta), std::move(fit.error_trace), fit.mse};
}

LaguerreFit rls_identify_laguerre(const Dataset& data, int order, double psi, const RlsSettings& settings)
{
    return rls_identify_laguerre(data.input(), data.output(), order, psi, settings);
}

void ArxModel::validate() const
{
    if (na < 0 || nb < 0 || (na == 0 && nb == 0))
        throw Error(ErrorKind::Argument, "ARX orders must be non-negative with at least one positive");
    if (delay < 0)
        throw Error(ErrorKind::Argument, "ARX delay must be non-negative");
    if (a.size() != na || b.size() != nb)
        throw Error(ErrorKind::Argument, "ARX coefficient vectors do not match the orders");
}

double ArxModel::steady_state_gain() const
{
    const double denominator = 1.0 - a.sum();
    if (std::abs(denominator) < 1e-12)
        return std::copysign(HUGE_VAL, b.sum());
    return b.sum() / denominator;
}

ArxRegression arx_regression(std::span<const double> u, std::span<const double> y, int na, int nb, int delay)
{
    check_pair(u, y);
    if (na < 0 || nb < 0 || (na == 0 && nb == 0) || delay < 0)
        throw Error(ErrorKind::Argument, "invalid ARX orders");
    const long n = long(u.size());
    if (n <= long(na) + nb + delay)
        throw Error(ErrorKind::Argument, "record too short for the ARX orders");

    const long first = std::max<long>(na, long(delay) + nb - 1);
    ArxRegression reg;
    reg.first_row = first;
    reg.regressors.resize(n - first, na + nb);
    reg.target.resize(n - first);
    for (long k = first; k < n; ++k) {
        const Eigen::Index row = k - first;
        for (int i = 1; i <= na; ++i)
            reg.regressors(row, i - 1) = y[std::size_t(k - i)];
        for (int j = 1; j <= nb; ++j)
            reg.regressors(row, na + j - 1) = u[std::size_t(k - delay - j + 1)];
        reg.target(row) = y[std::size_t(k)];
    }
    return reg;
}

ArxModel fit_arx(std::span<const double> u, std::span<const double> y, int na, int nb, int delay)
{
    const ArxRegression reg = arx_regression(u, y, na, nb, delay);
    const Eigen::VectorXd theta = batch_least_squares(reg.regressors, reg.target);
    ArxModel model{na, nb, delay, theta.head(na), theta.tail(nb)};
    return model;
}

ArxModel fit_arx(const Dataset& data, int na, int nb, int delay)
{
    return fit_arx(data.input(), data.output(), na, nb, delay);
}

Eigen::VectorXd simulate_arx(const ArxModel& model, std::span<const double> u)
{
    model.validate();
    const long n = long(u.size());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (long k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int i = 1; i <= model.na && k - i >= 0; ++i)
            acc += model.a(i - 1) * y(k - i);
        for (int j = 1; j <= model.nb; ++j) {
            const long idx = k - model.delay - j + 1;
            if (idx >= 0 && idx < n)
                acc += model.b(j - 1) * u[std::size_t(idx)];
        }
        y(k) = acc;
    }
    return y;
}

std::vector<double> default_psi_grid()
{
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i)
        grid.push_back(i / 20.0);
    return grid;
}

PsiSelection select_psi(std::span<const double> u, std::span<const double> y, int order,
                        std::span<const double> psi_grid, const RlsSettings& settings, bool parallel)
{
    if (psi_grid.empty())
        throw Error(ErrorKind::Argument, "psi grid is empty");
    for (const double psi : psi_grid)
        if (!(psi >= 0.0 && psi < 1.0))
            throw Error(ErrorKind::Stability, "psi grid point " + std::to_string(psi) + " outside [0, 1)");
    check_pair(u, y);

    std::vector<std::optional<LaguerreFit>> fits(psi_grid.size());
    std::vector<std::exception_ptr> failures(psi_grid.size());
    parallel_for(
        psi_grid.size(),
        [&](std::size_t i) {
            try {
                fits[i] = rls_identify_laguerre(u, y, order, psi_grid[i], settings);
            } catch (const Error&) {
                failures[i] = std::current_exception();
            }
        },
        parallel ? std::thread::hardware_concurrency() : 1u);

    PsiSelection best;
    best.grid_mse.resize(psi_grid.size());
    std::optional<std::size_t> chosen;
    for (std::size_t i = 0; i < psi_grid.size(); ++i) {
        if (!fits[i])
            continue;
        best.grid_mse[i] = fits[i]->mse;
        if (!chosen || fits[i]->mse < fits[*chosen]->mse
            || (fits[i]->mse == fits[*chosen]->mse && psi_grid[i] < psi_grid[*chosen]))
            chosen = i;
    }
    if (!chosen)
        std::rethrow_exception(failures.front());

    best.psi = psi_grid[*chosen];
    best.c = fits[*chosen]->c;
    best.mse = fits[*chosen]->mse;
    return best;
}

PsiSelection select_psi(const Dataset& data, int order, std::span<const double> psi_grid,
                        const RlsSettings& settings, bool parallel)
{
    return select_psi(data.input(), data.output(), order, psi_grid, settings, parallel);
}

} // namespace lagid
