#include "lagid/models.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lagid/evaluate.hpp"

namespace lagid {

namespace {

std::span<const double> view(const Eigen::VectorXd& v)
{
    return {v.data(), std::size_t(v.size())};
}

template <typename... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kZeroGain = 1e-12;

LinearBlock fit_linear(std::span<const double> v, std::span<const double> z, const IdentConfig& cfg)
{
    if (cfg.linear_kind == LinearKind::Arx)
        return fit_arx(v, z, cfg.arx_na, cfg.arx_nb, cfg.arx_delay);

    const PsiSelection selection = select_psi(v, z, cfg.laguerre_order, cfg.psi_grid, cfg.rls, cfg.parallel);
    LaguerreNetwork<double> net(cfg.laguerre_order, selection.psi);
    net.set_coefficients(selection.c);
    return net;
}

bool is_null(const LinearBlock& block)
{
    return std::visit(Overloaded{[](const LaguerreNetwork<double>& net) { return net.coefficients().isZero(0.0); },
                                 [](const ArxModel& arx) { return arx.b.isZero(0.0); }},
                      block);
}

// Column j is the linear-block response to the j-th hat function of u.
Eigen::MatrixXd hat_responses(const LinearBlock& linear, const Eigen::VectorXd& grid, std::span<const double> u)
{
    const Eigen::MatrixXd hats = hat_basis(grid, u);
    Eigen::MatrixXd responses(hats.rows(), hats.cols());
    for (Eigen::Index j = 0; j < hats.cols(); ++j)
        responses.col(j) = simulate_linear(linear, {hats.col(j).data(), std::size_t(hats.rows())});
    return responses;
}

// Least-squares input map for a fixed linear block. With `pin_ends` the end
// nodes stay on the diagonal, fixing the scale and offset that an output map
// would otherwise share with the input map.
Pwl refit_input(const LinearBlock& linear, const Eigen::VectorXd& grid, std::span<const double> u,
                const Eigen::VectorXd& target, bool pin_ends)
{
    const Eigen::MatrixXd responses = hat_responses(linear, grid, u);
    const Eigen::Index m = grid.size();
    if (!pin_ends)
        return Pwl(grid, batch_least_squares(responses, target));
    if (m < 3)
        return Pwl::identity(grid);

    const Eigen::VectorXd rhs = target - responses.col(0) * grid(0) - responses.col(m - 1) * grid(m - 1);
    Eigen::VectorXd values(m);
    values(0) = grid(0);
    values(m - 1) = grid(m - 1);
    values.segment(1, m - 2) = batch_least_squares(responses.middleCols(1, m - 2), rhs);
    return Pwl(grid, values);
}

Pwl refit_output(const Eigen::VectorXd& w, std::span<const double> y, const IdentConfig& cfg, int iteration)
{
    const Eigen::VectorXd grid = grid_over<double>(view(w), cfg.output_nodes, cfg.grid_margin, cfg.grid_trim);
    Pwl fitted = pwl_fit<double>(view(w), y, grid);
    if (is_monotonic(fitted) == Monotonicity::NonMonotonic)
        throw Error(ErrorKind::Sensitivity,
                    "output nonlinearity lost monotonicity at iteration " + std::to_string(iteration))
            .at(iteration);
    return fitted;
}

Eigen::VectorXd invert_output(const Pwl& output_nl, std::span<const double> y, int iteration)
{
    if (is_monotonic(output_nl) == Monotonicity::NonMonotonic)
        throw Error(ErrorKind::Sensitivity,
                    "output nonlinearity is not invertible at iteration " + std::to_string(iteration))
            .at(iteration);
    return pwl_inverse(output_nl, y);
}

void check_record(const Dataset& data, const IdentConfig& cfg)
{
    data.validate();
    cfg.validate();
    const std::size_t needed = cfg.min_samples > 0 ? std::size_t(cfg.min_samples)
                                                   : std::size_t(10 * cfg.parameter_count());
    if (data.size() < needed)
        throw Error(ErrorKind::Argument, "record has " + std::to_string(data.size()) + " samples, at least "
                                             + std::to_string(needed) + " required");
}

// Tracks the alternating iterations, keeping the best model seen so far.
class IterationLog {
public:
    explicit IterationLog(const IdentConfig& cfg)
        : cfg_(cfg)
    {
    }

    // Records one iterate; returns true when the stopping rule is met.
    bool record(BlockModel model, double mse)
    {
        ++iterations_;
        history_.push_back(mse);
        const double previous = best_mse_;
        if (std::isfinite(mse) && (!best_ || mse < best_mse_)) {
            best_ = std::move(model);
            best_mse_ = mse;
        }
        if (iterations_ == 1)
            return best_mse_ == 0.0;
        if (previous == 0.0 || !std::isfinite(previous))
            return true;
        const double improvement = (previous - mse) / previous;
        if (improvement < cfg_.tol || best_mse_ == 0.0) {
            converged_ = true;
            return true;
        }
        return false;
    }

    [[nodiscard]] const std::optional<BlockModel>& best() const { return best_; }
    [[nodiscard]] double best_mse() const { return best_mse_; }
    [[nodiscard]] int iterations() const { return iterations_; }

    IdentResult finish(const Dataset& data)
    {
        if (!best_)
            throw Error(ErrorKind::Divergence, "no finite iterate produced");
        IdentResult result;
        result.iterations = iterations_;
        result.converged = converged_ || (iterations_ == 1 && best_mse_ == 0.0);
        result.mse_history = std::move(history_);
        result.model = std::move(*best_);
        if (!result.converged)
            result.model.warnings.emplace_back("not_converged");
        if (std::abs(steady_state_gain(result.model.linear)) > kZeroGain)
            result.model = normalize_model(result.model);
        else
            result.model.warnings.emplace_back("zero_gain");
        result.mse = mse(data.output(), view(simulate(result.model, data.input())));
        return result;
    }

    IdentResult finish_degenerate(BlockModel model, const Dataset& data)
    {
        ++iterations_;
        model.warnings.emplace_back("zero_gain");
        IdentResult result;
        result.iterations = iterations_;
        result.converged = true;
        result.model = std::move(model);
        result.mse = mse(data.output(), view(simulate(result.model, data.input())));
        result.mse_history = std::move(history_);
        result.mse_history.push_back(result.mse);
        return result;
    }

private:
    const IdentConfig& cfg_;
    std::optional<BlockModel> best_;
    double best_mse_{std::numeric_limits<double>::infinity()};
    int iterations_{0};
    bool converged_{false};
    std::vector<double> history_;
};

} // namespace

const char* to_string(Structure s) noexcept
{
    switch (s) {
    case Structure::Linear: return "linear";
    case Structure::Hammerstein: return "hammerstein";
    case Structure::Wiener: return "wiener";
    case Structure::HammersteinWiener: return "hammerstein_wiener";
    }
    return "unknown";
}

const char* to_string(LinearKind k) noexcept
{
    return k == LinearKind::Laguerre ? "laguerre" : "arx";
}

Structure parse_structure(const std::string& tag)
{
    for (const Structure s :
         {Structure::Linear, Structure::Hammerstein, Structure::Wiener, Structure::HammersteinWiener})
        if (tag == to_string(s))
            return s;
    throw Error(ErrorKind::Argument, "unknown model structure '" + tag + "'");
}

LinearKind parse_linear_kind(const std::string& tag)
{
    if (tag == "laguerre")
        return LinearKind::Laguerre;
    if (tag == "arx")
        return LinearKind::Arx;
    throw Error(ErrorKind::Argument, "unknown linear block kind '" + tag + "'");
}

LinearKind kind_of(const LinearBlock& block)
{
    return std::holds_alternative<ArxModel>(block) ? LinearKind::Arx : LinearKind::Laguerre;
}

Eigen::VectorXd simulate_linear(const LinearBlock& block, std::span<const double> u)
{
    return std::visit(Overloaded{[&](const LaguerreNetwork<double>& net) {
                                     LaguerreNetwork<double> running = net;
                                     running.reset();
                                     return simulate_linear(running, u);
                                 },
                                 [&](const ArxModel& arx) { return simulate_arx(arx, u); }},
                      block);
}

double steady_state_gain(const LinearBlock& block)
{
    return std::visit([](const auto& b) { return b.steady_state_gain(); }, block);
}

LinearBlock scaled(const LinearBlock& block, double factor)
{
    return std::visit(Overloaded{[&](const LaguerreNetwork<double>& net) -> LinearBlock {
                                     LaguerreNetwork<double> out = net;
                                     out.set_coefficients(net.coefficients() * factor);
                                     return out;
                                 },
                                 [&](const ArxModel& arx) -> LinearBlock {
                                     ArxModel out = arx;
                                     out.b *= factor;
                                     return out;
                                 }},
                      block);
}

int parameter_count(const LinearBlock& block)
{
    return std::visit(Overloaded{[](const LaguerreNetwork<double>& net) { return net.order() + 1; },
                                 [](const ArxModel& arx) { return arx.na + arx.nb; }},
                      block);
}

void BlockModel::validate() const
{
    const bool want_input = structure == Structure::Hammerstein || structure == Structure::HammersteinWiener;
    const bool want_output = structure == Structure::Wiener || structure == Structure::HammersteinWiener;
    if (input_nl.has_value() != want_input)
        throw Error(ErrorKind::Argument, std::string(to_string(structure))
                                             + (want_input ? " model requires an input nonlinearity"
                                                           : " model must not carry an input nonlinearity"));
    if (output_nl.has_value() != want_output)
        throw Error(ErrorKind::Argument, std::string(to_string(structure))
                                             + (want_output ? " model requires an output nonlinearity"
                                                            : " model must not carry an output nonlinearity"));
    if (const auto* arx = std::get_if<ArxModel>(&linear))
        arx->validate();
}

Eigen::VectorXd simulate(const BlockModel& model, std::span<const double> u)
{
    Eigen::VectorXd drive;
    std::span<const double> v = u;
    if (model.input_nl) {
        drive = pwl_eval(*model.input_nl, u);
        v = view(drive);
    }
    Eigen::VectorXd w = simulate_linear(model.linear, v);
    if (model.output_nl)
        w = pwl_eval(*model.output_nl, view(w));
    return w;
}

BlockModel normalize_model(const BlockModel& model)
{
    model.validate();
    if (model.structure == Structure::Linear)
        return model;

    const double gain = steady_state_gain(model.linear);
    if (!std::isfinite(gain) || std::abs(gain) <= kZeroGain)
        throw Error(ErrorKind::Normalization,
                    "linear block steady-state gain " + std::to_string(gain) + " cannot be normalized");

    BlockModel out = model;
    out.normalized = true;
    if (std::abs(gain - 1.0) <= 1e-12)
        return out;

    out.linear = scaled(model.linear, 1.0 / gain);
    if (model.structure == Structure::Hammerstein) {
        out.input_nl = Pwl(model.input_nl->breakpoints(), model.input_nl->values() * gain);
    } else {
        // Psi(w) = Psi'(w / gain): the output nodes move to breakpoints / gain.
        Eigen::VectorXd breakpoints = model.output_nl->breakpoints() / gain;
        Eigen::VectorXd values = model.output_nl->values();
        if (gain < 0.0) {
            breakpoints.reverseInPlace();
            values.reverseInPlace();
        }
        out.output_nl = Pwl(std::move(breakpoints), std::move(values));
    }
    return out;
}

int IdentConfig::parameter_count() const
{
    int count = linear_kind == LinearKind::Laguerre ? laguerre_order : arx_na + arx_nb;
    if (structure == Structure::Hammerstein || structure == Structure::HammersteinWiener)
        count += input_nodes;
    if (structure == Structure::Wiener || structure == Structure::HammersteinWiener)
        count += output_nodes;
    return count;
}

void IdentConfig::validate() const
{
    if (laguerre_order < 1)
        throw Error(ErrorKind::Argument, "laguerre order must be at least 1");
    if (psi_grid.empty())
        throw Error(ErrorKind::Argument, "psi grid is empty");
    for (const double psi : psi_grid)
        if (!(psi >= 0.0 && psi < 1.0))
            throw Error(ErrorKind::Stability, "psi grid point outside [0, 1)");
    if (arx_na < 0 || arx_nb < 0 || arx_na + arx_nb == 0 || arx_delay < 0)
        throw Error(ErrorKind::Argument, "invalid ARX orders");
    if (input_nodes < 2 || output_nodes < 2)
        throw Error(ErrorKind::Argument, "nonlinearities need at least 2 nodes");
    if (!(grid_margin >= 0.0))
        throw Error(ErrorKind::Argument, "grid margin must be non-negative");
    if (!(grid_trim >= 0.0 && grid_trim < 0.5))
        throw Error(ErrorKind::Argument, "grid trim must lie in [0, 0.5)");
    if (!(rls.lambda > 0.0 && rls.lambda <= 1.0))
        throw Error(ErrorKind::Argument, "RLS forgetting factor must lie in (0, 1]");
    if (!(rls.delta > 0.0))
        throw Error(ErrorKind::Argument, "RLS initial covariance scale must be positive");
    if (rls.checkpoint_stride < 1)
        throw Error(ErrorKind::Argument, "RLS checkpoint stride must be at least 1");
    if (!(tol >= 0.0) || max_iters < 1 || refine_iters < 0)
        throw Error(ErrorKind::Argument, "invalid iteration controls");
}

IdentResult identify_linear(const Dataset& data, const IdentConfig& cfg)
{
    check_record(data, cfg);
    BlockModel model{Structure::Linear, std::nullopt, fit_linear(data.input(), data.output(), cfg), std::nullopt};
    IdentResult result;
    result.iterations = 1;
    result.converged = true;
    result.mse = mse(data.output(), view(simulate(model, data.input())));
    result.mse_history.push_back(result.mse);
    result.model = std::move(model);
    return result;
}

IdentResult identify_hammerstein(const Dataset& data, const IdentConfig& cfg)
{
    check_record(data, cfg);
    const auto u = data.input();
    const auto y = data.output();
    const Eigen::Map<const Eigen::VectorXd> target(y.data(), Eigen::Index(y.size()));
    const Eigen::VectorXd grid = grid_over<double>(u, cfg.input_nodes, cfg.grid_margin, cfg.grid_trim);

    Pwl input_nl = Pwl::identity(grid);
    IterationLog log(cfg);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Eigen::VectorXd v = pwl_eval(input_nl, u);
        LinearBlock linear = fit_linear(view(v), y, cfg);
        if (is_null(linear))
            return log.finish_degenerate({Structure::Hammerstein, input_nl, linear, std::nullopt}, data);

        if (!cfg.freeze_input_nl)
            input_nl = refit_input(linear, grid, u, target, false);

        BlockModel model{Structure::Hammerstein, input_nl, std::move(linear), std::nullopt};
        const double fit = mse(y, view(simulate(model, u)));
        if (log.record(std::move(model), fit))
            break;
    }
    return log.finish(data);
}

IdentResult identify_wiener(const Dataset& data, const IdentConfig& cfg)
{
    check_record(data, cfg);
    const auto u = data.input();
    const auto y = data.output();

    Pwl output_nl = Pwl::identity(grid_over<double>(y, cfg.output_nodes, cfg.grid_margin, cfg.grid_trim));
    IterationLog log(cfg);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Eigen::VectorXd z = invert_output(output_nl, y, it);
        LinearBlock linear = fit_linear(u, view(z), cfg);
        if (is_null(linear))
            return log.finish_degenerate({Structure::Wiener, std::nullopt, linear, output_nl}, data);

        const Eigen::VectorXd w = simulate_linear(linear, u);
        if (!cfg.freeze_output_nl)
            output_nl = refit_output(w, y, cfg, it);

        BlockModel model{Structure::Wiener, std::nullopt, std::move(linear), output_nl};
        const double fit = mse(y, view(pwl_eval(output_nl, view(w))));
        if (log.record(std::move(model), fit))
            break;
    }
    return log.finish(data);
}

namespace {

// Hammerstein-Wiener starting point taken from a Hammerstein fit: its input map
// is rescaled onto the pinned-end convention and the leftover offset becomes an
// affine output map.
void hw_start(const Dataset& data, const IdentConfig& cfg, Pwl& input_nl, Pwl& output_nl)
{
    IdentConfig inner = cfg;
    inner.structure = Structure::Hammerstein;
    const BlockModel start = identify_hammerstein(data, inner).model;
    if (!start.normalized)
        return;
    const Eigen::VectorXd& grid = start.input_nl->breakpoints();
    const Eigen::VectorXd& values = start.input_nl->values();
    const Eigen::Index last = grid.size() - 1;
    const double scale = (values(last) - values(0)) / (grid(last) - grid(0));
    if (!(std::abs(scale) > kZeroGain))
        return;
    const double offset = values(0) - scale * grid(0);
    input_nl = Pwl(grid, ((values.array() - offset) / scale).matrix());
    const Eigen::VectorXd out_grid = output_nl.breakpoints().array() - offset;
    output_nl = Pwl(out_grid, (out_grid.array() + offset).matrix());
}

// Free parameters of a Hammerstein-Wiener model for the joint refinement:
// interior input nodes, Laguerre coefficients, output nodes. Grids and the
// Laguerre pole stay fixed. ARX coefficients keep their equation-error
// estimate; refining them on the output error would make an output-error model.
class HwParameters {
public:
    HwParameters(const BlockModel& model, const IdentConfig& cfg)
        : base_(model)
        , inputs_(cfg.freeze_input_nl ? 0 : int(model.input_nl->nodes()) - 2)
        , linear_(int(linear_parameters(model.linear).size()))
        , outputs_(cfg.freeze_output_nl ? 0 : int(model.output_nl->nodes()))
    {
    }

    [[nodiscard]] int size() const { return inputs_ + linear_ + outputs_; }

    [[nodiscard]] Eigen::VectorXd pack(const BlockModel& model) const
    {
        Eigen::VectorXd x(size());
        if (inputs_ > 0)
            x.head(inputs_) = model.input_nl->values().segment(1, inputs_);
        x.segment(inputs_, linear_) = linear_parameters(model.linear);
        if (outputs_ > 0)
            x.tail(outputs_) = model.output_nl->values();
        return x;
    }

    [[nodiscard]] BlockModel unpack(const Eigen::VectorXd& x) const
    {
        BlockModel model = base_;
        if (inputs_ > 0) {
            Eigen::VectorXd values = base_.input_nl->values();
            values.segment(1, inputs_) = x.head(inputs_);
            model.input_nl = Pwl(base_.input_nl->breakpoints(), values);
        }
        model.linear = with_linear_parameters(base_.linear, x.segment(inputs_, linear_));
        if (outputs_ > 0)
            model.output_nl = Pwl(base_.output_nl->breakpoints(), x.tail(outputs_));
        return model;
    }

    // Derivatives of the simulated output with respect to the packed parameters.
    [[nodiscard]] Eigen::MatrixXd jacobian(const BlockModel& model, std::span<const double> u) const
    {
        const Eigen::VectorXd v = pwl_eval(*model.input_nl, u);
        const Eigen::VectorXd w = simulate_linear(model.linear, view(v));
        const Pwl& out = *model.output_nl;
        Eigen::VectorXd slopes(w.size());
        for (Eigen::Index k = 0; k < w.size(); ++k)
            slopes(k) = out.slope(out.segment_of(w(k)));

        Eigen::MatrixXd jac(w.size(), size());
        if (inputs_ > 0)
            jac.leftCols(inputs_) = hat_responses(model.linear, model.input_nl->breakpoints(), u)
                                        .middleCols(1, inputs_);
        jac.middleCols(inputs_, linear_) = linear_sensitivities(model.linear, v);
        jac.leftCols(inputs_ + linear_) = slopes.asDiagonal() * jac.leftCols(inputs_ + linear_);
        if (outputs_ > 0)
            jac.rightCols(outputs_) = hat_basis(out.breakpoints(), view(w));
        return jac;
    }

private:
    static Eigen::VectorXd linear_parameters(const LinearBlock& block)
    {
        if (const auto* net = std::get_if<LaguerreNetwork<double>>(&block))
            return net->coefficients();
        return {};
    }

    static LinearBlock with_linear_parameters(const LinearBlock& block, const Eigen::VectorXd& x)
    {
        if (x.size() == 0)
            return block;
        LaguerreNetwork<double> net = std::get<LaguerreNetwork<double>>(block);
        net.set_coefficients(x);
        return net;
    }

    static Eigen::MatrixXd linear_sensitivities(const LinearBlock& block, const Eigen::VectorXd& v)
    {
        if (const auto* net = std::get_if<LaguerreNetwork<double>>(&block))
            return state_regressors(*net, view(v));
        return Eigen::MatrixXd(v.size(), 0);
    }

    BlockModel base_;
    int inputs_;
    int linear_;
    int outputs_;
};

// Levenberg-Marquardt on the output error, started from the best alternating
// iterate. Steps that break the monotonicity of the output map are rejected.
void refine_hw(IterationLog& log, std::span<const double> u, std::span<const double> y, const IdentConfig& cfg)
{
    if (cfg.refine_iters == 0 || !log.best())
        return;
    const Eigen::Map<const Eigen::VectorXd> target(y.data(), Eigen::Index(y.size()));
    const Monotonicity direction = is_monotonic(*log.best()->output_nl);

    BlockModel current = *log.best();
    double fit = log.best_mse();
    double damping = 1e-3;
    for (int it = 0; it < cfg.refine_iters; ++it) {
        const HwParameters params(current, cfg);
        Eigen::VectorXd x = params.pack(current);
        const Eigen::MatrixXd jac = params.jacobian(current, u);
        const Eigen::VectorXd residual = target - simulate(current, u);
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd gradient = jac.transpose() * residual;
        const Eigen::VectorXd scale = normal.diagonal().cwiseMax(1e-12 * normal.diagonal().maxCoeff());

        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            Eigen::MatrixXd damped = normal;
            damped.diagonal() += damping * scale;
            const Eigen::VectorXd candidate = x + damped.ldlt().solve(gradient);
            if (!candidate.allFinite()) {
                damping *= 4.0;
                continue;
            }
            BlockModel model = params.unpack(candidate);
            const double candidate_fit = mse(y, view(simulate(model, u)));
            if (is_monotonic(*model.output_nl) != direction || !(candidate_fit < fit)) {
                damping *= 4.0;
                continue;
            }
            accepted = true;
            fit = candidate_fit;
            damping = std::max(damping / 3.0, 1e-12);

            // Re-place the output grid over the moved linear-block output.
            if (!cfg.freeze_output_nl) {
                const Eigen::VectorXd w = simulate_linear(model.linear, view(pwl_eval(*model.input_nl, u)));
                try {
                    BlockModel regridded = model;
                    regridded.output_nl = refit_output(w, y, cfg, log.iterations() + 1);
                    const double regridded_fit = mse(y, view(pwl_eval(*regridded.output_nl, view(w))));
                    if (regridded_fit <= fit) {
                        model = std::move(regridded);
                        fit = regridded_fit;
                    }
                } catch (const Error&) {
                }
            }
            // ARX coefficients follow by equation error on the transformed data.
            if (kind_of(model.linear) == LinearKind::Arx) {
                try {
                    const Eigen::VectorXd v = pwl_eval(*model.input_nl, u);
                    const Eigen::VectorXd z = invert_output(*model.output_nl, y, log.iterations() + 1);
                    BlockModel relinked = model;
                    relinked.linear = fit_linear(view(v), view(z), cfg);
                    const double relinked_fit = mse(y, view(simulate(relinked, u)));
                    if (relinked_fit <= fit) {
                        model = std::move(relinked);
                        fit = relinked_fit;
                    }
                } catch (const Error&) {
                }
            }
            current = model;
            if (log.record(std::move(model), fit))
                return;
        }
        if (!accepted)
            return;
    }
}

} // namespace

IdentResult identify_hw(const Dataset& data, const IdentConfig& cfg)
{
    check_record(data, cfg);
    const auto u = data.input();
    const auto y = data.output();
    const Eigen::VectorXd input_grid = grid_over<double>(u, cfg.input_nodes, cfg.grid_margin, cfg.grid_trim);

    Pwl input_nl = Pwl::identity(input_grid);
    Pwl output_nl = Pwl::identity(grid_over<double>(y, cfg.output_nodes, cfg.grid_margin, cfg.grid_trim));
    if (!cfg.freeze_input_nl && !cfg.freeze_output_nl)
        hw_start(data, cfg, input_nl, output_nl);
    IterationLog log(cfg);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Eigen::VectorXd z = invert_output(output_nl, y, it);
        const Eigen::VectorXd v = pwl_eval(input_nl, u);
        LinearBlock linear = fit_linear(view(v), view(z), cfg);
        if (is_null(linear))
            return log.finish_degenerate({Structure::HammersteinWiener, input_nl, linear, output_nl}, data);

        if (!cfg.freeze_input_nl)
            input_nl = refit_input(linear, input_grid, u, z, true);

        const Eigen::VectorXd w = simulate_linear(linear, view(pwl_eval(input_nl, u)));
        if (!cfg.freeze_output_nl)
            output_nl = refit_output(w, y, cfg, it);

        BlockModel model{Structure::HammersteinWiener, input_nl, std::move(linear), output_nl};
        const double fit = mse(y, view(pwl_eval(output_nl, view(w))));
        if (log.record(std::move(model), fit))
            break;
    }
    refine_hw(log, u, y, cfg);
    return log.finish(data);
}

IdentResult identify(const Dataset& data, const IdentConfig& cfg)
{
    switch (cfg.structure) {
    case Structure::Linear: return identify_linear(data, cfg);
    case Structure::Hammerstein: return identify_hammerstein(data, cfg);
    case Structure::Wiener: return identify_wiener(data, cfg);
    case Structure::HammersteinWiener: return identify_hw(data, cfg);
    }
    throw Error(ErrorKind::Argument, "unknown structure");
}

BlockModel identify_hammerstein_overparameterized(const Dataset& data, int order, double psi,
                                                  const Eigen::VectorXd& input_grid)
{
    data.validate();
    const auto u = data.input();
    const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), Eigen::Index(data.size()));
    const LaguerreNetwork<double> net(order, psi);
    const Eigen::MatrixXd hats = hat_basis(input_grid, u);
    const Eigen::Index m = hats.cols();

    Eigen::MatrixXd regressors(hats.rows(), order * m);
    for (Eigen::Index j = 0; j < m; ++j)
        regressors.middleCols(j * order, order)
            = state_regressors(net, {hats.col(j).data(), std::size_t(hats.rows())});
    const Eigen::VectorXd theta = batch_least_squares(regressors, y);

    // theta stacks column j of the order x m coefficient matrix c alpha^T.
    const Eigen::Map<const Eigen::MatrixXd> coupled(theta.data(), order, m);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(coupled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    LaguerreNetwork<double> linear = net;
    linear.set_coefficients(svd.matrixU().col(0) * svd.singularValues()(0));
    const Pwl input_nl(input_grid, svd.matrixV().col(0));
    return normalize_model({Structure::Hammerstein, input_nl, linear, std::nullopt});
}

} // namespace lagid
