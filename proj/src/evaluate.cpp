#include "lagid/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lagid {

double dispersion(std::span<const double> values)
{
    if (values.size() < 2)
        throw Error(ErrorKind::Argument, "dispersion needs at least 2 values");
    const double n = double(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double sum = 0.0;
    for (const double v : values)
        sum += (v - mean) * (v - mean);
    return std::sqrt(sum / n);
}

const char* to_string(DivergenceReason reason) noexcept
{
    switch (reason) {
    case DivergenceReason::None: return "none";
    case DivergenceReason::Overflow: return "overflow";
    case DivergenceReason::NonFinite: return "non-finite";
    case DivergenceReason::Ratio: return "ratio";
    }
    return "unknown";
}

StabilityVerdict detect_divergence(std::span<const double> error_trace, double baseline)
{
    for (const double e : error_trace)
        if (!std::isfinite(e))
            return {false, DivergenceReason::NonFinite};
    for (const double e : error_trace)
        if (std::abs(e) > kOverflowBound)
            return {false, DivergenceReason::Overflow};
    if (error_trace.empty())
        return {};

    const std::size_t window = std::max<std::size_t>(1, error_trace.size() / 10);
    const auto tail = error_trace.subspan(error_trace.size() - window);
    double sum = 0.0;
    for (const double e : tail)
        sum += e * e;
    if (sum / double(window) > kRatioBound * std::max(baseline, 1e-12))
        return {false, DivergenceReason::Ratio};
    return {};
}

const char* to_string(Family family) noexcept
{
    switch (family) {
    case Family::Hammerstein: return "hammerstein";
    case Family::Wiener: return "wiener";
    case Family::HwLaguerre: return "hw_laguerre";
    case Family::HwArx: return "hw_arx";
    }
    return "unknown";
}

std::vector<Family> all_families()
{
    return {Family::Hammerstein, Family::Wiener, Family::HwLaguerre, Family::HwArx};
}

Family parse_family(const std::string& tag)
{
    for (const Family f : all_families())
        if (tag == to_string(f))
            return f;
    throw Error(ErrorKind::Argument, "unknown model family '" + tag + "'");
}

const SweepCell& SweepReport::cell(Family family, double sigma) const
{
    const auto it = std::find_if(cells.begin(), cells.end(),
                                 [&](const SweepCell& c) { return c.family == family && c.sigma == sigma; });
    if (it == cells.end())
        throw Error(ErrorKind::Argument, std::string("no sweep cell for ") + to_string(family));
    return *it;
}

std::vector<double> SweepReport::subrange_mses(Family family) const
{
    std::vector<double> values;
    for (const double sigma : sigmas) {
        if (sigma > dispersion_max_sigma)
            continue;
        const SweepCell& c = cell(family, sigma);
        if (c.stable)
            values.push_back(c.mse);
    }
    return values;
}

std::optional<double> SweepReport::dispersion_of(Family family) const
{
    const auto values = subrange_mses(family);
    if (values.size() < 2)
        return std::nullopt;
    return dispersion(values);
}

std::optional<double> SweepReport::mean_of(Family family) const
{
    const auto values = subrange_mses(family);
    if (values.empty())
        return std::nullopt;
    return std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
}

} // namespace lagid
