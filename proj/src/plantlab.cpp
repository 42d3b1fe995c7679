#include "lagid/plantlab.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string_view>

#include "lagid/io.hpp"

namespace lagid {

double Rng::uniform()
{
    return double(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

double Rng::gaussian()
{
    if (spare_) {
        const double value = *spare_;
        spare_.reset();
        return value;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string ReferencePlant::id() const
{
    return "reference-hw/1 seed=" + std::to_string(seed);
}

ReferencePlant make_reference_plant(std::uint64_t seed)
{
    Rng rng(derive_seed(seed, 0x706c616e74ULL));
    auto jitter = [&](double value, double relative) { return value * (1.0 + relative * rng.uniform(-1.0, 1.0)); };

    ReferencePlant plant;
    plant.seed = seed;
    plant.input_min = 8.0;
    plant.input_max = 16.0;
    plant.output_scale = 100.0;

    // Laguerre core with a smooth, overdamped step response.
    LaguerreNetwork<double> linear(4, 0.7);
    Eigen::Vector4d c(1.0, 0.6, 0.25, 0.1);
    for (int i = 1; i < 4; ++i)
        c(i) = jitter(c(i), 0.15);
    linear.set_coefficients(c);
    linear.set_coefficients(c / linear.steady_state_gain());

    // Input map: closed side setting to throughput drive, slow-fast-slow.
    Eigen::VectorXd in_breaks(6);
    in_breaks << 7.0, 9.4, 11.0, 12.6, 14.6, 17.0;
    for (int i = 1; i < 5; ++i)
        in_breaks(i) += rng.uniform(-0.3, 0.3);
    const double in_slopes[] = {1.0, 4.5, 9.0, 5.0, 1.0};
    Eigen::VectorXd in_values(6);
    in_values(0) = 20.0;
    for (int i = 0; i < 5; ++i)
        in_values(i + 1) = in_values(i) + jitter(in_slopes[i], 0.1) * (in_breaks(i + 1) - in_breaks(i));

    // Output map: saturating capacity curve over the reachable drive range.
    const double lo = in_values(0);
    const double hi = in_values(5);
    Eigen::VectorXd out_breaks = Eigen::VectorXd::LinSpaced(5, lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo));
    for (int i = 1; i < 4; ++i)
        out_breaks(i) += rng.uniform(-0.05, 0.05) * (hi - lo);
    const double out_slopes[] = {1.5, 1.15, 0.8, 0.5};
    Eigen::VectorXd out_values(5);
    out_values(0) = 30.0;
    for (int i = 0; i < 4; ++i)
        out_values(i + 1) = out_values(i) + jitter(out_slopes[i], 0.1) * (out_breaks(i + 1) - out_breaks(i));

    plant.truth = BlockModel{Structure::HammersteinWiener, Pwl(in_breaks, in_values), linear,
                             Pwl(out_breaks, out_values)};
    plant.truth.normalized = true;
    return plant;
}

const char* to_string(ExcitationKind kind) noexcept
{
    switch (kind) {
    case ExcitationKind::PrbsSteps: return "prbs_steps";
    case ExcitationKind::Staircase: return "staircase";
    case ExcitationKind::Impulse: return "impulse";
    case ExcitationKind::Step: return "step";
    }
    return "unknown";
}

ExcitationKind parse_excitation(const std::string& tag)
{
    for (const ExcitationKind kind :
         {ExcitationKind::PrbsSteps, ExcitationKind::Staircase, ExcitationKind::Impulse, ExcitationKind::Step})
        if (tag == to_string(kind))
            return kind;
    throw Error(ErrorKind::Argument, "unknown excitation kind '" + tag + "'");
}

std::vector<double> generate_excitation(ExcitationKind kind, std::size_t samples, double lo, double hi,
                                        std::uint64_t seed, int dwell)
{
    if (samples < 1)
        throw Error(ErrorKind::Argument, "excitation length must be at least 1");
    if (dwell < 1)
        throw Error(ErrorKind::Argument, "excitation dwell must be at least 1");
    if (!(hi > lo))
        throw Error(ErrorKind::Argument, "excitation range is degenerate");

    std::vector<double> u(samples, lo);
    switch (kind) {
    case ExcitationKind::PrbsSteps: {
        Rng rng(seed);
        double level = lo;
        for (std::size_t k = 0; k < samples; ++k) {
            if (k % std::size_t(dwell) == 0)
                level = rng.uniform(lo, hi);
            u[k] = level;
        }
        break;
    }
    case ExcitationKind::Staircase: {
        const std::size_t levels = (samples + std::size_t(dwell) - 1) / std::size_t(dwell);
        for (std::size_t k = 0; k < samples; ++k) {
            const std::size_t level = k / std::size_t(dwell);
            u[k] = levels == 1 ? lo : lo + (hi - lo) * double(level) / double(levels - 1);
        }
        break;
    }
    case ExcitationKind::Impulse:
        u[0] = lo + 0.5 * (hi - lo);
        break;
    case ExcitationKind::Step:
        std::fill(u.begin(), u.end(), hi);
        break;
    }
    return u;
}

Dataset run_experiment(const ReferencePlant& plant, std::span<const double> u, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0))
        throw Error(ErrorKind::Argument, "noise standard deviation must be non-negative");
    if (u.empty())
        throw Error(ErrorKind::Argument, "empty excitation");

    Dataset data;
    data.u.assign(u.begin(), u.end());
    const Eigen::VectorXd clean = simulate(plant.truth, u);
    data.y.assign(clean.data(), clean.data() + clean.size());
    if (sigma > 0.0) {
        Rng rng(seed);
        for (double& y : data.y)
            y += sigma * rng.gaussian();
    }
    data.dt = 1.0;
    data.meta.seed = seed;
    data.meta.sigma = sigma;
    data.meta.plant = plant.id();
    data.meta.generator = kGeneratorVersion;
    return data;
}

void Dataset::validate() const
{
    if (u.empty())
        throw Error(ErrorKind::Schema, "dataset has no samples");
    if (u.size() != y.size())
        throw Error(ErrorKind::Schema, "dataset columns differ in length");
    if (!(dt > 0.0))
        throw Error(ErrorKind::Schema, "sampling interval must be positive");
}

std::string format_dataset(const Dataset& data)
{
    data.validate();
    std::string out;
    out += "# schema=1\n";
    out += "# generator=" + data.meta.generator + "\n";
    out += "# plant=" + data.meta.plant + "\n";
    out += "# seed=" + std::to_string(data.meta.seed) + "\n";
    out += "# sigma=" + format_double(data.meta.sigma) + "\n";
    out += "# dt=" + format_double(data.dt) + "\n";
    for (const auto& [key, value] : data.meta.extra)
        out += "# " + key + "=" + value + "\n";
    out += "k,u,y\n";
    for (std::size_t k = 0; k < data.size(); ++k)
        out += std::to_string(k) + "," + format_double(data.u[k]) + "," + format_double(data.y[k]) + "\n";
    return out;
}

void write_dataset(const Dataset& data, const std::string& path)
{
    write_file_atomic(path, format_dataset(data));
}

namespace {

template <typename T>
T parse_number(std::string_view text, long line, const char* what)
{
    T value{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty())
        throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": cannot read " + what + " from '"
                                          + std::string(text) + "'")
            .at(line);
    return value;
}

} // namespace

Dataset parse_dataset(const std::string& text)
{
    Dataset data;
    data.dt = 1.0;
    std::istringstream in(text);
    std::string line;
    long number = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.front() == '#') {
            if (header_seen)
                continue;
            std::string_view body(line);
            body.remove_prefix(1);
            while (!body.empty() && body.front() == ' ')
                body.remove_prefix(1);
            const auto eq = body.find('=');
            if (eq == std::string_view::npos)
                continue;
            const std::string key(body.substr(0, eq));
            const std::string value(body.substr(eq + 1));
            if (key == "seed")
                data.meta.seed = parse_number<std::uint64_t>(value, number, "seed");
            else if (key == "sigma")
                data.meta.sigma = parse_number<double>(value, number, "sigma");
            else if (key == "dt")
                data.dt = parse_number<double>(value, number, "dt");
            else if (key == "plant")
                data.meta.plant = value;
            else if (key == "generator")
                data.meta.generator = value;
            else if (key != "schema")
                data.meta.extra.emplace_back(key, value);
            continue;
        }
        if (!header_seen) {
            if (line != "k,u,y")
                throw Error(ErrorKind::Schema, "line " + std::to_string(number) + ": expected header 'k,u,y'")
                    .at(number);
            header_seen = true;
            continue;
        }

        std::string_view row(line);
        std::vector<std::string_view> cells;
        for (std::size_t start = 0;;) {
            const auto comma = row.find(',', start);
            cells.push_back(row.substr(start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (cells.size() != 3)
            throw Error(ErrorKind::Schema, "line " + std::to_string(number) + ": expected 3 columns, found "
                                               + std::to_string(cells.size()) + " (column length mismatch)")
                .at(number);
        const auto k = parse_number<long>(cells[0], number, "sample index");
        if (k != long(data.u.size()))
            throw Error(ErrorKind::Schema, "line " + std::to_string(number) + ": sample index "
                                               + std::to_string(k) + " out of sequence")
                .at(number);
        data.u.push_back(parse_number<double>(cells[1], number, "u"));
        data.y.push_back(parse_number<double>(cells[2], number, "y"));
    }
    if (!header_seen)
        throw Error(ErrorKind::Schema, "missing 'k,u,y' header row");
    data.validate();
    return data;
}

Dataset read_dataset(const std::string& path)
{
    return parse_dataset(read_file(path));
}

} // namespace lagid
