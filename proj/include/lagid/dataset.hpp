#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lagid {

struct DatasetMeta {
    std::uint64_t seed{0};
    double sigma{0.0};
    std::string plant;
    std::string generator;
    // Additional `# key=value` header lines, in file order.
    std::vector<std::pair<std::string, std::string>> extra;

    friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

// Sampled SISO record: u is the manipulated input, y the measured output.
struct Dataset {
    std::vector<double> u;
    std::vector<double> y;
    double dt{1.0};
    DatasetMeta meta;

    [[nodiscard]] std::size_t size() const { return u.size(); }
    [[nodiscard]] std::span<const double> input() const { return u; }
    [[nodiscard]] std::span<const double> output() const { return y; }

    // Throws Schema errors for empty or mismatched columns and non-positive dt.
    void validate() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

} // namespace lagid
