#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lagid/dataset.hpp"
#include "lagid/models.hpp"

namespace lagid {

// Identifies the noise/excitation generator; bump when its output changes.
inline constexpr const char* kGeneratorVersion = "lagid-plantlab/1 mt19937_64 box-muller";

/// Deterministic generator: std::mt19937_64 (bit-exact by the standard),
/// 53-bit uniforms taken from the top bits, and a Box-Muller Gaussian that
/// returns the cosine branch first and caches the sine branch.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : engine_(seed)
    {
    }

    std::uint64_t next() { return engine_(); }
    double uniform(); // [0, 1)
    double uniform(double lo, double hi);
    double gaussian();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

// SplitMix64 finalizer over (seed, stream); used to derive independent sub-seeds.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct ReferencePlant {
    BlockModel truth;
    double input_min{8.0};  // closed side setting, mm
    double input_max{16.0};
    double output_scale{1.0}; // capacity, t/h
    std::uint64_t seed{0};

    [[nodiscard]] std::string id() const;

    friend bool operator==(const ReferencePlant& a, const ReferencePlant& b)
    {
        return a.truth.structure == b.truth.structure && a.truth.input_nl == b.truth.input_nl
               && a.truth.output_nl == b.truth.output_nl && a.truth.linear == b.truth.linear
               && a.input_min == b.input_min && a.input_max == b.input_max && a.output_scale == b.output_scale
               && a.seed == b.seed;
    }
};

// Hammerstein-Wiener surrogate for a crusher: Laguerre core (p = 4, psi = 0.7),
// strictly increasing input map with several distinct slopes and a strictly
// increasing saturating output map, all perturbed deterministically by `seed`.
[[nodiscard]] ReferencePlant make_reference_plant(std::uint64_t seed);

enum class ExcitationKind { PrbsSteps, Staircase, Impulse, Step };

[[nodiscard]] const char* to_string(ExcitationKind kind) noexcept;
[[nodiscard]] ExcitationKind parse_excitation(const std::string& tag);

// prbs_steps: a new uniform level in [lo, hi] every `dwell` samples.
// staircase: monotone levels from lo to hi, one per dwell.
// impulse: (lo + hi) / 2 at k = 0, lo afterwards.
// step: hi from k = 0 on (the rest level lo is implicit before the record).
[[nodiscard]] std::vector<double> generate_excitation(ExcitationKind kind, std::size_t samples, double lo, double hi,
                                                      std::uint64_t seed, int dwell);

// Noiseless plant response plus i.i.d. N(0, sigma^2) output noise.
[[nodiscard]] Dataset run_experiment(const ReferencePlant& plant, std::span<const double> u, double sigma,
                                     std::uint64_t seed);

// CSV: `# key=value` header lines, a `k,u,y` header row, one row per sample.
void write_dataset(const Dataset& data, const std::string& path);
[[nodiscard]] std::string format_dataset(const Dataset& data);
[[nodiscard]] Dataset read_dataset(const std::string& path);
[[nodiscard]] Dataset parse_dataset(const std::string& text);

} // namespace lagid
