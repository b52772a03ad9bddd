#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace protoneuro {

// Per-component seed: FNV-1a hash of the component name mixed into the
// top-level seed with splitmix64. Streams of distinct components are
// independent, so adding a component never perturbs the others.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component);

// Seeded generator with distributions implemented on top of the raw
// mt19937_64 stream. The standard <random> distributions are not
// bit-reproducible across standard library implementations; these are.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace protoneuro
