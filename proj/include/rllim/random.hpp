#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rllim {

// Deterministic xoshiro256** stream. Every randomized stage of the
// pipeline (splits, network init, Bernoulli sampling, perturbations,
// bootstraps) pulls from its own child source derived from the root
// seed by a labeled offset, so streams stay independent of each other
// and of evaluation order. One instance is single-threaded; parallel
// code derives one child per work item.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    // New independent stream keyed on (this seed, label, index).
    RandomSource child(std::string_view label, std::uint64_t index = 0) const;

    std::uint64_t next_u64();

    // [0, 1)
    double uniform();
    double uniform(double lo, double hi);

    // standard normal, Box-Muller
    double normal();

    bool bernoulli(double p);

    // [0, n), unbiased
    std::size_t uniform_index(std::size_t n);

    void shuffle(std::span<std::size_t> values);

    // k distinct draws from [0, n); order is the sampled order
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
    std::vector<std::size_t> sample_with_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t seed_ = 0;
    std::uint64_t state_[4] = {0, 0, 0, 0};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rllim
