#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace attisim {

// Stable across platforms and standard libraries; used to derive per-stream
// seeds so draws never depend on execution order.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t run_seed, std::uint64_t stream, std::string_view key);

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform integer in [0, bound). Rejection sampling on the raw 64-bit
    // output keeps this identical across standard library implementations.
    std::uint64_t below(std::uint64_t bound);

    // Indices of a uniform sample of `k` out of `n` items without
    // replacement, in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

  private:
    std::mt19937_64 engine_;
};

}  // namespace attisim
