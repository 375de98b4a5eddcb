#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace forge {

/// Counter-based generator: output i is a pure function of (key, i), so a
/// stream can be split per document and replayed without shared state.
/// Draws never go through std distributions, whose algorithms differ
/// between standard libraries.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    constexpr explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return mix(key_ + mix(counter_++ + 0x9e3779b97f4a7c15ULL)); }

    /// Independent child stream. Does not advance this generator.
    constexpr CounterRng split(std::uint64_t stream) const noexcept {
        CounterRng child;
        child.key_ = mix(key_ ^ mix(stream + 0xbb67ae8584caa73bULL));
        return child;
    }

    /// Uniform integer in [0, n). n must be > 0.
    constexpr std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's multiply-shift with rejection.
        std::uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

    template <typename T> constexpr void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

  private:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace forge
