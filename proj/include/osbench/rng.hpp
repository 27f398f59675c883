#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace osbench {

// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Portable seeded generator.
///
/// Raw bits come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. All derived draws (uniform reals, integers, normals, shuffles)
/// are computed here rather than through <random> distributions, whose
/// algorithms are implementation-defined. Two builds on different standard
/// libraries therefore produce identical streams for identical seeds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), rejection-sampled so it is unbiased.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via the Box-Muller transform (one value per call).
    double normal();

    template <class T>
    void shuffle(std::vector<T>& values)
    {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace osbench
