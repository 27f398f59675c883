#pragma once

#include "osbench/data.hpp"

#include <cstdint>
#include <filesystem>

namespace osbench {

// Gaussian stand-in for per-camera fingerprints. Each class has a mean on the
// sphere of radius `separation`; every image adds its own offset of norm 0.3;
// every patch adds unit-variance noise. Unknown and extra (known-unknown)
// classes come from the same family; `unknown_shift` moves the unknown
// family's means along a fixed random direction.
struct SynthConfig {
    int n_known = 10;
    int n_unknown = 8;
    int n_extra = 5;
    int images_per_class = 10;
    int test_images_per_class = 5;
    int patches_per_image = 8;
    int dim = 16;
    double separation = 10.0;
    double unknown_shift = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthBenchmark {
    Dataset train;        // known classes
    Dataset test_known;   // new images of the known classes
    Dataset test_unknown; // unknown classes, labeled by their own names
    Dataset test;         // both test sets; registry covers every name
    Dataset extra_ku;     // extra classes for NETOPEN and detectors
};

SynthBenchmark synthesize(const SynthConfig& config);

// Writes train, test_known, test_unknown, test, and extra_ku as
// <name>.manifest + <name>.osfv in `directory`.
void write_benchmark(const SynthBenchmark& benchmark, const std::filesystem::path& directory);

} // namespace osbench
