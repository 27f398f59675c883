#pragma once

// Small fixtures shared by the unit tests.

#include "osbench/data.hpp"
#include "osbench/rng.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace test {

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("osbench_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// `classes` Gaussian blobs in `dim` dimensions, `images` images x `patches`
// patches each; class k sits at distance `spread` along axis k % dim.
inline osbench::Dataset blobs(int classes, int images, int patches, int dim, double spread, std::uint64_t seed,
                              double noise = 1.0)
{
    std::set<std::string> names;
    for (int k = 0; k < classes; ++k)
        names.insert("c" + std::to_string(k / 10) + std::to_string(k % 10));
    const auto registry = osbench::make_registry(names);
    osbench::Rng rng(seed);
    std::vector<osbench::Sample> samples;
    for (int k = 0; k < classes; ++k) {
        for (int i = 0; i < images; ++i) {
            for (int p = 0; p < patches; ++p) {
                osbench::Sample s;
                s.image_id = "img" + std::to_string(k) + "_" + std::to_string(i);
                s.patch_index = p;
                s.label = osbench::Label::known(k);
                s.features.resize(static_cast<std::size_t>(dim));
                for (auto& x : s.features)
                    x = noise * rng.normal();
                s.features[static_cast<std::size_t>(k % dim)] += spread * (k / dim % 2 == 0 ? 1.0 : -1.0);
                samples.push_back(std::move(s));
            }
        }
    }
    return osbench::Dataset(std::move(samples), registry, dim);
}

} // namespace test
