#pragma once

// Internal interface between the fit dispatcher and the per-variant models.

#include "osbench/classifiers.hpp"
#include "osbench/matrix.hpp"

#include <memory>
#include <string_view>
#include <vector>

namespace osbench::detail {

// Standardized training data with labels mapped to slot indices 0..n-1.
struct FitContext {
    ModelInfo info;
    Matrix z;
    std::vector<int> y;
    std::size_t n_classes = 0;
};

double require(const Hyperparams& hp, std::string_view key);
double value_or(const Hyperparams& hp, std::string_view key, double fallback);

std::unique_ptr<TrainedModel> fit_variant(FitContext ctx);
std::unique_ptr<TrainedModel> restore_variant(ModelInfo info, const ArrayStore& store);

} // namespace osbench::detail
