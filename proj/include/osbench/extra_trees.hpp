#pragma once

#include "osbench/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace osbench {

class ArrayStore;

struct ExtraTreesOptions {
    int n_trees = 100;
    int candidate_features = 0; // K; 0 selects ceil(sqrt(dim))
    int min_leaf = 1;
    std::uint64_t seed = 0;
};

// Extremely randomized trees (no bootstrap). At each node K features are drawn
// among those not constant in the node, each with a uniform random cut between
// its node minimum and maximum; the cut with the largest Gini reduction wins.
// Leaves store normalized class frequencies.
class ExtraTreesForest {
public:
    std::vector<double> probabilities(std::span<const double> x) const;
    std::size_t n_classes() const { return n_classes_; }
    std::size_t n_trees() const { return trees_.size(); }

    void save(ArrayStore& store, const std::string& prefix) const;
    static ExtraTreesForest load(const ArrayStore& store, const std::string& prefix);

    friend ExtraTreesForest train_extra_trees(const Matrix& x, std::span<const int> y, int n_classes,
                                              const ExtraTreesOptions& options);

private:
    struct Tree {
        std::vector<int> feature;        // -1 marks a leaf
        std::vector<double> threshold;   // go left when x[feature] < threshold
        std::vector<int> left;
        std::vector<int> right;
        std::vector<int> leaf_offset;    // into `distribution` for leaves
        std::vector<double> distribution;
    };

    std::size_t n_classes_ = 0;
    std::vector<Tree> trees_;
};

ExtraTreesForest train_extra_trees(const Matrix& x, std::span<const int> y, int n_classes,
                                   const ExtraTreesOptions& options);

} // namespace osbench
