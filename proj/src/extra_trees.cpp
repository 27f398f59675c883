#include "osbench/extra_trees.hpp"

#include "osbench/array_store.hpp"
#include "osbench/error.hpp"
#include "osbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace osbench {

namespace {

double gini(const std::vector<double>& counts, double total)
{
    if (total <= 0.0)
        return 0.0;
    double s = 0.0;
    for (double c : counts)
        s += (c / total) * (c / total);
    return 1.0 - s;
}

} // namespace

std::vector<double> ExtraTreesForest::probabilities(std::span<const double> x) const
{
    std::vector<double> p(n_classes_, 0.0);
    for (const auto& tree : trees_) {
        int node = 0;
        while (tree.feature[node] >= 0) {
            const auto f = static_cast<std::size_t>(tree.feature[node]);
            if (f >= x.size())
                throw InputError("ExtraTreesForest: dimension mismatch");
            node = x[f] < tree.threshold[node] ? tree.left[node] : tree.right[node];
        }
        const auto offset = static_cast<std::size_t>(tree.leaf_offset[node]);
        for (std::size_t c = 0; c < n_classes_; ++c)
            p[c] += tree.distribution[offset + c];
    }
    for (auto& v : p)
        v /= static_cast<double>(trees_.size());
    return p;
}

void ExtraTreesForest::save(ArrayStore& store, const std::string& prefix) const
{
    store.put_scalar(prefix + "n_classes", static_cast<double>(n_classes_));
    store.put_scalar(prefix + "n_trees", static_cast<double>(trees_.size()));
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        const auto& tree = trees_[t];
        const std::string p = prefix + "tree" + std::to_string(t) + ".";
        const auto as_double = [](const std::vector<int>& v) { return std::vector<double>(v.begin(), v.end()); };
        store.put(p + "feature", as_double(tree.feature));
        store.put(p + "threshold", tree.threshold);
        store.put(p + "left", as_double(tree.left));
        store.put(p + "right", as_double(tree.right));
        store.put(p + "leaf_offset", as_double(tree.leaf_offset));
        store.put(p + "distribution", tree.distribution);
    }
}

ExtraTreesForest ExtraTreesForest::load(const ArrayStore& store, const std::string& prefix)
{
    ExtraTreesForest forest;
    forest.n_classes_ = static_cast<std::size_t>(store.scalar(prefix + "n_classes"));
    const auto n_trees = static_cast<std::size_t>(store.scalar(prefix + "n_trees"));
    const auto as_int = [](const std::vector<double>& v) { return std::vector<int>(v.begin(), v.end()); };
    for (std::size_t t = 0; t < n_trees; ++t) {
        const std::string p = prefix + "tree" + std::to_string(t) + ".";
        Tree tree;
        tree.feature = as_int(store.get(p + "feature"));
        tree.threshold = store.get(p + "threshold");
        tree.left = as_int(store.get(p + "left"));
        tree.right = as_int(store.get(p + "right"));
        tree.leaf_offset = as_int(store.get(p + "leaf_offset"));
        tree.distribution = store.get(p + "distribution");
        const std::size_t nodes = tree.feature.size();
        if (nodes == 0 || tree.threshold.size() != nodes || tree.left.size() != nodes || tree.right.size() != nodes
            || tree.leaf_offset.size() != nodes)
            throw InputError("malformed tree " + std::to_string(t));
        forest.trees_.push_back(std::move(tree));
    }
    if (forest.trees_.empty())
        throw InputError("forest has no trees");
    return forest;
}

ExtraTreesForest train_extra_trees(const Matrix& x, std::span<const int> y, int n_classes,
                                   const ExtraTreesOptions& options)
{
    if (x.rows() == 0 || y.size() != x.rows())
        throw InputError("train_extra_trees: empty or misaligned training data");
    if (n_classes < 1 || options.n_trees < 1 || options.min_leaf < 1)
        throw InputError("train_extra_trees: need n_classes, n_trees and min_leaf >= 1");
    for (int label : y)
        if (label < 0 || label >= n_classes)
            throw InputError("train_extra_trees: label out of range");

    const std::size_t dim = x.cols();
    const std::size_t k_features =
        options.candidate_features > 0
            ? static_cast<std::size_t>(options.candidate_features)
            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(std::max<std::size_t>(dim, 1)))));
    const auto nc = static_cast<std::size_t>(n_classes);
    const auto min_leaf = static_cast<std::size_t>(options.min_leaf);

    ExtraTreesForest forest;
    forest.n_classes_ = nc;
    Rng rng(options.seed);

    for (int t = 0; t < options.n_trees; ++t) {
        ExtraTreesForest::Tree tree;
        std::vector<std::size_t> all(x.rows());
        std::iota(all.begin(), all.end(), 0);

        struct Pending {
            int node;
            std::vector<std::size_t> members;
        };
        std::vector<Pending> stack;
        const auto new_node = [&tree] {
            tree.feature.push_back(-1);
            tree.threshold.push_back(0.0);
            tree.left.push_back(-1);
            tree.right.push_back(-1);
            tree.leaf_offset.push_back(-1);
            return static_cast<int>(tree.feature.size() - 1);
        };
        stack.push_back({new_node(), std::move(all)});

        while (!stack.empty()) {
            Pending cur = std::move(stack.back());
            stack.pop_back();

            std::vector<double> counts(nc, 0.0);
            for (std::size_t i : cur.members)
                counts[static_cast<std::size_t>(y[i])] += 1.0;
            const double total = static_cast<double>(cur.members.size());
            const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;

            const auto make_leaf = [&] {
                tree.leaf_offset[cur.node] = static_cast<int>(tree.distribution.size());
                for (double c : counts)
                    tree.distribution.push_back(c / total);
            };
            if (pure || cur.members.size() < 2 * min_leaf) {
                make_leaf();
                continue;
            }

            // Features that vary inside the node, with their ranges.
            std::vector<std::size_t> usable;
            std::vector<std::pair<double, double>> ranges;
            for (std::size_t f = 0; f < dim; ++f) {
                double lo = x(cur.members.front(), f);
                double hi = lo;
                for (std::size_t i : cur.members) {
                    lo = std::min(lo, x(i, f));
                    hi = std::max(hi, x(i, f));
                }
                if (hi > lo) {
                    usable.push_back(f);
                    ranges.emplace_back(lo, hi);
                }
            }
            if (usable.empty()) {
                make_leaf();
                continue;
            }

            std::vector<std::size_t> order(usable.size());
            std::iota(order.begin(), order.end(), 0);
            const std::size_t draws = std::min(k_features, usable.size());
            // Partial Fisher-Yates: the first `draws` entries are a uniform sample.
            for (std::size_t i = 0; i < draws; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
                std::swap(order[i], order[j]);
            }

            const double parent_gini = gini(counts, total);
            double best_gain = -1.0;
            std::size_t best_feature = 0;
            double best_cut = 0.0;
            for (std::size_t draw = 0; draw < draws; ++draw) {
                const std::size_t f = usable[order[draw]];
                const auto [lo, hi] = ranges[order[draw]];
                double cut = rng.uniform(lo, hi);
                if (!(cut > lo))
                    cut = std::nextafter(lo, hi);
                std::vector<double> left(nc, 0.0);
                double n_left = 0.0;
                for (std::size_t i : cur.members) {
                    if (x(i, f) < cut) {
                        left[static_cast<std::size_t>(y[i])] += 1.0;
                        n_left += 1.0;
                    }
                }
                const double n_right = total - n_left;
                if (n_left < static_cast<double>(min_leaf) || n_right < static_cast<double>(min_leaf))
                    continue;
                std::vector<double> right(nc);
                for (std::size_t c = 0; c < nc; ++c)
                    right[c] = counts[c] - left[c];
                const double gain =
                    parent_gini - (n_left / total) * gini(left, n_left) - (n_right / total) * gini(right, n_right);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_cut = cut;
                }
            }
            if (best_gain < 0.0) {
                make_leaf();
                continue;
            }

            std::vector<std::size_t> left_members;
            std::vector<std::size_t> right_members;
            for (std::size_t i : cur.members)
                (x(i, best_feature) < best_cut ? left_members : right_members).push_back(i);
            tree.feature[cur.node] = static_cast<int>(best_feature);
            tree.threshold[cur.node] = best_cut;
            const int l = new_node();
            const int r = new_node();
            tree.left[cur.node] = l;
            tree.right[cur.node] = r;
            stack.push_back({r, std::move(right_members)});
            stack.push_back({l, std::move(left_members)});
        }
        forest.trees_.push_back(std::move(tree));
    }
    return forest;
}

} // namespace osbench
