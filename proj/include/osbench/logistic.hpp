#pragma once

#include "osbench/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace osbench {

class ArrayStore;

// Multinomial logistic regression: p = softmax(W x + b).
struct LogisticModel {
    Matrix weights;            // n_classes x dim
    std::vector<double> bias;  // n_classes

    std::vector<double> probabilities(std::span<const double> x) const;

    void save(ArrayStore& store, const std::string& prefix) const;
    static LogisticModel load(const ArrayStore& store, const std::string& prefix);
};

struct LogisticOptions {
    double l2 = 1e-4;
    double learning_rate = 0.1;
    int epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
};

// Mean cross-entropy plus (l2 / 2) |W|^2 (bias unpenalized). When `gradient`
// is non-null it receives d(objective)/d(W, b) in the same layout.
double logistic_objective(const LogisticModel& model, const Matrix& x, std::span<const int> y, double l2,
                          LogisticModel* gradient = nullptr);

// Mini-batch gradient descent from zero weights; batches are drawn from a
// seeded shuffle each epoch. Class labels are 0..n_classes-1.
LogisticModel logistic_train(const Matrix& x, std::span<const int> y, int n_classes, const LogisticOptions& options);

} // namespace osbench
