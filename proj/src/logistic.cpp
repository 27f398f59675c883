#include "osbench/logistic.hpp"

#include "osbench/array_store.hpp"
#include "osbench/error.hpp"
#include "osbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace osbench {

namespace {

void softmax_inplace(std::vector<double>& z)
{
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - m);
        sum += v;
    }
    for (auto& v : z)
        v /= sum;
}

} // namespace

std::vector<double> LogisticModel::probabilities(std::span<const double> x) const
{
    if (x.size() != weights.cols())
        throw InputError("LogisticModel: dimension mismatch");
    std::vector<double> z(weights.rows());
    for (std::size_t c = 0; c < z.size(); ++c)
        z[c] = dot(weights.row(c), x) + bias[c];
    softmax_inplace(z);
    return z;
}

void LogisticModel::save(ArrayStore& store, const std::string& prefix) const
{
    store.put_matrix(prefix + "weights", weights);
    store.put(prefix + "bias", bias);
}

LogisticModel LogisticModel::load(const ArrayStore& store, const std::string& prefix)
{
    return {store.get_matrix(prefix + "weights"), store.get(prefix + "bias")};
}

double logistic_objective(const LogisticModel& model, const Matrix& x, std::span<const int> y, double l2,
                          LogisticModel* gradient)
{
    const std::size_t n = x.rows();
    const std::size_t k = model.weights.rows();
    const std::size_t d = model.weights.cols();
    if (gradient) {
        gradient->weights = Matrix(k, d);
        gradient->bias.assign(k, 0.0);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = model.probabilities(x.row(i));
        const auto label = static_cast<std::size_t>(y[i]);
        loss -= std::log(std::max(p[label], 1e-300));
        if (gradient) {
            for (std::size_t c = 0; c < k; ++c) {
                const double err = (p[c] - (c == label ? 1.0 : 0.0)) / static_cast<double>(n);
                auto grow = gradient->weights.row(c);
                const auto xi = x.row(i);
                for (std::size_t j = 0; j < d; ++j)
                    grow[j] += err * xi[j];
                gradient->bias[c] += err;
            }
        }
    }
    loss /= static_cast<double>(std::max<std::size_t>(n, 1));
    double norm2 = 0.0;
    for (double w : model.weights.data())
        norm2 += w * w;
    loss += 0.5 * l2 * norm2;
    if (gradient) {
        auto& gw = gradient->weights.data();
        const auto& w = model.weights.data();
        for (std::size_t j = 0; j < gw.size(); ++j)
            gw[j] += l2 * w[j];
    }
    return loss;
}

LogisticModel logistic_train(const Matrix& x, std::span<const int> y, int n_classes, const LogisticOptions& options)
{
    if (n_classes < 2)
        throw InputError("logistic_train: need at least 2 classes");
    if (x.rows() == 0 || y.size() != x.rows())
        throw InputError("logistic_train: empty or misaligned training data");
    if (options.l2 < 0.0 || !(options.learning_rate > 0.0) || options.epochs < 1)
        throw InputError("logistic_train: need l2 >= 0, lr > 0 and epochs >= 1");
    for (int label : y)
        if (label < 0 || label >= n_classes)
            throw InputError("logistic_train: label out of range");

    const std::size_t n = x.rows();
    const std::size_t k = static_cast<std::size_t>(n_classes);
    const std::size_t d = x.cols();
    LogisticModel model{Matrix(k, d), std::vector<double>(k, 0.0)};
    Rng rng(options.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = std::max<std::size_t>(1, options.batch_size);

    Matrix grad_w(k, d);
    std::vector<double> grad_b(k);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            const double m = static_cast<double>(stop - start);
            std::fill(grad_w.data().begin(), grad_w.data().end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t i = order[b];
                const auto p = model.probabilities(x.row(i));
                const auto xi = x.row(i);
                for (std::size_t c = 0; c < k; ++c) {
                    const double err = (p[c] - (static_cast<int>(c) == y[i] ? 1.0 : 0.0)) / m;
                    auto g = grad_w.row(c);
                    for (std::size_t j = 0; j < d; ++j)
                        g[j] += err * xi[j];
                    grad_b[c] += err;
                }
            }
            auto& w = model.weights.data();
            const auto& gw = grad_w.data();
            for (std::size_t j = 0; j < w.size(); ++j)
                w[j] -= options.learning_rate * (gw[j] + options.l2 * w[j]);
            for (std::size_t c = 0; c < k; ++c)
                model.bias[c] -= options.learning_rate * grad_b[c];
        }
    }
    if (!std::isfinite(logistic_objective(model, x, y, options.l2)))
        throw ConvergenceError("logistic_train: training loss diverged; lower the learning rate");
    return model;
}

} // namespace osbench
