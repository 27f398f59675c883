#include "osbench/svm.hpp"

#include "osbench/array_store.hpp"
#include "osbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

namespace osbench {

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kFullGramLimit = 6000;

// Kernel rows for the solver: a full Gram matrix for moderate N, otherwise
// rows computed on demand with a small FIFO cache.
class KernelRows {
public:
    KernelRows(const KernelSpec& kernel, const Matrix& x) : kernel_(kernel), x_(x)
    {
        if (x.rows() <= kFullGramLimit)
            full_ = gram_matrix(kernel, x);
        diag_.resize(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i)
            diag_[i] = kernel_eval(kernel, x.row(i), x.row(i));
    }

    std::span<const double> row(std::size_t i)
    {
        if (!full_.empty())
            return full_.row(i);
        auto it = cache_.find(i);
        if (it != cache_.end())
            return it->second;
        if (order_.size() >= kCacheRows) {
            cache_.erase(order_.front());
            order_.pop_front();
        }
        std::vector<double> values(x_.rows());
        for (std::size_t j = 0; j < x_.rows(); ++j)
            values[j] = kernel_eval(kernel_, x_.row(i), x_.row(j));
        order_.push_back(i);
        return cache_.emplace(i, std::move(values)).first->second;
    }

    double diag(std::size_t i) const { return diag_[i]; }

private:
    static constexpr std::size_t kCacheRows = 256;
    const KernelSpec& kernel_;
    const Matrix& x_;
    Matrix full_;
    std::vector<double> diag_;
    std::unordered_map<std::size_t, std::vector<double>> cache_;
    std::deque<std::size_t> order_;
};

} // namespace

BinarySvm::BinarySvm(KernelSpec kernel, Matrix support_vectors, std::vector<double> coef, double bias)
    : kernel_(kernel), support_vectors_(std::move(support_vectors)), coef_(std::move(coef)), bias_(bias)
{
    if (support_vectors_.rows() != coef_.size())
        throw InputError("BinarySvm: support vector count differs from coefficient count");
    if (kernel_.kind == KernelKind::Linear) {
        weights_.assign(support_vectors_.cols(), 0.0);
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            const auto sv = support_vectors_.row(i);
            for (std::size_t d = 0; d < weights_.size(); ++d)
                weights_[d] += coef_[i] * sv[d];
        }
    }
}

double BinarySvm::decision(std::span<const double> x) const
{
    if (kernel_.kind == KernelKind::Linear) {
        if (!weights_.empty() && x.size() != weights_.size())
            throw InputError("BinarySvm::decision: dimension mismatch");
        return (weights_.empty() ? 0.0 : dot(weights_, x)) + bias_;
    }
    double g = bias_;
    for (std::size_t i = 0; i < coef_.size(); ++i)
        g += coef_[i] * kernel_eval(kernel_, support_vectors_.row(i), x);
    return g;
}

void BinarySvm::save(ArrayStore& store, const std::string& prefix) const
{
    store.put_scalar(prefix + "kernel", kernel_.kind == KernelKind::Linear ? 0.0 : 1.0);
    store.put_scalar(prefix + "gamma", kernel_.gamma);
    store.put_matrix(prefix + "sv", support_vectors_);
    store.put(prefix + "coef", coef_);
    store.put_scalar(prefix + "bias", bias_);
}

BinarySvm BinarySvm::load(const ArrayStore& store, const std::string& prefix)
{
    KernelSpec kernel;
    kernel.kind = store.scalar(prefix + "kernel") == 0.0 ? KernelKind::Linear : KernelKind::Rbf;
    kernel.gamma = store.scalar(prefix + "gamma");
    return BinarySvm(kernel, store.get_matrix(prefix + "sv"), store.get(prefix + "coef"), store.scalar(prefix + "bias"));
}

SvmFit svm_train_binary(const Matrix& x, std::span<const int> y, const SvmOptions& options)
{
    const std::size_t n = x.rows();
    if (y.size() != n)
        throw InputError("svm_train_binary: label count differs from sample count");
    if (!(options.C > 0.0))
        throw InputError("svm_train_binary: C must be positive");
    options.kernel.validate();
    bool has_pos = false;
    bool has_neg = false;
    for (int label : y) {
        if (label == 1)
            has_pos = true;
        else if (label == -1)
            has_neg = true;
        else
            throw InputError("svm_train_binary: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw InputError("svm_train_binary: both labels must be present");

    const double C = options.C;
    const std::size_t max_iter = options.max_iter ? options.max_iter : 10000 * n;
    KernelRows rows(options.kernel, x);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // G = Q alpha - e
    const auto yd = [&](std::size_t i) { return static_cast<double>(y[i]); };
    const auto is_upper = [&](std::size_t i) { return alpha[i] >= C; };
    const auto is_lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

    SvmFit fit;
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        // First index: maximal violation among I_up.
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i_sel = -1;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1) {
                if (!is_upper(t) && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i_sel = static_cast<std::ptrdiff_t>(t);
                }
            } else if (!is_lower(t) && grad[t] >= gmax) {
                gmax = grad[t];
                i_sel = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (i_sel < 0)
            break;
        const std::size_t i = static_cast<std::size_t>(i_sel);
        const auto k_i = rows.row(i);

        // Second index: largest objective decrease among I_low.
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t j_sel = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double q_it = yd(i) * yd(t) * k_i[t];
            if (y[t] == 1) {
                if (!is_lower(t)) {
                    const double grad_diff = gmax + grad[t];
                    gmax2 = std::max(gmax2, grad[t]);
                    if (grad_diff > 0.0) {
                        double quad = rows.diag(i) + rows.diag(t) - 2.0 * yd(i) * q_it;
                        quad = quad > 0.0 ? quad : kTau;
                        const double obj = -(grad_diff * grad_diff) / quad;
                        if (obj <= best) {
                            best = obj;
                            j_sel = static_cast<std::ptrdiff_t>(t);
                        }
                    }
                }
            } else if (!is_upper(t)) {
                const double grad_diff = gmax - grad[t];
                gmax2 = std::max(gmax2, -grad[t]);
                if (grad_diff > 0.0) {
                    double quad = rows.diag(i) + rows.diag(t) + 2.0 * yd(i) * q_it;
                    quad = quad > 0.0 ? quad : kTau;
                    const double obj = -(grad_diff * grad_diff) / quad;
                    if (obj <= best) {
                        best = obj;
                        j_sel = static_cast<std::ptrdiff_t>(t);
                    }
                }
            }
        }
        if (gmax + gmax2 < options.tol || j_sel < 0) {
            fit.converged = true;
            break;
        }
        const std::size_t j = static_cast<std::size_t>(j_sel);
        const auto k_j = rows.row(j);
        const double q_ij = yd(i) * yd(j) * k_i[j];

        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = rows.diag(i) + rows.diag(j) + 2.0 * q_ij;
            quad = quad > 0.0 ? quad : kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = rows.diag(i) + rows.diag(j) - 2.0 * q_ij;
            quad = quad > 0.0 ? quad : kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double d_ai = alpha[i] - old_ai;
        const double d_aj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += yd(t) * (yd(i) * k_i[t] * d_ai + yd(j) * k_j[t] * d_aj);
    }
    fit.iterations = iter;

    // Offset from free support vectors, or the midpoint of the feasible range.
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = yd(t) * grad[t];
        if (is_upper(t)) {
            if (y[t] == -1)
                upper = std::min(upper, yg);
            else
                lower = std::max(lower, yg);
        } else if (is_lower(t)) {
            if (y[t] == 1)
                upper = std::min(upper, yg);
            else
                lower = std::max(lower, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free ? sum_free / static_cast<double>(n_free) : (upper + lower) / 2.0;

    std::size_t n_sv = 0;
    for (double a : alpha)
        n_sv += a > 0.0 ? 1 : 0;
    Matrix sv(n_sv, x.cols());
    std::vector<double> coef;
    coef.reserve(n_sv);
    for (std::size_t t = 0, k = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            std::copy(x.row(t).begin(), x.row(t).end(), sv.row(k).begin());
            coef.push_back(alpha[t] * yd(t));
            ++k;
        }
    }
    fit.model = BinarySvm(options.kernel, std::move(sv), std::move(coef), -rho);
    fit.alpha = std::move(alpha);
    return fit;
}

} // namespace osbench
