#include "osbench/svdd.hpp"

#include "osbench/array_store.hpp"
#include "osbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace osbench {

EnclosingBall::EnclosingBall(KernelSpec kernel, Matrix support_vectors, std::vector<double> alpha,
                             double center_norm2, double radius)
    : kernel_(kernel), support_vectors_(std::move(support_vectors)), alpha_(std::move(alpha)),
      center_norm2_(center_norm2), radius_(radius)
{
    if (support_vectors_.rows() != alpha_.size())
        throw InputError("EnclosingBall: support vector count differs from weight count");
}

double EnclosingBall::distance(std::span<const double> x) const
{
    double cross = 0.0;
    for (std::size_t i = 0; i < alpha_.size(); ++i)
        cross += alpha_[i] * kernel_eval(kernel_, support_vectors_.row(i), x);
    const double d2 = kernel_eval(kernel_, x, x) - 2.0 * cross + center_norm2_;
    return std::sqrt(std::max(0.0, d2));
}

void EnclosingBall::save(ArrayStore& store, const std::string& prefix) const
{
    store.put_scalar(prefix + "kernel", kernel_.kind == KernelKind::Linear ? 0.0 : 1.0);
    store.put_scalar(prefix + "gamma", kernel_.gamma);
    store.put_matrix(prefix + "sv", support_vectors_);
    store.put(prefix + "alpha", alpha_);
    store.put_scalar(prefix + "center_norm2", center_norm2_);
    store.put_scalar(prefix + "radius", radius_);
}

EnclosingBall EnclosingBall::load(const ArrayStore& store, const std::string& prefix)
{
    KernelSpec kernel;
    kernel.kind = store.scalar(prefix + "kernel") == 0.0 ? KernelKind::Linear : KernelKind::Rbf;
    kernel.gamma = store.scalar(prefix + "gamma");
    return EnclosingBall(kernel, store.get_matrix(prefix + "sv"), store.get(prefix + "alpha"),
                         store.scalar(prefix + "center_norm2"), store.scalar(prefix + "radius"));
}

BallFit fit_enclosing_ball(const Matrix& x, const BallOptions& options)
{
    const std::size_t n = x.rows();
    if (n == 0)
        throw InputError("fit_enclosing_ball: no training data");
    if (!(options.nu > 0.0 && options.nu <= 1.0))
        throw InputError("fit_enclosing_ball: nu must lie in (0, 1]");
    options.kernel.validate();

    const double cap = std::min(1.0, 1.0 / (options.nu * static_cast<double>(n)));
    const Matrix k = gram_matrix(options.kernel, x);

    // Feasible start: fill the first coordinates up to the cap.
    std::vector<double> alpha(n, 0.0);
    double remaining = 1.0;
    for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
        alpha[i] = std::min(cap, remaining);
        remaining -= alpha[i];
    }
    // grad_i = 2 (K a)_i - K_ii
    std::vector<double> grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            s += k(i, j) * alpha[j];
        grad[i] = 2.0 * s - k(i, i);
    }

    BallFit fit;
    const std::size_t max_iter = options.max_iter ? options.max_iter : 10000 * n;
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        // Move mass from the coordinate with the largest gradient (that still
        // has mass) to the one with the smallest gradient (that has room).
        std::ptrdiff_t up = -1;
        std::ptrdiff_t down = -1;
        double g_up = std::numeric_limits<double>::infinity();
        double g_down = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (alpha[t] < cap && grad[t] < g_up) {
                g_up = grad[t];
                up = static_cast<std::ptrdiff_t>(t);
            }
            if (alpha[t] > 0.0 && grad[t] > g_down) {
                g_down = grad[t];
                down = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (up < 0 || down < 0 || g_down - g_up < options.tol) {
            fit.converged = true;
            break;
        }
        const std::size_t i = static_cast<std::size_t>(up);
        const std::size_t j = static_cast<std::size_t>(down);
        const double curvature = 2.0 * (k(i, i) + k(j, j) - 2.0 * k(i, j));
        double step = curvature > 0.0 ? (g_down - g_up) / curvature : std::numeric_limits<double>::infinity();
        step = std::min({step, cap - alpha[i], alpha[j]});
        alpha[i] += step;
        alpha[j] -= step;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += 2.0 * step * (k(t, i) - k(t, j));
    }
    fit.iterations = iter;

    double center_norm2 = 0.0;
    std::vector<double> ka(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            ka[i] += k(i, j) * alpha[j];
        center_norm2 += alpha[i] * ka[i];
    }
    const auto dist2 = [&](std::size_t i) { return k(i, i) - 2.0 * ka[i] + center_norm2; };

    // Radius from points on the boundary; otherwise the midpoint between the
    // farthest interior point and the nearest outlier.
    constexpr double kEdge = 1e-12;
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double inside_max = 0.0;
    double outside_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > kEdge && alpha[i] < cap - kEdge) {
            free_sum += dist2(i);
            ++free_count;
        } else if (alpha[i] <= kEdge) {
            inside_max = std::max(inside_max, dist2(i));
        } else {
            outside_min = std::min(outside_min, dist2(i));
        }
    }
    double r2 = 0.0;
    if (free_count)
        r2 = free_sum / static_cast<double>(free_count);
    else if (std::isfinite(outside_min))
        r2 = (inside_max + outside_min) / 2.0;
    else
        r2 = inside_max;

    std::size_t n_sv = 0;
    for (double a : alpha)
        n_sv += a > 0.0 ? 1 : 0;
    Matrix sv(n_sv, x.cols());
    std::vector<double> weights;
    weights.reserve(n_sv);
    for (std::size_t i = 0, r = 0; i < n; ++i) {
        if (alpha[i] > 0.0) {
            std::copy(x.row(i).begin(), x.row(i).end(), sv.row(r).begin());
            weights.push_back(alpha[i]);
            ++r;
        }
    }
    fit.model = EnclosingBall(options.kernel, std::move(sv), std::move(weights), center_norm2,
                              std::sqrt(std::max(0.0, r2)));
    fit.alpha = std::move(alpha);
    return fit;
}

} // namespace osbench
