#pragma once

#include "osbench/kernel.hpp"
#include "osbench/matrix.hpp"

#include <span>
#include <string>
#include <vector>

namespace osbench {

class ArrayStore;

struct BallOptions {
    // Upper bound on the fraction of training points left outside the ball.
    double nu = 0.1;
    KernelSpec kernel;
    double tol = 1e-4;
    std::size_t max_iter = 0; // 0: 10^4 * N
};

// Minimum enclosing ball in kernel feature space with slack (support vector
// data description). score(x) = radius - distance(x, center); nonnegative
// inside the ball.
class EnclosingBall {
public:
    EnclosingBall() = default;
    EnclosingBall(KernelSpec kernel, Matrix support_vectors, std::vector<double> alpha, double center_norm2,
                  double radius);

    double distance(std::span<const double> x) const;
    double score(std::span<const double> x) const { return radius_ - distance(x); }
    double radius() const { return radius_; }
    const std::vector<double>& alpha() const { return alpha_; }

    void save(ArrayStore& store, const std::string& prefix) const;
    static EnclosingBall load(const ArrayStore& store, const std::string& prefix);

private:
    KernelSpec kernel_;
    Matrix support_vectors_;
    std::vector<double> alpha_;
    double center_norm2_ = 0.0;
    double radius_ = 0.0;
};

struct BallFit {
    EnclosingBall model;
    std::vector<double> alpha; // dual variables over all training rows
    std::size_t iterations = 0;
    bool converged = false;
};

// Solves  min a'Ka - sum_i a_i K_ii  s.t. sum a = 1, 0 <= a_i <= 1/(nu N)
// by pairwise coordinate steps that keep every iterate feasible.
BallFit fit_enclosing_ball(const Matrix& x, const BallOptions& options);

} // namespace osbench
