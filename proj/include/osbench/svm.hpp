#pragma once

#include "osbench/kernel.hpp"
#include "osbench/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace osbench {

class ArrayStore;

struct SvmOptions {
    double C = 1.0;
    KernelSpec kernel;
    double tol = 1e-3;
    // 0 selects the default cap of 10^4 * N iterations.
    std::size_t max_iter = 0;
};

// Kernel expansion g(x) = sum_i coef_i K(sv_i, x) + bias with coef_i = alpha_i y_i.
class BinarySvm {
public:
    BinarySvm() = default;
    BinarySvm(KernelSpec kernel, Matrix support_vectors, std::vector<double> coef, double bias);

    double decision(std::span<const double> x) const;

    const KernelSpec& kernel() const { return kernel_; }
    const Matrix& support_vectors() const { return support_vectors_; }
    const std::vector<double>& coef() const { return coef_; }
    double bias() const { return bias_; }

    void save(ArrayStore& store, const std::string& prefix) const;
    static BinarySvm load(const ArrayStore& store, const std::string& prefix);

private:
    KernelSpec kernel_;
    Matrix support_vectors_;
    std::vector<double> coef_;
    double bias_ = 0.0;
    // Collapsed primal weights for the linear kernel.
    std::vector<double> weights_;
};

struct SvmFit {
    BinarySvm model;
    std::vector<double> alpha; // dual variables, one per training row
    std::size_t iterations = 0;
    bool converged = false;
};

// Soft-margin C-SVM dual solved by sequential pairwise optimization with
// second-order working-pair selection. Labels are +1/-1. Stops when the
// maximal KKT violation drops below tol, or at the iteration cap (the fit is
// returned with converged = false).
SvmFit svm_train_binary(const Matrix& x, std::span<const int> y, const SvmOptions& options);

} // namespace osbench
