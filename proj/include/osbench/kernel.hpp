#pragma once

#include "osbench/matrix.hpp"

#include <span>
#include <string>
#include <string_view>

namespace osbench {

enum class KernelKind { Linear, Rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 0.0; // RBF only; must be > 0 when evaluated

    static KernelSpec linear() { return {KernelKind::Linear, 0.0}; }
    static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma}; }

    void validate() const;
    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string_view kernel_name(KernelKind kind);
KernelKind parse_kernel(std::string_view name);

// LINEAR: <x, y>; RBF: exp(-gamma * |x - y|^2).
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// Gram matrix K(i, j) = kernel(rows i and j of x).
Matrix gram_matrix(const KernelSpec& spec, const Matrix& x);

} // namespace osbench
