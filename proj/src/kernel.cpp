#include "osbench/kernel.hpp"

#include "osbench/error.hpp"

#include <cmath>

namespace osbench {

void KernelSpec::validate() const
{
    if (kind == KernelKind::Rbf && !(gamma > 0.0))
        throw InputError("RBF kernel needs gamma > 0");
}

std::string_view kernel_name(KernelKind kind)
{
    return kind == KernelKind::Linear ? "linear" : "rbf";
}

KernelKind parse_kernel(std::string_view name)
{
    if (name == "linear")
        return KernelKind::Linear;
    if (name == "rbf")
        return KernelKind::Rbf;
    throw InputError("unknown kernel '" + std::string(name) + "'");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw InputError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs "
                         + std::to_string(y.size()) + ")");
    if (spec.kind == KernelKind::Linear)
        return dot(x, y);
    spec.validate();
    return std::exp(-spec.gamma * squared_distance(x, y));
}

Matrix gram_matrix(const KernelSpec& spec, const Matrix& x)
{
    const std::size_t n = x.rows();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel_eval(spec, x.row(i), x.row(j));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

} // namespace osbench
