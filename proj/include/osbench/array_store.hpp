#pragma once

#include "osbench/matrix.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace osbench {

// Ordered collection of named float64 arrays; the numeric payload of a
// serialized model. Insertion order is preserved so serialization is stable.
class ArrayStore {
public:
    void put(std::string name, std::vector<double> values);
    void put_scalar(std::string name, double value) { put(std::move(name), {value}); }
    void put_matrix(const std::string& name, const Matrix& m);

    bool contains(std::string_view name) const;
    const std::vector<double>& get(std::string_view name) const;
    double scalar(std::string_view name) const;
    Matrix get_matrix(const std::string& name) const;

    const std::vector<std::pair<std::string, std::vector<double>>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::vector<double>>> entries_;
};

} // namespace osbench
