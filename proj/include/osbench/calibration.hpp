#pragma once

#include <span>
#include <string>

namespace osbench {

class ArrayStore;

// P(positive | s) = 1 / (1 + exp(A s + B)).
struct PlattParams {
    double A = 0.0;
    double B = 0.0;

    double probability(double score) const;

    void save(ArrayStore& store, const std::string& prefix) const;
    static PlattParams load(const ArrayStore& store, const std::string& prefix);
};

// Sigmoid fit on decision scores with smoothed targets
// t+ = (N+ + 1) / (N+ + 2), t- = 1 / (N- + 2), minimized by Newton steps with
// backtracking line search. Labels are +1/-1. When every score is equal, A is
// fixed at 0 and B reproduces the mean smoothed target.
PlattParams platt_fit(std::span<const double> scores, std::span<const int> labels, int max_iter = 100);

struct WeibullParams {
    double shape = 1.0;
    double scale = 1.0;
    // Subtracted from x before evaluating the distribution.
    double shift = 0.0;

    // 1 - exp(-((x - shift) / scale)^shape) for x > shift, else 0.
    double cdf(double x) const;

    void save(ArrayStore& store, const std::string& prefix) const;
    static WeibullParams load(const ArrayStore& store, const std::string& prefix);
};

// Maximum-likelihood Weibull fit to strictly positive samples. The shape
// solves the profile-likelihood equation by safeguarded Newton iteration from
// k = 1; scale = (mean x^k)^(1/k). Requires >= 3 samples, not all equal.
WeibullParams weibull_mle(std::span<const double> samples, int max_iter = 200, double tol = 1e-10);

// Fits on s - min(s) + eps (eps = 1e-6) and records the shift, so the result
// accepts raw (possibly negative) scores.
WeibullParams weibull_fit_shifted(std::span<const double> scores, int max_iter = 200, double tol = 1e-10);

} // namespace osbench
