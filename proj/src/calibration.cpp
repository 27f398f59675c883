#include "osbench/calibration.hpp"

#include "osbench/array_store.hpp"
#include "osbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace osbench {

namespace {

// Negative log-likelihood term for one sample with target t at f = A s + B.
double nll_term(double f, double t)
{
    return f >= 0.0 ? t * f + std::log1p(std::exp(-f)) : (t - 1.0) * f + std::log1p(std::exp(f));
}

} // namespace

double PlattParams::probability(double score) const
{
    const double f = A * score + B;
    return f >= 0.0 ? std::exp(-f) / (1.0 + std::exp(-f)) : 1.0 / (1.0 + std::exp(f));
}

void PlattParams::save(ArrayStore& store, const std::string& prefix) const
{
    store.put(prefix + "platt", {A, B});
}

PlattParams PlattParams::load(const ArrayStore& store, const std::string& prefix)
{
    const auto& v = store.get(prefix + "platt");
    if (v.size() != 2)
        throw InputError("malformed Platt parameters");
    return {v[0], v[1]};
}

PlattParams platt_fit(std::span<const double> scores, std::span<const int> labels, int max_iter)
{
    if (scores.size() != labels.size())
        throw InputError("platt_fit: score and label counts differ");
    double n_pos = 0.0;
    double n_neg = 0.0;
    for (int l : labels) {
        if (l == 1)
            n_pos += 1.0;
        else if (l == -1)
            n_neg += 1.0;
        else
            throw InputError("platt_fit: labels must be +1 or -1");
    }
    if (n_pos == 0.0 || n_neg == 0.0)
        throw InputError("platt_fit: both labels must be present");

    const double hi_target = (n_pos + 1.0) / (n_pos + 2.0);
    const double lo_target = 1.0 / (n_neg + 2.0);
    std::vector<double> t(scores.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = labels[i] == 1 ? hi_target : lo_target;

    if (std::all_of(scores.begin(), scores.end(), [&](double s) { return s == scores.front(); })) {
        double mean_t = 0.0;
        for (double v : t)
            mean_t += v;
        mean_t /= static_cast<double>(t.size());
        return {0.0, std::log((1.0 - mean_t) / mean_t)};
    }

    constexpr double kMinStep = 1e-10;
    constexpr double kSigma = 1e-12;
    constexpr double kEps = 1e-5;

    double A = 0.0;
    double B = std::log((n_neg + 1.0) / (n_pos + 1.0));
    const auto objective = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i)
            f += nll_term(scores[i] * a + b, t[i]);
        return f;
    };
    double fval = objective(A, B);

    for (int iter = 0; iter < max_iter; ++iter) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double f = scores[i] * A + B;
            double p, q;
            if (f >= 0.0) {
                p = std::exp(-f) / (1.0 + std::exp(-f));
                q = 1.0 / (1.0 + std::exp(-f));
            } else {
                p = 1.0 / (1.0 + std::exp(f));
                q = std::exp(f) / (1.0 + std::exp(f));
            }
            const double d2 = p * q;
            h11 += scores[i] * scores[i] * d2;
            h22 += d2;
            h21 += scores[i] * d2;
            const double d1 = t[i] - p;
            g1 += scores[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < kEps && std::abs(g2) < kEps)
            break;

        const double det = h11 * h22 - h21 * h21;
        const double dA = -(h22 * g1 - h21 * g2) / det;
        const double dB = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * dA + g2 * dB;

        double step = 1.0;
        while (step >= kMinStep) {
            const double new_a = A + step * dA;
            const double new_b = B + step * dB;
            const double new_f = objective(new_a, new_b);
            if (new_f < fval + 1e-4 * step * gd) {
                A = new_a;
                B = new_b;
                fval = new_f;
                break;
            }
            step /= 2.0;
        }
        if (step < kMinStep)
            break;
    }
    return {A, B};
}

double WeibullParams::cdf(double x) const
{
    const double z = x - shift;
    if (!(z > 0.0))
        return 0.0;
    return -std::expm1(-std::pow(z / scale, shape));
}

void WeibullParams::save(ArrayStore& store, const std::string& prefix) const
{
    store.put(prefix + "weibull", {shape, scale, shift});
}

WeibullParams WeibullParams::load(const ArrayStore& store, const std::string& prefix)
{
    const auto& v = store.get(prefix + "weibull");
    if (v.size() != 3)
        throw InputError("malformed Weibull parameters");
    return {v[0], v[1], v[2]};
}

WeibullParams weibull_mle(std::span<const double> samples, int max_iter, double tol)
{
    if (samples.size() < 3)
        throw InputError("weibull_mle: need at least 3 samples");
    double peak = 0.0;
    for (double x : samples) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw InputError("weibull_mle: samples must be finite and positive");
        peak = std::max(peak, x);
    }
    if (std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples.front(); }))
        throw InputError("weibull_mle: all samples are equal");

    // Work on x / max(x) so x^k stays in range; the shape is unaffected.
    const std::size_t n = samples.size();
    std::vector<double> logs(n);
    double mean_log = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logs[i] = std::log(samples[i] / peak);
        mean_log += logs[i];
    }
    mean_log /= static_cast<double>(n);

    // f(k) = sum y^k ln y / sum y^k - 1/k - mean ln y is increasing in k.
    const auto eval = [&](double k, double& f, double& df) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (double l : logs) {
            const double w = std::exp(k * l);
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        const double ratio = s1 / s0;
        f = ratio - 1.0 / k - mean_log;
        df = s2 / s0 - ratio * ratio + 1.0 / (k * k);
    };

    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double k = 1.0;
    bool converged = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        double f, df;
        eval(k, f, df);
        if (f < 0.0)
            lo = k;
        else
            hi = k;
        double next = k - f / df;
        if (!(next > lo && next < hi) || !std::isfinite(next))
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * k;
        if (std::abs(next - k) <= tol * std::max(1.0, k)) {
            k = next;
            converged = true;
            break;
        }
        k = next;
    }
    if (!converged)
        throw ConvergenceError("weibull_mle: shape iteration did not converge");

    double mean_pow = 0.0;
    for (double l : logs)
        mean_pow += std::exp(k * l);
    mean_pow /= static_cast<double>(n);
    return {k, peak * std::pow(mean_pow, 1.0 / k), 0.0};
}

WeibullParams weibull_fit_shifted(std::span<const double> scores, int max_iter, double tol)
{
    if (scores.empty())
        throw InputError("weibull_fit_shifted: no scores");
    constexpr double kEpsilon = 1e-6;
    const double shift = *std::min_element(scores.begin(), scores.end()) - kEpsilon;
    std::vector<double> shifted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        shifted[i] = scores[i] - shift;
    WeibullParams params = weibull_mle(shifted, max_iter, tol);
    params.shift = shift;
    return params;
}

} // namespace osbench
