#include "osbench/metrics.hpp"

#include "osbench/error.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>

namespace osbench {

ConfusionMatrix::ConfusionMatrix(int n_known) : n_(n_known)
{
    if (n_known < 0)
        throw InputError("confusion matrix needs n >= 0");
    counts_.assign(static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(n_ + 1), 0);
}

ConfusionMatrix ConfusionMatrix::from_counts(int n_known, std::vector<std::int64_t> counts)
{
    ConfusionMatrix cm(n_known);
    if (counts.size() != cm.counts_.size())
        throw InputError("confusion counts have the wrong size");
    for (auto c : counts)
        if (c < 0)
            throw InputError("confusion counts must be nonnegative");
    cm.counts_ = std::move(counts);
    return cm;
}

std::size_t ConfusionMatrix::index(int truth, int predicted) const
{
    if (truth < 0 || truth > n_ || predicted < 0 || predicted > n_)
        throw InputError("confusion index out of range");
    return static_cast<std::size_t>(truth) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(predicted);
}

void ConfusionMatrix::add(int truth, int predicted, std::int64_t count) { counts_[index(truth, predicted)] += count; }

std::int64_t ConfusionMatrix::row_sum(int i) const
{
    std::int64_t s = 0;
    for (int j = 0; j <= n_; ++j)
        s += at(i, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int j) const
{
    std::int64_t s = 0;
    for (int i = 0; i <= n_; ++i)
        s += at(i, j);
    return s;
}

std::int64_t ConfusionMatrix::total() const
{
    std::int64_t s = 0;
    for (auto c : counts_)
        s += c;
    return s;
}

int ConfusionMatrix::slot(Label label) const
{
    if (label.is_unknown())
        return n_;
    const int id = label.class_id();
    if (id >= n_)
        throw InputError("class id " + std::to_string(id) + " is outside the " + std::to_string(n_)
                         + " known classes");
    return id;
}

ConfusionMatrix confusion(std::span<const Label> truths, std::span<const Label> predictions, int n_known)
{
    if (truths.size() != predictions.size())
        throw InputError("truths and predictions differ in length");
    ConfusionMatrix cm(n_known);
    for (std::size_t i = 0; i < truths.size(); ++i)
        cm.add(cm.slot(truths[i]), cm.slot(predictions[i]));
    return cm;
}

namespace {

double ratio(std::int64_t num, std::int64_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

std::int64_t known_total(const ConfusionMatrix& cm)
{
    std::int64_t s = 0;
    for (int i = 0; i < cm.n_known(); ++i)
        s += cm.row_sum(i);
    return s;
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

// Precision/recall over classes [0, classes); the matrix supplies FP and FN
// from every column and row, including UNKNOWN.
double f_macro(const ConfusionMatrix& cm, int classes)
{
    if (classes == 0)
        return 0.0;
    double p = 0.0;
    double r = 0.0;
    for (int i = 0; i < classes; ++i) {
        p += ratio(cm.at(i, i), cm.col_sum(i));
        r += ratio(cm.at(i, i), cm.row_sum(i));
    }
    return harmonic(p / classes, r / classes);
}

double f_micro(const ConfusionMatrix& cm, int classes)
{
    std::int64_t tp = 0;
    std::int64_t predicted = 0;
    std::int64_t actual = 0;
    for (int i = 0; i < classes; ++i) {
        tp += cm.at(i, i);
        predicted += cm.col_sum(i);
        actual += cm.row_sum(i);
    }
    return harmonic(ratio(tp, predicted), ratio(tp, actual));
}

double average_sides(double known_side, std::int64_t known_den, double unknown_side, std::int64_t unknown_den,
                     bool allow_partial, const char* name)
{
    if (known_den > 0 && unknown_den > 0)
        return (known_side + unknown_side) / 2.0;
    if (known_den == 0 && unknown_den == 0)
        throw InputError(std::string(name) + " is undefined without samples");
    if (!allow_partial)
        throw InputError(std::string(name) + " needs both known and unknown samples (or allow-partial)");
    return known_den > 0 ? known_side : unknown_side;
}

} // namespace

double aks(const ConfusionMatrix& cm)
{
    const auto den = known_total(cm);
    if (den == 0)
        throw InputError("AKS is undefined without known samples");
    std::int64_t hits = 0;
    for (int i = 0; i < cm.n_known(); ++i)
        hits += cm.at(i, i);
    return static_cast<double>(hits) / den;
}

double aus(const ConfusionMatrix& cm)
{
    const int u = cm.n_known();
    const auto den = cm.row_sum(u);
    if (den == 0)
        throw InputError("AUS is undefined without unknown samples");
    return static_cast<double>(cm.at(u, u)) / den;
}

double dks(const ConfusionMatrix& cm)
{
    const auto den = known_total(cm);
    if (den == 0)
        throw InputError("DKS is undefined without known samples");
    std::int64_t accepted = 0;
    for (int i = 0; i < cm.n_known(); ++i)
        accepted += cm.row_sum(i) - cm.at(i, cm.n_known());
    return static_cast<double>(accepted) / den;
}

double dus(const ConfusionMatrix& cm) { return aus(cm); }

double na(const ConfusionMatrix& cm, bool allow_partial)
{
    const auto kd = known_total(cm);
    const auto ud = cm.row_sum(cm.n_known());
    return average_sides(kd ? aks(cm) : 0.0, kd, ud ? aus(cm) : 0.0, ud, allow_partial, "NA");
}

double da(const ConfusionMatrix& cm, bool allow_partial)
{
    const auto kd = known_total(cm);
    const auto ud = cm.row_sum(cm.n_known());
    return average_sides(kd ? dks(cm) : 0.0, kd, ud ? dus(cm) : 0.0, ud, allow_partial, "DA");
}

double osfm_macro(const ConfusionMatrix& cm) { return f_macro(cm, cm.n_known()); }
double osfm_micro(const ConfusionMatrix& cm) { return f_micro(cm, cm.n_known()); }
double fm_macro(const ConfusionMatrix& cm) { return f_macro(cm, cm.size()); }
double fm_micro(const ConfusionMatrix& cm) { return f_micro(cm, cm.size()); }

MetricsReport report_from_confusion(const ConfusionMatrix& cm, bool allow_partial)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    MetricsReport r;
    r.confusion = cm;
    r.na = na(cm, allow_partial);
    r.da = da(cm, allow_partial);
    const bool has_known = known_total(cm) > 0;
    const bool has_unknown = cm.row_sum(cm.n_known()) > 0;
    r.aks = has_known ? aks(cm) : nan;
    r.dks = has_known ? dks(cm) : nan;
    r.aus = has_unknown ? aus(cm) : nan;
    r.dus = r.aus;
    r.osfm_macro = osfm_macro(cm);
    r.osfm_micro = osfm_micro(cm);
    r.fm_macro = fm_macro(cm);
    r.fm_micro = fm_micro(cm);
    return r;
}

MetricsReport full_report(std::span<const Label> truths, std::span<const Label> predictions, int n_known,
                          bool allow_partial)
{
    return report_from_confusion(confusion(truths, predictions, n_known), allow_partial);
}

std::string report_document(const MetricsReport& report, const ReportContext& context)
{
    using nlohmann::ordered_json;
    auto number = [](double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); };

    ordered_json doc;
    doc["schema"] = "osbench_report_v1";
    doc["mode"] = context.mode;
    doc["granularity"] = context.granularity;
    doc["models"] = context.models;
    doc["test_manifest"] = context.test_manifest;
    doc["n_known"] = report.confusion.n_known();
    doc["n_samples"] = report.confusion.total();

    ordered_json metrics;
    if (context.mode == "detect") {
        metrics["dks"] = number(report.dks);
        metrics["dus"] = number(report.dus);
        metrics["da"] = number(report.da);
    } else {
        metrics["na"] = number(report.na);
        metrics["aks"] = number(report.aks);
        metrics["aus"] = number(report.aus);
        metrics["da"] = number(report.da);
        metrics["dks"] = number(report.dks);
        metrics["dus"] = number(report.dus);
        metrics["osfm_macro"] = number(report.osfm_macro);
        metrics["osfm_micro"] = number(report.osfm_micro);
        metrics["fm_macro"] = number(report.fm_macro);
        metrics["fm_micro"] = number(report.fm_micro);
    }
    doc["metrics"] = metrics;

    auto labels = context.class_names;
    labels.emplace_back(kUnknownName);
    doc["confusion"]["labels"] = labels;
    ordered_json rows = ordered_json::array();
    const auto& cm = report.confusion;
    for (int i = 0; i < cm.size(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < cm.size(); ++j)
            row.push_back(cm.at(i, j));
        rows.push_back(row);
    }
    doc["confusion"]["counts"] = rows;
    return doc.dump(2) + "\n";
}

} // namespace osbench
