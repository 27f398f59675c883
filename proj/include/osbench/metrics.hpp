#pragma once

#include "osbench/data.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace osbench {

// (n+1) x (n+1) counts; rows are truths, columns predictions, index n is UNKNOWN.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int n_known = 0);
    static ConfusionMatrix from_counts(int n_known, std::vector<std::int64_t> counts);

    int n_known() const { return n_; }
    int size() const { return n_ + 1; }
    std::int64_t at(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
    void add(int truth, int predicted, std::int64_t count = 1);

    std::int64_t row_sum(int i) const;
    std::int64_t col_sum(int j) const;
    std::int64_t total() const;
    const std::vector<std::int64_t>& counts() const { return counts_; }

    // Slot of a label: its class id, or n for UNKNOWN.
    int slot(Label label) const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t index(int truth, int predicted) const;
    int n_ = 0;
    std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion(std::span<const Label> truths, std::span<const Label> predictions, int n_known);

// The accuracy family needs samples on the measured side; these throw
// InputError when the denominator is zero.
double aks(const ConfusionMatrix& cm);
double aus(const ConfusionMatrix& cm);
double dks(const ConfusionMatrix& cm);
double dus(const ConfusionMatrix& cm);

// Averages of the two sides. With allow_partial a missing side is dropped and
// the defined side is returned alone; with neither side defined they throw.
double na(const ConfusionMatrix& cm, bool allow_partial = false);
double da(const ConfusionMatrix& cm, bool allow_partial = false);

// Open-set F-measures: precision and recall over the known classes only, with
// predictions of and truths from UNKNOWN still counted as errors. Macro is the
// harmonic mean of the averaged precision and averaged recall.
double osfm_macro(const ConfusionMatrix& cm);
double osfm_micro(const ConfusionMatrix& cm);

// Same with UNKNOWN as an ordinary (n+1)-th class.
double fm_macro(const ConfusionMatrix& cm);
double fm_micro(const ConfusionMatrix& cm);

// Undefined accuracy sides (allowed only with allow_partial) are NaN.
struct MetricsReport {
    double aks = 0.0;
    double aus = 0.0;
    double na = 0.0;
    double dks = 0.0;
    double dus = 0.0;
    double da = 0.0;
    double osfm_macro = 0.0;
    double osfm_micro = 0.0;
    double fm_macro = 0.0;
    double fm_micro = 0.0;
    ConfusionMatrix confusion;
};

MetricsReport full_report(std::span<const Label> truths, std::span<const Label> predictions, int n_known,
                          bool allow_partial = false);
MetricsReport report_from_confusion(const ConfusionMatrix& cm, bool allow_partial = false);

// Context printed alongside the numbers.
struct ReportContext {
    std::string granularity = "patch"; // patch | image
    std::string mode = "classify";     // classify | detect
    std::vector<std::string> models;
    std::string test_manifest;
    std::vector<std::string> class_names; // one per known slot
};

// Stable-key-order JSON document tagged `"schema": "osbench_report_v1"`.
std::string report_document(const MetricsReport& report, const ReportContext& context);

} // namespace osbench
