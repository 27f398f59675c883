#pragma once

#include "osbench/classifiers.hpp"
#include "osbench/protocols.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace osbench {

enum class SelectionMetric { Na, Accuracy };

// Cartesian grid; axes keep their declaration order, which also fixes the
// enumeration order (last axis varies fastest) and therefore the tie rule.
struct Grid {
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    // Unset: NA when validation holds UNKNOWN labels, accuracy otherwise.
    std::optional<SelectionMetric> selection;

    std::size_t size() const;
    Hyperparams point(std::size_t index) const;
    void validate() const;
};

// Defaults per variant. gamma axes are omitted for linear kernels.
Grid default_grid(Variant variant, int feature_dim, KernelKind kernel = KernelKind::Rbf);

// Lines `name=v1,v2,...`; `#` starts a comment. A value written `k/d` means
// k / feature_dim. An optional `selection=na|acc` line fixes the metric.
Grid parse_grid(std::string_view text, int feature_dim);
Grid load_grid(const std::filesystem::path& path, int feature_dim);

struct SearchEntry {
    Hyperparams hyperparams;
    double metric = 0.0;
    bool failed = false;
    std::string error;
};

struct SearchResult {
    Hyperparams best;
    double best_metric = 0.0;
    SelectionMetric selection = SelectionMetric::Accuracy;
    std::unique_ptr<TrainedModel> model; // refit on final_train
    std::vector<SearchEntry> log;
};

using FitFunction = std::function<std::unique_ptr<TrainedModel>(const ClassifierSpec&, const Dataset&)>;

struct SearchOptions {
    std::size_t jobs = 1;
    // Replaceable so tests can inject a model with a known response surface.
    FitFunction fit_fn;
};

// Fits every grid point on plan.fit, scores it on plan.validation, and refits
// the best point on plan.final_train. Points that differ only in
// rejection-rule keys share one fit. With several plans (repeated OPEN
// splits) the metric is their mean.
SearchResult grid_search(const ClassifierSpec& spec_template, const std::vector<SplitPlan>& plans, const Grid& grid,
                         const SearchOptions& options = {});
SearchResult grid_search(const ClassifierSpec& spec_template, const SplitPlan& plan, const Grid& grid,
                         const SearchOptions& options = {});

// Validation metric of one model on a labeled dataset.
double selection_score(const TrainedModel& model, const Dataset& validation, SelectionMetric metric);

// Tab-separated: index, one column per axis, metric, status.
std::string search_log_table(const Grid& grid, const SearchResult& result);

} // namespace osbench
