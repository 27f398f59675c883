#include "osbench/search.hpp"

#include "osbench/error.hpp"
#include "osbench/metrics.hpp"
#include "osbench/parallel.hpp"
#include "osbench/text.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace osbench {

std::size_t Grid::size() const
{
    std::size_t n = 1;
    for (const auto& [name, values] : axes)
        n *= values.size();
    return n;
}

Hyperparams Grid::point(std::size_t index) const
{
    Hyperparams hp;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
        const auto& values = it->second;
        hp[it->first] = values[index % values.size()];
        index /= values.size();
    }
    return hp;
}

void Grid::validate() const
{
    std::set<std::string> seen;
    for (const auto& [name, values] : axes) {
        if (values.empty())
            throw InputError("grid axis '" + name + "' is empty");
        if (!seen.insert(name).second)
            throw InputError("grid axis '" + name + "' is repeated");
    }
}

namespace {

std::vector<double> steps(double from, double to, double step)
{
    std::vector<double> out;
    const int count = static_cast<int>(std::round((to - from) / step)) + 1;
    for (int i = 0; i < count; ++i)
        out.push_back(std::round((from + i * step) * 1e9) / 1e9);
    return out;
}

} // namespace

Grid default_grid(Variant variant, int feature_dim, KernelKind kernel)
{
    const double d = feature_dim > 0 ? feature_dim : 1;
    const std::vector<double> C = {0.1, 1, 10, 100};
    const std::vector<double> gamma = {1 / d, 4 / d, 16 / d};
    const std::vector<double> nu = {0.01, 0.05, 0.1, 0.2};
    const auto tau = steps(0.1, 0.9, 0.1);
    const bool rbf = kernel == KernelKind::Rbf;

    Grid g;
    auto add = [&](std::string name, std::vector<double> values) { g.axes.emplace_back(std::move(name), values); };
    switch (variant) {
    case Variant::Osnn:
        add("T", steps(0.3, 0.9, 0.1));
        break;
    case Variant::SvmOva:
        add("C", C);
        if (rbf)
            add("gamma", gamma);
        break;
    case Variant::Psvm:
        add("C", C);
        if (rbf)
            add("gamma", gamma);
        add("tau", tau);
        break;
    case Variant::Softmax:
        add("l2", {1e-4, 1e-3, 1e-2});
        add("lr", {0.1});
        add("epochs", {100});
        add("tau", tau);
        break;
    case Variant::Ncm:
        add("tau", tau);
        break;
    case Variant::ExtraTrees:
        add("M", {100});
        add("min_leaf", {1, 5});
        add("tau", tau);
        break;
    case Variant::OneClassPerClass:
        add("nu", nu);
        if (rbf)
            add("gamma", gamma);
        break;
    case Variant::TwoStage:
        add("nu", nu);
        add("C", C);
        if (rbf)
            add("gamma", gamma);
        add("tau", tau);
        break;
    case Variant::PiSvm:
        add("C", C);
        if (rbf)
            add("gamma", gamma);
        add("delta", tau);
        break;
    case Variant::BinaryDetector:
        add("C", {1});
        break;
    case Variant::Wsvm:
    case Variant::Dbc:
    case Variant::Ssvm:
        throw UnimplementedVariant("classifier '" + std::string(variant_name(variant)) + "' is not implemented");
    }
    return g;
}

Grid parse_grid(std::string_view text, int feature_dim)
{
    Grid g;
    for (auto raw : split_view(text, '\n')) {
        auto line = trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw InputError("malformed grid line '" + std::string(line) + "'");
        const std::string name(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (name == "selection") {
            if (value == "na")
                g.selection = SelectionMetric::Na;
            else if (value == "acc")
                g.selection = SelectionMetric::Accuracy;
            else
                throw InputError("grid selection must be na or acc");
            continue;
        }
        std::vector<double> values;
        for (auto token : split_view(value, ',')) {
            token = trim(token);
            if (token.ends_with("/d")) {
                if (feature_dim <= 0)
                    throw InputError("grid value '" + std::string(token) + "' needs a feature dimension");
                values.push_back(parse_double(token.substr(0, token.size() - 2), name) / feature_dim);
            } else {
                values.push_back(parse_double(token, name));
            }
        }
        g.axes.emplace_back(name, std::move(values));
    }
    if (g.axes.empty())
        throw InputError("grid has no axes");
    g.validate();
    return g;
}

Grid load_grid(const std::filesystem::path& path, int feature_dim)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open grid file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_grid(text.str(), feature_dim);
}

namespace {

int n_slots(const ClassRegistry& registry) { return registry.empty() ? 0 : registry.rbegin()->first + 1; }

double metric_from_predictions(const Dataset& validation, const std::vector<Label>& predictions,
                               SelectionMetric metric)
{
    if (metric == SelectionMetric::Accuracy) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < validation.size(); ++i)
            hits += predictions[i] == validation[i].label;
        return validation.size() ? static_cast<double>(hits) / validation.size() : 0.0;
    }
    std::vector<Label> truths;
    for (const auto& s : validation.samples())
        truths.push_back(s.label);
    return na(confusion(truths, predictions, n_slots(validation.registry())), true);
}

// Fit key: the point with its rejection-rule keys removed.
Hyperparams fit_key(Variant variant, const Hyperparams& hp)
{
    Hyperparams key;
    for (const auto& [name, value] : hp)
        if (!is_rejection_key(variant, name))
            key[name] = value;
    return key;
}

} // namespace

double selection_score(const TrainedModel& model, const Dataset& validation, SelectionMetric metric)
{
    std::vector<Label> predictions;
    for (const auto& s : validation.samples())
        predictions.push_back(model.predict(s.features));
    return metric_from_predictions(validation, predictions, metric);
}

SearchResult grid_search(const ClassifierSpec& spec_template, const std::vector<SplitPlan>& plans, const Grid& grid,
                         const SearchOptions& options)
{
    if (plans.empty())
        throw InputError("grid search needs at least one plan");
    grid.validate();
    const FitFunction fit_fn =
        options.fit_fn ? options.fit_fn : [](const ClassifierSpec& s, const Dataset& d) { return fit(s, d); };

    SearchResult result;
    bool any_unknown = false;
    for (const auto& s : plans.front().validation.samples())
        any_unknown = any_unknown || s.label.is_unknown();
    result.selection = grid.selection.value_or(any_unknown ? SelectionMetric::Na : SelectionMetric::Accuracy);

    const std::size_t n_points = grid.size();
    std::vector<Hyperparams> points(n_points);
    std::map<Hyperparams, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n_points; ++i) {
        points[i] = spec_template.hyperparams;
        for (const auto& [k, v] : grid.point(i))
            points[i][k] = v;
        groups[fit_key(spec_template.variant, points[i])].push_back(i);
    }
    std::vector<std::vector<std::size_t>> tasks;
    for (auto& [key, members] : groups)
        tasks.push_back(std::move(members));

    result.log.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        result.log[i].hyperparams = points[i];

    // One task per (fit group, plan); each writes only its own metric slots.
    std::vector<std::vector<double>> per_plan(plans.size(), std::vector<double>(n_points, 0.0));
    std::vector<std::vector<std::string>> errors(plans.size(), std::vector<std::string>(n_points));
    parallel_for(tasks.size() * plans.size(), options.jobs, [&](std::size_t t) {
        const auto& members = tasks[t / plans.size()];
        const std::size_t p = t % plans.size();
        const SplitPlan& plan = plans[p];
        ClassifierSpec spec = spec_template;
        spec.hyperparams = points[members.front()];
        try {
            const auto model = fit_fn(spec, plan.fit);
            std::vector<std::vector<double>> scores;
            scores.reserve(plan.validation.size());
            for (const auto& s : plan.validation.samples())
                scores.push_back(model->score(s.features));
            for (std::size_t i : members) {
                std::vector<Label> predictions;
                predictions.reserve(scores.size());
                for (const auto& sc : scores)
                    predictions.push_back(model->decide(sc, points[i]));
                per_plan[p][i] = metric_from_predictions(plan.validation, predictions, result.selection);
            }
        } catch (const std::exception& e) {
            for (std::size_t i : members)
                errors[p][i] = e.what();
        }
    });

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n_points; ++i) {
        auto& entry = result.log[i];
        double sum = 0.0;
        for (std::size_t p = 0; p < plans.size(); ++p) {
            if (!errors[p][i].empty()) {
                entry.failed = true;
                entry.error = errors[p][i];
            }
            sum += per_plan[p][i];
        }
        if (entry.failed)
            continue;
        entry.metric = sum / static_cast<double>(plans.size());
        if (!best || entry.metric > result.log[*best].metric)
            best = i;
    }
    if (!best)
        throw Error("every grid point failed to fit; first error: " + result.log.front().error);

    result.best = points[*best];
    result.best_metric = result.log[*best].metric;
    ClassifierSpec final_spec = spec_template;
    final_spec.hyperparams = result.best;
    result.model = fit_fn(final_spec, plans.front().final_train);
    return result;
}

SearchResult grid_search(const ClassifierSpec& spec_template, const SplitPlan& plan, const Grid& grid,
                         const SearchOptions& options)
{
    return grid_search(spec_template, std::vector<SplitPlan>{plan}, grid, options);
}

std::string search_log_table(const Grid& grid, const SearchResult& result)
{
    std::ostringstream out;
    out << "index";
    for (const auto& [name, values] : grid.axes)
        out << '\t' << name;
    out << '\t' << (result.selection == SelectionMetric::Na ? "na" : "accuracy") << "\tstatus\n";
    for (std::size_t i = 0; i < result.log.size(); ++i) {
        const auto& e = result.log[i];
        out << i;
        for (const auto& [name, values] : grid.axes)
            out << '\t' << format_double(e.hyperparams.at(name));
        out << '\t' << (e.failed ? "nan" : format_double(e.metric)) << '\t'
            << (e.failed ? "failed: " + e.error : std::string("ok")) << '\n';
    }
    return out.str();
}

} // namespace osbench
