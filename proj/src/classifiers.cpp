#include "osbench/classifiers.hpp"

#include "classifier_models.hpp"
#include "osbench/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace osbench {

namespace {

struct VariantEntry {
    Variant variant;
    std::string_view name;
};

constexpr std::array<VariantEntry, 13> kVariants{{
    {Variant::Osnn, "osnn"},
    {Variant::SvmOva, "svm_ova"},
    {Variant::Psvm, "psvm"},
    {Variant::Softmax, "softmax"},
    {Variant::Ncm, "ncm"},
    {Variant::ExtraTrees, "et"},
    {Variant::OneClassPerClass, "occ_perclass"},
    {Variant::TwoStage, "two_stage"},
    {Variant::PiSvm, "pisvm"},
    {Variant::BinaryDetector, "binary_detector"},
    {Variant::Wsvm, "wsvm"},
    {Variant::Dbc, "dbc"},
    {Variant::Ssvm, "ssvm"},
}};

std::size_t argmax(std::span<const double> v)
{
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_hyperparams(const ClassifierSpec& spec)
{
    for (const auto& key : required_hyperparams(spec.variant))
        if (!spec.hyperparams.contains(key))
            throw InputError(std::string(variant_name(spec.variant)) + " needs hyperparameter '" + key + "'");
}

KernelSpec resolve_kernel(const ClassifierSpec& spec, int dim)
{
    KernelSpec kernel = spec.kernel;
    if (auto it = spec.hyperparams.find("gamma"); it != spec.hyperparams.end())
        kernel.gamma = it->second;
    if (kernel.kind == KernelKind::Rbf && !(kernel.gamma > 0.0))
        kernel.gamma = 1.0 / static_cast<double>(std::max(dim, 1));
    return kernel;
}

detail::FitContext make_context(const ClassifierSpec& spec, const Dataset& data, ClassRegistry registry,
                                std::vector<int> class_ids, const std::vector<int>& slot_of_sample)
{
    detail::FitContext ctx;
    ctx.info.variant = spec.variant;
    ctx.info.hyperparams = spec.hyperparams;
    ctx.info.kernel = resolve_kernel(spec, data.feature_dim());
    ctx.info.detector_base = spec.detector_base;
    ctx.info.seed = spec.seed;
    ctx.info.registry = std::move(registry);
    ctx.info.class_ids = std::move(class_ids);
    ctx.info.standardizer = Standardizer::fit(data);
    ctx.info.feature_dim = data.feature_dim();
    ctx.n_classes = ctx.info.class_ids.size();

    ctx.z = Matrix(data.size(), static_cast<std::size_t>(data.feature_dim()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto z = ctx.info.standardizer.apply(data[i].features);
        std::copy(z.begin(), z.end(), ctx.z.row(i).begin());
    }
    ctx.y = slot_of_sample;
    return ctx;
}

} // namespace

std::string_view variant_name(Variant variant)
{
    for (const auto& entry : kVariants)
        if (entry.variant == variant)
            return entry.name;
    return "invalid";
}

Variant parse_variant(std::string_view name)
{
    for (const auto& entry : kVariants)
        if (entry.name == name)
            return entry.variant;
    throw InputError("unknown classifier variant '" + std::string(name) + "'");
}

bool is_implemented(Variant variant)
{
    return variant != Variant::Wsvm && variant != Variant::Dbc && variant != Variant::Ssvm;
}

const std::vector<Variant>& all_variants()
{
    static const std::vector<Variant> variants = [] {
        std::vector<Variant> v;
        for (const auto& entry : kVariants)
            v.push_back(entry.variant);
        return v;
    }();
    return variants;
}

std::vector<std::string> required_hyperparams(Variant variant)
{
    switch (variant) {
    case Variant::Osnn:
        return {"T"};
    case Variant::SvmOva:
        return {"C"};
    case Variant::Psvm:
        return {"C", "tau"};
    case Variant::Softmax:
        return {"l2", "lr", "epochs", "tau"};
    case Variant::Ncm:
        return {"tau"};
    case Variant::ExtraTrees:
        return {"tau"};
    case Variant::OneClassPerClass:
        return {"nu"};
    case Variant::TwoStage:
        return {"nu", "C", "tau"};
    case Variant::PiSvm:
        return {"C", "delta"};
    case Variant::BinaryDetector:
    case Variant::Wsvm:
    case Variant::Dbc:
    case Variant::Ssvm:
        return {};
    }
    return {};
}

bool is_rejection_key(Variant variant, std::string_view key)
{
    switch (variant) {
    case Variant::Osnn:
        return key == "T";
    case Variant::Psvm:
    case Variant::Softmax:
    case Variant::Ncm:
    case Variant::ExtraTrees:
    case Variant::TwoStage:
        return key == "tau";
    case Variant::PiSvm:
        return key == "delta";
    default:
        return false;
    }
}

Standardizer Standardizer::fit(const Dataset& data)
{
    const auto dim = static_cast<std::size_t>(data.feature_dim());
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.scale.assign(dim, 1.0);
    if (data.empty())
        return s;
    const double n = static_cast<double>(data.size());
    for (const auto& sample : data.samples())
        for (std::size_t d = 0; d < dim; ++d)
            s.mean[d] += sample.features[d];
    for (auto& m : s.mean)
        m /= n;
    std::vector<double> var(dim, 0.0);
    for (const auto& sample : data.samples())
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = sample.features[d] - s.mean[d];
            var[d] += diff * diff;
        }
    for (std::size_t d = 0; d < dim; ++d) {
        const double sd = std::sqrt(var[d] / n);
        s.scale[d] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const
{
    if (x.size() != mean.size())
        throw InputError("feature vector has dimension " + std::to_string(x.size()) + ", model expects "
                         + std::to_string(mean.size()));
    std::vector<double> z(x.size());
    for (std::size_t d = 0; d < x.size(); ++d)
        z[d] = (x[d] - mean[d]) / scale[d];
    return z;
}

std::vector<double> TrainedModel::score(std::span<const double> f) const
{
    if (static_cast<int>(f.size()) != info_.feature_dim)
        throw InputError("feature vector has dimension " + std::to_string(f.size()) + ", model expects "
                         + std::to_string(info_.feature_dim));
    return score_standardized(info_.standardizer.apply(f));
}

Label TrainedModel::decide(std::span<const double> scores, const Hyperparams& hyperparams) const
{
    return apply_rejection(info_.variant, scores, info_.class_ids, hyperparams);
}

Label apply_rejection(Variant variant, std::span<const double> scores, std::span<const int> class_ids,
                      const Hyperparams& hp)
{
    if (scores.empty())
        return Label::unknown();
    if (variant == Variant::BinaryDetector) {
        if (scores.size() != 2)
            throw InputError("binary detector scores must have two entries");
        return scores[1] > scores[0] ? Label::unknown() : Label::known(0);
    }
    if (scores.size() != class_ids.size())
        throw InputError("score vector length differs from class count");
    const std::size_t best = argmax(scores);
    const double top = scores[best];
    bool accept = false;
    switch (variant) {
    case Variant::Osnn:
        accept = top >= 1.0 - detail::require(hp, "T");
        break;
    case Variant::SvmOva:
        accept = top > 0.0;
        break;
    case Variant::OneClassPerClass:
        accept = top >= 0.0;
        break;
    case Variant::Psvm:
    case Variant::Softmax:
    case Variant::Ncm:
    case Variant::ExtraTrees:
        accept = top >= detail::require(hp, "tau");
        break;
    case Variant::TwoStage:
        accept = top > 0.0 && top >= detail::require(hp, "tau");
        break;
    case Variant::PiSvm:
        accept = top >= detail::require(hp, "delta");
        break;
    default:
        throw UnimplementedVariant(std::string(variant_name(variant)) + " has no decision rule");
    }
    return accept ? Label::known(class_ids[best]) : Label::unknown();
}

std::unique_ptr<TrainedModel> fit(const ClassifierSpec& spec, const Dataset& fit_data)
{
    if (!is_implemented(spec.variant))
        throw UnimplementedVariant("classifier '" + std::string(variant_name(spec.variant))
                                   + "' is registered but not implemented");
    if (spec.variant == Variant::BinaryDetector)
        throw InputError("binary_detector needs known-unknown data; use fit_binary_detector");
    check_hyperparams(spec);
    if (fit_data.empty())
        throw InputError("cannot fit on an empty dataset");
    if (fit_data.feature_dim() < 1)
        throw InputError("cannot fit on zero-dimensional features");
    if (fit_data.has_unknown())
        throw InputError("fit data must contain only known labels");

    const auto ids = fit_data.known_class_ids();
    const std::size_t min_classes = spec.variant == Variant::OneClassPerClass ? 1 : 2;
    if (ids.size() < min_classes)
        throw InputError(std::string(variant_name(spec.variant)) + " needs at least " + std::to_string(min_classes)
                         + " classes, got " + std::to_string(ids.size()));

    std::vector<int> class_ids(ids.begin(), ids.end());
    std::vector<int> slots(fit_data.size());
    for (std::size_t i = 0; i < fit_data.size(); ++i) {
        const int id = fit_data[i].label.class_id();
        slots[i] = static_cast<int>(std::lower_bound(class_ids.begin(), class_ids.end(), id) - class_ids.begin());
    }
    return detail::fit_variant(make_context(spec, fit_data, fit_data.registry(), std::move(class_ids), slots));
}

std::unique_ptr<TrainedModel> fit_binary_detector(const ClassifierSpec& spec, const Dataset& known,
                                                  const Dataset& known_unknown)
{
    if (spec.detector_base != Variant::Psvm && spec.detector_base != Variant::ExtraTrees)
        throw InputError("binary detector base must be psvm or et");
    if (known.empty())
        throw InputError("binary detector needs known samples");
    if (known_unknown.empty())
        throw InputError("binary detector needs known-unknown samples");
    if (known.feature_dim() != known_unknown.feature_dim())
        throw InputError("known and known-unknown feature dimensions differ");
    if (spec.detector_base == Variant::Psvm && !spec.hyperparams.contains("C"))
        throw InputError("binary_detector with psvm base needs hyperparameter 'C'");

    // Two super-classes: slot 0 = known, slot 1 = known-unknown.
    std::vector<Sample> merged;
    merged.reserve(known.size() + known_unknown.size());
    std::vector<int> slots;
    for (const auto& s : known.samples()) {
        merged.push_back(s);
        merged.back().label = Label::known(0);
        merged.back().image_id = "k:" + s.image_id;
        slots.push_back(0);
    }
    for (const auto& s : known_unknown.samples()) {
        merged.push_back(s);
        merged.back().label = Label::known(1);
        merged.back().image_id = "u:" + s.image_id;
        slots.push_back(1);
    }
    const ClassRegistry super{{0, "known"}, {1, "known_unknown"}};
    Dataset data(std::move(merged), super, known.feature_dim());

    ClassifierSpec detector = spec;
    detector.variant = Variant::BinaryDetector;
    auto ctx = make_context(detector, data, ClassRegistry{{0, "known"}}, {0, 1}, slots);
    return detail::fit_variant(std::move(ctx));
}

std::unique_ptr<TrainedModel> restore_model(ModelInfo info, const ArrayStore& store)
{
    return detail::restore_variant(std::move(info), store);
}

std::vector<GridCell> export_decision_grid(const TrainedModel& model, int dim_x, int dim_y, const GridBounds& bounds,
                                           int resolution)
{
    const int dim = model.feature_dim();
    if (dim_x < 0 || dim_x >= dim || dim_y < 0 || dim_y >= dim)
        throw InputError("grid dimensions out of range for a " + std::to_string(dim) + "-dimensional model");
    if (dim_x == dim_y)
        throw InputError("grid dimensions must differ");
    if (resolution < 2)
        throw InputError("grid resolution must be at least 2");

    std::vector<double> f = model.info().standardizer.mean;
    std::vector<GridCell> cells;
    cells.reserve(static_cast<std::size_t>(resolution) * resolution);
    const double step_x = (bounds.x_max - bounds.x_min) / (resolution - 1);
    const double step_y = (bounds.y_max - bounds.y_min) / (resolution - 1);
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            const double x = bounds.x_min + c * step_x;
            const double y = bounds.y_min + r * step_y;
            f[static_cast<std::size_t>(dim_x)] = x;
            f[static_cast<std::size_t>(dim_y)] = y;
            cells.push_back({x, y, model.predict(f)});
        }
    }
    return cells;
}

} // namespace osbench
