#include "classifier_models.hpp"

#include "osbench/array_store.hpp"
#include "osbench/calibration.hpp"
#include "osbench/error.hpp"
#include "osbench/extra_trees.hpp"
#include "osbench/logistic.hpp"
#include "osbench/rng.hpp"
#include "osbench/svdd.hpp"
#include "osbench/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace osbench::detail {

double require(const Hyperparams& hp, std::string_view key)
{
    auto it = hp.find(std::string(key));
    if (it == hp.end())
        throw InputError("missing hyperparameter '" + std::string(key) + "'");
    return it->second;
}

double value_or(const Hyperparams& hp, std::string_view key, double fallback)
{
    auto it = hp.find(std::string(key));
    return it == hp.end() ? fallback : it->second;
}

namespace {

Matrix rows_where(const Matrix& x, const std::vector<int>& y, int slot)
{
    const auto count = static_cast<std::size_t>(std::count(y.begin(), y.end(), slot));
    Matrix out(count, x.cols());
    for (std::size_t i = 0, r = 0; i < x.rows(); ++i) {
        if (y[i] == slot) {
            std::copy(x.row(i).begin(), x.row(i).end(), out.row(r).begin());
            ++r;
        }
    }
    return out;
}

Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& rows)
{
    Matrix out(rows.size(), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(x.row(rows[r]).begin(), x.row(rows[r]).end(), out.row(r).begin());
    return out;
}

SvmOptions svm_options(const ModelInfo& info)
{
    SvmOptions options;
    options.C = require(info.hyperparams, "C");
    options.kernel = info.kernel;
    options.tol = value_or(info.hyperparams, "tol", 1e-3);
    return options;
}

std::vector<BinarySvm> train_ova(const Matrix& z, const std::vector<int>& y, std::size_t n_classes,
                                 const SvmOptions& options)
{
    std::vector<BinarySvm> svms;
    svms.reserve(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<int> signs(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            signs[i] = y[i] == static_cast<int>(c) ? 1 : -1;
        svms.push_back(svm_train_binary(z, signs, options).model);
    }
    return svms;
}

std::vector<double> ova_decisions(const std::vector<BinarySvm>& svms, std::span<const double> z)
{
    std::vector<double> g(svms.size());
    for (std::size_t c = 0; c < svms.size(); ++c)
        g[c] = svms[c].decision(z);
    return g;
}

void save_ova(const std::vector<BinarySvm>& svms, ArrayStore& store, const std::string& prefix)
{
    store.put_scalar(prefix + "count", static_cast<double>(svms.size()));
    for (std::size_t c = 0; c < svms.size(); ++c)
        svms[c].save(store, prefix + std::to_string(c) + ".");
}

std::vector<BinarySvm> load_ova(const ArrayStore& store, const std::string& prefix)
{
    const auto count = static_cast<std::size_t>(store.scalar(prefix + "count"));
    std::vector<BinarySvm> svms;
    for (std::size_t c = 0; c < count; ++c)
        svms.push_back(BinarySvm::load(store, prefix + std::to_string(c) + "."));
    return svms;
}

// One-vs-all SVMs with a Platt sigmoid per class, the sigmoids fitted on
// two-fold out-of-fold decision values.
struct PlattOva {
    std::vector<BinarySvm> svms;
    std::vector<PlattParams> platt;

    std::vector<double> posteriors(std::span<const double> z) const
    {
        std::vector<double> p(svms.size());
        for (std::size_t c = 0; c < svms.size(); ++c)
            p[c] = platt[c].probability(svms[c].decision(z));
        return p;
    }

    void save(ArrayStore& store, const std::string& prefix) const
    {
        save_ova(svms, store, prefix + "svm.");
        for (std::size_t c = 0; c < platt.size(); ++c)
            platt[c].save(store, prefix + "cal" + std::to_string(c) + ".");
    }

    static PlattOva load(const ArrayStore& store, const std::string& prefix)
    {
        PlattOva out;
        out.svms = load_ova(store, prefix + "svm.");
        for (std::size_t c = 0; c < out.svms.size(); ++c)
            out.platt.push_back(PlattParams::load(store, prefix + "cal" + std::to_string(c) + "."));
        return out;
    }
};

PlattOva train_platt_ova(const Matrix& z, const std::vector<int>& y, std::size_t n_classes, const SvmOptions& options,
                         std::uint64_t seed)
{
    PlattOva out;
    out.svms = train_ova(z, y, n_classes, options);

    // Stratified two-fold assignment.
    Rng rng(mix_seed(seed, 0x9147));
    std::vector<int> fold(y.size(), 0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == static_cast<int>(c))
                members.push_back(i);
        rng.shuffle(members);
        for (std::size_t k = 0; k < members.size(); ++k)
            fold[members[k]] = static_cast<int>(k % 2);
    }

    // oof(i, c): decision of class c's SVM trained without sample i's fold.
    Matrix oof(y.size(), n_classes);
    for (int f = 0; f < 2; ++f) {
        std::vector<std::size_t> train_rows;
        std::vector<std::size_t> held_rows;
        for (std::size_t i = 0; i < y.size(); ++i)
            (fold[i] == f ? held_rows : train_rows).push_back(i);
        const Matrix train = select_rows(z, train_rows);
        for (std::size_t c = 0; c < n_classes; ++c) {
            std::vector<int> signs(train_rows.size());
            bool has_pos = false;
            bool has_neg = false;
            for (std::size_t r = 0; r < train_rows.size(); ++r) {
                signs[r] = y[train_rows[r]] == static_cast<int>(c) ? 1 : -1;
                (signs[r] == 1 ? has_pos : has_neg) = true;
            }
            // A class with a single sample has no out-of-fold model; fall back
            // to the full-data SVM for its column.
            const BinarySvm model =
                has_pos && has_neg ? svm_train_binary(train, signs, options).model : out.svms[c];
            for (std::size_t i : held_rows)
                oof(i, c) = model.decision(z.row(i));
        }
    }

    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<double> scores(y.size());
        std::vector<int> signs(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            scores[i] = oof(i, c);
            signs[i] = y[i] == static_cast<int>(c) ? 1 : -1;
        }
        out.platt.push_back(platt_fit(scores, signs));
    }
    return out;
}

// ---- Models ------------------------------------------------------------------

class OsnnModel final : public TrainedModel {
public:
    OsnnModel(ModelInfo info, Matrix train, std::vector<int> slots)
        : TrainedModel(std::move(info)), train_(std::move(train)), slots_(std::move(slots))
    {
        if (train_.rows() != slots_.size())
            throw InputError("osnn: training rows differ from labels");
    }

    void save_params(ArrayStore& store) const override
    {
        store.put_matrix("train", train_);
        store.put("slots", std::vector<double>(slots_.begin(), slots_.end()));
    }

    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        const auto& s = store.get("slots");
        return std::make_unique<OsnnModel>(std::move(info), store.get_matrix("train"),
                                           std::vector<int>(s.begin(), s.end()));
    }

protected:
    std::vector<double> score_standardized(std::span<const double> z) const override
    {
        std::vector<double> d2(train_.rows());
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < train_.rows(); ++i) {
            d2[i] = squared_distance(train_.row(i), z);
            if (d2[i] < d2[nearest])
                nearest = i;
        }
        double other = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < train_.rows(); ++i)
            if (slots_[i] != slots_[nearest])
                other = std::min(other, d2[i]);

        std::vector<double> scores(class_ids().size(), 0.0);
        // Equidistant classes (including a query on top of both) give ratio 1.
        const double ratio = other > 0.0 ? std::sqrt(d2[nearest]) / std::sqrt(other) : 1.0;
        scores[static_cast<std::size_t>(slots_[nearest])] = 1.0 - ratio;
        return scores;
    }

private:
    Matrix train_;
    std::vector<int> slots_;
};

class SvmOvaModel final : public TrainedModel {
public:
    SvmOvaModel(ModelInfo info, std::vector<BinarySvm> svms) : TrainedModel(std::move(info)), svms_(std::move(svms)) {}

    void save_params(ArrayStore& store) const override { save_ova(svms_, store, "svm."); }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        return std::make_unique<SvmOvaModel>(std::move(info), load_ova(store, "svm."));
    }

    std::size_t n_binary() const { return svms_.size(); }

protected:
    std::vector<double> score_standardized(std::span<const double> z) const override { return ova_decisions(svms_, z); }

private:
    std::vector<BinarySvm> svms_;
};

class PsvmModel final : public TrainedModel {
public:
    PsvmModel(ModelInfo info, PlattOva ova) : TrainedModel(std::move(info)), ova_(std::move(ova)) {}

    void save_params(ArrayStore& store) const override { ova_.save(store, "psvm."); }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        return std::make_unique<PsvmModel>(std::move(info), PlattOva::load(store, "psvm."));
    }

protected:
    std::vector<double> score_standardized(std::span<const double> z) const override { return ova_.posteriors(z); }

private:
    PlattOva ova_;
};

class SoftmaxModel final : public TrainedModel {
public:
    SoftmaxModel(ModelInfo info, LogisticModel model) : TrainedModel(std::move(info)), model_(std::move(model)) {}

    void save_params(ArrayStore& store) const override { model_.save(store, "logistic."); }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        return std::make_unique<SoftmaxModel>(std::move(info), LogisticModel::load(store, "logistic."));
    }

protected:
    std::vector<double> score_standardized(std::span<const double> z) const override
    {
        return model_.probabilities(z);
    }

private:
    LogisticModel model_;
};

class NcmModel final : public TrainedModel {
public:
    NcmModel(ModelInfo info, Matrix means) : TrainedModel(std::move(info)), means_(std::move(means)) {}

    void save_params(ArrayStore& store) const override { store.put_matrix("means", means_); }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        return std::make_unique<NcmModel>(std::move(info), store.get_matrix("means"));
    }

protected:
    // Softmax over negative Euclidean distances to the class means.
    std::vector<double> score_standardized(std::span<const double> z) const override
    {
        std::vector<double> s(means_.rows());
        for (std::size_t c = 0; c < s.size(); ++c)
            s[c] = -std::sqrt(squared_distance(means_.row(c), z));
        const double top = *std::max_element(s.begin(), s.end());
        double sum = 0.0;
        for (auto& v : s) {
            v = std::exp(v - top);
            sum += v;
        }
        for (auto& v : s)
            v /= sum;
        return s;
    }

private:
    Matrix means_;
};

class ExtraTreesModel final : public TrainedModel {
public:
    ExtraTreesModel(ModelInfo info, ExtraTreesForest forest) : TrainedModel(std::move(info)), forest_(std::move(forest))
    {
    }

    void save_params(ArrayStore& store) const override { forest_.save(store, "forest."); }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        return std::make_unique<ExtraTreesModel>(std::move(info), ExtraTreesForest::load(store, "forest."));
    }

protected:
    std::vector<double> score_standardized(std::span<const double> z) const override
    {
        return forest_.probabilities(z);
    }

private:
    ExtraTreesForest forest_;
};

class OneClassModel final : public TrainedModel {
public:
    OneClassModel(ModelInfo info, std::vector<EnclosingBall> balls)
        : TrainedModel(std::move(info)), balls_(std::move(balls))
    {
    }

    void save_params(ArrayStore& store) const override
    {
        store.put_scalar("ball.count", static_cast<double>(balls_.size()));
        for (std::size_t c = 0; c < balls_.size(); ++c)
            balls_[c].save(store, "ball" + std::to_string(c) + ".");
    }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        std::vector<EnclosingBall> balls;
        const auto count = static_cast<std::size_t>(store.scalar("ball.count"));
        for (std::size_t c = 0; c < count; ++c)
            balls.push_back(EnclosingBall::load(store, "ball" + std::to_string(c) + "."));
        return std::make_unique<OneClassModel>(std::move(info), std::move(balls));
    }

protected:
    std::vector<double> score_standardized(std::span<const double> z) const override
    {
        std::vector<double> s(balls_.size());
        for (std::size_t c = 0; c < s.size(); ++c)
            s[c] = balls_[c].score(z);
        return s;
    }

private:
    std::vector<EnclosingBall> balls_;
};

class TwoStageModel final : public TrainedModel {
public:
    TwoStageModel(ModelInfo info, EnclosingBall gate, PlattOva ova)
        : TrainedModel(std::move(info)), gate_(std::move(gate)), ova_(std::move(ova))
    {
    }

    void save_params(ArrayStore& store) const override
    {
        gate_.save(store, "gate.");
        ova_.save(store, "psvm.");
    }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        return std::make_unique<TwoStageModel>(std::move(info), EnclosingBall::load(store, "gate."),
                                               PlattOva::load(store, "psvm."));
    }

protected:
    // Stage-one rejection zeroes every class score.
    std::vector<double> score_standardized(std::span<const double> z) const override
    {
        if (gate_.score(z) < 0.0)
            return std::vector<double>(class_ids().size(), 0.0);
        return ova_.posteriors(z);
    }

private:
    EnclosingBall gate_;
    PlattOva ova_;
};

class PiSvmModel final : public TrainedModel {
public:
    PiSvmModel(ModelInfo info, std::vector<BinarySvm> svms, std::vector<WeibullParams> tails)
        : TrainedModel(std::move(info)), svms_(std::move(svms)), tails_(std::move(tails))
    {
    }

    void save_params(ArrayStore& store) const override
    {
        save_ova(svms_, store, "svm.");
        for (std::size_t c = 0; c < tails_.size(); ++c)
            tails_[c].save(store, "tail" + std::to_string(c) + ".");
    }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        auto svms = load_ova(store, "svm.");
        std::vector<WeibullParams> tails;
        for (std::size_t c = 0; c < svms.size(); ++c)
            tails.push_back(WeibullParams::load(store, "tail" + std::to_string(c) + "."));
        return std::make_unique<PiSvmModel>(std::move(info), std::move(svms), std::move(tails));
    }

protected:
    // Probability of inclusion: Weibull CDF of each class's decision value.
    std::vector<double> score_standardized(std::span<const double> z) const override
    {
        std::vector<double> p(svms_.size());
        for (std::size_t c = 0; c < svms_.size(); ++c)
            p[c] = tails_[c].cdf(svms_[c].decision(z));
        return p;
    }

private:
    std::vector<BinarySvm> svms_;
    std::vector<WeibullParams> tails_;
};

class DetectorModel final : public TrainedModel {
public:
    DetectorModel(ModelInfo info, PlattOva ova) : TrainedModel(std::move(info)), ova_(std::move(ova)) {}
    DetectorModel(ModelInfo info, ExtraTreesForest forest) : TrainedModel(std::move(info)), forest_(std::move(forest))
    {
    }

    void save_params(ArrayStore& store) const override
    {
        if (forest_)
            forest_->save(store, "forest.");
        else
            ova_.save(store, "psvm.");
    }
    static std::unique_ptr<TrainedModel> load(ModelInfo info, const ArrayStore& store)
    {
        if (info.detector_base == Variant::ExtraTrees)
            return std::make_unique<DetectorModel>(std::move(info), ExtraTreesForest::load(store, "forest."));
        return std::make_unique<DetectorModel>(std::move(info), PlattOva::load(store, "psvm."));
    }

protected:
    std::vector<double> score_standardized(std::span<const double> z) const override
    {
        return forest_ ? forest_->probabilities(z) : ova_.posteriors(z);
    }

private:
    PlattOva ova_;
    std::optional<ExtraTreesForest> forest_;
};

ExtraTreesOptions forest_options(const ModelInfo& info)
{
    ExtraTreesOptions options;
    options.n_trees = static_cast<int>(value_or(info.hyperparams, "M", 100));
    options.candidate_features = static_cast<int>(value_or(info.hyperparams, "K", 0));
    options.min_leaf = static_cast<int>(value_or(info.hyperparams, "min_leaf", 1));
    options.seed = mix_seed(info.seed, 0xE7);
    return options;
}

BallOptions ball_options(const ModelInfo& info)
{
    BallOptions options;
    options.nu = require(info.hyperparams, "nu");
    options.kernel = info.kernel;
    return options;
}

std::vector<double> lower_tail(std::vector<double> scores, double fraction)
{
    std::sort(scores.begin(), scores.end());
    const auto wanted = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(scores.size())));
    scores.resize(std::min(scores.size(), std::max<std::size_t>(wanted, 3)));
    return scores;
}

bool has_spread(const std::vector<double>& v)
{
    return v.size() >= 3 && std::any_of(v.begin(), v.end(), [&](double x) { return x != v.front(); });
}

} // namespace

std::unique_ptr<TrainedModel> fit_variant(FitContext ctx)
{
    ModelInfo& info = ctx.info;
    const auto& hp = info.hyperparams;
    switch (info.variant) {
    case Variant::Osnn: {
        const double T = require(hp, "T");
        if (!(T > 0.0 && T < 1.0))
            throw InputError("osnn threshold T must lie in (0, 1)");
        return std::make_unique<OsnnModel>(std::move(info), std::move(ctx.z), std::move(ctx.y));
    }
    case Variant::SvmOva: {
        auto svms = train_ova(ctx.z, ctx.y, ctx.n_classes, svm_options(info));
        return std::make_unique<SvmOvaModel>(std::move(info), std::move(svms));
    }
    case Variant::Psvm: {
        auto ova = train_platt_ova(ctx.z, ctx.y, ctx.n_classes, svm_options(info), info.seed);
        return std::make_unique<PsvmModel>(std::move(info), std::move(ova));
    }
    case Variant::Softmax: {
        LogisticOptions options;
        options.l2 = require(hp, "l2");
        options.learning_rate = require(hp, "lr");
        options.epochs = static_cast<int>(require(hp, "epochs"));
        options.batch_size = static_cast<std::size_t>(value_or(hp, "batch", 32));
        options.seed = mix_seed(info.seed, 0x50F7);
        auto model = logistic_train(ctx.z, ctx.y, static_cast<int>(ctx.n_classes), options);
        return std::make_unique<SoftmaxModel>(std::move(info), std::move(model));
    }
    case Variant::Ncm: {
        Matrix means(ctx.n_classes, ctx.z.cols());
        std::vector<double> counts(ctx.n_classes, 0.0);
        for (std::size_t i = 0; i < ctx.z.rows(); ++i) {
            const auto c = static_cast<std::size_t>(ctx.y[i]);
            counts[c] += 1.0;
            auto m = means.row(c);
            const auto zi = ctx.z.row(i);
            for (std::size_t d = 0; d < m.size(); ++d)
                m[d] += zi[d];
        }
        for (std::size_t c = 0; c < ctx.n_classes; ++c)
            for (auto& v : means.row(c))
                v /= counts[c];
        return std::make_unique<NcmModel>(std::move(info), std::move(means));
    }
    case Variant::ExtraTrees: {
        auto forest = train_extra_trees(ctx.z, ctx.y, static_cast<int>(ctx.n_classes), forest_options(info));
        return std::make_unique<ExtraTreesModel>(std::move(info), std::move(forest));
    }
    case Variant::OneClassPerClass: {
        const auto options = ball_options(info);
        std::vector<EnclosingBall> balls;
        for (std::size_t c = 0; c < ctx.n_classes; ++c)
            balls.push_back(fit_enclosing_ball(rows_where(ctx.z, ctx.y, static_cast<int>(c)), options).model);
        return std::make_unique<OneClassModel>(std::move(info), std::move(balls));
    }
    case Variant::TwoStage: {
        auto gate = fit_enclosing_ball(ctx.z, ball_options(info)).model;
        auto ova = train_platt_ova(ctx.z, ctx.y, ctx.n_classes, svm_options(info), info.seed);
        return std::make_unique<TwoStageModel>(std::move(info), std::move(gate), std::move(ova));
    }
    case Variant::PiSvm: {
        const double fraction = value_or(hp, "tail_fraction", 0.5);
        if (!(fraction > 0.0 && fraction <= 1.0))
            throw InputError("pisvm tail_fraction must lie in (0, 1]");
        auto svms = train_ova(ctx.z, ctx.y, ctx.n_classes, svm_options(info));
        std::vector<WeibullParams> tails;
        for (std::size_t c = 0; c < ctx.n_classes; ++c) {
            std::vector<double> positives;
            for (std::size_t i = 0; i < ctx.z.rows(); ++i)
                if (ctx.y[i] == static_cast<int>(c))
                    positives.push_back(svms[c].decision(ctx.z.row(i)));
            std::vector<double> tail = lower_tail(positives, fraction);
            if (!has_spread(tail))
                tail = positives;
            if (!has_spread(tail))
                throw InputError("pisvm: class " + std::to_string(info.class_ids[c])
                                 + " needs at least 3 distinct positive scores for its Weibull fit");
            tails.push_back(weibull_fit_shifted(tail));
        }
        return std::make_unique<PiSvmModel>(std::move(info), std::move(svms), std::move(tails));
    }
    case Variant::BinaryDetector: {
        if (info.detector_base == Variant::ExtraTrees) {
            auto forest = train_extra_trees(ctx.z, ctx.y, 2, forest_options(info));
            return std::make_unique<DetectorModel>(std::move(info), std::move(forest));
        }
        auto ova = train_platt_ova(ctx.z, ctx.y, 2, svm_options(info), info.seed);
        return std::make_unique<DetectorModel>(std::move(info), std::move(ova));
    }
    case Variant::Wsvm:
    case Variant::Dbc:
    case Variant::Ssvm:
        break;
    }
    throw UnimplementedVariant("classifier '" + std::string(variant_name(info.variant)) + "' is not implemented");
}

std::unique_ptr<TrainedModel> restore_variant(ModelInfo info, const ArrayStore& store)
{
    switch (info.variant) {
    case Variant::Osnn:
        return OsnnModel::load(std::move(info), store);
    case Variant::SvmOva:
        return SvmOvaModel::load(std::move(info), store);
    case Variant::Psvm:
        return PsvmModel::load(std::move(info), store);
    case Variant::Softmax:
        return SoftmaxModel::load(std::move(info), store);
    case Variant::Ncm:
        return NcmModel::load(std::move(info), store);
    case Variant::ExtraTrees:
        return ExtraTreesModel::load(std::move(info), store);
    case Variant::OneClassPerClass:
        return OneClassModel::load(std::move(info), store);
    case Variant::TwoStage:
        return TwoStageModel::load(std::move(info), store);
    case Variant::PiSvm:
        return PiSvmModel::load(std::move(info), store);
    case Variant::BinaryDetector:
        return DetectorModel::load(std::move(info), store);
    default:
        break;
    }
    throw UnimplementedVariant("cannot restore classifier '" + std::string(variant_name(info.variant)) + "'");
}

} // namespace osbench::detail
