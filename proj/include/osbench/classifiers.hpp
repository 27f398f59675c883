#pragma once

#include "osbench/data.hpp"
#include "osbench/kernel.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace osbench {

class ArrayStore;

enum class Variant {
    Osnn,
    SvmOva,
    Psvm,
    Softmax,
    Ncm,
    ExtraTrees,
    OneClassPerClass,
    TwoStage,
    PiSvm,
    BinaryDetector,
    // Registered so result tables can list them; fitting throws UnimplementedVariant.
    Wsvm,
    Dbc,
    Ssvm,
};

std::string_view variant_name(Variant variant);
Variant parse_variant(std::string_view name);
bool is_implemented(Variant variant);
const std::vector<Variant>& all_variants();

using Hyperparams = std::map<std::string, double>;

// Keys every variant needs (optional keys with defaults are not listed).
//   osnn: T              svm_ova: C              psvm: C, tau
//   softmax: l2, lr, epochs, tau                 ncm: tau
//   et: tau (M = 100, K = ceil(sqrt(d)), min_leaf = 1)
//   occ_perclass: nu     two_stage: nu, C, tau
//   pisvm: C, delta (tail_fraction = 0.5)        binary_detector: C for psvm base
// An RBF gamma may be given as the `gamma` key; otherwise KernelSpec::gamma,
// and 1/d when that is not positive.
std::vector<std::string> required_hyperparams(Variant variant);

// Keys read only by the rejection rule. Scores never depend on them, so one
// fit can be re-thresholded.
bool is_rejection_key(Variant variant, std::string_view key);

struct ClassifierSpec {
    Variant variant = Variant::Osnn;
    Hyperparams hyperparams;
    KernelSpec kernel;
    Variant detector_base = Variant::Psvm;
    std::uint64_t seed = 0;
};

// Per-dimension z-scoring with statistics from the fit data; constant
// dimensions keep scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Dataset& data);
    std::vector<double> apply(std::span<const double> x) const;
};

enum class Detection { Known, Unknown };

// Fields shared by every fitted model.
struct ModelInfo {
    Variant variant = Variant::Osnn;
    Hyperparams hyperparams;
    KernelSpec kernel;
    Variant detector_base = Variant::Psvm;
    std::uint64_t seed = 0;
    ClassRegistry registry;
    // Class id for each score slot, ascending.
    std::vector<int> class_ids;
    Standardizer standardizer;
    int feature_dim = 0;
};

// A fitted open-set classifier. Immutable; safe to share across threads.
//
// predict(f) is decide(score(f), hyperparams()), so recomputing the rejection
// rule from the score vector always reproduces the prediction.
class TrainedModel {
public:
    virtual ~TrainedModel() = default;

    const ModelInfo& info() const { return info_; }
    Variant variant() const { return info_.variant; }
    const Hyperparams& hyperparams() const { return info_.hyperparams; }
    const ClassRegistry& registry() const { return info_.registry; }
    const std::vector<int>& class_ids() const { return info_.class_ids; }
    int feature_dim() const { return info_.feature_dim; }

    // Pre-threshold per-class scores, one per entry of class_ids().
    std::vector<double> score(std::span<const double> f) const;

    Label predict(std::span<const double> f) const { return decide(score(f), info_.hyperparams); }
    Detection detect(std::span<const double> f) const
    {
        return predict(f).is_unknown() ? Detection::Unknown : Detection::Known;
    }

    // Rejection rule applied to a score vector under the given hyperparameters.
    virtual Label decide(std::span<const double> scores, const Hyperparams& hyperparams) const;

    // Variant-specific numeric state.
    virtual void save_params(ArrayStore& store) const = 0;

protected:
    explicit TrainedModel(ModelInfo info) : info_(std::move(info)) {}
    virtual std::vector<double> score_standardized(std::span<const double> z) const = 0;

private:
    ModelInfo info_;
};

// The decision rules:
//   osnn             score = 1 - ratio in the nearest class's slot; accept if >= 1 - T
//   svm_ova          accept argmax if its decision value > 0
//   occ_perclass     accept argmax if its score >= 0
//   psvm, softmax, ncm, et   accept argmax if >= tau
//   two_stage        accept argmax if > 0 and >= tau (all-zero scores mean stage one rejected)
//   pisvm            accept argmax if >= delta
//   binary_detector  scores (p_known, p_unknown); unknown iff p_unknown > p_known
// Ties go to the lowest slot.
Label apply_rejection(Variant variant, std::span<const double> scores, std::span<const int> class_ids,
                      const Hyperparams& hyperparams);

// Fits the classifier on known-labeled data. Throws InputError for missing
// hyperparameters or unusable data and UnimplementedVariant for registered
// names without an implementation.
std::unique_ptr<TrainedModel> fit(const ClassifierSpec& spec, const Dataset& fit_data);

// Known-vs-unknown detector trained on two super-classes: every sample of
// `known` against every sample of `known_unknown`. spec.detector_base picks
// PSVM or ET. predict() yields Label::known(0) for "known".
std::unique_ptr<TrainedModel> fit_binary_detector(const ClassifierSpec& spec, const Dataset& known,
                                                  const Dataset& known_unknown);

// Rebuilds a model from its serialized parts.
std::unique_ptr<TrainedModel> restore_model(ModelInfo info, const ArrayStore& store);

struct GridBounds {
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
};

struct GridCell {
    double x = 0.0;
    double y = 0.0;
    Label label;
};

// Predictions over a resolution x resolution scan of the plane spanned by
// features dim_x and dim_y (raw feature units); other coordinates sit at the
// training mean. Rows advance in y, columns in x.
std::vector<GridCell> export_decision_grid(const TrainedModel& model, int dim_x, int dim_y, const GridBounds& bounds,
                                           int resolution);

} // namespace osbench
