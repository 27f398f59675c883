#pragma once

#include "osbench/classifiers.hpp"
#include "osbench/data.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace osbench {

enum class Protocol { Closed, Open, NetOpen };

std::string_view protocol_name(Protocol protocol);
Protocol parse_protocol(std::string_view name);

enum class ImageRole { Fit, Validation };

// A training protocol instance. Splits are by image; fit and validation never
// share an image_id.
struct SplitPlan {
    Protocol protocol = Protocol::Closed;
    std::uint64_t seed = 0;
    double val_fraction = 0.2;
    Dataset fit;
    Dataset validation;  // ku classes and extra data carry UNKNOWN labels
    Dataset final_train; // always the full training set
    std::set<int> ku_class_ids;
    // Samples standing in for unknowns with their original labels: the ku
    // classes under OPEN, the extra dataset under NETOPEN, empty for CLOSED.
    Dataset known_unknown;
    // Role of every training image (extra-dataset images are always validation).
    std::map<std::string, ImageRole> roles;
};

inline constexpr double kDefaultValFraction = 0.2;

// Per known class, a seeded shuffle of its images puts
// max(1, floor(val_fraction * m)) of them (at most m - 1) in validation.
SplitPlan plan_closed(const Dataset& train, double val_fraction, std::uint64_t seed);
// floor(n/2) classes chosen by seeded shuffle become known-unknown.
SplitPlan plan_open(const Dataset& train, double val_fraction, std::uint64_t seed);
SplitPlan plan_netopen(const Dataset& train, const Dataset& extra_ku, double val_fraction, std::uint64_t seed);

// Builds the plan for any protocol; extra_ku is required for NETOPEN only.
SplitPlan make_plan(Protocol protocol, const Dataset& train, const Dataset* extra_ku, double val_fraction,
                    std::uint64_t seed);

// OPEN repetitions use seeds seed, seed + 1, ...; the other protocols ignore r.
std::vector<SplitPlan> make_plans(Protocol protocol, const Dataset& train, const Dataset* extra_ku,
                                  double val_fraction, std::uint64_t seed, int repetitions);

// Plan document: `osbench_plan_v1`, protocol, seed, val_fraction, the source
// manifests, ku classes by name, then one `role,image_id` line per image.
struct PlanFile {
    SplitPlan plan;
    std::filesystem::path train_manifest;
    std::filesystem::path extra_ku_manifest; // empty unless NETOPEN
};

std::string plan_document(const PlanFile& file);
void save_plan(const PlanFile& file, const std::filesystem::path& path);
// Reloads the manifests and rebuilds the recorded plan exactly from the
// recorded roles. Relative manifest paths resolve against the plan's directory.
PlanFile load_plan(const std::filesystem::path& path);

// Detector over the plan's known vs known-unknown data.
std::unique_ptr<TrainedModel> fit_binary_detector(const ClassifierSpec& spec, const SplitPlan& plan);

} // namespace osbench
