#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace osbench {

// Reserved class name for the unknown label in every file format.
inline constexpr std::string_view kUnknownName = "unknown";

// Either a known class identifier or the distinguished unknown label.
class Label {
public:
    constexpr Label() = default;

    static constexpr Label unknown() { return Label{}; }
    static Label known(int class_id);

    constexpr bool is_unknown() const { return id_ < 0; }
    constexpr bool is_known() const { return id_ >= 0; }

    // Throws InputError for the unknown label.
    int class_id() const;

    friend constexpr bool operator==(Label, Label) = default;

    // Known labels order by id; unknown sorts after every known label.
    friend constexpr std::strong_ordering operator<=>(Label a, Label b)
    {
        const auto key = [](Label l) { return l.is_unknown() ? INT64_MAX : static_cast<std::int64_t>(l.id_); };
        return key(a) <=> key(b);
    }

private:
    explicit constexpr Label(int id) : id_(id) {}
    int id_ = -1;
};

struct Sample {
    std::vector<double> features;
    Label label;
    std::string image_id;
    int patch_index = 0;
};

using ClassRegistry = std::map<int, std::string>;

// Immutable collection of samples sharing one feature dimension. The
// constructor enforces the invariants: every known class id is registered,
// every vector has `feature_dim` entries, and (image_id, patch_index) pairs
// are unique.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<Sample> samples, ClassRegistry registry, int feature_dim);

    const std::vector<Sample>& samples() const { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    const ClassRegistry& registry() const { return registry_; }
    int feature_dim() const { return feature_dim_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    // Distinct known class ids present in the samples.
    std::set<int> known_class_ids() const;
    int n_known() const { return static_cast<int>(known_class_ids().size()); }
    bool has_unknown() const;

    // Name for a label under this registry ("unknown" for the unknown label).
    std::string label_name(Label label) const;

private:
    std::vector<Sample> samples_;
    ClassRegistry registry_;
    int feature_dim_ = 0;
};

// Registry assigning ids 0.. to the names in lexicographic order.
ClassRegistry make_registry(const std::set<std::string>& class_names);

// Lookup of a class id by name; returns -1 when absent.
int find_class(const ClassRegistry& registry, std::string_view name);

// Groups samples by image_id; groups are ordered by patch_index.
std::map<std::string, std::vector<Sample>> group_by_image(const Dataset& dataset);

// Same grouping, as indices into dataset.samples().
std::map<std::string, std::vector<std::size_t>> image_index_groups(const Dataset& dataset);

// Returns a copy where samples of the listed classes carry the unknown label.
Dataset relabel_as_unknown(const Dataset& dataset, const std::set<int>& class_ids);

// Keeps samples for which keep(sample) is true, preserving order and registry.
Dataset filter(const Dataset& dataset, const std::function<bool(const Sample&)>& keep);

// Re-expresses labels in `registry` by class name. Names missing from the
// registry (and the unknown label) map to unknown.
Dataset align_to_registry(const Dataset& dataset, const ClassRegistry& registry);

// Concatenates datasets that share a registry and feature dimension.
Dataset concat(const Dataset& a, const Dataset& b);

// ---- Files ----------------------------------------------------------------

enum class FeatureFormat { Osfv, Csv };

struct FeatureTable {
    std::uint32_t dim = 0;
    std::vector<std::vector<float>> rows;
};

FeatureTable read_feature_file(const std::filesystem::path& path, FeatureFormat format);
void write_feature_file(const std::filesystem::path& path, const FeatureTable& table, FeatureFormat format);

// Manifest header lines `feature_file=`, `format=`, `dim=` (plus an optional
// `classes=` line listing the full registry), then one
// `image_id,patch_index,class_name,row_index` record per sample. The feature
// file path is resolved relative to the manifest's directory.
Dataset load_manifest(const std::filesystem::path& path);

// Writes `feature_file` (rows in sample order) and a manifest referencing it.
// Features are stored as 32-bit floats.
void save_manifest(const Dataset& dataset, const std::filesystem::path& manifest_path,
                   const std::filesystem::path& feature_file, FeatureFormat format = FeatureFormat::Osfv);

} // namespace osbench
