#include "osbench/data.hpp"

#include "osbench/error.hpp"

#include <algorithm>
#include <utility>

namespace osbench {

Label Label::known(int class_id)
{
    if (class_id < 0)
        throw InputError("class id must be nonnegative, got " + std::to_string(class_id));
    return Label{class_id};
}

int Label::class_id() const
{
    if (is_unknown())
        throw InputError("the unknown label has no class id");
    return id_;
}

Dataset::Dataset(std::vector<Sample> samples, ClassRegistry registry, int feature_dim)
    : samples_(std::move(samples)), registry_(std::move(registry)), feature_dim_(feature_dim)
{
    if (feature_dim_ < 0)
        throw InputError("negative feature dimension");
    for (const auto& [id, name] : registry_) {
        if (id < 0)
            throw InputError("negative class id in registry");
        if (name == kUnknownName)
            throw InputError("class name '" + name + "' is reserved");
    }
    std::set<std::pair<std::string, int>> seen;
    for (const auto& s : samples_) {
        if (static_cast<int>(s.features.size()) != feature_dim_)
            throw InputError("sample " + s.image_id + "#" + std::to_string(s.patch_index) + " has dimension "
                             + std::to_string(s.features.size()) + ", expected " + std::to_string(feature_dim_));
        if (s.patch_index < 0)
            throw InputError("negative patch index in image " + s.image_id);
        if (s.label.is_known() && !registry_.contains(s.label.class_id()))
            throw InputError("class id " + std::to_string(s.label.class_id()) + " is not registered");
        if (!seen.emplace(s.image_id, s.patch_index).second)
            throw InputError("duplicate sample " + s.image_id + "#" + std::to_string(s.patch_index));
    }
}

std::set<int> Dataset::known_class_ids() const
{
    std::set<int> ids;
    for (const auto& s : samples_)
        if (s.label.is_known())
            ids.insert(s.label.class_id());
    return ids;
}

bool Dataset::has_unknown() const
{
    return std::any_of(samples_.begin(), samples_.end(), [](const Sample& s) { return s.label.is_unknown(); });
}

std::string Dataset::label_name(Label label) const
{
    if (label.is_unknown())
        return std::string(kUnknownName);
    auto it = registry_.find(label.class_id());
    if (it == registry_.end())
        throw InputError("class id " + std::to_string(label.class_id()) + " is not registered");
    return it->second;
}

ClassRegistry make_registry(const std::set<std::string>& class_names)
{
    ClassRegistry registry;
    int next = 0;
    for (const auto& name : class_names) {
        if (name == kUnknownName)
            continue;
        registry.emplace(next++, name);
    }
    return registry;
}

int find_class(const ClassRegistry& registry, std::string_view name)
{
    for (const auto& [id, n] : registry)
        if (n == name)
            return id;
    return -1;
}

std::map<std::string, std::vector<std::size_t>> image_index_groups(const Dataset& dataset)
{
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        groups[dataset[i].image_id].push_back(i);
    for (auto& [id, members] : groups) {
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return dataset[a].patch_index < dataset[b].patch_index;
        });
    }
    return groups;
}

std::map<std::string, std::vector<Sample>> group_by_image(const Dataset& dataset)
{
    std::map<std::string, std::vector<Sample>> groups;
    for (const auto& [id, members] : image_index_groups(dataset)) {
        auto& out = groups[id];
        out.reserve(members.size());
        for (std::size_t i : members)
            out.push_back(dataset[i]);
    }
    return groups;
}

Dataset relabel_as_unknown(const Dataset& dataset, const std::set<int>& class_ids)
{
    for (int id : class_ids)
        if (!dataset.registry().contains(id))
            throw InputError("cannot relabel unregistered class id " + std::to_string(id));
    std::vector<Sample> samples = dataset.samples();
    for (auto& s : samples)
        if (s.label.is_known() && class_ids.contains(s.label.class_id()))
            s.label = Label::unknown();
    return Dataset(std::move(samples), dataset.registry(), dataset.feature_dim());
}

Dataset filter(const Dataset& dataset, const std::function<bool(const Sample&)>& keep)
{
    std::vector<Sample> samples;
    for (const auto& s : dataset.samples())
        if (keep(s))
            samples.push_back(s);
    return Dataset(std::move(samples), dataset.registry(), dataset.feature_dim());
}

Dataset align_to_registry(const Dataset& dataset, const ClassRegistry& registry)
{
    std::vector<Sample> samples = dataset.samples();
    for (auto& s : samples) {
        if (s.label.is_unknown())
            continue;
        const int id = find_class(registry, dataset.label_name(s.label));
        s.label = id < 0 ? Label::unknown() : Label::known(id);
    }
    return Dataset(std::move(samples), registry, dataset.feature_dim());
}

Dataset concat(const Dataset& a, const Dataset& b)
{
    if (a.registry() != b.registry())
        throw InputError("concat: datasets have different class registries");
    if (a.feature_dim() != b.feature_dim() && !a.empty() && !b.empty())
        throw InputError("concat: feature dimensions differ");
    std::vector<Sample> samples = a.samples();
    samples.insert(samples.end(), b.samples().begin(), b.samples().end());
    const int dim = a.empty() ? b.feature_dim() : a.feature_dim();
    return Dataset(std::move(samples), a.registry(), dim);
}

} // namespace osbench
