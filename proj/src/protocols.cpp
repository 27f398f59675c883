#include "osbench/protocols.hpp"

#include "osbench/error.hpp"
#include "osbench/rng.hpp"
#include "osbench/text.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace osbench {

namespace fs = std::filesystem;

std::string_view protocol_name(Protocol protocol)
{
    switch (protocol) {
    case Protocol::Closed:
        return "closed";
    case Protocol::Open:
        return "open";
    case Protocol::NetOpen:
        return "netopen";
    }
    return "closed";
}

Protocol parse_protocol(std::string_view name)
{
    for (auto p : {Protocol::Closed, Protocol::Open, Protocol::NetOpen})
        if (protocol_name(p) == name)
            return p;
    throw InputError("unknown protocol '" + std::string(name) + "'");
}

namespace {

constexpr std::string_view kExtraPrefix = "extra:";

// image_id -> class id, checking that the training set is all-known and that
// no image mixes classes.
std::map<std::string, int> image_classes(const Dataset& train)
{
    std::map<std::string, int> out;
    for (const auto& s : train.samples()) {
        if (s.label.is_unknown())
            throw InputError("training data may not contain unknown labels");
        const auto [it, inserted] = out.emplace(s.image_id, s.label.class_id());
        if (!inserted && it->second != s.label.class_id())
            throw InputError("image '" + s.image_id + "' mixes classes");
    }
    return out;
}

std::map<int, std::vector<std::string>> images_per_class(const Dataset& train)
{
    std::map<int, std::vector<std::string>> out;
    for (const auto& [image, cls] : image_classes(train))
        out[cls].push_back(image);
    return out;
}

void check_fraction(double val_fraction)
{
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw InputError("val_fraction must lie in (0, 1)");
}

void split_class_images(std::vector<std::string> images, int class_id, double val_fraction, std::uint64_t seed,
                        std::map<std::string, ImageRole>& roles)
{
    const std::size_t m = images.size();
    if (m < 2)
        throw InputError("class " + std::to_string(class_id) + " has fewer than 2 images");
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(class_id)));
    rng.shuffle(images);
    auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(m) + 1e-9));
    n_val = std::clamp<std::size_t>(n_val, 1, m - 1);
    for (std::size_t i = 0; i < m; ++i)
        roles[images[i]] = i < n_val ? ImageRole::Validation : ImageRole::Fit;
}

// Datasets from image roles; shared by the planners and by plan loading so a
// reloaded plan is sample-for-sample identical.
SplitPlan assemble(Protocol protocol, const Dataset& train, const Dataset* extra_ku, double val_fraction,
                   std::uint64_t seed, std::set<int> ku_class_ids, std::map<std::string, ImageRole> roles)
{
    const auto classes = image_classes(train);
    for (const auto& [image, cls] : classes)
        if (!roles.contains(image))
            throw InputError("plan has no role for image '" + image + "'");
    for (int id : ku_class_ids)
        if (!train.registry().contains(id))
            throw InputError("plan names unregistered ku class " + std::to_string(id));

    SplitPlan plan;
    plan.protocol = protocol;
    plan.seed = seed;
    plan.val_fraction = val_fraction;
    plan.ku_class_ids = ku_class_ids;
    plan.roles = roles;
    plan.final_train = train;

    auto role_of = [&](const Sample& s) { return roles.at(s.image_id); };
    auto is_ku = [&](const Sample& s) { return ku_class_ids.contains(s.label.class_id()); };
    plan.fit = filter(train, [&](const Sample& s) { return role_of(s) == ImageRole::Fit && !is_ku(s); });
    plan.validation = relabel_as_unknown(
        filter(train, [&](const Sample& s) { return role_of(s) == ImageRole::Validation || is_ku(s); }),
        ku_class_ids);
    plan.known_unknown = filter(train, is_ku);

    if (protocol == Protocol::NetOpen) {
        if (extra_ku == nullptr || extra_ku->empty())
            throw InputError("netopen needs a nonempty known-unknown dataset");
        for (const auto& [id, name] : extra_ku->registry())
            if (find_class(train.registry(), name) >= 0)
                throw InputError("known-unknown class '" + name + "' also appears in the training set");
        if (extra_ku->feature_dim() != train.feature_dim())
            throw InputError("known-unknown features have a different dimension");
        std::vector<Sample> extra = extra_ku->samples();
        for (auto& s : extra) {
            s.image_id = std::string(kExtraPrefix) + s.image_id;
            s.label = Label::unknown();
        }
        plan.validation = concat(plan.validation, Dataset(std::move(extra), train.registry(), train.feature_dim()));
        plan.known_unknown = *extra_ku;
    }
    return plan;
}

} // namespace

SplitPlan plan_closed(const Dataset& train, double val_fraction, std::uint64_t seed)
{
    check_fraction(val_fraction);
    std::map<std::string, ImageRole> roles;
    for (auto& [cls, images] : images_per_class(train))
        split_class_images(images, cls, val_fraction, seed, roles);
    return assemble(Protocol::Closed, train, nullptr, val_fraction, seed, {}, std::move(roles));
}

SplitPlan plan_open(const Dataset& train, double val_fraction, std::uint64_t seed)
{
    check_fraction(val_fraction);
    auto per_class = images_per_class(train);
    if (per_class.size() < 2)
        throw InputError("open protocol needs at least 2 classes");

    std::vector<int> ids;
    for (const auto& [cls, images] : per_class)
        ids.push_back(cls);
    Rng rng(mix_seed(seed, 0x0BE7));
    rng.shuffle(ids);
    const std::set<int> ku(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(ids.size() / 2));

    std::map<std::string, ImageRole> roles;
    for (auto& [cls, images] : per_class) {
        if (ku.contains(cls)) {
            if (images.size() < 2)
                throw InputError("class " + std::to_string(cls) + " has fewer than 2 images");
            for (const auto& image : images)
                roles[image] = ImageRole::Validation;
        } else {
            split_class_images(images, cls, val_fraction, seed, roles);
        }
    }
    return assemble(Protocol::Open, train, nullptr, val_fraction, seed, ku, std::move(roles));
}

SplitPlan plan_netopen(const Dataset& train, const Dataset& extra_ku, double val_fraction, std::uint64_t seed)
{
    check_fraction(val_fraction);
    std::map<std::string, ImageRole> roles;
    for (auto& [cls, images] : images_per_class(train))
        split_class_images(images, cls, val_fraction, seed, roles);
    return assemble(Protocol::NetOpen, train, &extra_ku, val_fraction, seed, {}, std::move(roles));
}

SplitPlan make_plan(Protocol protocol, const Dataset& train, const Dataset* extra_ku, double val_fraction,
                    std::uint64_t seed)
{
    switch (protocol) {
    case Protocol::Closed:
        return plan_closed(train, val_fraction, seed);
    case Protocol::Open:
        return plan_open(train, val_fraction, seed);
    case Protocol::NetOpen:
        if (extra_ku == nullptr)
            throw InputError("netopen needs a known-unknown dataset");
        return plan_netopen(train, *extra_ku, val_fraction, seed);
    }
    throw InputError("unknown protocol");
}

std::vector<SplitPlan> make_plans(Protocol protocol, const Dataset& train, const Dataset* extra_ku,
                                  double val_fraction, std::uint64_t seed, int repetitions)
{
    if (repetitions < 1)
        throw InputError("repetitions must be at least 1");
    const int count = protocol == Protocol::Open ? repetitions : 1;
    std::vector<SplitPlan> plans;
    for (int r = 0; r < count; ++r)
        plans.push_back(make_plan(protocol, train, extra_ku, val_fraction, seed + static_cast<std::uint64_t>(r)));
    return plans;
}

// ---- Plan documents ----------------------------------------------------------

std::string plan_document(const PlanFile& file)
{
    const SplitPlan& plan = file.plan;
    std::ostringstream out;
    out << "osbench_plan_v1\n";
    out << "protocol=" << protocol_name(plan.protocol) << '\n';
    out << "seed=" << plan.seed << '\n';
    out << "val_fraction=" << format_double(plan.val_fraction) << '\n';
    out << "train_manifest=" << file.train_manifest.generic_string() << '\n';
    if (plan.protocol == Protocol::NetOpen)
        out << "extra_ku_manifest=" << file.extra_ku_manifest.generic_string() << '\n';
    out << "ku_classes=";
    bool first = true;
    for (int id : plan.ku_class_ids) {
        out << (first ? "" : ",") << plan.final_train.registry().at(id);
        first = false;
    }
    out << '\n';
    for (const auto& [image, role] : plan.roles)
        out << (role == ImageRole::Fit ? "fit" : "validation") << ',' << image << '\n';
    if (plan.protocol == Protocol::NetOpen) {
        std::set<std::string> extra;
        for (const auto& s : plan.known_unknown.samples())
            extra.insert(s.image_id);
        for (const auto& image : extra)
            out << "extra," << image << '\n';
    }
    return out.str();
}

void save_plan(const PlanFile& file, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write plan file " + path.string());
    out << plan_document(file);
    if (!out)
        throw Error("failed writing plan file " + path.string());
}

PlanFile load_plan(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open plan file " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "osbench_plan_v1")
        throw InputError("not an osbench plan file: " + path.string());

    PlanFile file;
    Protocol protocol = Protocol::Closed;
    std::uint64_t seed = 0;
    double val_fraction = kDefaultValFraction;
    std::vector<std::string> ku_names;
    std::map<std::string, ImageRole> roles;
    while (std::getline(in, line)) {
        const auto text = trim(line);
        if (text.empty())
            continue;
        if (text.starts_with("fit,")) {
            roles[std::string(text.substr(4))] = ImageRole::Fit;
            continue;
        }
        if (text.starts_with("validation,")) {
            roles[std::string(text.substr(11))] = ImageRole::Validation;
            continue;
        }
        if (text.starts_with("extra,"))
            continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw InputError("malformed plan line '" + std::string(text) + "'");
        const auto key = text.substr(0, eq);
        const auto value = text.substr(eq + 1);
        if (key == "protocol")
            protocol = parse_protocol(value);
        else if (key == "seed")
            seed = parse_unsigned(value, "seed");
        else if (key == "val_fraction")
            val_fraction = parse_double(value, "val_fraction");
        else if (key == "train_manifest")
            file.train_manifest = std::string(value);
        else if (key == "extra_ku_manifest")
            file.extra_ku_manifest = std::string(value);
        else if (key == "ku_classes") {
            if (!value.empty())
                for (auto name : split_view(value, ','))
                    ku_names.emplace_back(name);
        } else
            throw InputError("unknown plan key '" + std::string(key) + "'");
    }
    if (file.train_manifest.empty())
        throw InputError("plan file lacks train_manifest");

    const auto base = path.parent_path();
    auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : base / p; };
    const Dataset train = load_manifest(resolve(file.train_manifest));
    std::set<int> ku;
    for (const auto& name : ku_names) {
        const int id = find_class(train.registry(), name);
        if (id < 0)
            throw InputError("plan ku class '" + name + "' is not in the training manifest");
        ku.insert(id);
    }
    Dataset extra;
    if (protocol == Protocol::NetOpen) {
        if (file.extra_ku_manifest.empty())
            throw InputError("netopen plan lacks extra_ku_manifest");
        extra = load_manifest(resolve(file.extra_ku_manifest));
    }
    file.plan = assemble(protocol, train, protocol == Protocol::NetOpen ? &extra : nullptr, val_fraction, seed,
                         std::move(ku), std::move(roles));
    return file;
}

std::unique_ptr<TrainedModel> fit_binary_detector(const ClassifierSpec& spec, const SplitPlan& plan)
{
    if (plan.known_unknown.empty())
        throw InputError("the binary detector needs a plan with known-unknown data (open or netopen)");
    const auto& ku = plan.ku_class_ids;
    const Dataset known = filter(plan.final_train, [&](const Sample& s) { return !ku.contains(s.label.class_id()); });
    return fit_binary_detector(spec, known, plan.known_unknown);
}

} // namespace osbench
