// osbench: command-line driver for the open-set camera-model benchmark.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid usage or input.

#include "osbench/classifiers.hpp"
#include "osbench/data.hpp"
#include "osbench/error.hpp"
#include "osbench/features.hpp"
#include "osbench/fusion.hpp"
#include "osbench/metrics.hpp"
#include "osbench/model_io.hpp"
#include "osbench/protocols.hpp"
#include "osbench/search.hpp"
#include "osbench/synth.hpp"
#include "osbench/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace osbench;

namespace {

void log(const std::string& message) { std::cerr << "osbench: " << message << '\n'; }

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
    if (!out)
        throw Error("failed writing " + path.string());
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::uint64_t default_seed()
{
    const char* env = std::getenv("OSBENCH_SEED");
    return env ? parse_unsigned(env, "OSBENCH_SEED") : 0;
}

Hyperparams parse_settings(const std::vector<std::string>& settings)
{
    Hyperparams hp;
    for (const auto& s : settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InputError("--set expects name=value, got '" + s + "'");
        hp[s.substr(0, eq)] = parse_double(std::string_view(s).substr(eq + 1), s.substr(0, eq));
    }
    return hp;
}

// ---- extract -----------------------------------------------------------------

struct ExtractArgs {
    fs::path images;
    fs::path manifest;
    fs::path features;
    std::string format = "osfv";
    int patch_size = 64;
    int patches = 32;
    double q = 1.0;
    int truncation = 2;
    int order = 3;
    bool cross_channel = false;
    std::uint64_t seed = 0;
};

// Layout: <images>/<class_name>/<image>.osim.
int run_extract(const ExtractArgs& a)
{
    if (!fs::is_directory(a.images))
        throw InputError("not a directory: " + a.images.string());
    CooccurrenceConfig config = CooccurrenceConfig::defaults();
    config.quantization = a.q;
    config.truncation = a.truncation;
    config.order = a.order;
    config.cross_channel = a.cross_channel;
    config.validate();
    const PatchSpec spec{a.patch_size, a.patches};

    std::vector<std::pair<std::string, fs::path>> images;
    for (const auto& class_dir : fs::directory_iterator(a.images)) {
        if (!class_dir.is_directory())
            continue;
        for (const auto& entry : fs::directory_iterator(class_dir.path()))
            if (entry.is_regular_file() && entry.path().extension() == ".osim")
                images.emplace_back(class_dir.path().filename().string(), entry.path());
    }
    if (images.empty())
        throw InputError("no .osim images under " + a.images.string());
    std::sort(images.begin(), images.end());

    std::set<std::string> names;
    for (const auto& [name, path] : images)
        names.insert(name);
    const ClassRegistry registry = make_registry(names);

    std::vector<Sample> samples;
    for (const auto& [name, path] : images) {
        const Image image = load_raw_image(path);
        const auto patches = extract_patches(image, spec, a.seed);
        for (std::size_t p = 0; p < patches.size(); ++p) {
            Sample s;
            s.image_id = name + "/" + path.stem().string();
            s.patch_index = static_cast<int>(p);
            s.label = Label::known(find_class(registry, name));
            const auto f = extract_features(patches[p].pixels, config);
            // Stored as float32; keep memory and file identical.
            for (double v : f)
                s.features.push_back(static_cast<float>(v));
            samples.push_back(std::move(s));
        }
        log("extracted " + std::to_string(patches.size()) + " patches from " + path.string());
    }
    const Dataset data(std::move(samples), registry, static_cast<int>(config.output_dim()));
    const FeatureFormat format = a.format == "csv" ? FeatureFormat::Csv : FeatureFormat::Osfv;
    fs::path features = a.features;
    if (features.empty())
        features = a.manifest.filename().replace_extension(format == FeatureFormat::Csv ? ".csv" : ".osfv");
    if (a.manifest.has_parent_path())
        fs::create_directories(a.manifest.parent_path());
    save_manifest(data, a.manifest, features, format);
    return 0;
}

// ---- split -------------------------------------------------------------------

struct SplitArgs {
    fs::path manifest;
    std::string protocol;
    fs::path extra_ku;
    double val_fraction = kDefaultValFraction;
    std::uint64_t seed = 0;
    fs::path out;
};

// Manifest paths recorded relative to the plan's directory when possible.
fs::path relative_to(const fs::path& target, const fs::path& plan)
{
    const auto base = fs::absolute(plan).parent_path();
    return fs::absolute(target).lexically_relative(base);
}

int run_split(const SplitArgs& a)
{
    const Protocol protocol = parse_protocol(a.protocol);
    if (protocol == Protocol::NetOpen && a.extra_ku.empty())
        throw InputError("--protocol netopen requires --extra-ku");
    const Dataset train = load_manifest(a.manifest);
    Dataset extra;
    if (protocol == Protocol::NetOpen)
        extra = load_manifest(a.extra_ku);

    PlanFile file;
    file.plan = make_plan(protocol, train, protocol == Protocol::NetOpen ? &extra : nullptr, a.val_fraction, a.seed);
    file.train_manifest = relative_to(a.manifest, a.out);
    if (protocol == Protocol::NetOpen)
        file.extra_ku_manifest = relative_to(a.extra_ku, a.out);
    if (a.out.has_parent_path())
        fs::create_directories(a.out.parent_path());
    save_plan(file, a.out);
    log(std::string(protocol_name(protocol)) + " plan: " + std::to_string(file.plan.fit.size()) + " fit, "
        + std::to_string(file.plan.validation.size()) + " validation samples, "
        + std::to_string(file.plan.ku_class_ids.size()) + " ku classes");
    return 0;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
    fs::path plan;
    std::string classifier;
    fs::path grid;
    std::vector<std::string> settings;
    std::string kernel = "rbf";
    std::string detector_base = "psvm";
    int repetitions = 1;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    fs::path out;
    fs::path log;
};

int run_train(const TrainArgs& a)
{
    ClassifierSpec spec;
    spec.variant = parse_variant(a.classifier);
    spec.kernel.kind = parse_kernel(a.kernel);
    spec.detector_base = parse_variant(a.detector_base);
    spec.hyperparams = parse_settings(a.settings);
    spec.seed = a.seed;
    if (!is_implemented(spec.variant))
        throw UnimplementedVariant("classifier '" + a.classifier + "' is not implemented");

    const PlanFile file = load_plan(a.plan);
    const int dim = file.plan.final_train.feature_dim();
    Grid grid = a.grid.empty() ? default_grid(spec.variant, dim, spec.kernel.kind) : load_grid(a.grid, dim);
    // Explicit --set values pin their axes.
    std::erase_if(grid.axes, [&](const auto& axis) { return spec.hyperparams.contains(axis.first); });

    std::unique_ptr<TrainedModel> model;
    std::string table;
    if (spec.variant == Variant::BinaryDetector) {
        // The detector is fit once with the first value of each axis.
        for (const auto& [name, values] : grid.axes)
            spec.hyperparams.emplace(name, values.front());
        if (spec.detector_base == Variant::ExtraTrees)
            spec.hyperparams.erase("C");
        model = fit_binary_detector(spec, file.plan);
        table = "detector fit without search\n";
    } else {
        std::vector<SplitPlan> plans{file.plan};
        if (a.repetitions > 1) {
            const fs::path base = a.plan.parent_path();
            auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : base / p; };
            const Dataset train = load_manifest(resolve(file.train_manifest));
            Dataset extra;
            if (file.plan.protocol == Protocol::NetOpen)
                extra = load_manifest(resolve(file.extra_ku_manifest));
            plans = make_plans(file.plan.protocol, train, file.plan.protocol == Protocol::NetOpen ? &extra : nullptr,
                               file.plan.val_fraction, file.plan.seed, a.repetitions);
        }
        SearchOptions options;
        options.jobs = a.jobs;
        auto result = grid_search(spec, plans, grid, options);
        std::string best;
        for (const auto& [k, v] : result.best)
            best += " " + k + "=" + format_double(v);
        log("selected" + best + " with validation "
            + (result.selection == SelectionMetric::Na ? "NA " : "accuracy ") + format_double(result.best_metric));
        table = search_log_table(grid, result);
        model = std::move(result.model);
    }
    if (a.out.has_parent_path())
        fs::create_directories(a.out.parent_path());
    save_model(*model, a.out);
    if (!a.log.empty())
        write_text(a.log, table);
    return 0;
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
    std::vector<fs::path> models;
    fs::path test;
    std::string granularity = "patch";
    std::string mode = "classify";
    bool allow_partial = false;
    fs::path out;
    fs::path dump;
};

std::string label_text(const ClassRegistry& registry, Label label)
{
    return label.is_unknown() ? std::string(kUnknownName) : registry.at(label.class_id());
}

// Prediction dump: one `id,truth,prediction` row per sample or image.
std::string prediction_dump(const std::string& model, const std::string& granularity,
                            const std::vector<std::string>& ids, const std::vector<Label>& truths,
                            const std::vector<Label>& predictions, const ClassRegistry& registry)
{
    std::ostringstream out;
    out << "osbench_predictions_v1\nmodel=" << model << "\ngranularity=" << granularity << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << ',' << label_text(registry, truths[i]) << ',' << label_text(registry, predictions[i])
            << '\n';
    return out.str();
}

int run_evaluate(const EvaluateArgs& a)
{
    if (a.granularity != "patch" && a.granularity != "image")
        throw InputError("--granularity must be patch or image");
    if (a.mode != "classify" && a.mode != "detect")
        throw InputError("--mode must be classify or detect");

    std::vector<std::unique_ptr<TrainedModel>> models;
    for (const auto& path : a.models)
        models.push_back(load_model(path));
    const ClassRegistry& registry = models.front()->registry();
    for (const auto& m : models) {
        if (m->variant() == Variant::BinaryDetector && a.mode == "classify")
            throw InputError("binary detector models support only --mode detect");
        if (m->registry() != registry)
            throw InputError("all models must share one class registry");
    }

    const Dataset test = align_to_registry(load_manifest(a.test), registry);
    const bool detect = a.mode == "detect";

    // Per model, labels at the requested granularity. Detection collapses every
    // accepted label to known(0).
    std::vector<std::string> ids;
    std::vector<Label> truths;
    std::vector<std::vector<Label>> per_model;
    for (const auto& m : models) {
        std::vector<Label> patch;
        patch.reserve(test.size());
        for (const auto& s : test.samples()) {
            Label p = m->predict(s.features);
            if (detect && p.is_known())
                p = Label::known(0);
            patch.push_back(p);
        }
        std::vector<Label> patch_truths;
        for (const auto& s : test.samples())
            patch_truths.push_back(detect && s.label.is_known() ? Label::known(0) : s.label);
        if (a.granularity == "image") {
            const Dataset truth_data(
                [&] {
                    auto samples = test.samples();
                    for (std::size_t i = 0; i < samples.size(); ++i)
                        samples[i].label = patch_truths[i];
                    return samples;
                }(),
                detect ? ClassRegistry{{0, "known"}} : registry, test.feature_dim());
            auto votes = vote_by_image(truth_data, patch);
            ids = votes.image_ids;
            truths = votes.truths;
            per_model.push_back(std::move(votes.predictions));
        } else {
            ids.clear();
            for (const auto& s : test.samples())
                ids.push_back(s.image_id + "#" + std::to_string(s.patch_index));
            truths = patch_truths;
            per_model.push_back(std::move(patch));
        }
    }

    std::vector<Label> fused(truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
        std::vector<Label> votes;
        for (const auto& p : per_model)
            votes.push_back(p[i]);
        fused[i] = ensemble_vote(votes);
    }

    const ClassRegistry out_registry = detect ? ClassRegistry{{0, "known"}} : registry;
    const int n_known = out_registry.empty() ? 0 : out_registry.rbegin()->first + 1;
    const MetricsReport report = full_report(truths, fused, n_known, a.allow_partial);

    ReportContext context;
    context.granularity = a.granularity;
    context.mode = a.mode;
    for (const auto& p : a.models)
        context.models.push_back(p.filename().string());
    context.test_manifest = a.test.filename().string();
    for (int i = 0; i < n_known; ++i)
        context.class_names.push_back(out_registry.contains(i) ? out_registry.at(i) : "");
    write_text(a.out, report_document(report, context));
    if (!a.dump.empty()) {
        std::string name;
        for (const auto& m : context.models)
            name += (name.empty() ? "" : "+") + m;
        write_text(a.dump, prediction_dump(name, a.granularity, ids, truths, fused, out_registry));
    }
    log("evaluated " + std::to_string(truths.size()) + " " + a.granularity + "s");
    return 0;
}

// ---- fuse --------------------------------------------------------------------

struct FuseArgs {
    std::vector<fs::path> dumps;
    int max_size = 8;
    double na_floor = 0.7;
    bool force = false;
    std::size_t jobs = 1;
    fs::path out;
};

struct Dump {
    std::string model;
    std::vector<std::string> ids;
    std::vector<std::string> truths;
    std::vector<std::string> predictions;
};

Dump read_dump(const fs::path& path)
{
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "osbench_predictions_v1")
        throw InputError("not a prediction dump: " + path.string());
    Dump d;
    d.model = path.filename().string();
    while (std::getline(in, line)) {
        const auto text = trim(line);
        if (text.empty() || text.starts_with("granularity="))
            continue;
        if (text.starts_with("model=")) {
            d.model = std::string(text.substr(6));
            continue;
        }
        const auto fields = split_view(text, ',');
        if (fields.size() != 3)
            throw InputError("malformed dump row in " + path.string());
        d.ids.emplace_back(fields[0]);
        d.truths.emplace_back(fields[1]);
        d.predictions.emplace_back(fields[2]);
    }
    return d;
}

int run_fuse(const FuseArgs& a)
{
    std::vector<Dump> dumps;
    for (const auto& p : a.dumps)
        dumps.push_back(read_dump(p));
    const Dump& first = dumps.front();
    for (const auto& d : dumps)
        if (d.ids != first.ids || d.truths != first.truths)
            throw InputError("prediction dumps disagree on samples or truths");

    std::set<std::string> names;
    for (const auto& d : dumps) {
        for (const auto& t : d.truths)
            if (t != kUnknownName)
                names.insert(t);
        for (const auto& p : d.predictions)
            if (p != kUnknownName)
                names.insert(p);
    }
    const ClassRegistry registry = make_registry(names);
    auto to_label = [&](const std::string& s) {
        return s == kUnknownName ? Label::unknown() : Label::known(find_class(registry, s));
    };
    std::vector<Label> truths;
    for (const auto& t : first.truths)
        truths.push_back(to_label(t));

    std::vector<EnsembleCandidate> candidates;
    for (const auto& d : dumps) {
        EnsembleCandidate c;
        c.name = d.model;
        for (const auto& p : d.predictions)
            c.predictions.push_back(to_label(p));
        c.standalone_na = na(confusion(truths, c.predictions, static_cast<int>(registry.size())), true);
        candidates.push_back(std::move(c));
    }
    EnsembleOptions options;
    options.max_size = a.max_size;
    options.na_floor = a.na_floor;
    options.n_known = static_cast<int>(registry.size());
    options.force = a.force;
    options.jobs = a.jobs;
    const auto ranked = enumerate_ensembles(candidates, truths, options);

    std::ostringstream out;
    out << "rank\tsize\tna\tmembers\n";
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        out << r + 1 << '\t' << ranked[r].members.size() << '\t' << format_double(ranked[r].na) << '\t';
        for (std::size_t m = 0; m < ranked[r].members.size(); ++m)
            out << (m ? "+" : "") << candidates[ranked[r].members[m]].name;
        out << '\n';
    }
    write_text(a.out, out.str());
    log("ranked " + std::to_string(ranked.size()) + " combinations");
    return 0;
}

// ---- synth -------------------------------------------------------------------

int run_synth(const SynthConfig& config, const fs::path& out)
{
    write_benchmark(synthesize(config), out);
    log("wrote synthetic benchmark to " + out.string());
    return 0;
}

// ---- grid --------------------------------------------------------------------

struct GridArgs {
    fs::path model;
    int dim_x = 0;
    int dim_y = 1;
    GridBounds bounds;
    int resolution = 50;
    fs::path out;
};

int run_grid(const GridArgs& a)
{
    const auto model = load_model(a.model);
    const auto cells = export_decision_grid(*model, a.dim_x, a.dim_y, a.bounds, a.resolution);
    std::ostringstream out;
    out << "x\ty\tlabel\n";
    for (const auto& c : cells)
        out << format_double(c.x) << '\t' << format_double(c.y) << '\t' << label_text(model->registry(), c.label)
            << '\n';
    write_text(a.out, out.str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Open-set camera model identification benchmark"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::function<int()> action;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Random seed (default: $OSBENCH_SEED or 0)");
    };

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "Extract co-occurrence features from a directory of images");
    extract->add_option("--images", ex.images, "Directory of <class>/<image>.osim files")->required();
    extract->add_option("--out-manifest", ex.manifest, "Manifest to write")->required();
    extract->add_option("--out-features", ex.features, "Feature file (default: next to the manifest)");
    extract->add_option("--format", ex.format, "Feature file format")->check(CLI::IsMember({"osfv", "csv"}));
    extract->add_option("--patch-size", ex.patch_size, "Patch side in pixels")->check(CLI::PositiveNumber);
    extract->add_option("--patches", ex.patches, "Patches kept per image")->check(CLI::PositiveNumber);
    extract->add_option("--q", ex.q, "Residual quantization step")->check(CLI::PositiveNumber);
    extract->add_option("--truncation", ex.truncation, "Truncation threshold T")->check(CLI::PositiveNumber);
    extract->add_option("--order", ex.order, "Co-occurrence order")->check(CLI::PositiveNumber);
    extract->add_flag("--cross-channel", ex.cross_channel, "Use color-difference planes");
    add_seed(extract);
    extract->callback([&] {
        ex.seed = seed;
        action = [&] { return run_extract(ex); };
    });

    SplitArgs sp;
    auto* split = app.add_subcommand("split", "Plan fit/validation splits for a training protocol");
    split->add_option("--manifest", sp.manifest, "Training manifest")->required();
    split->add_option("--protocol", sp.protocol, "closed, open or netopen")
        ->required()
        ->check(CLI::IsMember({"closed", "open", "netopen"}));
    split->add_option("--extra-ku", sp.extra_ku, "Known-unknown manifest (netopen)");
    split->add_option("--val-fraction", sp.val_fraction, "Validation share of each class's images");
    split->add_option("--out", sp.out, "Plan file to write")->required();
    add_seed(split);
    split->callback([&] {
        sp.seed = seed;
        action = [&] { return run_split(sp); };
    });

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Grid-search a classifier on a plan and fit the final model");
    train->add_option("--plan", tr.plan, "Plan file")->required();
    train->add_option("--classifier", tr.classifier, "Classifier variant")->required();
    train->add_option("--grid", tr.grid, "Grid file (default: built-in grid)");
    train->add_option("--set", tr.settings, "Fixed hyperparameter name=value (repeatable)");
    train->add_option("--kernel", tr.kernel, "SVM kernel")->check(CLI::IsMember({"rbf", "linear"}));
    train->add_option("--detector-base", tr.detector_base, "Binary detector base")
        ->check(CLI::IsMember({"psvm", "et"}));
    train->add_option("--repetitions", tr.repetitions, "Open-protocol repetitions")->check(CLI::PositiveNumber);
    train->add_option("--out", tr.out, "Model file to write")->required();
    train->add_option("--log", tr.log, "Search log table to write");
    train->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    add_seed(train);
    train->callback([&] {
        tr.seed = seed;
        tr.jobs = jobs;
        action = [&] { return run_train(tr); };
    });

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Score one model, or a voting ensemble, on a test manifest");
    evaluate->add_option("--model", ev.models, "Model file (repeat for an ensemble)")->required();
    evaluate->add_option("--test", ev.test, "Test manifest")->required();
    evaluate->add_option("--granularity", ev.granularity, "patch or image")
        ->check(CLI::IsMember({"patch", "image"}));
    evaluate->add_option("--mode", ev.mode, "classify or detect")->check(CLI::IsMember({"classify", "detect"}));
    evaluate->add_flag("--allow-partial", ev.allow_partial, "Allow test sets with only known or only unknown data");
    evaluate->add_option("--out", ev.out, "Report to write")->required();
    evaluate->add_option("--dump-predictions", ev.dump, "Write per-item predictions for fusion");
    evaluate->callback([&] { action = [&] { return run_evaluate(ev); }; });

    FuseArgs fu;
    auto* fuse = app.add_subcommand("fuse", "Rank voting ensembles over prediction dumps");
    fuse->add_option("--predictions", fu.dumps, "Prediction dump (repeatable)")->required();
    fuse->add_option("--max-size", fu.max_size, "Largest ensemble")->check(CLI::PositiveNumber);
    fuse->add_option("--na-floor", fu.na_floor, "Standalone NA a model must exceed");
    fuse->add_flag("--force", fu.force, "Allow pools above 20 models");
    fuse->add_option("--out", fu.out, "Ranking table to write")->required();
    fuse->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    fuse->callback([&] {
        fu.jobs = jobs;
        action = [&] { return run_fuse(fu); };
    });

    SynthConfig sy;
    fs::path synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark");
    synth->add_option("--n-known", sy.n_known, "Known classes");
    synth->add_option("--n-unknown", sy.n_unknown, "Unknown (test-only) classes");
    synth->add_option("--n-extra", sy.n_extra, "Extra known-unknown classes");
    synth->add_option("--images-per-class", sy.images_per_class, "Training images per class");
    synth->add_option("--test-images-per-class", sy.test_images_per_class, "Test images per class");
    synth->add_option("--patches-per-image", sy.patches_per_image, "Patches per image");
    synth->add_option("--dim", sy.dim, "Feature dimension");
    synth->add_option("--separation", sy.separation, "Radius of the class-mean sphere");
    synth->add_option("--unknown-shift", sy.unknown_shift, "Offset of the unknown family");
    synth->add_option("--out", synth_out, "Output directory")->required();
    add_seed(synth);
    synth->callback([&] {
        sy.seed = seed;
        action = [&] { return run_synth(sy, synth_out); };
    });

    GridArgs gr;
    auto* grid = app.add_subcommand("grid", "Export predictions over a 2-D slice of feature space");
    grid->add_option("--model", gr.model, "Model file")->required();
    grid->add_option("--dim-x", gr.dim_x, "Feature index on the x axis");
    grid->add_option("--dim-y", gr.dim_y, "Feature index on the y axis");
    grid->add_option("--x-min", gr.bounds.x_min);
    grid->add_option("--x-max", gr.bounds.x_max);
    grid->add_option("--y-min", gr.bounds.y_min);
    grid->add_option("--y-max", gr.bounds.y_max);
    grid->add_option("--resolution", gr.resolution, "Cells per axis");
    grid->add_option("--out", gr.out, "Table to write")->required();
    grid->callback([&] { action = [&] { return run_grid(gr); }; });

    try {
        seed = default_seed();
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const InputError& e) {
        log(e.what());
        return 2;
    }

    try {
        return action();
    } catch (const InputError& e) {
        log(std::string("error: ") + e.what());
        return 2;
    } catch (const UnimplementedVariant& e) {
        log(std::string("error: ") + e.what());
        return 2;
    } catch (const std::exception& e) {
        log(std::string("error: ") + e.what());
        return 1;
    }
}
