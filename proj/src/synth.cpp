#include "osbench/synth.hpp"

#include "osbench/error.hpp"
#include "osbench/rng.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace osbench {

void SynthConfig::validate() const
{
    if (n_known < 1 || n_unknown < 0 || n_extra < 0)
        throw InputError("synth needs n_known >= 1 and nonnegative unknown/extra counts");
    if (images_per_class < 1 || test_images_per_class < 0 || patches_per_image < 1)
        throw InputError("synth image and patch counts must be positive");
    if (dim < 1)
        throw InputError("synth dim must be positive");
    if (!(separation >= 0.0) || !std::isfinite(unknown_shift))
        throw InputError("synth separation must be nonnegative");
}

namespace {

std::vector<double> random_direction(Rng& rng, int dim)
{
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    while (norm == 0.0) {
        norm = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm += x * x;
        }
    }
    norm = std::sqrt(norm);
    for (auto& x : v)
        x /= norm;
    return v;
}

std::string tag(const char* prefix, int i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02d", prefix, i);
    return buf;
}

struct Family {
    std::vector<std::string> names;
    std::vector<std::vector<double>> means;
};

Family make_family(const char* prefix, int count, const SynthConfig& c, std::uint64_t stream,
                   const std::vector<double>& offset)
{
    Family f;
    for (int k = 0; k < count; ++k) {
        Rng rng(mix_seed(c.seed, stream * 1000 + static_cast<std::uint64_t>(k)));
        auto mean = random_direction(rng, c.dim);
        for (std::size_t d = 0; d < mean.size(); ++d)
            mean[d] = c.separation * mean[d] + offset[d];
        f.names.push_back(tag(prefix, k));
        f.means.push_back(std::move(mean));
    }
    return f;
}

// Samples for `images` images of every class in the family. Labels are left
// for the caller's registry.
std::vector<std::pair<std::string, Sample>> draw(const Family& f, int images, const SynthConfig& c,
                                                 std::uint64_t stream, const std::string& split)
{
    std::vector<std::pair<std::string, Sample>> out;
    for (std::size_t k = 0; k < f.names.size(); ++k) {
        Rng rng(mix_seed(c.seed, stream * 1000 + k));
        for (int img = 0; img < images; ++img) {
            auto offset = random_direction(rng, c.dim);
            const std::string image_id = split + "_" + f.names[k] + "_" + tag("i", img);
            for (int p = 0; p < c.patches_per_image; ++p) {
                Sample s;
                s.image_id = image_id;
                s.patch_index = p;
                s.features.resize(static_cast<std::size_t>(c.dim));
                for (std::size_t d = 0; d < s.features.size(); ++d) {
                    const double v = f.means[k][d] + 0.3 * offset[d] + rng.normal();
                    // Stored as float32, so round now to make files and memory agree.
                    s.features[d] = static_cast<double>(static_cast<float>(v));
                }
                out.emplace_back(f.names[k], std::move(s));
            }
        }
    }
    return out;
}

Dataset build(std::vector<std::pair<std::string, Sample>> rows, const ClassRegistry& registry, int dim)
{
    std::vector<Sample> samples;
    for (auto& [name, s] : rows) {
        s.label = Label::known(find_class(registry, name));
        samples.push_back(std::move(s));
    }
    return Dataset(std::move(samples), registry, dim);
}

ClassRegistry registry_of(std::initializer_list<const Family*> families)
{
    std::set<std::string> names;
    for (const auto* f : families)
        names.insert(f->names.begin(), f->names.end());
    return make_registry(names);
}

} // namespace

SynthBenchmark synthesize(const SynthConfig& c)
{
    c.validate();
    const std::vector<double> zero(static_cast<std::size_t>(c.dim), 0.0);
    Rng shift_rng(mix_seed(c.seed, 0x5A1F7));
    auto shift = random_direction(shift_rng, c.dim);
    for (auto& x : shift)
        x *= c.unknown_shift;

    const Family known = make_family("cam", c.n_known, c, 1, zero);
    const Family unknown = make_family("unk", c.n_unknown, c, 2, shift);
    const Family extra = make_family("ku", c.n_extra, c, 3, zero);

    const auto known_reg = registry_of({&known});
    const auto unknown_reg = registry_of({&unknown});
    const auto test_reg = registry_of({&known, &unknown});

    SynthBenchmark b;
    b.train = build(draw(known, c.images_per_class, c, 11, "train"), known_reg, c.dim);
    auto test_known_rows = draw(known, c.test_images_per_class, c, 12, "test");
    auto test_unknown_rows = draw(unknown, c.test_images_per_class, c, 13, "test");
    b.test_known = build(test_known_rows, known_reg, c.dim);
    b.test_unknown = build(test_unknown_rows, unknown_reg, c.dim);
    test_known_rows.insert(test_known_rows.end(), test_unknown_rows.begin(), test_unknown_rows.end());
    b.test = build(std::move(test_known_rows), test_reg, c.dim);
    b.extra_ku = build(draw(extra, c.images_per_class, c, 14, "extra"), registry_of({&extra}), c.dim);
    return b;
}

void write_benchmark(const SynthBenchmark& b, const std::filesystem::path& directory)
{
    std::filesystem::create_directories(directory);
    const std::pair<const char*, const Dataset*> parts[] = {
        {"train", &b.train}, {"test_known", &b.test_known}, {"test_unknown", &b.test_unknown},
        {"test", &b.test},   {"extra_ku", &b.extra_ku},
    };
    for (const auto& [name, data] : parts)
        save_manifest(*data, directory / (std::string(name) + ".manifest"), std::string(name) + ".osfv");
}

} // namespace osbench
