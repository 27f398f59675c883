#include "osbench/features.hpp"

#include "osbench/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

namespace osbench {

namespace fs = std::filesystem;

Image Image::crop(int row, int col, int h, int w) const
{
    if (row < 0 || col < 0 || row + h > height || col + w > width)
        throw InputError("crop outside image bounds");
    Image out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < 3; ++ch)
                out.at(r, c, ch) = at(row + r, col + c, ch);
    return out;
}

Plane<double> Image::channel(int ch) const
{
    Plane<double> out(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            out(r, c) = at(r, c, ch);
    return out;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v)
{
    const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in)
{
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw InputError("truncated image header");
    return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

Image load_raw_image(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open image " + path.string());
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != std::array<char, 4>{'O', 'S', 'I', 'M'})
        throw InputError("bad magic in image " + path.string());
    const std::uint32_t h = get_u32(in);
    const std::uint32_t w = get_u32(in);
    const std::uint32_t channels = get_u32(in);
    if (channels != 3)
        throw InputError("image " + path.string() + " has " + std::to_string(channels) + " channels, expected 3");
    if (h > (1u << 16) || w > (1u << 16))
        throw InputError("image " + path.string() + " is implausibly large");
    Image image(static_cast<int>(h), static_cast<int>(w));
    if (!in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size())))
        throw InputError("truncated pixel data in " + path.string());
    return image;
}

void save_raw_image(const Image& image, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    out.write("OSIM", 4);
    put_u32(out, static_cast<std::uint32_t>(image.height));
    put_u32(out, static_cast<std::uint32_t>(image.width));
    put_u32(out, 3);
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

double patch_quality(const Image& image, int row, int col, int size)
{
    constexpr int kBlock = 8;
    double std_sum = 0.0;
    int blocks = 0;
    for (int br = 0; br + kBlock <= size; br += kBlock) {
        for (int bc = 0; bc + kBlock <= size; bc += kBlock) {
            double sum = 0.0;
            double sum_sq = 0.0;
            for (int r = 0; r < kBlock; ++r) {
                for (int c = 0; c < kBlock; ++c) {
                    const double v = image.at(row + br + r, col + bc + c, 1);
                    sum += v;
                    sum_sq += v * v;
                }
            }
            const double n = kBlock * kBlock;
            const double mean = sum / n;
            std_sum += std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
            ++blocks;
        }
    }
    int saturated = 0;
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const auto v = image.at(row + r, col + c, 1);
            saturated += (v == 0 || v == 255) ? 1 : 0;
        }
    }
    const double mean_std = blocks ? std_sum / blocks : 0.0;
    return mean_std - static_cast<double>(saturated) / (static_cast<double>(size) * size);
}

std::vector<Patch> extract_patches(const Image& image, const PatchSpec& spec, std::uint64_t /*seed*/)
{
    if (spec.size < 8 || spec.count < 1)
        throw InputError("patch spec needs size >= 8 and count >= 1");
    if (image.height < spec.size || image.width < spec.size)
        throw InputError("image " + std::to_string(image.height) + "x" + std::to_string(image.width)
                         + " is smaller than one " + std::to_string(spec.size) + "px patch");

    const int tiles_down = image.height / spec.size;
    const int tiles_across = image.width / spec.size;
    struct Candidate {
        int raster;
        double quality;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(tiles_down) * tiles_across);
    for (int tr = 0; tr < tiles_down; ++tr)
        for (int tc = 0; tc < tiles_across; ++tc)
            candidates.push_back({tr * tiles_across + tc,
                                  patch_quality(image, tr * spec.size, tc * spec.size, spec.size)});

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.quality > b.quality; });
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(spec.count), candidates.size());

    std::vector<Patch> patches;
    patches.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        const int r = (candidates[i].raster / tiles_across) * spec.size;
        const int c = (candidates[i].raster % tiles_across) * spec.size;
        patches.push_back({r, c, candidates[i].quality, image.crop(r, c, spec.size, spec.size)});
    }
    return patches;
}

Plane<double> residual(const Plane<double>& patch, const Plane<double>& kernel)
{
    if (kernel.rows() < 1 || kernel.cols() < 1)
        throw InputError("empty filter kernel");
    if (kernel.rows() > patch.rows() || kernel.cols() > patch.cols())
        throw InputError("filter kernel larger than patch");
    const int out_rows = patch.rows() - kernel.rows() + 1;
    const int out_cols = patch.cols() - kernel.cols() + 1;
    Plane<double> out(out_rows, out_cols);
    for (int r = 0; r < out_rows; ++r) {
        for (int c = 0; c < out_cols; ++c) {
            double acc = 0.0;
            for (int i = 0; i < kernel.rows(); ++i)
                for (int j = 0; j < kernel.cols(); ++j)
                    acc += kernel(i, j) * patch(r + i, c + j);
            out(r, c) = acc;
        }
    }
    return out;
}

Plane<int> quantize_truncate(const Plane<double>& residual, double q, int truncation)
{
    if (!(q > 0.0))
        throw InputError("quantization step must be positive");
    if (truncation < 1)
        throw InputError("truncation must be a positive integer");
    Plane<int> out(residual.rows(), residual.cols());
    for (int r = 0; r < residual.rows(); ++r) {
        for (int c = 0; c < residual.cols(); ++c) {
            const double v = std::round(residual(r, c) / q);
            out(r, c) = static_cast<int>(std::clamp(v, -static_cast<double>(truncation), static_cast<double>(truncation)));
        }
    }
    return out;
}

std::vector<double> cooccurrence_histogram(const Plane<int>& quantized, int order, Direction direction,
                                           int truncation)
{
    if (order < 1)
        throw InputError("co-occurrence order must be positive");
    const int base = 2 * truncation + 1;
    std::size_t bins = 1;
    for (int k = 0; k < order; ++k)
        bins *= static_cast<std::size_t>(base);
    std::vector<double> hist(bins, 0.0);

    const int dr = direction == Direction::Vertical ? 1 : 0;
    const int dc = direction == Direction::Horizontal ? 1 : 0;
    const int rows = quantized.rows() - dr * (order - 1);
    const int cols = quantized.cols() - dc * (order - 1);
    double total = 0.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            std::size_t bin = 0;
            for (int k = 0; k < order; ++k) {
                const int v = quantized(r + k * dr, c + k * dc);
                if (v < -truncation || v > truncation)
                    throw InputError("quantized value outside [-T, T]");
                bin = bin * static_cast<std::size_t>(base) + static_cast<std::size_t>(v + truncation);
            }
            hist[bin] += 1.0;
            total += 1.0;
        }
    }
    if (total > 0.0)
        for (auto& h : hist)
            h /= total;
    return hist;
}

Plane<double> horizontal_kernel(const std::vector<double>& taps)
{
    Plane<double> k(1, static_cast<int>(taps.size()));
    for (std::size_t i = 0; i < taps.size(); ++i)
        k(0, static_cast<int>(i)) = taps[i];
    return k;
}

Plane<double> vertical_kernel(const std::vector<double>& taps)
{
    Plane<double> k(static_cast<int>(taps.size()), 1);
    for (std::size_t i = 0; i < taps.size(); ++i)
        k(static_cast<int>(i), 0) = taps[i];
    return k;
}

CooccurrenceConfig CooccurrenceConfig::defaults()
{
    CooccurrenceConfig config;
    config.filter_bank = {horizontal_kernel({-1, 1}), vertical_kernel({-1, 1}), horizontal_kernel({1, -2, 1}),
                          vertical_kernel({1, -2, 1})};
    return config;
}

std::size_t CooccurrenceConfig::output_dim() const
{
    std::size_t per_histogram = 1;
    for (int k = 0; k < order; ++k)
        per_histogram *= static_cast<std::size_t>(2 * truncation + 1);
    return filter_bank.size() * directions.size() * per_histogram * (cross_channel ? 3 : 1);
}

void CooccurrenceConfig::validate() const
{
    if (filter_bank.empty())
        throw InputError("filter bank is empty");
    if (!(quantization > 0.0))
        throw InputError("quantization step must be positive");
    if (truncation < 1)
        throw InputError("truncation must be positive");
    if (order < 2 || order > 4)
        throw InputError("co-occurrence order must be 2, 3 or 4");
    if (directions.empty() || directions.size() > 2)
        throw InputError("directions must be a nonempty subset of {horizontal, vertical}");
    if (directions.size() == 2 && directions[0] == directions[1])
        throw InputError("duplicate direction");
}

std::vector<double> extract_features(const Image& patch, const CooccurrenceConfig& config)
{
    config.validate();
    for (const auto& kernel : config.filter_bank) {
        if (patch.height < kernel.rows() + config.order || patch.width < kernel.cols() + config.order)
            throw InputError("patch too small for filter bank and co-occurrence order");
    }

    std::vector<Plane<double>> planes;
    if (config.cross_channel) {
        const auto red = patch.channel(0);
        const auto green = patch.channel(1);
        const auto blue = patch.channel(2);
        const auto difference = [](const Plane<double>& a, const Plane<double>& b) {
            Plane<double> out(a.rows(), a.cols());
            for (int r = 0; r < a.rows(); ++r)
                for (int c = 0; c < a.cols(); ++c)
                    out(r, c) = a(r, c) - b(r, c);
            return out;
        };
        planes = {difference(red, green), difference(blue, green), difference(red, blue)};
    } else {
        planes = {patch.channel(1)};
    }

    std::vector<double> features;
    features.reserve(config.output_dim());
    for (const auto& plane : planes) {
        for (const auto& kernel : config.filter_bank) {
            const auto quantized = quantize_truncate(residual(plane, kernel), config.quantization, config.truncation);
            for (Direction direction : config.directions) {
                const auto hist = cooccurrence_histogram(quantized, config.order, direction, config.truncation);
                features.insert(features.end(), hist.begin(), hist.end());
            }
        }
    }
    return features;
}

} // namespace osbench
