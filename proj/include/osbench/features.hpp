#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace osbench {

// Row-major 2-D array.
template <class T>
class Plane {
public:
    Plane() = default;
    Plane(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill)
    {
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

// 8-bit RGB image, row-major with interleaved channels.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, 0) {}

    std::uint8_t& at(int r, int c, int ch) { return pixels[(static_cast<std::size_t>(r) * width + c) * 3 + ch]; }
    std::uint8_t at(int r, int c, int ch) const { return pixels[(static_cast<std::size_t>(r) * width + c) * 3 + ch]; }

    Image crop(int row, int col, int h, int w) const;
    Plane<double> channel(int ch) const;
};

// Raw pixel dump: "OSIM", u32 height, u32 width, u32 channels (3), pixel bytes.
Image load_raw_image(const std::filesystem::path& path);
void save_raw_image(const Image& image, const std::filesystem::path& path);

struct PatchSpec {
    int size = 64;
    int count = 32;
};

struct Patch {
    int row = 0;
    int col = 0;
    double quality = 0.0;
    Image pixels;
};

// Texture/saturation score of the size x size square at (row, col), computed
// on the green channel: mean standard deviation over 8x8 blocks minus the
// fraction of pixels at 0 or 255.
double patch_quality(const Image& image, int row, int col, int size);

// Tiles the image into a grid of non-overlapping size x size squares and keeps
// the `count` best by patch_quality (ties in raster order). Selection is fully
// determined by the pixels; `seed` is accepted for interface stability.
std::vector<Patch> extract_patches(const Image& image, const PatchSpec& spec, std::uint64_t seed = 0);

enum class Direction { Horizontal, Vertical };

// Valid-region filtering: out(r, c) = sum_ij kernel(i, j) * patch(r + i, c + j).
Plane<double> residual(const Plane<double>& patch, const Plane<double>& kernel);

// clamp(round(r / q), -T, T) with halves rounded away from zero.
Plane<int> quantize_truncate(const Plane<double>& residual, double q, int truncation);

// Normalized histogram of runs of `order` adjacent values along `direction`.
// A run (v_0, ..., v_{d-1}) lands in bin sum_k (v_k + T) (2T+1)^(d-1-k).
std::vector<double> cooccurrence_histogram(const Plane<int>& quantized, int order, Direction direction,
                                           int truncation);

struct CooccurrenceConfig {
    std::vector<Plane<double>> filter_bank;
    double quantization = 1.0;
    int truncation = 2;
    int order = 3;
    std::vector<Direction> directions{Direction::Horizontal, Direction::Vertical};
    // Compute histograms on the R-G, B-G and R-B planes instead of green.
    bool cross_channel = false;

    std::size_t output_dim() const;
    void validate() const;

    // First- and second-order differences, horizontal and vertical; q = 1, T = 2, d = 3.
    static CooccurrenceConfig defaults();
};

Plane<double> horizontal_kernel(const std::vector<double>& taps);
Plane<double> vertical_kernel(const std::vector<double>& taps);

std::vector<double> extract_features(const Image& patch, const CooccurrenceConfig& config);

} // namespace osbench
