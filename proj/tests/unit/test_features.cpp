#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#include "osbench/error.hpp"
#include "osbench/features.hpp"
#include "osbench/rng.hpp"

#include <cmath>
#include <map>

using namespace osbench;

namespace {

Image random_image(int h, int w, std::uint64_t seed)
{
    Rng rng(seed);
    Image img(h, w);
    for (auto& p : img.pixels)
        p = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

Plane<double> random_plane(int h, int w, std::uint64_t seed)
{
    Rng rng(seed);
    Plane<double> p(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            p(r, c) = rng.uniform(-5, 5);
    return p;
}

// Oracle: counts tuples in a std::map keyed by the tuple itself, then orders
// them lexicographically, which is the bin order for values -T..T.
std::vector<double> brute_histogram(const Plane<int>& q, int d, bool horizontal, int T)
{
    std::map<std::vector<int>, double> counts;
    double total = 0;
    for (int r = 0; r < q.rows(); ++r)
        for (int c = 0; c < q.cols(); ++c) {
            std::vector<int> tuple;
            for (int k = 0; k < d; ++k) {
                const int rr = horizontal ? r : r + k;
                const int cc = horizontal ? c + k : c;
                if (rr >= q.rows() || cc >= q.cols())
                    break;
                tuple.push_back(q(rr, cc));
            }
            if (static_cast<int>(tuple.size()) == d) {
                counts[tuple] += 1;
                total += 1;
            }
        }
    // Enumerate every tuple in lexicographic order.
    std::vector<double> out;
    std::vector<int> t(static_cast<std::size_t>(d), -T);
    while (true) {
        out.push_back(total > 0 && counts.contains(t) ? counts[t] / total : 0.0);
        int k = d - 1;
        while (k >= 0 && t[static_cast<std::size_t>(k)] == T)
            t[static_cast<std::size_t>(k--)] = -T;
        if (k < 0)
            break;
        ++t[static_cast<std::size_t>(k)];
    }
    return out;
}

int round_half_away(double x) { return x >= 0 ? static_cast<int>(std::floor(x + 0.5)) : -static_cast<int>(std::floor(-x + 0.5)); }

// Straight-line reimplementation of the default extractor on the green plane.
std::vector<double> oracle_features(const Image& img)
{
    const int h = img.height, w = img.width;
    auto g = [&](int r, int c) { return static_cast<double>(img.at(r, c, 1)); };
    struct K {
        std::vector<double> taps;
        bool horizontal;
    };
    const K bank[] = {{{-1, 1}, true}, {{-1, 1}, false}, {{1, -2, 1}, true}, {{1, -2, 1}, false}};
    std::vector<double> out;
    for (const auto& k : bank) {
        const int n = static_cast<int>(k.taps.size());
        const int rh = k.horizontal ? h : h - n + 1;
        const int rw = k.horizontal ? w - n + 1 : w;
        Plane<int> q(rh, rw);
        for (int r = 0; r < rh; ++r)
            for (int c = 0; c < rw; ++c) {
                double s = 0;
                for (int i = 0; i < n; ++i)
                    s += k.taps[static_cast<std::size_t>(i)] * (k.horizontal ? g(r, c + i) : g(r + i, c));
                q(r, c) = std::clamp(round_half_away(s / 1.0), -2, 2);
            }
        for (bool horizontal : {true, false}) {
            const auto hist = brute_histogram(q, 3, horizontal, 2);
            out.insert(out.end(), hist.begin(), hist.end());
        }
    }
    return out;
}

} // namespace

TEST_CASE("extract_patches")
{
    SUBCASE("single tile")
    {
        const auto patches = extract_patches(random_image(64, 64, 1), PatchSpec{64, 32});
        REQUIRE(patches.size() == 1);
        CHECK(patches[0].row == 0);
        CHECK(patches[0].col == 0);
        CHECK(patches[0].pixels.height == 64);
    }
    SUBCASE("512x512 gives 32 disjoint patches")
    {
        const auto img = random_image(512, 512, 2);
        const auto patches = extract_patches(img, PatchSpec{64, 32});
        REQUIRE(patches.size() == 32);
        for (std::size_t a = 0; a < patches.size(); ++a) {
            CHECK(patches[a].row % 64 == 0);
            CHECK(patches[a].col % 64 == 0);
            for (std::size_t b = a + 1; b < patches.size(); ++b) {
                const bool overlap = std::abs(patches[a].row - patches[b].row) < 64
                                     && std::abs(patches[a].col - patches[b].col) < 64;
                CHECK_FALSE(overlap);
            }
            if (a > 0)
                CHECK(patches[a - 1].quality >= patches[a].quality);
            // Pixels are the crop they claim to be.
            CHECK(patches[a].pixels.at(5, 7, 1) == img.at(patches[a].row + 5, patches[a].col + 7, 1));
        }
    }
    SUBCASE("too small")
    {
        CHECK_THROWS_AS(extract_patches(random_image(32, 32, 3), PatchSpec{64, 32}), InputError);
    }
    SUBCASE("prefers texture over flat and saturated regions")
    {
        Image img(64, 128);
        // Left tile saturated white, right tile textured.
        Rng rng(4);
        for (int r = 0; r < 64; ++r)
            for (int c = 0; c < 128; ++c)
                for (int ch = 0; ch < 3; ++ch)
                    img.at(r, c, ch) = c < 64 ? 255 : static_cast<std::uint8_t>(50 + rng.below(100));
        const auto patches = extract_patches(img, PatchSpec{64, 1});
        REQUIRE(patches.size() == 1);
        CHECK(patches[0].col == 64);
    }
    SUBCASE("deterministic")
    {
        const auto img = random_image(200, 300, 5);
        const auto a = extract_patches(img, PatchSpec{32, 10}, 1);
        const auto b = extract_patches(img, PatchSpec{32, 10}, 99);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].row == b[i].row);
            CHECK(a[i].col == b[i].col);
        }
    }
}

TEST_CASE("residual")
{
    const auto diff = horizontal_kernel({-1, 1});
    SUBCASE("constant patch")
    {
        const Plane<double> p(5, 6, 7.0);
        const auto r = residual(p, diff);
        CHECK(r.rows() == 5);
        CHECK(r.cols() == 5);
        for (double v : r.data())
            CHECK(v == 0.0);
    }
    SUBCASE("ramp")
    {
        Plane<double> p(4, 6);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 6; ++x)
                p(y, x) = x;
        const auto r = residual(p, diff);
        for (double v : r.data())
            CHECK(v == 1.0);
    }
    SUBCASE("random 8x8 against a double loop")
    {
        const auto p = random_plane(8, 8, 6);
        Plane<double> k(2, 3);
        k(0, 0) = 1, k(0, 1) = -2, k(0, 2) = 0.5, k(1, 0) = 3, k(1, 1) = -1, k(1, 2) = 0.25;
        const auto r = residual(p, k);
        REQUIRE(r.rows() == 7);
        REQUIRE(r.cols() == 6);
        for (int y = 0; y < 7; ++y)
            for (int x = 0; x < 6; ++x) {
                double s = 0;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 3; ++j)
                        s += k(i, j) * p(y + i, x + j);
                CHECK(r(y, x) == doctest::Approx(s).epsilon(1e-14));
            }
    }
    SUBCASE("kernel larger than patch")
    {
        CHECK_THROWS_AS(residual(Plane<double>(2, 2), horizontal_kernel({1, -2, 1})), InputError);
    }
}

TEST_CASE("quantize_truncate")
{
    auto one = [](double r, double q, int T) {
        Plane<double> p(1, 1, r);
        return quantize_truncate(p, q, T)(0, 0);
    };
    CHECK(one(0.0, 1, 2) == 0);
    CHECK(one(2.5, 1, 2) == 2);
    CHECK(one(-7, 2, 3) == -3);
    CHECK(one(0.5, 1, 5) == 1);
    CHECK(one(-0.5, 1, 5) == -1);
    CHECK(one(1.49, 1, 5) == 1);
}

TEST_CASE("cooccurrence_histogram")
{
    SUBCASE("constant row")
    {
        Plane<int> q(1, 3, 0);
        const auto h = cooccurrence_histogram(q, 2, Direction::Horizontal, 1);
        REQUIRE(h.size() == 9);
        // (0,0) sits at 1*3 + 1 = 4.
        for (std::size_t i = 0; i < 9; ++i)
            CHECK(h[i] == (i == 4 ? 1.0 : 0.0));
    }
    SUBCASE("alternating row: 2/3 at (1,-1), 1/3 at (-1,1)")
    {
        Plane<int> q(1, 4);
        q(0, 0) = 1, q(0, 1) = -1, q(0, 2) = 1, q(0, 3) = -1;
        const auto h = cooccurrence_histogram(q, 2, Direction::Horizontal, 1);
        const auto oracle = brute_histogram(q, 2, true, 1);
        CHECK(h == oracle);
        CHECK(h[2 * 3 + 0] == doctest::Approx(2.0 / 3.0));
        CHECK(h[0 * 3 + 2] == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("no tuples gives zeros")
    {
        Plane<int> q(1, 2, 0);
        for (double v : cooccurrence_histogram(q, 3, Direction::Horizontal, 1))
            CHECK(v == 0.0);
    }
    SUBCASE("random 6x6 against enumeration")
    {
        Rng rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            const int T = 1 + static_cast<int>(rng.below(3));
            const int d = 2 + static_cast<int>(rng.below(3));
            Plane<int> q(6, 6);
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c)
                    q(r, c) = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * T + 1))) - T;
            for (bool horizontal : {true, false}) {
                const auto h = cooccurrence_histogram(q, d, horizontal ? Direction::Horizontal : Direction::Vertical, T);
                const auto o = brute_histogram(q, d, horizontal, T);
                REQUIRE(h.size() == o.size());
                for (std::size_t i = 0; i < h.size(); ++i)
                    CHECK(h[i] == doctest::Approx(o[i]).epsilon(1e-15));
            }
        }
    }
}

TEST_CASE("extract_features")
{
    const auto config = CooccurrenceConfig::defaults();
    CHECK(config.output_dim() == 4 * 2 * 125);

    SUBCASE("constant gray patch")
    {
        Image img(16, 16);
        std::fill(img.pixels.begin(), img.pixels.end(), 128);
        const auto f = extract_features(img, config);
        REQUIRE(f.size() == config.output_dim());
        // Each 125-bin block has all its mass at (0,0,0) = 2*25 + 2*5 + 2 = 62.
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(f[i] == (i % 125 == 62 ? 1.0 : 0.0));
    }
    SUBCASE("invariant to a constant offset under first differences")
    {
        CooccurrenceConfig first = config;
        first.filter_bank = {horizontal_kernel({-1, 1}), vertical_kernel({-1, 1})};
        Image a = random_image(32, 32, 8);
        for (auto& p : a.pixels)
            p = static_cast<std::uint8_t>(p / 2);
        Image b = a;
        for (auto& p : b.pixels)
            p = static_cast<std::uint8_t>(p + 40);
        CHECK(extract_features(a, first) == extract_features(b, first));
    }
    SUBCASE("64x64 patch matches the composed oracle")
    {
        const auto img = random_image(64, 64, 9);
        const auto f = extract_features(img, config);
        const auto o = oracle_features(img);
        REQUIRE(f.size() == o.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(f[i] == doctest::Approx(o[i]).epsilon(1e-15));
    }
    SUBCASE("blocks are normalized")
    {
        const auto f = extract_features(random_image(40, 40, 10), config);
        for (std::size_t b = 0; b < f.size(); b += 125) {
            double s = 0;
            for (std::size_t i = b; i < b + 125; ++i) {
                CHECK(f[i] >= 0.0);
                s += f[i];
            }
            CHECK(s == doctest::Approx(1.0));
        }
    }
    SUBCASE("cross-channel dimension")
    {
        CooccurrenceConfig cross = config;
        cross.cross_channel = true;
        CHECK(extract_features(random_image(20, 20, 11), cross).size() == 3 * config.output_dim());
    }
    SUBCASE("patch too small")
    {
        CHECK_THROWS_AS(extract_features(random_image(3, 3, 12), config), InputError);
    }
    SUBCASE("deterministic")
    {
        const auto img = random_image(30, 30, 13);
        CHECK(extract_features(img, config) == extract_features(img, config));
    }
}

TEST_CASE("raw image round trip")
{
    const auto dir = test::scratch("osim");
    const auto img = random_image(7, 9, 14);
    save_raw_image(img, dir / "a.osim");
    const auto back = load_raw_image(dir / "a.osim");
    CHECK(back.height == 7);
    CHECK(back.width == 9);
    CHECK(back.pixels == img.pixels);
}
