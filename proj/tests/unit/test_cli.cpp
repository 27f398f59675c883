#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#include "osbench/features.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(OSBENCH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// 1-D manifest written by hand: one row per (image, class, value).
void write_manifest(const fs::path& dir, const std::string& name,
                    const std::vector<std::tuple<std::string, std::string, double>>& rows)
{
    std::ofstream features(dir / (name + ".csv"));
    std::ofstream m(dir / (name + ".manifest"));
    m << "feature_file=" << name << ".csv\nformat=csv\ndim=1\nclasses=a,b\n";
    int r = 0;
    for (const auto& [image, cls, value] : rows) {
        features << value << '\n';
        m << image << ",0," << cls << ',' << r++ << '\n';
    }
}

} // namespace

TEST_CASE("help and usage errors")
{
    CHECK(run("--help") == 0);
    for (const char* sub : {"extract", "split", "train", "evaluate", "fuse", "synth", "grid"})
        CHECK(run(std::string(sub) + " --help") == 0);
    CHECK(run("") == 2);
    CHECK(run("bogus") == 2);
    CHECK(run("split --no-such-flag") == 2);
    CHECK(run("evaluate --model") == 2);
}

TEST_CASE("extract")
{
    const auto dir = test::scratch("cli_extract");
    fs::create_directories(dir / "img" / "camA");
    osbench::Rng rng(1);
    osbench::Image image(160, 160);
    for (auto& p : image.pixels)
        p = static_cast<std::uint8_t>(rng.below(256));
    osbench::save_raw_image(image, dir / "img" / "camA" / "one.osim");

    const auto args = "extract --images " + q(dir / "img") + " --patch-size 32 --q 2 --truncation 2 --order 2";
    REQUIRE(run(args + " --out-manifest " + q(dir / "a.manifest")) == 0);
    REQUIRE(run(args + " --out-manifest " + q(dir / "b.manifest")) == 0);
    CHECK(slurp(dir / "a.osfv") == slurp(dir / "b.osfv"));
    const auto a = osbench::load_manifest(dir / "a.manifest");
    CHECK(a.size() <= 32);
    CHECK(a.size() > 0);
    CHECK(a[0].image_id == "camA/one");

    fs::create_directories(dir / "empty");
    CHECK(run("extract --images " + q(dir / "empty") + " --out-manifest " + q(dir / "c.manifest")) == 2);
}

TEST_CASE("synth, split, train, evaluate, fuse")
{
    const auto dir = test::scratch("cli_pipeline");
    const auto bench = dir / "bench";
    const std::string synth = "synth --n-known 4 --n-unknown 3 --n-extra 2 --images-per-class 6 "
                              "--test-images-per-class 3 --patches-per-image 4 --dim 8 --seed 5 --out ";
    REQUIRE(run(synth + q(bench)) == 0);
    REQUIRE(run(synth + q(dir / "bench2")) == 0);
    for (const char* f : {"train.osfv", "test.osfv", "extra_ku.manifest"})
        CHECK(slurp(bench / f) == slurp(dir / "bench2" / f));

    CHECK(run("split --manifest " + q(bench / "train.manifest") + " --protocol netopen --out " + q(dir / "x.plan")) == 2);
    REQUIRE(run("split --manifest " + q(bench / "train.manifest") + " --protocol open --seed 7 --out "
                + q(dir / "open.plan")) == 0);
    REQUIRE(run("split --manifest " + q(bench / "train.manifest") + " --protocol closed --out "
                + q(dir / "closed.plan")) == 0);
    REQUIRE(run("split --manifest " + q(bench / "train.manifest") + " --protocol netopen --extra-ku "
                + q(bench / "extra_ku.manifest") + " --out " + q(dir / "netopen.plan")) == 0);
    CHECK(slurp(dir / "open.plan").find("ku_classes=") != std::string::npos);

    std::ofstream(dir / "osnn.grid") << "T=0.5,0.7\n";
    CHECK(run("train --plan " + q(dir / "open.plan") + " --classifier nope --out " + q(dir / "n.model")) == 2);
    CHECK(run("train --plan " + q(dir / "open.plan") + " --classifier wsvm --out " + q(dir / "n.model")) == 2);
    REQUIRE(run("train --plan " + q(dir / "open.plan") + " --classifier osnn --grid " + q(dir / "osnn.grid")
                + " --out " + q(dir / "osnn.model") + " --log " + q(dir / "osnn.log")) == 0);
    CHECK(slurp(dir / "osnn.log").rfind("index\tT\tna\tstatus\n", 0) == 0);
    REQUIRE(run("train --plan " + q(dir / "netopen.plan") + " --classifier ncm --set tau=0.5 --out "
                + q(dir / "ncm.model")) == 0);

    const std::string eval = "evaluate --test " + q(bench / "test.manifest") + " --granularity image ";
    REQUIRE(run(eval + "--model " + q(dir / "osnn.model") + " --out " + q(dir / "r1.json") + " --dump-predictions "
                + q(dir / "osnn.pred")) == 0);
    REQUIRE(run(eval + "--model " + q(dir / "osnn.model") + " --out " + q(dir / "r2.json")) == 0);
    CHECK(slurp(dir / "r1.json") == slurp(dir / "r2.json"));
    REQUIRE(run(eval + "--model " + q(dir / "ncm.model") + " --out " + q(dir / "r3.json") + " --dump-predictions "
                + q(dir / "ncm.pred")) == 0);
    REQUIRE(run(eval + "--model " + q(dir / "osnn.model") + " --model " + q(dir / "ncm.model") + " --out "
                + q(dir / "ens.json")) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "r1.json"));
    CHECK(report["schema"] == "osbench_report_v1");
    CHECK(report["granularity"] == "image");
    CHECK(nlohmann::json::parse(slurp(dir / "ens.json"))["models"].size() == 2);

    REQUIRE(run("fuse --predictions " + q(dir / "osnn.pred") + " --predictions " + q(dir / "ncm.pred")
                + " --na-floor 0 --out " + q(dir / "fuse.tsv")) == 0);
    const auto table = slurp(dir / "fuse.tsv");
    CHECK(table.rfind("rank\tsize\tna\tmembers\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);

    REQUIRE(run("grid --model " + q(dir / "osnn.model") + " --resolution 3 --out " + q(dir / "grid.tsv")) == 0);
    const auto grid = slurp(dir / "grid.tsv");
    CHECK(std::count(grid.begin(), grid.end(), '\n') >= 9);
}

TEST_CASE("evaluate reproduces the hand-built two-class example")
{
    const auto dir = test::scratch("cli_two_class");
    std::vector<std::tuple<std::string, std::string, double>> train;
    for (int i = 0; i < 4; ++i) {
        train.emplace_back("ta" + std::to_string(i), "a", 0.1 * i);
        train.emplace_back("tb" + std::to_string(i), "b", 10 + 0.1 * i);
    }
    write_manifest(dir, "train", train);

    // 0.15 sits next to class a, 10.15 next to b, 5.15 is equidistant enough to reject.
    const double at_a = 0.15, at_b = 10.15, at_u = 5.15;
    std::vector<std::tuple<std::string, std::string, double>> test;
    int k = 0;
    auto add = [&](const char* truth, double value, int times) {
        for (int i = 0; i < times; ++i)
            test.emplace_back("q" + std::to_string(k++), truth, value);
    };
    add("a", at_a, 6);
    add("a", at_b, 2);
    add("a", at_u, 2);
    add("b", at_b, 8);
    add("b", at_a, 1);
    add("b", at_u, 1);
    add("unknown", at_u, 7);
    add("unknown", at_a, 2);
    add("unknown", at_b, 1);
    write_manifest(dir, "test", test);

    REQUIRE(run("split --manifest " + q(dir / "train.manifest") + " --protocol closed --out " + q(dir / "p.plan")) == 0);
    REQUIRE(run("train --plan " + q(dir / "p.plan") + " --classifier osnn --set T=0.5 --out " + q(dir / "m.model")) == 0);
    REQUIRE(run("evaluate --model " + q(dir / "m.model") + " --test " + q(dir / "test.manifest") + " --out "
                + q(dir / "r.json")) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "r.json"))["metrics"];
    CHECK(m["aks"].get<double>() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(m["aus"].get<double>() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(m["na"].get<double>() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(m["dks"].get<double>() == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(m["da"].get<double>() == doctest::Approx(0.775).epsilon(1e-12));
    CHECK(m["osfm_micro"].get<double>() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(m["fm_micro"].get<double>() == doctest::Approx(0.7).epsilon(1e-12));

    REQUIRE(run("evaluate --model " + q(dir / "m.model") + " --test " + q(dir / "test.manifest") + " --mode detect --out "
                + q(dir / "d.json")) == 0);
    const auto d = nlohmann::json::parse(slurp(dir / "d.json"))["metrics"];
    CHECK(d["dks"].get<double>() == doctest::Approx(0.85).epsilon(1e-12));
    CHECK_FALSE(d.contains("aks"));
}
