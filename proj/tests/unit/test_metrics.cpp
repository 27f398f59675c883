#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "osbench/error.hpp"
#include "osbench/metrics.hpp"
#include "osbench/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

using namespace osbench;

namespace {

Label K(int c) { return Label::known(c); }
const Label U = Label::unknown();

// The worked two-class example: 10 + 10 known, 10 unknown.
void two_class_example(std::vector<Label>& truths, std::vector<Label>& preds)
{
    auto push = [&](Label t, Label p, int times) {
        for (int i = 0; i < times; ++i) {
            truths.push_back(t);
            preds.push_back(p);
        }
    };
    push(K(0), K(0), 6);
    push(K(0), K(1), 2);
    push(K(0), U, 2);
    push(K(1), K(1), 8);
    push(K(1), K(0), 1);
    push(K(1), U, 1);
    push(U, U, 7);
    push(U, K(0), 2);
    push(U, K(1), 1);
}

// Brute-force oracle: walks every cell for every class, as a triple loop.
struct Oracle {
    double aks, aus, dks, osfm_macro, osfm_micro, fm_macro, fm_micro;
};

Oracle brute_force(const std::vector<std::vector<long>>& m)
{
    const int n = static_cast<int>(m.size()) - 1;
    Oracle o{};
    long known_total = 0, known_correct = 0, known_detected = 0;
    for (int t = 0; t < n; ++t)
        for (int p = 0; p <= n; ++p) {
            known_total += m[t][p];
            if (p == t)
                known_correct += m[t][p];
            if (p != n)
                known_detected += m[t][p];
        }
    long unknown_total = 0;
    for (int p = 0; p <= n; ++p)
        unknown_total += m[n][p];
    o.aks = known_total ? double(known_correct) / known_total : -1;
    o.aus = unknown_total ? double(m[n][n]) / unknown_total : -1;
    o.dks = known_total ? double(known_detected) / known_total : -1;

    auto f = [&](int classes, double& macro, double& micro) {
        double sp = 0, sr = 0;
        long tp_sum = 0, fp_sum = 0, fn_sum = 0;
        for (int c = 0; c < classes; ++c) {
            long tp = 0, fp = 0, fn = 0;
            for (int t = 0; t <= n; ++t)
                for (int p = 0; p <= n; ++p) {
                    if (t == c && p == c)
                        tp += m[t][p];
                    else if (p == c)
                        fp += m[t][p];
                    else if (t == c)
                        fn += m[t][p];
                }
            sp += tp + fp ? double(tp) / (tp + fp) : 0.0;
            sr += tp + fn ? double(tp) / (tp + fn) : 0.0;
            tp_sum += tp;
            fp_sum += fp;
            fn_sum += fn;
        }
        const double P = classes ? sp / classes : 0.0;
        const double R = classes ? sr / classes : 0.0;
        macro = P + R > 0 ? 2 * P * R / (P + R) : 0.0;
        const double mp = tp_sum + fp_sum ? double(tp_sum) / (tp_sum + fp_sum) : 0.0;
        const double mr = tp_sum + fn_sum ? double(tp_sum) / (tp_sum + fn_sum) : 0.0;
        micro = mp + mr > 0 ? 2 * mp * mr / (mp + mr) : 0.0;
    };
    f(n, o.osfm_macro, o.osfm_micro);
    f(n + 1, o.fm_macro, o.fm_micro);
    return o;
}

ConfusionMatrix to_cm(const std::vector<std::vector<long>>& m)
{
    const int n = static_cast<int>(m.size()) - 1;
    ConfusionMatrix cm(n);
    for (int t = 0; t <= n; ++t)
        for (int p = 0; p <= n; ++p)
            cm.add(t, p, m[t][p]);
    return cm;
}

} // namespace

TEST_CASE("confusion")
{
    CHECK(confusion({}, {}, 3).total() == 0);

    const std::vector<Label> t{K(0), K(1), U}, p{K(0), U, K(1)};
    const auto cm = confusion(t, p, 2);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(1, 1) == 0);
    CHECK(cm.at(2, 2) == 0);
    CHECK(cm.at(1, 2) == 1);
    CHECK(cm.at(2, 1) == 1);
    CHECK(cm.total() == 3);

    CHECK_THROWS_AS(confusion(t, std::vector<Label>{K(0)}, 2), InputError);
    CHECK_THROWS_AS(confusion(std::vector<Label>{K(2)}, std::vector<Label>{K(0)}, 2), InputError);
}

TEST_CASE("two-class worked example")
{
    std::vector<Label> t, p;
    two_class_example(t, p);
    const auto cm = confusion(t, p, 2);

    CHECK(aks(cm) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(aus(cm) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(na(cm) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(dks(cm) == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(dus(cm) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(da(cm) == doctest::Approx(0.775).epsilon(1e-12));
    CHECK(osfm_micro(cm) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(fm_micro(cm) == doctest::Approx(0.7).epsilon(1e-12));

    // Column sums: class0 predicted 9 times, class1 11 times.
    const double P = (6.0 / 9 + 8.0 / 11) / 2;
    const double R = (0.6 + 0.8) / 2;
    CHECK(osfm_macro(cm) == doctest::Approx(2 * P * R / (P + R)).epsilon(1e-12));

    const auto report = full_report(t, p, 2);
    CHECK(report.na == (report.aks + report.aus) / 2);
    CHECK(report.da == (report.dks + report.dus) / 2);
    CHECK(report.confusion == cm);
}

TEST_CASE("trivial cases")
{
    SUBCASE("perfect")
    {
        const std::vector<Label> t{K(0), K(1), U, K(1)};
        const auto r = full_report(t, t, 2);
        for (double m : {r.aks, r.aus, r.na, r.dks, r.dus, r.da, r.osfm_macro, r.osfm_micro, r.fm_macro, r.fm_micro})
            CHECK(m == 1.0);
    }
    SUBCASE("everything predicted unknown")
    {
        const std::vector<Label> t{K(0), K(1), U, U}, p{U, U, U, U};
        const auto cm = confusion(t, p, 2);
        CHECK(aks(cm) == 0.0);
        CHECK(aus(cm) == 1.0);
        CHECK(na(cm) == 0.5);
        CHECK(osfm_macro(cm) == 0.0);
        CHECK(osfm_micro(cm) == 0.0);
    }
    SUBCASE("everything predicted known")
    {
        const std::vector<Label> t{K(0), U, U}, p{K(0), K(0), K(0)};
        CHECK(dus(confusion(t, p, 1)) == 0.0);
    }
    SUBCASE("all unknown, predicted unknown")
    {
        const std::vector<Label> t{U, U, U};
        CHECK(fm_micro(confusion(t, t, 2)) == 1.0);
        CHECK(fm_macro(confusion(t, t, 0)) == 1.0);
    }
    SUBCASE("undefined sides")
    {
        const std::vector<Label> t{K(0), K(0)}, p{K(0), U};
        const auto cm = confusion(t, p, 1);
        CHECK_THROWS_AS(aus(cm), InputError);
        CHECK_THROWS_AS(na(cm), InputError);
        CHECK(na(cm, true) == 0.5);
        CHECK(da(cm, true) == 0.5);
        CHECK_THROWS_AS(full_report({}, {}, 2), InputError);
    }
    SUBCASE("closed set: aks and fm_micro are accuracy")
    {
        const std::vector<Label> t{K(0), K(1), K(2), K(2)}, p{K(0), K(2), K(2), K(1)};
        const auto cm = confusion(t, p, 3);
        CHECK(aks(cm) == 0.5);
        CHECK(fm_micro(cm) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("agreement with brute force on random matrices")
{
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(6));
        std::vector<std::vector<long>> m(n + 1, std::vector<long>(n + 1));
        for (auto& row : m)
            for (auto& x : row)
                x = static_cast<long>(rng.below(51));
        // Occasionally zero whole rows or columns to reach the edge cases.
        if (rng.below(4) == 0)
            for (auto& x : m[rng.below(n + 1)])
                x = 0;
        if (rng.below(4) == 0) {
            const auto c = rng.below(n + 1);
            for (auto& row : m)
                row[c] = 0;
        }
        const auto cm = to_cm(m);
        const auto o = brute_force(m);
        if (o.aks >= 0) {
            CHECK(aks(cm) == doctest::Approx(o.aks).epsilon(1e-12));
            CHECK(dks(cm) == doctest::Approx(o.dks).epsilon(1e-12));
        }
        if (o.aus >= 0)
            CHECK(aus(cm) == doctest::Approx(o.aus).epsilon(1e-12));
        if (o.aks >= 0 && o.aus >= 0) {
            CHECK(na(cm) == (aks(cm) + aus(cm)) / 2);
            CHECK(da(cm) == (dks(cm) + dus(cm)) / 2);
        }
        CHECK(std::abs(osfm_macro(cm) - o.osfm_macro) <= 1e-12);
        CHECK(std::abs(osfm_micro(cm) - o.osfm_micro) <= 1e-12);
        CHECK(std::abs(fm_macro(cm) - o.fm_macro) <= 1e-12);
        CHECK(std::abs(fm_micro(cm) - o.fm_micro) <= 1e-12);
        for (double v : {osfm_macro(cm), osfm_micro(cm), fm_macro(cm), fm_micro(cm)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("permuting known classes leaves metrics unchanged")
{
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(4));
        std::vector<Label> t, p;
        for (int i = 0; i < 60; ++i) {
            auto draw = [&] {
                const auto c = static_cast<int>(rng.below(n + 1));
                return c == n ? U : K(c);
            };
            t.push_back(draw());
            p.push_back(draw());
        }
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        auto apply = [&](std::vector<Label> v) {
            for (auto& l : v)
                if (!l.is_unknown())
                    l = K(perm[l.class_id()]);
            return v;
        };
        const auto a = full_report(t, p, n, true);
        const auto b = full_report(apply(t), apply(p), n, true);
        CHECK(a.na == doctest::Approx(b.na).epsilon(1e-12));
        CHECK(a.da == doctest::Approx(b.da).epsilon(1e-12));
        CHECK(a.osfm_macro == doctest::Approx(b.osfm_macro).epsilon(1e-12));
        CHECK(a.osfm_micro == doctest::Approx(b.osfm_micro).epsilon(1e-12));
        CHECK(a.fm_macro == doctest::Approx(b.fm_macro).epsilon(1e-12));
        CHECK(a.fm_micro == doctest::Approx(b.fm_micro).epsilon(1e-12));
    }
}

TEST_CASE("report document")
{
    std::vector<Label> t, p;
    two_class_example(t, p);
    const auto r = full_report(t, p, 2);
    ReportContext ctx;
    ctx.models = {"m.model"};
    ctx.test_manifest = "test.manifest";
    ctx.class_names = {"a", "b"};
    const auto doc = nlohmann::json::parse(report_document(r, ctx));
    CHECK(doc["schema"] == "osbench_report_v1");
    CHECK(doc["n_samples"] == 30);
    CHECK(doc["metrics"]["na"].get<double>() == r.na);
    CHECK(doc["confusion"]["counts"].size() == 3);
    CHECK(doc["confusion"]["counts"][0][2] == 2);
    CHECK(doc["confusion"]["labels"][2] == "unknown");

    ctx.mode = "detect";
    const auto det = nlohmann::json::parse(report_document(r, ctx));
    CHECK(det["metrics"].contains("da"));
    CHECK_FALSE(det["metrics"].contains("na"));

    // Same inputs, same bytes.
    CHECK(report_document(r, ctx) == report_document(r, ctx));
}
