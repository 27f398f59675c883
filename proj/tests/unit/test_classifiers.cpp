#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#include "osbench/classifiers.hpp"
#include "osbench/error.hpp"
#include "osbench/model_io.hpp"

#include <cmath>
#include <numeric>

using namespace osbench;

namespace {

ClassifierSpec spec_for(Variant v)
{
    ClassifierSpec s;
    s.variant = v;
    s.seed = 7;
    s.kernel = KernelSpec::rbf(0.0); // resolved to 1/dim
    switch (v) {
    case Variant::Osnn:
        s.hyperparams = {{"T", 0.8}};
        break;
    case Variant::SvmOva:
        s.hyperparams = {{"C", 1}};
        break;
    case Variant::Psvm:
        s.hyperparams = {{"C", 1}, {"tau", 0.5}};
        break;
    case Variant::Softmax:
        s.hyperparams = {{"l2", 1e-3}, {"lr", 0.1}, {"epochs", 50}, {"tau", 0.5}};
        break;
    case Variant::Ncm:
        s.hyperparams = {{"tau", 0.5}};
        break;
    case Variant::ExtraTrees:
        s.hyperparams = {{"M", 20}, {"tau", 0.5}};
        break;
    case Variant::OneClassPerClass:
        s.hyperparams = {{"nu", 0.1}};
        break;
    case Variant::TwoStage:
        s.hyperparams = {{"nu", 0.1}, {"C", 1}, {"tau", 0.5}};
        break;
    case Variant::PiSvm:
        s.hyperparams = {{"C", 1}, {"delta", 0.5}};
        break;
    default:
        break;
    }
    return s;
}

const std::vector<Variant> kTrainable{Variant::Osnn,       Variant::SvmOva,           Variant::Psvm,
                                      Variant::Softmax,    Variant::Ncm,              Variant::ExtraTrees,
                                      Variant::OneClassPerClass, Variant::TwoStage, Variant::PiSvm};

std::string threshold_key(Variant v)
{
    switch (v) {
    case Variant::Osnn:
        return "T";
    case Variant::PiSvm:
        return "delta";
    default:
        return "tau";
    }
}

// Independent OSNN: population standardization, brute-force neighbour search.
Label osnn_oracle(const Dataset& train, std::span<const double> f, double T)
{
    const auto d = static_cast<std::size_t>(train.feature_dim());
    std::vector<double> mean(d, 0), sd(d, 0);
    for (const auto& s : train.samples())
        for (std::size_t k = 0; k < d; ++k)
            mean[k] += s.features[k] / double(train.size());
    for (const auto& s : train.samples())
        for (std::size_t k = 0; k < d; ++k)
            sd[k] += (s.features[k] - mean[k]) * (s.features[k] - mean[k]) / double(train.size());
    for (auto& x : sd)
        x = std::sqrt(x);
    auto dist = [&](const std::vector<double>& a) {
        double acc = 0;
        for (std::size_t k = 0; k < d; ++k) {
            const double u = (a[k] - mean[k]) / sd[k];
            const double w = (f[k] - mean[k]) / sd[k];
            acc += (u - w) * (u - w);
        }
        return std::sqrt(acc);
    };
    double best = INFINITY;
    Label cls;
    for (const auto& s : train.samples())
        if (dist(s.features) < best) {
            best = dist(s.features);
            cls = s.label;
        }
    double other = INFINITY;
    for (const auto& s : train.samples())
        if (s.label != cls)
            other = std::min(other, dist(s.features));
    return best / other <= T ? cls : Label::unknown();
}

std::vector<std::vector<double>> queries(int dim, int count, double spread, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::vector<double>> q(static_cast<std::size_t>(count), std::vector<double>(dim));
    for (auto& v : q)
        for (auto& x : v)
            x = spread * rng.normal();
    return q;
}

} // namespace

TEST_CASE("registry of variants")
{
    for (auto v : all_variants())
        CHECK(parse_variant(variant_name(v)) == v);
    CHECK_THROWS_AS(parse_variant("nonsense"), InputError);
    const auto data = test::blobs(2, 2, 5, 3, 4.0, 1);
    for (auto v : {Variant::Wsvm, Variant::Dbc, Variant::Ssvm}) {
        CHECK_FALSE(is_implemented(v));
        CHECK_THROWS_AS(fit(spec_for(v), data), UnimplementedVariant);
    }
}

TEST_CASE("fit preconditions")
{
    const auto data = test::blobs(2, 2, 5, 3, 4.0, 1);
    auto s = spec_for(Variant::Softmax);
    s.hyperparams.erase("lr");
    CHECK_THROWS_AS(fit(s, data), InputError);
    CHECK_THROWS_AS(fit(spec_for(Variant::Psvm), test::blobs(1, 2, 5, 3, 4.0, 1)), InputError);
    CHECK_NOTHROW(fit(spec_for(Variant::OneClassPerClass), test::blobs(1, 2, 5, 3, 4.0, 1)));
    CHECK_THROWS_AS(fit(spec_for(Variant::Osnn), Dataset({}, {}, 3)), InputError);
    auto bad_t = spec_for(Variant::Osnn);
    bad_t.hyperparams["T"] = 1.5;
    CHECK_THROWS_AS(fit(bad_t, data), InputError);
}

TEST_CASE("every variant: coherence, dimension checks, memorization")
{
    const auto data = test::blobs(3, 3, 6, 4, 6.0, 2);
    const auto qs = queries(4, 40, 4.0, 3);
    for (auto v : kTrainable) {
        CAPTURE(variant_name(v));
        const auto model = fit(spec_for(v), data);
        CHECK(model->class_ids().size() == 3);
        CHECK_THROWS_AS(model->predict(std::vector<double>(3)), InputError);
        for (const auto& q : qs) {
            const auto s = model->score(q);
            CHECK(s.size() == 3);
            CHECK(model->predict(q) == apply_rejection(v, s, model->class_ids(), model->hyperparams()));
            CHECK((model->detect(q) == Detection::Unknown) == model->predict(q).is_unknown());
        }
        // With a wide-open threshold, training vectors are recognized.
        Hyperparams open = model->hyperparams();
        if (v == Variant::Osnn)
            open["T"] = 0.999;
        else if (v != Variant::SvmOva && v != Variant::OneClassPerClass)
            open[threshold_key(v)] = 0.0;
        int right = 0, total = 0;
        for (std::size_t i = 0; i < data.size(); i += 5, ++total)
            right += model->decide(model->score(data[i].features), open) == data[i].label;
        if (v == Variant::OneClassPerClass || v == Variant::SvmOva)
            CHECK(right >= total * 8 / 10);
        else if (v != Variant::TwoStage)
            CHECK(right == total);
    }
}

TEST_CASE("score contracts")
{
    const auto data = test::blobs(3, 3, 6, 4, 3.0, 4);
    const auto qs = queries(4, 30, 5.0, 5);
    SUBCASE("softmax sums to one")
    {
        const auto m = fit(spec_for(Variant::Softmax), data);
        for (const auto& q : qs) {
            const auto s = m->score(q);
            CHECK(std::accumulate(s.begin(), s.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("pisvm posteriors in [0,1]")
    {
        const auto m = fit(spec_for(Variant::PiSvm), data);
        for (const auto& q : qs)
            for (double s : m->score(q)) {
                CHECK(s >= 0.0);
                CHECK(s <= 1.0);
            }
    }
    SUBCASE("ncm at a class mean")
    {
        const auto m = fit(spec_for(Variant::Ncm), data);
        for (int c = 0; c < 3; ++c) {
            std::vector<double> mean(4, 0.0);
            int count = 0;
            for (const auto& s : data.samples())
                if (s.label == Label::known(c)) {
                    for (int k = 0; k < 4; ++k)
                        mean[k] += s.features[k];
                    ++count;
                }
            for (auto& x : mean)
                x /= count;
            const auto s = m->score(mean);
            for (int k = 0; k < 3; ++k)
                if (k != c)
                    CHECK(s[c] > s[k]);
        }
    }
    SUBCASE("svm ova with all decisions negative rejects")
    {
        const auto m = fit(spec_for(Variant::SvmOva), data);
        for (const auto& q : qs) {
            const auto s = m->score(q);
            if (*std::max_element(s.begin(), s.end()) <= 0.0)
                CHECK(m->predict(q).is_unknown());
        }
        CHECK(m->predict(std::vector<double>(4, 1e6)).is_unknown());
    }
}

TEST_CASE("osnn matches a brute-force oracle")
{
    const auto data = test::blobs(3, 2, 5, 3, 2.0, 6);
    for (double T : {0.3, 0.6, 0.9}) {
        auto s = spec_for(Variant::Osnn);
        s.hyperparams["T"] = T;
        const auto m = fit(s, data);
        for (const auto& q : queries(3, 200, 3.0, 7))
            CHECK(m->predict(q) == osnn_oracle(data, q, T));
    }
}

TEST_CASE("osnn is scale invariant")
{
    const auto data = test::blobs(3, 2, 5, 3, 2.0, 8);
    auto scaled = data.samples();
    for (auto& s : scaled)
        for (auto& x : s.features)
            x *= 37.5;
    const Dataset big(scaled, data.registry(), 3);
    const auto a = fit(spec_for(Variant::Osnn), data);
    const auto b = fit(spec_for(Variant::Osnn), big);
    for (auto q : queries(3, 100, 3.0, 9)) {
        const auto pa = a->predict(q);
        for (auto& x : q)
            x *= 37.5;
        CHECK(b->predict(q) == pa);
    }
}

TEST_CASE("osnn far query is rejected")
{
    // Two classes on a line; a far query collinear beyond class 1.
    const ClassRegistry reg{{0, "a"}, {1, "b"}};
    std::vector<Sample> s;
    for (int i = 0; i < 5; ++i) {
        s.push_back({{0.0 + 0.01 * i}, Label::known(0), "a" + std::to_string(i), 0});
        s.push_back({{1.0 + 0.01 * i}, Label::known(1), "b" + std::to_string(i), 0});
    }
    const auto m = fit(spec_for(Variant::Osnn), Dataset(s, reg, 1));
    CHECK(m->predict(std::vector<double>{1e6}).is_unknown());
    CHECK(m->predict(std::vector<double>{1.02}) == Label::known(1));
}

TEST_CASE("threshold monotonicity")
{
    const auto data = test::blobs(3, 3, 6, 4, 3.0, 10);
    const auto qs = queries(4, 60, 4.0, 11);
    for (auto v : {Variant::Psvm, Variant::Softmax, Variant::Ncm, Variant::ExtraTrees, Variant::PiSvm}) {
        CAPTURE(variant_name(v));
        const auto m = fit(spec_for(v), data);
        const auto key = threshold_key(v);
        for (const auto& q : qs) {
            const auto s = m->score(q);
            Label previous;
            bool first = true;
            for (double t = 0.0; t <= 1.0; t += 0.05) {
                Hyperparams hp = m->hyperparams();
                hp[key] = t;
                const auto l = m->decide(s, hp);
                if (!first && previous.is_unknown())
                    CHECK(l.is_unknown());
                if (!first && !l.is_unknown())
                    CHECK(l == previous);
                previous = l;
                first = false;
            }
        }
    }
}

TEST_CASE("bounded known space at large radius")
{
    const auto data = test::blobs(3, 3, 6, 4, 3.0, 12);
    for (auto v : {Variant::Osnn, Variant::OneClassPerClass, Variant::PiSvm, Variant::TwoStage}) {
        CAPTURE(variant_name(v));
        const auto m = fit(spec_for(v), data);
        const auto& mean = m->info().standardizer.mean;
        const auto& scale = m->info().standardizer.scale;
        for (const auto& u : queries(4, 20, 1.0, 13)) {
            const double norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
            std::vector<double> f(4);
            for (int k = 0; k < 4; ++k)
                f[k] = mean[k] + 1e6 * scale[k] * u[k] / norm;
            CHECK(m->predict(f).is_unknown());
        }
    }
}

TEST_CASE("determinism")
{
    const auto data = test::blobs(3, 3, 6, 4, 3.0, 14);
    for (auto v : kTrainable) {
        CAPTURE(variant_name(v));
        CHECK(serialize_model(*fit(spec_for(v), data)) == serialize_model(*fit(spec_for(v), data)));
    }
}

TEST_CASE("binary detector")
{
    const auto all = test::blobs(4, 3, 6, 4, 8.0, 15);
    std::vector<Sample> known, ku;
    for (const auto& s : all.samples())
        (s.label.class_id() < 2 ? known : ku).push_back(s);
    const Dataset k(known, all.registry(), 4), u(ku, all.registry(), 4);
    auto spec = spec_for(Variant::BinaryDetector);
    spec.hyperparams = {{"C", 1}};
    for (auto base : {Variant::Psvm, Variant::ExtraTrees}) {
        spec.detector_base = base;
        const auto m = fit_binary_detector(spec, k, u);
        int wrong = 0;
        for (const auto& s : known)
            wrong += m->detect(s.features) != Detection::Known;
        for (const auto& s : ku)
            wrong += m->detect(s.features) != Detection::Unknown;
        CHECK(wrong <= 2);
    }
    CHECK_THROWS_AS(fit_binary_detector(spec, k, Dataset({}, all.registry(), 4)), InputError);
    CHECK_THROWS_AS(fit(spec, k), InputError);
}

TEST_CASE("decision grid export")
{
    const auto data = test::blobs(2, 3, 6, 2, 4.0, 16, 0.3);
    SUBCASE("resolution 2")
    {
        CHECK(export_decision_grid(*fit(spec_for(Variant::Osnn), data), 0, 1, {}, 2).size() == 4);
    }
    SUBCASE("row-major scan")
    {
        const auto cells = export_decision_grid(*fit(spec_for(Variant::Osnn), data), 0, 1, {0, 1, 10, 12}, 3);
        CHECK(cells[1].x == 0.5);
        CHECK(cells[1].y == 10);
        CHECK(cells[3].x == 0.0);
        CHECK(cells[3].y == 11);
    }
    SUBCASE("osnn with tight T")
    {
        auto s = spec_for(Variant::Osnn);
        s.hyperparams["T"] = 0.05;
        const auto m = fit(s, data);
        const auto cells = export_decision_grid(*m, 0, 1, {-50, 50, -50, 50}, 5);
        CHECK(cells.front().label.is_unknown());
        CHECK(cells.back().label.is_unknown());
        CHECK(m->predict(data[0].features) == data[0].label);
    }
    SUBCASE("softmax with tau 0 never rejects")
    {
        auto s = spec_for(Variant::Softmax);
        s.hyperparams["tau"] = 0.0;
        for (const auto& c : export_decision_grid(*fit(s, data), 0, 1, {-100, 100, -100, 100}, 15))
            CHECK_FALSE(c.label.is_unknown());
    }
    SUBCASE("errors")
    {
        const auto m = fit(spec_for(Variant::Osnn), data);
        CHECK_THROWS_AS(export_decision_grid(*m, 0, 0, {}, 3), InputError);
        CHECK_THROWS_AS(export_decision_grid(*m, 0, 2, {}, 3), InputError);
        CHECK_THROWS_AS(export_decision_grid(*m, 0, 1, {}, 1), InputError);
    }
}
