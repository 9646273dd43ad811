#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "madapt/error.hpp"
#include "madapt/metrics.hpp"
#include "madapt/rng.hpp"

using namespace madapt;

namespace {

AttributeSchema small_schema() {
    AttributeSchema s;
    s.num_classes = 4;
    s.attributes = {
        {"body", 2, {0, 0, 1, 1}},
        {"origin", 2, {0, 1, 0, 1}},
    };
    return s;
}

AttributeSchema singleton_schema(std::size_t k) {
    AttributeSchema s;
    s.num_classes = k;
    std::vector<std::size_t> identity(k);
    std::iota(identity.begin(), identity.end(), 0);
    s.attributes = {{"self", k, identity}};
    return s;
}

// Backbone and class head are identity maps, so class scores equal the raw
// features and a one-hot row predicts its hot class.
struct IdentityModel {
    ModelConfig config;
    ModelParams params;

    IdentityModel(const AttributeSchema& schema, std::size_t dim) {
        config = make_model_config(schema, dim, {}, dim, 2, 1);
        params = init_params(config);
        auto eye = [](Tensor& t, std::size_t n) {
            t.data.assign(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) t.data[i * n + i] = 1.0;
        };
        eye(params.backbone[0].w, dim);
        params.backbone[0].b.data.assign(dim, 0.0);
        eye(params.class_head.w, dim);
        params.class_head.b.data.assign(dim, 0.0);
    }
};

// One example whose identity-model prediction is `predicted` while the truth
// says `truth`.
Example steered(std::size_t truth, std::size_t predicted, const AttributeSchema& schema,
                Domain domain = Domain::target) {
    std::vector<double> f(schema.num_classes, 0.0);
    f[predicted] = 4.0;
    Example ex(std::move(f), domain);
    ex.set_truth(static_cast<int>(truth), schema);
    return ex;
}

EvalReport hand_report(const std::vector<std::size_t>& classes,
                       const std::vector<double>& accuracy, std::size_t k) {
    EvalReport r;
    r.evaluated_classes = classes;
    r.per_class_accuracy.assign(k, 0.0);
    r.per_class_counts.assign(k, 0);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        r.per_class_accuracy[classes[i]] = accuracy[i];
        r.per_class_counts[classes[i]] = 1;
    }
    return r;
}

}  // namespace

TEST_CASE("evaluate scores a perfect predictor at one") {
    AttributeSchema schema = small_schema();
    IdentityModel m(schema, 4);
    Dataset ds;
    ds.schema = schema;
    for (std::size_t c = 0; c < 4; ++c)
        for (int rep = 0; rep < 3; ++rep) ds.examples.push_back(steered(c, c, schema));

    EvalReport report = evaluate(m.params, ds);
    CHECK(report.overall_accuracy == 1.0);
    CHECK(report.num_examples == 12);
    CHECK(report.evaluated_classes == std::vector<std::size_t>{0, 1, 2, 3});
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(report.per_class_accuracy[c] == 1.0);
        CHECK(report.per_class_counts[c] == 3);
        CHECK(report.confusion[c][c] == 3);
    }
    CHECK(report.attribute_accuracy == std::vector<double>{1.0, 1.0});
}

TEST_CASE("evaluate breaks argmax ties toward the lowest class id") {
    AttributeSchema schema = small_schema();
    IdentityModel m(schema, 4);
    Dataset ds;
    ds.schema = schema;
    Example flat(std::vector<double>(4, 0.0), Domain::target);  // all scores equal
    flat.set_truth(0, schema);
    ds.examples.push_back(flat);
    Example flat2(std::vector<double>(4, 0.0), Domain::target);
    flat2.set_truth(2, schema);
    ds.examples.push_back(flat2);

    EvalReport report = evaluate(m.params, ds);
    CHECK(report.confusion[0][0] == 1);  // tie resolved to class 0: correct
    CHECK(report.confusion[2][0] == 1);  // same tie: wrong for a class-2 row
    CHECK(report.overall_accuracy == 0.5);
}

TEST_CASE("evaluate matches the chance rate for random parameters") {
    AttributeSchema schema = singleton_schema(5);
    ModelConfig config = make_model_config(schema, 5, {6}, 4, 2, 3);
    ModelParams params = init_params(config);

    Dataset ds;
    ds.schema = schema;
    Rng fx(21, "features");
    Rng fy(22, "labels");
    const std::size_t n = 2000;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> f(5);
        for (double& v : f) v = fx.normal();
        Example ex(std::move(f), Domain::target);
        ex.set_truth(static_cast<int>(fy.index(5)), schema);
        ds.examples.push_back(std::move(ex));
    }

    EvalReport report = evaluate(params, ds);
    const double p = 1.0 / 5.0;
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(report.overall_accuracy - p) <= 3.0 * sigma);
}

TEST_CASE("singleton attribute categories reproduce class accuracy") {
    AttributeSchema schema = singleton_schema(4);
    IdentityModel m(schema, 4);
    Dataset ds;
    ds.schema = schema;
    // 3 of 5 rows correct.
    ds.examples.push_back(steered(0, 0, schema));
    ds.examples.push_back(steered(1, 1, schema));
    ds.examples.push_back(steered(2, 2, schema));
    ds.examples.push_back(steered(3, 0, schema));
    ds.examples.push_back(steered(1, 3, schema));

    EvalReport report = evaluate(m.params, ds);
    CHECK(report.overall_accuracy == 0.6);
    CHECK(report.attribute_accuracy[0] == report.overall_accuracy);
}

TEST_CASE("evaluate restricts accuracy to the requested subset") {
    AttributeSchema schema = small_schema();
    IdentityModel m(schema, 4);
    Dataset ds;
    ds.schema = schema;
    // class 0: 2/3 correct; class 2: 2/2 correct; classes 1, 3 all wrong.
    ds.examples.push_back(steered(0, 0, schema));
    ds.examples.push_back(steered(0, 0, schema));
    ds.examples.push_back(steered(0, 1, schema));
    ds.examples.push_back(steered(2, 2, schema));
    ds.examples.push_back(steered(2, 2, schema));
    ds.examples.push_back(steered(1, 3, schema));
    ds.examples.push_back(steered(3, 1, schema));

    EvalReport report = evaluate(m.params, ds, {0, 2});
    CHECK(report.num_examples == 5);
    CHECK(report.evaluated_classes == std::vector<std::size_t>{0, 2});
    CHECK(report.overall_accuracy == doctest::Approx(4.0 / 5.0).epsilon(1e-15));
    CHECK(report.per_class_counts[1] == 0);  // excluded classes stay empty
    CHECK(report.per_class_counts[3] == 0);

    // Overall equals the label-count-weighted mean of per-class accuracy.
    double weighted = 0.0;
    for (std::size_t c : report.evaluated_classes)
        weighted += report.per_class_accuracy[c] *
                    static_cast<double>(report.per_class_counts[c]);
    weighted /= static_cast<double>(report.num_examples);
    CHECK(report.overall_accuracy == doctest::Approx(weighted).epsilon(1e-15));

    // Confusion entries cover exactly the evaluated examples.
    std::size_t entries = 0;
    for (const auto& row : report.confusion)
        entries += std::accumulate(row.begin(), row.end(), std::size_t{0});
    CHECK(entries == report.num_examples);
}

TEST_CASE("evaluate is invariant to example order") {
    AttributeSchema schema = small_schema();
    IdentityModel m(schema, 4);
    Dataset ds;
    ds.schema = schema;
    Rng rng(8, "order");
    for (std::size_t i = 0; i < 40; ++i) {
        const std::size_t truth = rng.index(4);
        const std::size_t pred = rng.index(4);
        ds.examples.push_back(steered(truth, pred, schema));
    }
    Dataset reversed = ds;
    std::reverse(reversed.examples.begin(), reversed.examples.end());

    EvalReport a = evaluate(m.params, ds);
    EvalReport b = evaluate(m.params, reversed);
    CHECK(a.overall_accuracy == b.overall_accuracy);
    CHECK(a.per_class_accuracy == b.per_class_accuracy);
    CHECK(a.per_class_counts == b.per_class_counts);
    CHECK(a.confusion == b.confusion);
    CHECK(a.attribute_accuracy == b.attribute_accuracy);
    CHECK(a.evaluated_classes == b.evaluated_classes);
}

TEST_CASE("evaluate rejects bad subsets and unlabeled rows") {
    AttributeSchema schema = small_schema();
    IdentityModel m(schema, 4);
    Dataset ds;
    ds.schema = schema;
    ds.examples.push_back(steered(0, 0, schema));

    CHECK_THROWS_AS(evaluate(m.params, ds, {9}), ConfigError);
    CHECK_THROWS_AS(evaluate(m.params, ds, {2}), ConfigError);  // no class-2 rows

    Dataset empty;
    empty.schema = schema;
    CHECK_THROWS_AS(evaluate(m.params, empty), DataError);

    Dataset unlabeled = ds;
    unlabeled.examples.emplace_back(std::vector<double>(4, 0.0), Domain::target);
    CHECK_THROWS_AS(evaluate(m.params, unlabeled), DataError);

    // Hidden labels are still evaluable: truth survives hide_labels.
    Dataset hidden = ds;
    hidden.examples[0].hide_labels();
    CHECK(evaluate(m.params, hidden).overall_accuracy == 1.0);
}

TEST_CASE("per_class_gain splits classes into improved, unchanged, worse") {
    EvalReport a = hand_report({0, 1, 2}, {0.5, 0.7, 0.9}, 3);
    EvalReport b = hand_report({0, 1, 2}, {0.7, 0.7, 0.2}, 3);

    GainReport same = per_class_gain(a, a);
    CHECK(same.unchanged_fraction == 1.0);
    CHECK(same.improved_fraction == 0.0);
    CHECK(same.worse_fraction == 0.0);
    CHECK(same.delta == std::vector<double>{0.0, 0.0, 0.0});

    GainReport gain = per_class_gain(a, b);
    CHECK(gain.classes == std::vector<std::size_t>{0, 1, 2});
    CHECK(gain.baseline == std::vector<double>{0.5, 0.7, 0.9});
    CHECK(gain.adapted == std::vector<double>{0.7, 0.7, 0.2});
    CHECK(gain.improved_fraction == doctest::Approx(1.0 / 3.0));
    CHECK(gain.unchanged_fraction == doctest::Approx(1.0 / 3.0));
    CHECK(gain.worse_fraction == doctest::Approx(1.0 / 3.0));

    EvalReport zero = hand_report({0, 1, 2}, {0.0, 0.0, 0.0}, 3);
    EvalReport perfect = hand_report({0, 1, 2}, {1.0, 1.0, 1.0}, 3);
    CHECK(per_class_gain(zero, perfect).improved_fraction == 1.0);

    // Deltas below the epsilon count as unchanged.
    EvalReport nudged = hand_report({0, 1, 2}, {0.5 + 5e-13, 0.7, 0.9}, 3);
    CHECK(per_class_gain(a, nudged).unchanged_fraction == 1.0);

    EvalReport other = hand_report({0, 2}, {0.5, 0.9}, 3);
    CHECK_THROWS_AS(per_class_gain(a, other), ConfigError);
}

TEST_CASE("pearson reproduces hand values") {
    CHECK(pearson({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0}) == -1.0);
    CHECK(pearson({0.0, 1.0, 2.0, 5.0}, {1.0, 3.0, 5.0, 11.0}) == 1.0);  // y = 2x + 1

    CHECK_THROWS_AS(pearson({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), NumericError);
    CHECK_THROWS_AS(pearson({1.0, 2.0, 3.0}, {2.0, 2.0, 2.0}), NumericError);
    CHECK_THROWS_AS(pearson({1.0, 2.0}, {1.0}), ShapeError);
    CHECK_THROWS_AS(pearson({1.0}, {2.0}), NumericError);
}

TEST_CASE("pearson matches the raw-moment formula on random data") {
    Rng rng(14, "pearson");
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(50);
        std::vector<double> y(50);
        for (std::size_t i = 0; i < 50; ++i) {
            x[i] = rng.normal(0.0, 2.0);
            y[i] = 0.3 * x[i] + rng.normal(0.0, 1.5);
        }
        double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
        const double n = 50.0;
        for (std::size_t i = 0; i < 50; ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            syy += y[i] * y[i];
            sxy += x[i] * y[i];
        }
        const double want =
            (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
        CHECK(pearson(x, y) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("gain_label_correlation pairs deltas with label counts") {
    GainReport gain;
    gain.classes = {0, 1, 2};
    gain.delta = {0.3, 0.2, 0.1};
    CHECK(gain_label_correlation(gain, {1, 2, 3}) == -1.0);

    gain.classes = {0, 1, 5};
    CHECK_THROWS_AS(gain_label_correlation(gain, {1, 2, 3}), ConfigError);
}

TEST_CASE("nearest_neighbors ranks a gallery by feature distance") {
    AttributeSchema schema = small_schema();
    IdentityModel m(schema, 4);

    auto point = [&](double a, double b) {
        Example ex({a, b, 0.0, 0.0}, Domain::source);
        ex.set_truth(0, schema);
        return ex;
    };
    Dataset gallery;
    gallery.schema = schema;
    gallery.examples = {point(0, 0), point(1, 0), point(3, 0), point(1, 0), point(0, 2)};
    Dataset queries;
    queries.schema = schema;
    queries.examples = {point(1, 0), point(2.9, 0.1)};

    auto ranking = nearest_neighbors(m.params, queries, gallery, 5);
    REQUIRE(ranking.size() == 2);
    // Exact match sits first; its duplicate follows by index order.
    CHECK(ranking[0][0] == 1);
    CHECK(ranking[0][1] == 3);
    CHECK(ranking[1][0] == 2);

    // Full-k ranking is a permutation of the gallery.
    std::vector<std::size_t> sorted = ranking[0];
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4});

    // k beyond the gallery size returns every row.
    CHECK(nearest_neighbors(m.params, queries, gallery, 99)[0].size() == 5);
    CHECK(nearest_neighbors(m.params, queries, gallery, 2)[0] ==
          std::vector<std::size_t>{1, 3});

    CHECK_THROWS_AS(nearest_neighbors(m.params, queries, gallery, 0), ConfigError);
    Dataset empty;
    empty.schema = schema;
    CHECK_THROWS_AS(nearest_neighbors(m.params, queries, empty, 1), DataError);
    Dataset narrow;
    narrow.schema = schema;
    narrow.examples.emplace_back(std::vector<double>{1.0}, Domain::source);
    CHECK_THROWS_AS(nearest_neighbors(m.params, queries, narrow, 1), ShapeError);
}

TEST_CASE("nearest_neighbors matches a brute-force oracle") {
    AttributeSchema schema = singleton_schema(3);
    ModelConfig config = make_model_config(schema, 6, {5}, 4, 2, 9);
    ModelParams params = init_params(config);

    Rng rng(41, "nn");
    auto random_dataset = [&](std::size_t n) {
        Dataset ds;
        ds.schema = schema;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> f(6);
            for (double& v : f) v = rng.normal();
            Example ex(std::move(f), Domain::source);
            ex.set_truth(0, schema);
            ds.examples.push_back(std::move(ex));
        }
        return ds;
    };
    Dataset gallery = random_dataset(20);
    Dataset queries = random_dataset(5);

    // Independent path: feature vectors one row at a time, then a stable
    // sort over (distance, index) pairs.
    auto features_of = [&](const Dataset& ds, std::size_t i) {
        Tensor x({1, 6}, ds.examples[i].features);
        Tensor f = forward_features(params, x);
        return f.data;
    };
    auto ranking = nearest_neighbors(params, queries, gallery, 20);
    for (std::size_t qi = 0; qi < queries.examples.size(); ++qi) {
        std::vector<double> qf = features_of(queries, qi);
        std::vector<std::pair<double, std::size_t>> dist;
        for (std::size_t gi = 0; gi < gallery.examples.size(); ++gi) {
            std::vector<double> gf = features_of(gallery, gi);
            double d2 = 0.0;
            for (std::size_t t = 0; t < qf.size(); ++t)
                d2 += (qf[t] - gf[t]) * (qf[t] - gf[t]);
            dist.push_back({d2, gi});
        }
        std::stable_sort(dist.begin(), dist.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t r = 0; r < dist.size(); ++r) CHECK(ranking[qi][r] == dist[r].second);
        // Distances never decrease along the ranking.
        for (std::size_t r = 1; r < dist.size(); ++r) CHECK(dist[r].first >= dist[r - 1].first);
    }
}

TEST_CASE("eval report serializes to JSON round-trippably") {
    AttributeSchema schema = small_schema();
    IdentityModel m(schema, 4);
    Dataset ds;
    ds.schema = schema;
    ds.examples.push_back(steered(0, 0, schema));
    ds.examples.push_back(steered(0, 1, schema));
    ds.examples.push_back(steered(1, 1, schema));
    ds.examples.push_back(steered(1, 1, schema));
    ds.examples.push_back(steered(1, 1, schema));

    EvalReport report = evaluate(m.params, ds);
    nlohmann::json j = nlohmann::json::parse(eval_report_to_json(report, schema));
    CHECK(j.at("overall_accuracy").get<double>() == report.overall_accuracy);
    CHECK(j.at("num_examples").get<std::size_t>() == 5);
    CHECK(j.at("evaluated_classes").get<std::vector<std::size_t>>() ==
          std::vector<std::size_t>{0, 1});
    REQUIRE(j.at("per_class").size() == 2);
    CHECK(j["per_class"][0].at("class").get<std::size_t>() == 0);
    CHECK(j["per_class"][0].at("count").get<std::size_t>() == 2);
    CHECK(j["per_class"][0].at("accuracy").get<double>() == 0.5);
    CHECK(j["per_class"][1].at("accuracy").get<double>() == 1.0);
    REQUIRE(j.at("attributes").size() == 2);
    CHECK(j["attributes"][0].at("attribute").get<std::string>() == "body");
    CHECK(j["attributes"][0].at("accuracy").get<double>() == report.attribute_accuracy[0]);
}

TEST_CASE("per-class CSV prints one row per evaluated class") {
    EvalReport report = hand_report({0, 2}, {0.5, 1.0}, 4);
    report.per_class_counts[0] = 2;
    report.per_class_counts[2] = 3;

    std::ostringstream plain;
    write_per_class_csv(plain, report, nullptr);
    CHECK(plain.str() == "class_id,n_examples,accuracy\n0,2,0.5\n2,3,1\n");

    GainReport gain;
    gain.classes = {0, 2};
    gain.delta = {0.25, -0.5};
    std::ostringstream with_gain;
    write_per_class_csv(with_gain, report, &gain);
    CHECK(with_gain.str() == "class_id,n_examples,accuracy,delta\n0,2,0.5,0.25\n2,3,1,-0.5\n");

    GainReport mismatched;
    mismatched.classes = {0, 1};
    mismatched.delta = {0.0, 0.0};
    std::ostringstream sink;
    CHECK_THROWS_AS(write_per_class_csv(sink, report, &mismatched), ConfigError);
}
