#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gradcheck.hpp"
#include "madapt/error.hpp"
#include "madapt/model.hpp"
#include "madapt/rng.hpp"
#include "tmpdir.hpp"

using namespace madapt;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.input_dim = 3;
    cfg.hidden = {5};
    cfg.feature_dim = 4;
    cfg.domain_hidden = 3;
    cfg.num_classes = 4;
    cfg.attribute_heads = {{"body", 2}, {"origin", 3}};
    cfg.seed = 7;
    return cfg;
}

Tensor random_input(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed, "x");
    Tensor x = Tensor::zeros({rows, cols});
    for (double& v : x.data) v = rng.normal();
    return x;
}

void set_all(ModelParams& p, const ModelConfig& cfg, double value) {
    p.for_each([&](const std::string&, Tensor& t) { std::fill(t.data.begin(), t.data.end(), value); },
               cfg);
}

}  // namespace

TEST_CASE("model config validation") {
    CHECK_NOTHROW(tiny_config().validate());

    ModelConfig bad = tiny_config();
    bad.input_dim = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = tiny_config();
    bad.num_classes = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = tiny_config();
    bad.attribute_heads.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = tiny_config();
    bad.attribute_heads[0].second = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = tiny_config();
    bad.hidden = {8, 0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("make_model_config copies attribute heads from the schema") {
    AttributeSchema s;
    s.num_classes = 4;
    s.attributes = {{"body", 2, {0, 0, 1, 1}}, {"origin", 2, {0, 1, 0, 1}}};
    ModelConfig cfg = make_model_config(s, 6, {8}, 5, 4, 3);
    CHECK(cfg.num_classes == 4);
    REQUIRE(cfg.attribute_heads.size() == 2);
    CHECK(cfg.attribute_heads[0] == std::pair<std::string, std::size_t>{"body", 2});
    CHECK(cfg.attribute_heads[1] == std::pair<std::string, std::size_t>{"origin", 2});
    CHECK(cfg.seed == 3);
}

TEST_CASE("a no-hidden model with identity weights passes inputs through") {
    ModelConfig cfg = tiny_config();
    cfg.hidden = {};
    cfg.feature_dim = cfg.input_dim;
    ModelParams p = init_params(cfg);
    REQUIRE(p.backbone.size() == 1);
    std::fill(p.backbone[0].w.data.begin(), p.backbone[0].w.data.end(), 0.0);
    for (std::size_t i = 0; i < cfg.input_dim; ++i)
        p.backbone[0].w.data[i * cfg.input_dim + i] = 1.0;
    std::fill(p.backbone[0].b.data.begin(), p.backbone[0].b.data.end(), 0.0);

    Tensor x = random_input(4, cfg.input_dim, 1);
    Tensor f = forward_features(p, x);
    CHECK(f.shape == x.shape);
    CHECK(f.data == x.data);  // bit-exact pass-through
}

TEST_CASE("forward shapes for a batch") {
    ModelConfig cfg = tiny_config();
    ModelParams p = init_params(cfg);
    Tensor x = random_input(6, cfg.input_dim, 2);
    Tensor f = forward_features(p, x);
    CHECK(f.shape == std::vector<std::size_t>{6, cfg.feature_dim});
    CHECK(forward_class_scores(p, f).shape == std::vector<std::size_t>{6, 4});
    CHECK(forward_attribute_scores(p, f, 0).shape == std::vector<std::size_t>{6, 2});
    CHECK(forward_attribute_scores(p, f, 1).shape == std::vector<std::size_t>{6, 3});
    CHECK(forward_domain_scores(p, f).shape == std::vector<std::size_t>{6, 2});
    CHECK_THROWS_AS(forward_attribute_scores(p, f, 2), ShapeError);
}

TEST_CASE("rows pass through the model independently") {
    ModelConfig cfg = tiny_config();
    ModelParams p = init_params(cfg);
    Tensor x = random_input(5, cfg.input_dim, 3);
    Tensor f = forward_features(p, x);
    Tensor s = forward_class_scores(p, f);

    // Reverse the row order; outputs must be the same rows reversed.
    Tensor rx = Tensor::zeros(x.shape);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < cfg.input_dim; ++j)
            rx.data[i * cfg.input_dim + j] = x.data[(4 - i) * cfg.input_dim + j];
    Tensor rs = forward_class_scores(p, forward_features(p, rx));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(rs.data[i * 4 + j] == s.data[(4 - i) * 4 + j]);
}

TEST_CASE("all-zero parameters give all-zero scores") {
    ModelConfig cfg = tiny_config();
    ModelParams p = init_params(cfg);
    set_all(p, cfg, 0.0);
    Tensor x = random_input(3, cfg.input_dim, 4);
    Tensor f = forward_features(p, x);
    CHECK(std::all_of(f.data.begin(), f.data.end(), [](double v) { return v == 0.0; }));
    Tensor s = forward_class_scores(p, f);
    CHECK(std::all_of(s.data.begin(), s.data.end(), [](double v) { return v == 0.0; }));
    Tensor d = forward_domain_scores(p, f);
    CHECK(std::all_of(d.data.begin(), d.data.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("one-hot class head rows select feature coordinates") {
    ModelConfig cfg = tiny_config();
    cfg.hidden = {};
    cfg.feature_dim = cfg.input_dim;  // identity backbone below
    ModelParams p = init_params(cfg);
    set_all(p, cfg, 0.0);
    for (std::size_t i = 0; i < cfg.input_dim; ++i)
        p.backbone[0].w.data[i * cfg.input_dim + i] = 1.0;
    // class_head.w is [F x K]; score k reads feature (k mod F).
    for (std::size_t k = 0; k < cfg.num_classes; ++k)
        p.class_head.w.data[(k % cfg.input_dim) * cfg.num_classes + k] = 1.0;

    Tensor x = random_input(4, cfg.input_dim, 5);
    Tensor s = forward_class_scores(p, forward_features(p, x));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t k = 0; k < cfg.num_classes; ++k)
            CHECK(s.data[r * cfg.num_classes + k] == x.data[r * cfg.input_dim + k % cfg.input_dim]);
}

TEST_CASE("finite differences confirm model gradients") {
    ModelConfig cfg = tiny_config();
    ModelParams p = init_params(cfg);
    Tensor x = random_input(4, cfg.input_dim, 6);

    std::vector<Tensor> leaves;
    p.for_each([&](const std::string&, Tensor& t) { leaves.push_back(t); }, cfg);

    auto build = [&](Tape& tape, const std::vector<Tensor>& ls) {
        ModelParams q = p;
        std::size_t i = 0;
        q.for_each([&](const std::string&, Tensor& t) { t = ls[i++]; }, cfg);
        Tensor f = forward_features(q, x);
        // Mix every head into one scalar so all parameters get gradients.
        Tensor total = mean_all(forward_class_scores(q, f));
        total = add(total, mean_all(relu(forward_attribute_scores(q, f, 0))));
        total = add(total, mean_all(forward_attribute_scores(q, f, 1)));
        total = add(total, mean_all(relu(forward_domain_scores(q, f))));
        (void)tape;
        return total;
    };
    auto report = gradcheck::check(leaves, build);
    CHECK(report.ok);
}

TEST_CASE("initialization is deterministic, seed-sensitive, and fan-in scaled") {
    ModelConfig cfg = tiny_config();
    cfg.input_dim = 256;
    cfg.hidden = {128};
    ModelParams a = init_params(cfg);
    ModelParams b = init_params(cfg);
    bool same = true;
    std::size_t values = 0;
    a.for_each(
        [&](const std::string& name, Tensor& t) {
            ModelParams& other = b;
            other.for_each(
                [&](const std::string& oname, Tensor& ot) {
                    if (oname == name) same = same && ot.data == t.data;
                },
                cfg);
            values += t.size();
        },
        cfg);
    CHECK(same);
    CHECK(values == a.num_values());

    cfg.seed = 8;
    ModelParams c = init_params(cfg);
    CHECK(c.backbone[0].w.data != a.backbone[0].w.data);

    // First layer: fan_in 256, 128 outputs -> 32768 draws; the sample
    // variance of U(-sqrt(3/256), sqrt(3/256)) must sit near 1/256.
    const auto& w = a.backbone[0].w.data;
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w.size());
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size());
    const double want = 1.0 / 256.0;
    CHECK(var > want * 0.8);
    CHECK(var < want * 1.2);
    const double bound = std::sqrt(3.0 / 256.0);
    CHECK(std::all_of(w.begin(), w.end(), [&](double v) { return std::abs(v) <= bound; }));

    // Biases start at zero.
    CHECK(std::all_of(a.backbone[0].b.data.begin(), a.backbone[0].b.data.end(),
                      [](double v) { return v == 0.0; }));
    CHECK(std::all_of(a.class_head.b.data.begin(), a.class_head.b.data.end(),
                      [](double v) { return v == 0.0; }));
}

TEST_CASE("heads are independent: perturbing one head leaves the others alone") {
    ModelConfig cfg = tiny_config();
    ModelParams p = init_params(cfg);
    Tensor x = random_input(3, cfg.input_dim, 7);
    Tensor f = forward_features(p, x);
    Tensor cls = forward_class_scores(p, f);
    Tensor att1 = forward_attribute_scores(p, f, 1);

    ModelParams q = p;
    for (double& v : q.attribute_heads[0].w.data) v += 1.0;
    for (double& v : q.domain_head1.w.data) v += 1.0;
    Tensor f2 = forward_features(q, x);
    CHECK(f2.data == f.data);
    CHECK(forward_class_scores(q, f2).data == cls.data);
    CHECK(forward_attribute_scores(q, f2, 1).data == att1.data);
    CHECK(forward_attribute_scores(q, f2, 0).data != forward_attribute_scores(p, f, 0).data);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    ModelConfig cfg = tiny_config();
    ModelParams p = init_params(cfg);
    const std::string path = temp_path("checkpoint.txt");
    save_checkpoint(cfg, p, path);

    Checkpoint ck = load_checkpoint(path);
    CHECK(ck.config.input_dim == cfg.input_dim);
    CHECK(ck.config.hidden == cfg.hidden);
    CHECK(ck.config.feature_dim == cfg.feature_dim);
    CHECK(ck.config.domain_hidden == cfg.domain_hidden);
    CHECK(ck.config.num_classes == cfg.num_classes);
    CHECK(ck.config.attribute_heads == cfg.attribute_heads);
    CHECK(ck.config.seed == cfg.seed);

    bool same = true;
    std::vector<const Tensor*> got;
    ck.params.for_each([&](const std::string&, const Tensor& t) { got.push_back(&t); }, ck.config);
    std::size_t i = 0;
    p.for_each(
        [&](const std::string&, const Tensor& t) {
            same = same && got[i]->data == t.data && got[i]->shape == t.shape;
            ++i;
        },
        cfg);
    CHECK(same);

    // Saving the loaded checkpoint reproduces the file byte for byte.
    const std::string path2 = temp_path("checkpoint.txt");
    save_checkpoint(ck.config, ck.params, path2);
    CHECK(read_text(path) == read_text(path2));
}

TEST_CASE("checkpoint loader rejects corrupted files") {
    ModelConfig cfg = tiny_config();
    ModelParams p = init_params(cfg);
    const std::string path = temp_path("checkpoint.txt");
    save_checkpoint(cfg, p, path);
    const std::string good = read_text(path);

    write_text(path, "not-a-checkpoint\n");
    CHECK_THROWS_AS(load_checkpoint(path), DataError);

    // Drop one param line entirely.
    std::string missing = good;
    const std::size_t at = missing.find("param class.w");
    const std::size_t end = missing.find('\n', at);
    missing.erase(at, end - at + 1);
    write_text(path, missing);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);

    // Truncate a value list.
    std::string short_vals = good;
    const std::size_t bat = short_vals.find("param class.b 4 ");
    const std::size_t bend = short_vals.find('\n', bat);
    std::string line = short_vals.substr(bat, bend - bat);
    line = line.substr(0, line.rfind(' '));
    short_vals.replace(bat, bend - bat, line);
    write_text(path, short_vals);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);

    // An unknown header key is rejected.
    write_text(path, "madapt-checkpoint 1\nwat 3\n" + good.substr(good.find("input_dim")));
    CHECK_THROWS_AS(load_checkpoint(path), DataError);

    CHECK_THROWS_AS(load_checkpoint(temp_path("nope.txt")), DataError);
}

TEST_CASE("detached domain head blocks gradient flow into the head only") {
    ModelConfig cfg = tiny_config();
    ModelParams p = init_params(cfg);
    Tensor x = random_input(3, cfg.input_dim, 8);

    Tape tape;
    ModelParams live = p.register_on(tape);
    Tensor f = forward_features(live, x);
    Tensor d = forward_domain_scores(live.with_detached_domain_head(), f);
    Tensor loss = mean_all(d);
    tape.backward(loss);

    // Backbone still gets gradient through the detached head's forward.
    const auto& gb = tape.grad(live.backbone[0].w);
    CHECK(std::any_of(gb.begin(), gb.end(), [](double v) { return v != 0.0; }));
    // The head parameters do not.
    const auto& gd = tape.grad(live.domain_head1.w);
    CHECK(std::all_of(gd.begin(), gd.end(), [](double v) { return v == 0.0; }));
}
