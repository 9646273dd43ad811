#include "madapt/model.hpp"

#include <cmath>
#include <fstream>

#include "madapt/rng.hpp"
#include "madapt/textio.hpp"

namespace madapt {

void ModelConfig::validate() const {
    if (input_dim < 1) throw ConfigError("model: input_dim must be >= 1");
    if (feature_dim < 1) throw ConfigError("model: feature_dim must be >= 1");
    if (domain_hidden < 1) throw ConfigError("model: domain_hidden must be >= 1");
    if (num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
    for (std::size_t h : hidden) {
        if (h < 1) throw ConfigError("model: hidden widths must be >= 1");
    }
    if (attribute_heads.empty()) throw ConfigError("model: need at least one attribute head");
    for (const auto& [name, size] : attribute_heads) {
        if (name.empty()) throw ConfigError("model: attribute head with empty name");
        if (size < 2) throw ConfigError("model: attribute head '" + name + "' needs >= 2 outputs");
    }
}

ModelConfig make_model_config(const AttributeSchema& schema, std::size_t input_dim,
                              std::vector<std::size_t> hidden, std::size_t feature_dim,
                              std::size_t domain_hidden, std::uint64_t seed) {
    schema.validate();
    ModelConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden = std::move(hidden);
    cfg.feature_dim = feature_dim;
    cfg.domain_hidden = domain_hidden;
    cfg.num_classes = schema.num_classes;
    for (const Attribute& a : schema.attributes) {
        cfg.attribute_heads.emplace_back(a.name, a.categories);
    }
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

void ModelParams::for_each(const std::function<void(const std::string&, Tensor&)>& fn,
                           const ModelConfig& config) {
    for (std::size_t i = 0; i < backbone.size(); ++i) {
        fn("backbone.w" + std::to_string(i), backbone[i].w);
        fn("backbone.b" + std::to_string(i), backbone[i].b);
    }
    fn("class.w", class_head.w);
    fn("class.b", class_head.b);
    for (std::size_t n = 0; n < attribute_heads.size(); ++n) {
        const std::string& name = config.attribute_heads[n].first;
        fn("attr." + name + ".w", attribute_heads[n].w);
        fn("attr." + name + ".b", attribute_heads[n].b);
    }
    fn("domain.w0", domain_head1.w);
    fn("domain.b0", domain_head1.b);
    fn("domain.w1", domain_head2.w);
    fn("domain.b1", domain_head2.b);
}

void ModelParams::for_each(const std::function<void(const std::string&, const Tensor&)>& fn,
                           const ModelConfig& config) const {
    const_cast<ModelParams*>(this)->for_each(
        [&fn](const std::string& name, Tensor& t) { fn(name, t); }, config);
}

ModelParams ModelParams::register_on(Tape& tape) const {
    ModelParams out = *this;
    auto reg = [&tape](LinearLayer& l) {
        l.w = tape.leaf(l.w);
        l.b = tape.leaf(l.b);
    };
    for (auto& layer : out.backbone) reg(layer);
    reg(out.class_head);
    for (auto& layer : out.attribute_heads) reg(layer);
    reg(out.domain_head1);
    reg(out.domain_head2);
    return out;
}

ModelParams ModelParams::with_detached_domain_head() const {
    ModelParams out = *this;
    out.domain_head1.w = detach(out.domain_head1.w);
    out.domain_head1.b = detach(out.domain_head1.b);
    out.domain_head2.w = detach(out.domain_head2.w);
    out.domain_head2.b = detach(out.domain_head2.b);
    return out;
}

std::size_t ModelParams::num_values() const {
    std::size_t n = 0;
    auto count = [&n](const LinearLayer& l) { n += l.w.size() + l.b.size(); };
    for (const auto& layer : backbone) count(layer);
    count(class_head);
    for (const auto& layer : attribute_heads) count(layer);
    count(domain_head1);
    count(domain_head2);
    return n;
}

namespace {

// Fan-in-scaled uniform: U(-sqrt(3/fan_in), +sqrt(3/fan_in)) has variance
// exactly 1/fan_in. Biases start at zero.
LinearLayer init_layer(std::size_t in, std::size_t out, Rng& rng) {
    LinearLayer l;
    l.w = Tensor::zeros({in, out});
    const double bound = std::sqrt(3.0 / static_cast<double>(in));
    for (double& v : l.w.data) v = rng.uniform(-bound, bound);
    l.b = Tensor::zeros({out});
    return l;
}

}  // namespace

ModelParams init_params(const ModelConfig& config) {
    config.validate();
    ModelParams p;
    Rng rng(config.seed, "model-init");
    std::size_t prev = config.input_dim;
    for (std::size_t h : config.hidden) {
        p.backbone.push_back(init_layer(prev, h, rng));
        prev = h;
    }
    p.backbone.push_back(init_layer(prev, config.feature_dim, rng));
    p.class_head = init_layer(config.feature_dim, config.num_classes, rng);
    for (const auto& [name, size] : config.attribute_heads) {
        (void)name;
        p.attribute_heads.push_back(init_layer(config.feature_dim, size, rng));
    }
    p.domain_head1 = init_layer(config.feature_dim, config.domain_hidden, rng);
    p.domain_head2 = init_layer(config.domain_hidden, 2, rng);
    return p;
}

Tensor forward_features(const ModelParams& params, const Tensor& x) {
    if (params.backbone.empty()) throw ShapeError("model has no backbone layers");
    Tensor h = x;
    for (std::size_t i = 0; i + 1 < params.backbone.size(); ++i) {
        h = relu(add_rowwise(matmul(h, params.backbone[i].w), params.backbone[i].b));
    }
    const LinearLayer& last = params.backbone.back();
    return add_rowwise(matmul(h, last.w), last.b);
}

Tensor forward_class_scores(const ModelParams& params, const Tensor& features) {
    return add_rowwise(matmul(features, params.class_head.w), params.class_head.b);
}

Tensor forward_attribute_scores(const ModelParams& params, const Tensor& features, std::size_t n) {
    if (n >= params.attribute_heads.size()) {
        throw ShapeError("attribute head index " + std::to_string(n) + " out of range");
    }
    return add_rowwise(matmul(features, params.attribute_heads[n].w),
                       params.attribute_heads[n].b);
}

Tensor forward_domain_scores(const ModelParams& params, const Tensor& features) {
    Tensor h = relu(add_rowwise(matmul(features, params.domain_head1.w), params.domain_head1.b));
    return add_rowwise(matmul(h, params.domain_head2.w), params.domain_head2.b);
}

void save_checkpoint(const ModelConfig& config, const ModelParams& params,
                     const std::string& path) {
    config.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint file: " + path);
    out << "madapt-checkpoint 1\n";
    out << "input_dim " << config.input_dim << "\n";
    out << "hidden";
    for (std::size_t h : config.hidden) out << " " << h;
    out << "\n";
    out << "feature_dim " << config.feature_dim << "\n";
    out << "domain_hidden " << config.domain_hidden << "\n";
    out << "classes " << config.num_classes << "\n";
    for (const auto& [name, size] : config.attribute_heads) {
        out << "attribute " << name << " " << size << "\n";
    }
    out << "seed " << config.seed << "\n";
    params.for_each(
        [&out](const std::string& name, const Tensor& t) {
            out << "param " << name << " " << t.size();
            for (double v : t.data) out << " " << format_g17(v);
            out << "\n";
        },
        config);
    if (!out) throw DataError("failed writing checkpoint file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint file: " + path);

    std::string line;
    std::size_t lineno = 0;
    auto where = [&]() { return path + " line " + std::to_string(lineno); };
    auto fail = [&](const std::string& msg) -> void { throw DataError(where() + ": " + msg); };

    Checkpoint ck;
    if (!std::getline(in, line)) fail("empty checkpoint");
    ++lineno;
    if (trim(line) != "madapt-checkpoint 1") fail("bad checkpoint magic");

    // Header: everything up to the first 'param' line.
    std::vector<std::pair<std::string, std::vector<std::string>>> param_lines;
    bool have_dims = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(trim(line));
        if (toks.empty()) continue;
        if (toks[0] == "param") {
            param_lines.emplace_back(std::to_string(lineno), std::move(toks));
            continue;
        }
        if (toks[0] == "input_dim" && toks.size() == 2) {
            ck.config.input_dim = static_cast<std::size_t>(parse_int(toks[1], where()));
            have_dims = true;
        } else if (toks[0] == "hidden") {
            ck.config.hidden.clear();
            for (std::size_t i = 1; i < toks.size(); ++i) {
                ck.config.hidden.push_back(static_cast<std::size_t>(parse_int(toks[i], where())));
            }
        } else if (toks[0] == "feature_dim" && toks.size() == 2) {
            ck.config.feature_dim = static_cast<std::size_t>(parse_int(toks[1], where()));
        } else if (toks[0] == "domain_hidden" && toks.size() == 2) {
            ck.config.domain_hidden = static_cast<std::size_t>(parse_int(toks[1], where()));
        } else if (toks[0] == "classes" && toks.size() == 2) {
            ck.config.num_classes = static_cast<std::size_t>(parse_int(toks[1], where()));
        } else if (toks[0] == "attribute" && toks.size() == 3) {
            ck.config.attribute_heads.emplace_back(
                toks[1], static_cast<std::size_t>(parse_int(toks[2], where())));
        } else if (toks[0] == "seed" && toks.size() == 2) {
            ck.config.seed = static_cast<std::uint64_t>(parse_int(toks[1], where()));
        } else {
            fail("unrecognized header line '" + toks[0] + "'");
        }
    }
    if (!have_dims) throw DataError(path + ": checkpoint lacks input_dim");
    ck.config.validate();

    // Shape the parameter set, then fill values by name.
    ck.params = init_params(ck.config);
    std::size_t filled = 0;
    ck.params.for_each(
        [&](const std::string& name, Tensor& t) {
            for (auto& [lno, toks] : param_lines) {
                if (toks.size() >= 3 && toks[1] == name) {
                    const std::string ctx = path + " line " + lno;
                    const auto n = static_cast<std::size_t>(parse_int(toks[2], ctx));
                    if (n != t.size() || toks.size() != 3 + n) {
                        throw DataError(ctx + ": param " + name + " expects " +
                                        std::to_string(t.size()) + " values");
                    }
                    for (std::size_t i = 0; i < n; ++i) {
                        t.data[i] = parse_double(toks[3 + i], ctx);
                    }
                    ++filled;
                    return;
                }
            }
            throw DataError(path + ": checkpoint missing param " + name);
        },
        ck.config);
    if (filled != param_lines.size()) {
        throw DataError(path + ": checkpoint contains unknown extra params");
    }
    return ck;
}

}  // namespace madapt
