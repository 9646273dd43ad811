#include "madapt/generator.hpp"

#include <cmath>

#include "madapt/rng.hpp"

namespace madapt {

void GeneratorConfig::validate() const {
    try {
        schema.validate();
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    if (dim < 1) throw ConfigError("generator: dim must be >= 1");
    if (prototype_noise < 0 || within_noise < 0 || target_extra_noise < 0) {
        throw ConfigError("generator: noise scales must be >= 0");
    }
    if (shift_matrix.size() != dim * dim) {
        throw ConfigError("generator: shift matrix must be " + std::to_string(dim) + "x" +
                          std::to_string(dim) + ", got " + std::to_string(shift_matrix.size()) +
                          " entries");
    }
    if (shift_bias.size() != dim) {
        throw ConfigError("generator: shift bias must have length " + std::to_string(dim));
    }
    if (source_counts.size() != schema.num_classes || target_counts.size() != schema.num_classes) {
        throw ConfigError("generator: per-class counts must cover all " +
                          std::to_string(schema.num_classes) + " classes");
    }
}

void make_identity_shift(std::size_t dim, std::vector<double>& matrix, std::vector<double>& bias) {
    matrix.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) matrix[i * dim + i] = 1.0;
    bias.assign(dim, 0.0);
}

void make_random_shift(std::size_t dim, double strength, double bias_scale, std::uint64_t seed,
                       std::vector<double>& matrix, std::vector<double>& bias) {
    make_identity_shift(dim, matrix, bias);
    Rng rng(seed, "domain-shift");
    const double g_scale = strength / std::sqrt(static_cast<double>(dim));
    for (double& v : matrix) v += g_scale * rng.normal();
    const double b_scale = bias_scale / std::sqrt(static_cast<double>(dim));
    for (double& v : bias) v = b_scale * rng.normal();
}

std::vector<std::vector<double>> class_prototypes(const GeneratorConfig& config) {
    config.validate();
    const std::size_t d = config.dim;
    const AttributeSchema& schema = config.schema;

    // Per-attribute category anchors; shared across classes in a category.
    std::vector<std::vector<std::vector<double>>> anchors(schema.attributes.size());
    for (std::size_t n = 0; n < schema.attributes.size(); ++n) {
        anchors[n].resize(schema.attributes[n].categories);
        for (std::size_t k = 0; k < schema.attributes[n].categories; ++k) {
            Rng rng(config.seed, "anchor", n * 100003 + k);
            auto& a = anchors[n][k];
            a.resize(d);
            for (double& v : a) v = rng.normal();
        }
    }

    std::vector<std::vector<double>> protos(schema.num_classes, std::vector<double>(d, 0.0));
    for (std::size_t c = 0; c < schema.num_classes; ++c) {
        Rng rng(config.seed, "class-offset", c);
        auto& mu = protos[c];
        for (std::size_t n = 0; n < schema.attributes.size(); ++n) {
            const auto& a = anchors[n][schema.attributes[n].class_to_category[c]];
            for (std::size_t i = 0; i < d; ++i) mu[i] += a[i];
        }
        for (std::size_t i = 0; i < d; ++i) mu[i] += config.prototype_noise * rng.normal();
    }
    return protos;
}

namespace {

std::vector<double> apply_shift(const GeneratorConfig& config, const std::vector<double>& x) {
    const std::size_t d = config.dim;
    std::vector<double> y(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double s = config.shift_bias[i];
        for (std::size_t j = 0; j < d; ++j) s += config.shift_matrix[i * d + j] * x[j];
        y[i] = s;
    }
    return y;
}

}  // namespace

Dataset generate(const GeneratorConfig& config) {
    config.validate();
    auto protos = class_prototypes(config);

    Dataset ds;
    ds.schema = config.schema;

    // Per (class, domain) substreams keyed also by sample_stream, so
    // evaluation draws are independent of training draws but share the
    // same prototypes. Emission order is fixed: all source rows by class,
    // then all target rows by class.
    for (std::size_t c = 0; c < config.schema.num_classes; ++c) {
        Rng rng(config.seed, "source-examples", c * 8 + config.sample_stream);
        for (std::size_t i = 0; i < config.source_counts[c]; ++i) {
            std::vector<double> x = protos[c];
            for (double& v : x) v += config.within_noise * rng.normal();
            Example ex(std::move(x), Domain::source);
            ex.set_truth(static_cast<int>(c), config.schema);
            ds.examples.push_back(std::move(ex));
        }
    }
    for (std::size_t c = 0; c < config.schema.num_classes; ++c) {
        Rng rng(config.seed, "target-examples", c * 8 + config.sample_stream);
        for (std::size_t i = 0; i < config.target_counts[c]; ++i) {
            std::vector<double> raw = protos[c];
            for (double& v : raw) v += config.within_noise * rng.normal();
            std::vector<double> x = apply_shift(config, raw);
            for (double& v : x) v += config.target_extra_noise * rng.normal();
            Example ex(std::move(x), Domain::target);
            ex.set_truth(static_cast<int>(c), config.schema);
            ds.examples.push_back(std::move(ex));
        }
    }
    return ds;
}

}  // namespace madapt
