#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "madapt/schema.hpp"
#include "madapt/tensor.hpp"

namespace madapt {

struct ModelConfig {
    std::size_t input_dim = 0;                 // D
    std::vector<std::size_t> hidden = {64, 48};  // backbone hidden widths
    std::size_t feature_dim = 32;              // F, the shared representation
    std::size_t domain_hidden = 64;            // domain classifier hidden width
    std::size_t num_classes = 0;               // K
    std::vector<std::pair<std::string, std::size_t>> attribute_heads;  // (name, a_K)
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

ModelConfig make_model_config(const AttributeSchema& schema, std::size_t input_dim,
                              std::vector<std::size_t> hidden, std::size_t feature_dim,
                              std::size_t domain_hidden, std::uint64_t seed);

struct LinearLayer {
    Tensor w;  // [in x out]
    Tensor b;  // [out]
};

// One backbone shared by both domains, one score head per task, and a
// two-layer domain classifier. Tensors are plain values between steps;
// register_on() yields a copy whose tensors are leaves of a tape.
struct ModelParams {
    std::vector<LinearLayer> backbone;        // hidden layers + final -> F
    LinearLayer class_head;                   // F -> K
    std::vector<LinearLayer> attribute_heads; // F -> a_K each
    LinearLayer domain_head1;                 // F -> domain_hidden
    LinearLayer domain_head2;                 // domain_hidden -> 2

    // Visits every tensor with its stable name, in a fixed order.
    void for_each(const std::function<void(const std::string&, Tensor&)>& fn,
                  const ModelConfig& config);
    void for_each(const std::function<void(const std::string&, const Tensor&)>& fn,
                  const ModelConfig& config) const;

    ModelParams register_on(Tape& tape) const;

    // Copy with the domain head severed from any tape (stop-gradient side
    // of the confusion objective).
    ModelParams with_detached_domain_head() const;

    std::size_t num_values() const;
};

ModelParams init_params(const ModelConfig& config);

// x: [B x D] -> features [B x F]. ReLU after each hidden layer; the final
// projection to F is linear so a no-hidden identity model is expressible.
Tensor forward_features(const ModelParams& params, const Tensor& x);
Tensor forward_class_scores(const ModelParams& params, const Tensor& features);
Tensor forward_attribute_scores(const ModelParams& params, const Tensor& features, std::size_t n);
Tensor forward_domain_scores(const ModelParams& params, const Tensor& features);

struct Checkpoint {
    ModelConfig config;
    ModelParams params;
};

void save_checkpoint(const ModelConfig& config, const ModelParams& params,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace madapt
