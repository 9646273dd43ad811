#pragma once

#include <cstdint>
#include <vector>

#include "madapt/data.hpp"
#include "madapt/schema.hpp"

namespace madapt {

// Synthetic two-domain dataset. Class prototypes are sums of per-attribute
// category anchors plus a class-specific offset, so classes sharing
// attribute categories are geometrically related. Source examples scatter
// around prototypes; target examples additionally pass through an affine
// shift and extra noise.
struct GeneratorConfig {
    AttributeSchema schema;
    std::size_t dim = 24;               // D
    double prototype_noise = 0.5;       // class-specific offset scale
    double within_noise = 0.5;          // per-example scatter
    std::vector<double> shift_matrix;   // row-major D x D affine map A
    std::vector<double> shift_bias;     // length D
    double target_extra_noise = 0.3;    // post-shift corruption
    std::vector<std::size_t> source_counts;  // per-class example counts
    std::vector<std::size_t> target_counts;
    std::uint64_t seed = 1;
    // Distinguishes independent draws sharing the same prototypes (0 =
    // training examples, 1 = evaluation examples, ...).
    std::uint64_t sample_stream = 0;

    void validate() const;  // throws ConfigError
};

// Identity shift (A = I, b = 0).
void make_identity_shift(std::size_t dim, std::vector<double>& matrix, std::vector<double>& bias);

// A = I + strength * G with G ~ N(0, 1/D) entries; bias ~ N(0, bias_scale^2 / D)
// per coordinate. Deterministic in (seed).
void make_random_shift(std::size_t dim, double strength, double bias_scale, std::uint64_t seed,
                       std::vector<double>& matrix, std::vector<double>& bias);

// Class prototypes implied by the config (index = class id).
std::vector<std::vector<double>> class_prototypes(const GeneratorConfig& config);

// Deterministic in config; equal configs give bit-identical datasets.
Dataset generate(const GeneratorConfig& config);

}  // namespace madapt
