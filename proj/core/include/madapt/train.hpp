#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "madapt/data.hpp"
#include "madapt/losses.hpp"
#include "madapt/model.hpp"
#include "madapt/rng.hpp"

namespace madapt {

// Training regimes mirroring the experiment-table rows.
enum class Mode {
    source_only,         // class softmax on source rows alone
    source_plus_target,  // class softmax on source + labeled target rows
    source_att,          // + attribute softmax heads
    source_att_acl,      // + attribute consistency
    dc,                  // class softmax + domain confusion (+ class soft labels)
    dc_att_acl,          // everything
};

Mode mode_from_string(const std::string& s);          // ConfigError on unknown
std::string mode_to_string(Mode mode);
Protocol protocol_from_string(const std::string& s);  // ConfigError on unknown
std::string protocol_to_string(Protocol protocol);

struct TrainConfig {
    double learning_rate = 0.0001;
    double momentum = 0.9;
    std::size_t batch_size = 32;  // even: half source, half target
    std::size_t steps = 3000;
    Mode mode = Mode::source_only;
    Protocol protocol = Protocol::unsup;
    LossWeights weights;               // base weights; the mode matrix zeroes terms
    std::uint64_t seed = 0;            // batch-sampling stream
    std::size_t soft_label_refresh = 1;  // epochs between bank rebuilds
    std::size_t checkpoint_period = 0;   // steps between checkpoint callbacks; 0 = never

    void validate(std::size_t num_attributes) const;
};

// Zeroes every loss weight the mode does not use. The unsupervised protocol
// additionally zeroes both soft-label weights.
LossWeights effective_weights(Mode mode, Protocol protocol, const LossWeights& base,
                              std::size_t num_attributes);

// Which target examples keep visible labels during training.
struct SplitPlan {
    std::vector<std::size_t> labeled_classes;   // ascending class ids
    std::vector<std::size_t> held_out_classes;  // ascending class ids
    std::vector<bool> target_labeled;           // per dataset example index

    bool is_held_out(std::size_t class_id) const;
};

// Semisup: classes ranked by target-label count (descending, ties by
// ascending id); the top half (ceil K/2) keeps labels. Unsup: every target
// label is hidden.
SplitPlan make_split(const Dataset& dataset, Protocol protocol);

// Hides the labels the plan excludes; ground truth stays stored for later
// evaluation.
void apply_split(Dataset& dataset, const SplitPlan& plan);

// B/2 source rows + B/2 target rows, sampled uniformly with replacement.
std::vector<const Example*> compose_batch(const Dataset& dataset,
                                          const std::vector<std::size_t>& source_rows,
                                          const std::vector<std::size_t>& target_rows,
                                          std::size_t batch_size, Rng& rng);

struct TrainResult {
    ModelParams params;
    std::vector<std::string> metrics_lines;  // one JSON record per step
    SplitPlan split;
    LossWeights effective;  // weights after the mode matrix
    double wall_seconds = 0.0;
};

using CheckpointHook = std::function<void(std::size_t step, const ModelParams&)>;

// SGD with momentum on the total objective. Deterministic given (dataset,
// configs, seeds). Throws NumericError with the step number when the loss
// goes non-finite.
TrainResult train(const Dataset& dataset, const ModelConfig& model_config,
                  const TrainConfig& train_config, const CheckpointHook& checkpoint_hook = {});

}  // namespace madapt
