#include "madapt/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "madapt/error.hpp"

namespace madapt {

Mode mode_from_string(const std::string& s) {
    if (s == "source-only") return Mode::source_only;
    if (s == "source-plus-target") return Mode::source_plus_target;
    if (s == "source-att") return Mode::source_att;
    if (s == "source-att-acl") return Mode::source_att_acl;
    if (s == "dc") return Mode::dc;
    if (s == "dc-att-acl") return Mode::dc_att_acl;
    throw ConfigError("unknown mode '" + s +
                      "' (expected source-only, source-plus-target, source-att, "
                      "source-att-acl, dc, or dc-att-acl)");
}

std::string mode_to_string(Mode mode) {
    switch (mode) {
        case Mode::source_only: return "source-only";
        case Mode::source_plus_target: return "source-plus-target";
        case Mode::source_att: return "source-att";
        case Mode::source_att_acl: return "source-att-acl";
        case Mode::dc: return "dc";
        case Mode::dc_att_acl: return "dc-att-acl";
    }
    throw ConfigError("invalid mode value");
}

Protocol protocol_from_string(const std::string& s) {
    if (s == "unsup") return Protocol::unsup;
    if (s == "semisup") return Protocol::semisup;
    throw ConfigError("unknown protocol '" + s + "' (expected unsup or semisup)");
}

std::string protocol_to_string(Protocol protocol) {
    return protocol == Protocol::unsup ? "unsup" : "semisup";
}

void TrainConfig::validate(std::size_t num_attributes) const {
    if (learning_rate < 0.0 || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be non-negative and finite");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    if (batch_size < 2 || batch_size % 2 != 0)
        throw ConfigError("batch_size must be even and at least 2");
    if (steps == 0) throw ConfigError("steps must be positive");
    if (soft_label_refresh == 0) throw ConfigError("soft_label_refresh must be positive");
    weights.validate(num_attributes);
}

LossWeights effective_weights(Mode mode, Protocol protocol, const LossWeights& base,
                              std::size_t num_attributes) {
    LossWeights eff = base;
    if (eff.attribute_softmax.empty()) eff.attribute_softmax.assign(num_attributes, 1.0);
    if (eff.consistency.empty()) eff.consistency.assign(num_attributes, 1.0);
    eff.validate(num_attributes);

    const auto zero_attr = [&] { std::fill(eff.attribute_softmax.begin(), eff.attribute_softmax.end(), 0.0); };
    const auto zero_con = [&] { std::fill(eff.consistency.begin(), eff.consistency.end(), 0.0); };
    switch (mode) {
        case Mode::source_only:
        case Mode::source_plus_target:
            zero_attr();
            zero_con();
            eff.confusion = 0.0;
            eff.class_soft = 0.0;
            eff.attribute_soft = 0.0;
            break;
        case Mode::source_att:
            zero_con();
            eff.confusion = 0.0;
            eff.class_soft = 0.0;
            eff.attribute_soft = 0.0;
            break;
        case Mode::source_att_acl:
            eff.confusion = 0.0;
            eff.class_soft = 0.0;
            eff.attribute_soft = 0.0;
            break;
        case Mode::dc:
            zero_attr();
            zero_con();
            eff.attribute_soft = 0.0;
            break;
        case Mode::dc_att_acl:
            break;
    }
    if (protocol == Protocol::unsup) {
        eff.class_soft = 0.0;
        eff.attribute_soft = 0.0;
    }
    return eff;
}

bool SplitPlan::is_held_out(std::size_t class_id) const {
    return std::binary_search(held_out_classes.begin(), held_out_classes.end(), class_id);
}

SplitPlan make_split(const Dataset& dataset, Protocol protocol) {
    label_audit::ScopedPhase phase(label_audit::Phase::setup);
    const std::size_t k = dataset.schema.num_classes;
    SplitPlan plan;
    plan.target_labeled.assign(dataset.examples.size(), false);

    if (protocol == Protocol::unsup) {
        for (std::size_t i = 0; i < dataset.examples.size(); ++i)
            plan.target_labeled[i] = dataset.examples[i].domain == Domain::source;
        plan.held_out_classes.resize(k);
        for (std::size_t c = 0; c < k; ++c) plan.held_out_classes[c] = c;
        return plan;
    }

    std::vector<std::size_t> counts(k, 0);
    for (const Example& ex : dataset.examples) {
        if (ex.domain != Domain::target || !ex.has_truth()) continue;
        counts[static_cast<std::size_t>(ex.truth_class_label())] += 1;
    }
    std::vector<std::size_t> order(k);
    for (std::size_t c = 0; c < k; ++c) order[c] = c;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (counts[a] != counts[b]) return counts[a] > counts[b];
        return a < b;
    });
    const std::size_t num_labeled = (k + 1) / 2;
    plan.labeled_classes.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(num_labeled));
    plan.held_out_classes.assign(order.begin() + static_cast<std::ptrdiff_t>(num_labeled), order.end());
    std::sort(plan.labeled_classes.begin(), plan.labeled_classes.end());
    std::sort(plan.held_out_classes.begin(), plan.held_out_classes.end());

    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        const Example& ex = dataset.examples[i];
        if (ex.domain == Domain::source) {
            plan.target_labeled[i] = true;
            continue;
        }
        if (!ex.has_truth()) continue;
        const auto c = static_cast<std::size_t>(ex.truth_class_label());
        plan.target_labeled[i] = std::binary_search(plan.labeled_classes.begin(),
                                                    plan.labeled_classes.end(), c);
    }
    return plan;
}

void apply_split(Dataset& dataset, const SplitPlan& plan) {
    if (plan.target_labeled.size() != dataset.examples.size())
        throw ConfigError("split plan does not match the dataset size");
    for (std::size_t i = 0; i < dataset.examples.size(); ++i)
        if (!plan.target_labeled[i]) dataset.examples[i].hide_labels();
}

std::vector<const Example*> compose_batch(const Dataset& dataset,
                                          const std::vector<std::size_t>& source_rows,
                                          const std::vector<std::size_t>& target_rows,
                                          std::size_t batch_size, Rng& rng) {
    if (batch_size < 2 || batch_size % 2 != 0)
        throw ConfigError("batch_size must be even and at least 2");
    if (source_rows.empty() || target_rows.empty())
        throw DataError("batch composition needs rows from both domains");
    std::vector<const Example*> rows;
    rows.reserve(batch_size);
    const std::size_t half = batch_size / 2;
    for (std::size_t i = 0; i < half; ++i)
        rows.push_back(&dataset.examples[source_rows[rng.index(source_rows.size())]]);
    for (std::size_t i = 0; i < half; ++i)
        rows.push_back(&dataset.examples[target_rows[rng.index(target_rows.size())]]);
    return rows;
}

namespace {

std::vector<std::size_t> domain_rows(const Dataset& dataset, Domain domain) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i)
        if (dataset.examples[i].domain == domain) rows.push_back(i);
    return rows;
}

}  // namespace

TrainResult train(const Dataset& dataset, const ModelConfig& model_config,
                  const TrainConfig& train_config, const CheckpointHook& checkpoint_hook) {
    const std::size_t num_attrs = dataset.schema.num_attributes();
    model_config.validate();
    train_config.validate(num_attrs);
    if (model_config.input_dim != dataset.dim())
        throw ConfigError("model input_dim does not match the dataset dimension");
    if (model_config.num_classes != dataset.schema.num_classes)
        throw ConfigError("model class count does not match the schema");

    TrainResult result;
    result.effective =
        effective_weights(train_config.mode, train_config.protocol, train_config.weights, num_attrs);

    Dataset working = dataset;
    result.split = make_split(working, train_config.mode == Mode::source_only
                                           ? Protocol::unsup
                                           : train_config.protocol);
    apply_split(working, result.split);

    const std::vector<std::size_t> source_rows = domain_rows(working, Domain::source);
    const std::vector<std::size_t> target_rows = domain_rows(working, Domain::target);
    if (source_rows.empty() || target_rows.empty())
        throw DataError("training needs examples from both domains");

    result.params = init_params(model_config);

    std::vector<Tensor*> master;
    result.params.for_each([&](const std::string&, Tensor& t) { master.push_back(&t); },
                           model_config);
    std::vector<std::vector<double>> velocity(master.size());
    for (std::size_t i = 0; i < master.size(); ++i)
        velocity[i].assign(master[i]->size(), 0.0);

    const bool wants_bank = result.effective.class_soft > 0.0 || result.effective.attribute_soft > 0.0;
    const std::size_t half = train_config.batch_size / 2;
    const std::size_t larger = std::max(source_rows.size(), target_rows.size());
    const std::size_t steps_per_epoch = std::max<std::size_t>(1, (larger + half - 1) / half);
    const std::size_t refresh_every = train_config.soft_label_refresh * steps_per_epoch;

    Rng sampler(train_config.seed, "batch-sampling");
    SoftLabelBank bank;
    bool bank_ready = false;

    const auto t0 = std::chrono::steady_clock::now();
    label_audit::ScopedPhase phase(label_audit::Phase::training);
    std::string last_report;
    for (std::size_t step = 0; step < train_config.steps; ++step) {
        try {
            if (wants_bank && (step == 0 || step % refresh_every == 0)) {
                bank = build_soft_labels(working, result.params, working.schema,
                                         result.effective.temperature);
                bank_ready = true;
            }
            std::vector<const Example*> rows =
                compose_batch(working, source_rows, target_rows, train_config.batch_size, sampler);
            Batch batch = make_batch(rows, working.schema);

            Tape tape;
            ModelParams live = result.params.register_on(tape);
            std::vector<const Tensor*> live_tensors;
            live.for_each([&](const std::string&, const Tensor& t) { live_tensors.push_back(&t); },
                          model_config);

            TotalObjective obj = total_objective(batch, live, working.schema, result.effective,
                                                 bank_ready ? &bank : nullptr,
                                                 train_config.protocol);
            result.metrics_lines.push_back(obj.report.to_json_line(step));
            last_report = result.metrics_lines.back();

            if (obj.total.tracked()) {
                tape.backward(obj.total);
                for (std::size_t i = 0; i < master.size(); ++i) {
                    const std::vector<double>& g = tape.grad(*live_tensors[i]);
                    std::vector<double>& v = velocity[i];
                    std::vector<double>& value = master[i]->data;
                    for (std::size_t j = 0; j < value.size(); ++j) {
                        v[j] = train_config.momentum * v[j] - train_config.learning_rate * g[j];
                        value[j] += v[j];
                    }
                }
            }
        } catch (const NumericError& e) {
            std::string detail = "training diverged at step " + std::to_string(step) + ": " + e.what();
            if (!last_report.empty()) detail += "; last step report: " + last_report;
            throw NumericError(detail);
        }
        if (train_config.checkpoint_period > 0 && checkpoint_hook &&
            (step + 1) % train_config.checkpoint_period == 0)
            checkpoint_hook(step + 1, result.params);
    }
    const auto t1 = std::chrono::steady_clock::now();
    result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return result;
}

}  // namespace madapt
