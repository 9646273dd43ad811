#include "madapt/losses.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace madapt {

LossWeights LossWeights::defaults(std::size_t num_attributes) {
    LossWeights w;
    w.attribute_softmax.assign(num_attributes, 1.0);
    w.consistency.assign(num_attributes, 1.0);
    return w;
}

void LossWeights::validate(std::size_t num_attributes) const {
    if (attribute_softmax.size() != num_attributes || consistency.size() != num_attributes) {
        throw ConfigError("loss weights: per-attribute weight vectors must cover all " +
                          std::to_string(num_attributes) + " attributes");
    }
    auto non_negative = [](double v) { return v >= 0.0; };
    if (!non_negative(class_softmax) || !non_negative(confusion) || !non_negative(class_soft) ||
        !non_negative(attribute_soft) ||
        !std::all_of(attribute_softmax.begin(), attribute_softmax.end(), non_negative) ||
        !std::all_of(consistency.begin(), consistency.end(), non_negative)) {
        throw ConfigError("loss weights must be >= 0");
    }
    if (!(temperature > 0.0)) throw ConfigError("soft-label temperature must be > 0");
}

Batch make_batch(const std::vector<const Example*>& rows, const AttributeSchema& schema) {
    if (rows.empty()) throw DataError("cannot build an empty batch");
    Batch b;
    const std::size_t dim = rows[0]->features.size();
    b.features = Tensor::zeros({rows.size(), dim});
    b.domains.reserve(rows.size());
    b.class_labels.reserve(rows.size());
    b.attribute_labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Example& ex = *rows[i];
        if (ex.features.size() != dim) {
            throw DataError("batch rows disagree on feature dimension");
        }
        std::copy(ex.features.begin(), ex.features.end(), b.features.data.begin() + i * dim);
        b.domains.push_back(ex.domain);
        b.class_labels.push_back(ex.visible_class_label());
        const std::vector<int>* attrs = ex.visible_attribute_labels();
        if (attrs) {
            if (attrs->size() != schema.attributes.size()) {
                throw DataError("example attribute labels disagree with schema");
            }
            b.attribute_labels.push_back(*attrs);
        } else {
            b.attribute_labels.emplace_back();
        }
    }
    return b;
}

namespace {

// Shared masked softmax cross-entropy (temperature 1).
MaskedLoss masked_xent(const Tensor& scores, const std::vector<std::optional<int>>& labels) {
    if (scores.rows() != labels.size()) {
        throw ShapeError("softmax loss: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(scores.rows()) + " score rows");
    }
    const std::size_t classes = scores.cols();
    std::vector<std::size_t> idx;
    std::vector<int> picked;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i].has_value()) continue;
        const int y = *labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= classes) {
            throw DataError("softmax loss: label " + std::to_string(y) + " out of range [0, " +
                            std::to_string(classes) + ")");
        }
        idx.push_back(i);
        picked.push_back(y);
    }
    if (idx.empty()) return MaskedLoss{Tensor::scalar(0.0), 0, true};
    Tensor sel = take_rows(scores, idx);
    Tensor p = clamp_min(softmax_rows(sel, 1.0), kProbFloor);
    Tensor loss = scale(mean_row_dot(log_elem(p), one_hot_rows(picked, classes)), -1.0);
    return MaskedLoss{std::move(loss), idx.size(), false};
}

}  // namespace

MaskedLoss class_softmax_loss(const Tensor& scores,
                              const std::vector<std::optional<int>>& labels) {
    return masked_xent(scores, labels);
}

MaskedLoss attribute_softmax_loss(const Tensor& scores,
                                  const std::vector<std::optional<int>>& labels) {
    return masked_xent(scores, labels);
}

Tensor multitask_softmax(const Tensor& class_loss, const std::vector<Tensor>& attribute_losses,
                         const LossWeights& weights) {
    weights.validate(attribute_losses.size());
    Tensor total = scale(class_loss, weights.class_softmax);
    for (std::size_t n = 0; n < attribute_losses.size(); ++n) {
        total = add(total, scale(attribute_losses[n], weights.attribute_softmax[n]));
    }
    return total;
}

Tensor aggregate_class_scores_to_attribute(const Tensor& class_scores,
                                           const AttributeSchema& schema, std::size_t n) {
    if (class_scores.cols() != schema.num_classes) {
        throw ShapeError("aggregate: scores have " + std::to_string(class_scores.cols()) +
                         " columns, schema has " + std::to_string(schema.num_classes) +
                         " classes");
    }
    return matmul(class_scores, schema.averaging_matrix(n));
}

Tensor consistency_loss(const Tensor& class_scores, const Tensor& attribute_scores,
                        const AttributeSchema& schema, std::size_t n) {
    const std::size_t rows = class_scores.rows();
    if (attribute_scores.rows() != rows) {
        throw ShapeError("consistency: class and attribute score row counts differ");
    }
    if (attribute_scores.cols() != schema.attributes.at(n).categories) {
        throw ShapeError("consistency: attribute scores have wrong width for attribute '" +
                         schema.attributes.at(n).name + "'");
    }
    Tensor p = clamp_min(softmax_rows(attribute_scores, 1.0), kProbFloor);
    Tensor q = clamp_min(
        softmax_rows(aggregate_class_scores_to_attribute(class_scores, schema, n), 1.0),
        kProbFloor);
    // (1/2)[KL(p||q) + KL(q||p)] = (1/2) sum (p - q) (log p - log q), averaged
    // over the batch.
    Tensor sym = mul(sub(p, q), sub(log_elem(p), log_elem(q)));
    return scale(sum_all(sym), 0.5 / static_cast<double>(rows));
}

Tensor total_consistency(const Tensor& class_scores,
                         const std::vector<Tensor>& attribute_scores,
                         const AttributeSchema& schema, const LossWeights& weights) {
    if (attribute_scores.size() != schema.attributes.size()) {
        throw ShapeError("total_consistency: need scores for every attribute");
    }
    weights.validate(schema.attributes.size());
    Tensor total = Tensor::scalar(0.0);
    for (std::size_t n = 0; n < attribute_scores.size(); ++n) {
        if (weights.consistency[n] == 0.0) continue;
        total = add(total, scale(consistency_loss(class_scores, attribute_scores[n], schema, n),
                                 weights.consistency[n]));
    }
    return total;
}

DomainConfusion domain_confusion_loss(const Tensor& domain_scores,
                                      const std::vector<Domain>& domains) {
    if (domain_scores.cols() != 2) {
        throw ShapeError("domain scores must have 2 columns, got " +
                         std::to_string(domain_scores.cols()));
    }
    if (domain_scores.rows() != domains.size()) {
        throw ShapeError("domain loss: row/label count mismatch");
    }
    std::vector<int> labels01(domains.size());
    for (std::size_t i = 0; i < domains.size(); ++i) {
        labels01[i] = domains[i] == Domain::target ? 1 : 0;
    }
    DomainConfusion out;
    out.single_domain =
        std::all_of(domains.begin(), domains.end(), [&](Domain d) { return d == domains[0]; });
    Tensor logp = log_elem(clamp_min(softmax_rows(domain_scores, 1.0), kProbFloor));
    out.classifier = scale(mean_row_dot(logp, one_hot_rows(labels01, 2)), -1.0);
    Tensor uniform = Tensor::full({domains.size(), 2}, 0.5);
    out.confusion = scale(mean_row_dot(logp, uniform), -1.0);
    return out;
}

DomainConfusion domain_confusion_objective(const ModelParams& params, const Tensor& features,
                                           const std::vector<Domain>& domains) {
    // Domain head learns on frozen features...
    Tensor cls_scores = forward_domain_scores(params, detach(features));
    DomainConfusion cls = domain_confusion_loss(cls_scores, domains);
    // ...while the backbone learns against a frozen head.
    Tensor conf_scores = forward_domain_scores(params.with_detached_domain_head(), features);
    DomainConfusion conf = domain_confusion_loss(conf_scores, domains);
    return DomainConfusion{std::move(cls.classifier), std::move(conf.confusion),
                           cls.single_domain};
}

void SoftLabelBank::validate() const {
    auto check_distribution = [](const std::vector<double>& p, const std::string& who) {
        double sum = 0.0;
        for (double v : p) {
            if (v < 0.0) throw DataError(who + ": negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw DataError(who + ": probabilities sum to " + std::to_string(sum));
        }
    };
    for (std::size_t c = 0; c < class_soft.size(); ++c) {
        check_distribution(class_soft[c], "soft-label bank: class " + std::to_string(c));
    }
    for (std::size_t n = 0; n < attribute_soft.size(); ++n) {
        for (std::size_t k = 0; k < attribute_soft[n].size(); ++k) {
            check_distribution(attribute_soft[n][k], "soft-label bank: attribute " +
                                                         std::to_string(n) + " category " +
                                                         std::to_string(k));
        }
    }
}

SoftLabelBank build_soft_labels(const Dataset& dataset, const ModelParams& params,
                                const AttributeSchema& schema, double temperature) {
    if (!(temperature > 0.0)) throw ConfigError("soft-label temperature must be > 0");
    std::vector<const Example*> rows;
    for (const Example& ex : dataset.examples) {
        if (ex.domain == Domain::source && ex.labeled()) rows.push_back(&ex);
    }
    if (rows.empty()) throw DataError("soft-label bank: no labeled source examples");

    Batch batch = make_batch(rows, schema);
    Tensor features = forward_features(params, batch.features);
    Tensor class_p = softmax_rows(forward_class_scores(params, features), temperature);

    SoftLabelBank bank;
    bank.temperature = temperature;
    const std::size_t k = schema.num_classes;
    bank.class_soft.assign(k, std::vector<double>(k, 0.0));
    bank.class_counts.assign(k, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto label = batch.class_labels[i];
        if (!label.has_value()) continue;
        const auto c = static_cast<std::size_t>(*label);
        for (std::size_t j = 0; j < k; ++j) bank.class_soft[c][j] += class_p.data[i * k + j];
        ++bank.class_counts[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (bank.class_counts[c] == 0) {
            throw DataError("soft-label bank: class " + std::to_string(c) +
                            " has no source examples");
        }
        for (double& v : bank.class_soft[c]) v /= static_cast<double>(bank.class_counts[c]);
    }

    bank.attribute_soft.resize(schema.attributes.size());
    bank.attribute_counts.resize(schema.attributes.size());
    for (std::size_t n = 0; n < schema.attributes.size(); ++n) {
        const std::size_t ak = schema.attributes[n].categories;
        Tensor attr_p =
            softmax_rows(forward_attribute_scores(params, features, n), temperature);
        bank.attribute_soft[n].assign(ak, std::vector<double>(ak, 0.0));
        bank.attribute_counts[n].assign(ak, 0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (batch.attribute_labels[i].empty()) continue;
            const auto cat = static_cast<std::size_t>(batch.attribute_labels[i][n]);
            for (std::size_t j = 0; j < ak; ++j) {
                bank.attribute_soft[n][cat][j] += attr_p.data[i * ak + j];
            }
            ++bank.attribute_counts[n][cat];
        }
        for (std::size_t cat = 0; cat < ak; ++cat) {
            if (bank.attribute_counts[n][cat] == 0) {
                throw DataError("soft-label bank: attribute '" + schema.attributes[n].name +
                                "' category " + std::to_string(cat) + " has no source examples");
            }
            for (double& v : bank.attribute_soft[n][cat]) {
                v /= static_cast<double>(bank.attribute_counts[n][cat]);
            }
        }
    }
    bank.validate();
    return bank;
}

MaskedLoss soft_label_loss(const Tensor& scores, const std::vector<std::optional<int>>& labels,
                           const SoftLabelBank& bank, double temperature, int level) {
    if (temperature != bank.temperature) {
        throw ConfigError("soft-label temperature differs from the bank's");
    }
    if (scores.rows() != labels.size()) {
        throw ShapeError("soft-label loss: row/label count mismatch");
    }
    const std::size_t classes = scores.cols();
    const auto& table = level < 0 ? bank.class_soft
                                  : bank.attribute_soft.at(static_cast<std::size_t>(level));
    std::vector<std::size_t> idx;
    std::vector<const std::vector<double>*> targets;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i].has_value()) continue;
        const int y = *labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= table.size()) {
            throw DataError("soft-label loss: label " + std::to_string(y) +
                            " missing from the bank");
        }
        if (table[static_cast<std::size_t>(y)].size() != classes) {
            throw ShapeError("soft-label loss: bank entry width disagrees with scores");
        }
        idx.push_back(i);
        targets.push_back(&table[static_cast<std::size_t>(y)]);
    }
    if (idx.empty()) return MaskedLoss{Tensor::scalar(0.0), 0, true};

    Tensor target = Tensor::zeros({idx.size(), classes});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy(targets[i]->begin(), targets[i]->end(), target.data.begin() + i * classes);
    }
    Tensor p = clamp_min(softmax_rows(take_rows(scores, idx), temperature), kProbFloor);
    Tensor loss = scale(mean_row_dot(log_elem(p), target), -1.0);
    return MaskedLoss{std::move(loss), idx.size(), false};
}

std::string LossReport::to_json_line(std::size_t step) const {
    nlohmann::ordered_json j;
    j["step"] = step;
    j["L_C"] = class_softmax;
    j["L_a"] = attribute_softmax;
    j["L_con"] = consistency;
    j["L_conf_cls"] = confusion_classifier;
    j["L_conf_confusion"] = confusion;
    j["L_csoft"] = class_soft;
    j["L_asoft"] = attribute_soft;
    j["total"] = total;
    return j.dump();
}

TotalObjective total_objective(const Batch& batch, const ModelParams& params,
                               const AttributeSchema& schema, const LossWeights& weights,
                               const SoftLabelBank* bank, Protocol protocol) {
    const std::size_t num_attrs = schema.attributes.size();
    weights.validate(num_attrs);
    LossWeights w = weights;
    if (protocol == Protocol::unsup) {
        w.class_soft = 0.0;
        w.attribute_soft = 0.0;
    }
    const bool needs_bank = w.class_soft > 0.0 || w.attribute_soft > 0.0;
    if (needs_bank && bank == nullptr) {
        throw ConfigError("soft-label terms are active but no bank was provided");
    }

    TotalObjective out;
    out.report.attribute_softmax.assign(num_attrs, 0.0);
    out.report.consistency.assign(num_attrs, 0.0);
    out.report.attribute_soft.assign(num_attrs, 0.0);
    out.report.single_domain_batch = std::all_of(
        batch.domains.begin(), batch.domains.end(),
        [&](Domain d) { return d == batch.domains.at(0); });

    const bool any_consistency =
        std::any_of(w.consistency.begin(), w.consistency.end(), [](double b) { return b > 0.0; });
    const bool needs_class_scores =
        w.class_softmax > 0.0 || any_consistency || w.class_soft > 0.0;

    Tensor features = forward_features(params, batch.features);
    Tensor class_scores;
    if (needs_class_scores) class_scores = forward_class_scores(params, features);

    std::optional<Tensor> total;
    auto accumulate = [&total](const Tensor& term, double weight) {
        Tensor scaled = scale(term, weight);
        total = total.has_value() ? add(*total, scaled) : scaled;
    };

    if (w.class_softmax > 0.0) {
        MaskedLoss ml = class_softmax_loss(class_scores, batch.class_labels);
        out.report.class_softmax = ml.value.item();
        if (!ml.skipped) accumulate(ml.value, w.class_softmax);
    }

    // Per-row label for one attribute column; rows without labels yield nullopt.
    auto attribute_column = [&batch](std::size_t n) {
        std::vector<std::optional<int>> col(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (!batch.attribute_labels[i].empty()) col[i] = batch.attribute_labels[i][n];
        }
        return col;
    };

    for (std::size_t n = 0; n < num_attrs; ++n) {
        const bool need_scores =
            w.attribute_softmax[n] > 0.0 || w.consistency[n] > 0.0 || w.attribute_soft > 0.0;
        if (!need_scores) continue;
        Tensor attr_scores = forward_attribute_scores(params, features, n);

        if (w.attribute_softmax[n] > 0.0) {
            MaskedLoss ml = attribute_softmax_loss(attr_scores, attribute_column(n));
            out.report.attribute_softmax[n] = ml.value.item();
            if (!ml.skipped) accumulate(ml.value, w.attribute_softmax[n]);
        }
        if (w.consistency[n] > 0.0) {
            Tensor con = consistency_loss(class_scores, attr_scores, schema, n);
            out.report.consistency[n] = con.item();
            accumulate(con, w.consistency[n]);
        }
        if (w.attribute_soft > 0.0) {
            std::vector<std::optional<int>> target_only = attribute_column(n);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                if (batch.domains[i] != Domain::target) target_only[i] = std::nullopt;
            }
            MaskedLoss ml =
                soft_label_loss(attr_scores, target_only, *bank, w.temperature, static_cast<int>(n));
            out.report.attribute_soft[n] = ml.value.item();
            if (!ml.skipped) accumulate(ml.value, w.attribute_soft);
        }
    }

    if (w.confusion > 0.0) {
        DomainConfusion dc = domain_confusion_objective(params, features, batch.domains);
        out.report.confusion_classifier = dc.classifier.item();
        out.report.confusion = dc.confusion.item();
        accumulate(dc.classifier, w.confusion);
        accumulate(dc.confusion, w.confusion);
    }

    if (w.class_soft > 0.0) {
        std::vector<std::optional<int>> target_only = batch.class_labels;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (batch.domains[i] != Domain::target) target_only[i] = std::nullopt;
        }
        MaskedLoss ml = soft_label_loss(class_scores, target_only, *bank, w.temperature, -1);
        out.report.class_soft = ml.value.item();
        if (!ml.skipped) accumulate(ml.value, w.class_soft);
    }

    out.total = total.has_value() ? *total : Tensor::scalar(0.0);
    out.report.total = out.total.item();
    return out;
}

}  // namespace madapt
