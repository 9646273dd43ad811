#pragma once

#include <optional>
#include <string>
#include <vector>

#include "madapt/data.hpp"
#include "madapt/model.hpp"
#include "madapt/schema.hpp"
#include "madapt/tensor.hpp"

namespace madapt {

// Probabilities are clamped to [kProbFloor, 1] after every softmax that
// feeds a log, so KL and cross-entropy terms stay finite.
inline constexpr double kProbFloor = 1e-12;

struct LossWeights {
    double class_softmax = 1.0;               // fine-grained softmax weight
    std::vector<double> attribute_softmax;    // one per attribute
    std::vector<double> consistency;          // one per attribute
    double confusion = 1.0;                   // domain-confusion weight
    double class_soft = 1.0;                  // class-level soft-label weight
    double attribute_soft = 1.0;              // attribute-level soft-label weight
    double temperature = 2.0;                 // soft-label temperature

    static LossWeights defaults(std::size_t num_attributes);
    void validate(std::size_t num_attributes) const;  // throws ConfigError
};

// A mean over the rows that carry the labels a term needs. When no row
// qualifies the term is skipped (value 0, untracked) rather than polluting
// the objective.
struct MaskedLoss {
    Tensor value;
    std::size_t rows = 0;
    bool skipped = true;
};

// Mini-batch view assembled from visible labels only.
struct Batch {
    Tensor features;                                 // [B x D]
    std::vector<Domain> domains;                     // length B
    std::vector<std::optional<int>> class_labels;    // visible class per row
    std::vector<std::vector<int>> attribute_labels;  // empty when unlabeled

    std::size_t size() const { return domains.size(); }
};

Batch make_batch(const std::vector<const Example*>& rows, const AttributeSchema& schema);

// −mean log softmax(scores)[label] over rows whose label is present (τ=1).
MaskedLoss class_softmax_loss(const Tensor& scores,
                              const std::vector<std::optional<int>>& labels);
MaskedLoss attribute_softmax_loss(const Tensor& scores,
                                  const std::vector<std::optional<int>>& labels);

// Weighted sum of the per-task softmax losses.
Tensor multitask_softmax(const Tensor& class_loss, const std::vector<Tensor>& attribute_losses,
                         const LossWeights& weights);

// Per-category mean of class scores: scores [B x K] -> [B x a_K].
Tensor aggregate_class_scores_to_attribute(const Tensor& class_scores,
                                           const AttributeSchema& schema, std::size_t n);

// Symmetric KL between the attribute head's softmax and the softmax of
// category-averaged class scores, mean over the batch.
Tensor consistency_loss(const Tensor& class_scores, const Tensor& attribute_scores,
                        const AttributeSchema& schema, std::size_t n);

Tensor total_consistency(const Tensor& class_scores,
                         const std::vector<Tensor>& attribute_scores,
                         const AttributeSchema& schema, const LossWeights& weights);

// Both halves of the adversarial objective, computed from one score
// tensor. Pure values; the stop-gradient composition lives in
// domain_confusion_objective.
struct DomainConfusion {
    Tensor classifier;  // cross-entropy vs. true domains
    Tensor confusion;   // cross-entropy vs. the uniform distribution
    bool single_domain = false;
};

DomainConfusion domain_confusion_loss(const Tensor& domain_scores,
                                      const std::vector<Domain>& domains);

// Training composition: the classifier term sees detached features (only
// the domain head learns to separate); the confusion term runs through a
// detached domain head (only the backbone learns to confuse).
DomainConfusion domain_confusion_objective(const ModelParams& params, const Tensor& features,
                                           const std::vector<Domain>& domains);

// Per-class and per-attribute-category averages of temperature-softened
// source predictions.
struct SoftLabelBank {
    double temperature = 2.0;
    std::vector<std::vector<double>> class_soft;              // K rows of length K
    std::vector<std::size_t> class_counts;                    // examples averaged per class
    std::vector<std::vector<std::vector<double>>> attribute_soft;  // [n][category][a_K]
    std::vector<std::vector<std::size_t>> attribute_counts;

    void validate() const;  // throws DataError
};

SoftLabelBank build_soft_labels(const Dataset& dataset, const ModelParams& params,
                                const AttributeSchema& schema, double temperature);

// Cross-entropy between the bank entry for each row's label and the row's
// temperature-softened prediction. level: -1 = class, n >= 0 = attribute n.
MaskedLoss soft_label_loss(const Tensor& scores, const std::vector<std::optional<int>>& labels,
                           const SoftLabelBank& bank, double temperature, int level);

enum class Protocol { unsup, semisup };

// Per-step record; field names match the JSON-lines metrics log.
struct LossReport {
    double class_softmax = 0.0;                 // L_C
    std::vector<double> attribute_softmax;      // L_a[n]
    std::vector<double> consistency;            // L_con[n]
    double confusion_classifier = 0.0;          // L_conf_cls
    double confusion = 0.0;                     // L_conf_confusion
    double class_soft = 0.0;                    // L_csoft
    std::vector<double> attribute_soft;         // L_asoft[n]
    double total = 0.0;
    bool single_domain_batch = false;

    std::string to_json_line(std::size_t step) const;
};

struct TotalObjective {
    Tensor total;       // weighted sum; untracked zero when every term is off
    LossReport report;  // unweighted per-term values
};

// Softmax terms use every row with a visible label; soft-label terms use
// labeled target rows; consistency and confusion use all rows. Unsupervised
// protocol forces both soft-label weights to zero.
TotalObjective total_objective(const Batch& batch, const ModelParams& params,
                               const AttributeSchema& schema, const LossWeights& weights,
                               const SoftLabelBank* bank, Protocol protocol);

}  // namespace madapt
