#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "madapt/data.hpp"
#include "madapt/model.hpp"

namespace madapt {

// Deltas smaller than this count as "unchanged" in gain summaries.
inline constexpr double kGainEpsilon = 1e-12;

struct EvalReport {
    double overall_accuracy = 0.0;
    std::size_t num_examples = 0;
    std::vector<std::size_t> evaluated_classes;      // ascending ids in the subset
    std::vector<double> per_class_accuracy;          // K entries; 0 where no rows
    std::vector<std::size_t> per_class_counts;       // K entries
    std::vector<double> attribute_accuracy;          // one per attribute head
    std::vector<std::vector<std::size_t>> confusion; // [K x K] true x predicted
};

// Full K-way argmax prediction (ties -> lowest class id); accuracy restricted
// to examples whose true class is in `class_subset` (empty = every class).
// Attribute accuracy maps the class argmax through the schema. Throws
// ConfigError when the subset matches no examples, DataError when an example
// lacks ground truth.
EvalReport evaluate(const ModelParams& params, const Dataset& dataset,
                    const std::vector<std::size_t>& class_subset = {});

struct GainReport {
    std::vector<std::size_t> classes;  // evaluated ids, ascending
    std::vector<double> baseline;
    std::vector<double> adapted;
    std::vector<double> delta;  // adapted - baseline
    double improved_fraction = 0.0;
    double unchanged_fraction = 0.0;
    double worse_fraction = 0.0;
};

// Both reports must cover the same evaluated classes.
GainReport per_class_gain(const EvalReport& baseline, const EvalReport& adapted);

// Pearson correlation; throws NumericError when either side has zero
// variance (the correlation is undefined).
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Correlation between per-class gain and a per-class label count (indexed by
// class id over all K classes).
double gain_label_correlation(const GainReport& gain,
                              const std::vector<std::size_t>& labels_per_class);

// Indices of the k closest gallery rows per query under L2 distance in
// feature space, ties broken by ascending gallery index.
std::vector<std::vector<std::size_t>> nearest_neighbors(const ModelParams& params,
                                                        const Dataset& queries,
                                                        const Dataset& gallery, std::size_t k);

// Serialized JSON object with overall, per-class, and per-attribute numbers.
std::string eval_report_to_json(const EvalReport& report, const AttributeSchema& schema);

// CSV: class_id,n_examples,accuracy[,delta]. `gain` may be null.
void write_per_class_csv(std::ostream& out, const EvalReport& report, const GainReport* gain);

}  // namespace madapt
