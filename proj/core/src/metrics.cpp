#include "madapt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "madapt/error.hpp"
#include "madapt/textio.hpp"

namespace madapt {

namespace {

Tensor dataset_features(const Dataset& dataset) {
    const std::size_t n = dataset.examples.size();
    const std::size_t d = dataset.dim();
    std::vector<double> flat;
    flat.reserve(n * d);
    for (const Example& ex : dataset.examples)
        flat.insert(flat.end(), ex.features.begin(), ex.features.end());
    return Tensor({n, d}, std::move(flat));
}

std::size_t argmax_row(const Tensor& scores, std::size_t row) {
    const std::size_t c = scores.cols();
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
        if (scores.data[row * c + j] > scores.data[row * c + best]) best = j;
    return best;
}

}  // namespace

EvalReport evaluate(const ModelParams& params, const Dataset& dataset,
                    const std::vector<std::size_t>& class_subset) {
    label_audit::ScopedPhase phase(label_audit::Phase::setup);
    if (dataset.examples.empty()) throw DataError("evaluation dataset is empty");
    const AttributeSchema& schema = dataset.schema;
    const std::size_t k = schema.num_classes;
    for (std::size_t c : class_subset)
        if (c >= k) throw ConfigError("evaluation subset names class " + std::to_string(c) +
                                      " outside the schema");

    std::vector<bool> in_subset(k, class_subset.empty());
    for (std::size_t c : class_subset) in_subset[c] = true;

    Tensor scores = forward_class_scores(params, forward_features(params, dataset_features(dataset)));

    EvalReport report;
    report.per_class_accuracy.assign(k, 0.0);
    report.per_class_counts.assign(k, 0);
    report.confusion.assign(k, std::vector<std::size_t>(k, 0));
    report.attribute_accuracy.assign(schema.num_attributes(), 0.0);

    std::vector<std::size_t> class_hits(k, 0);
    std::vector<std::size_t> attr_hits(schema.num_attributes(), 0);
    std::size_t total = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        const Example& ex = dataset.examples[i];
        if (!ex.has_truth())
            throw DataError("example " + std::to_string(i) + " has no ground-truth label");
        const auto truth = static_cast<std::size_t>(ex.truth_class_label());
        if (!in_subset[truth]) continue;
        const std::size_t pred = argmax_row(scores, i);
        total += 1;
        report.per_class_counts[truth] += 1;
        report.confusion[truth][pred] += 1;
        if (pred == truth) {
            hits += 1;
            class_hits[truth] += 1;
        }
        for (std::size_t n = 0; n < schema.num_attributes(); ++n) {
            const auto& map = schema.attributes[n].class_to_category;
            if (map[pred] == map[truth]) attr_hits[n] += 1;
        }
    }
    if (total == 0) throw ConfigError("evaluation subset contains no examples");

    report.num_examples = total;
    report.overall_accuracy = static_cast<double>(hits) / static_cast<double>(total);
    for (std::size_t c = 0; c < k; ++c) {
        if (report.per_class_counts[c] > 0)
            report.per_class_accuracy[c] = static_cast<double>(class_hits[c]) /
                                           static_cast<double>(report.per_class_counts[c]);
        if (in_subset[c] && report.per_class_counts[c] > 0) report.evaluated_classes.push_back(c);
    }
    for (std::size_t n = 0; n < schema.num_attributes(); ++n)
        report.attribute_accuracy[n] = static_cast<double>(attr_hits[n]) / static_cast<double>(total);
    return report;
}

GainReport per_class_gain(const EvalReport& baseline, const EvalReport& adapted) {
    if (baseline.evaluated_classes != adapted.evaluated_classes)
        throw ConfigError("gain comparison needs matching evaluated class sets");
    GainReport gain;
    gain.classes = baseline.evaluated_classes;
    std::size_t improved = 0;
    std::size_t unchanged = 0;
    std::size_t worse = 0;
    for (std::size_t c : gain.classes) {
        const double a = baseline.per_class_accuracy[c];
        const double b = adapted.per_class_accuracy[c];
        const double d = b - a;
        gain.baseline.push_back(a);
        gain.adapted.push_back(b);
        gain.delta.push_back(d);
        if (std::abs(d) < kGainEpsilon)
            unchanged += 1;
        else if (d > 0)
            improved += 1;
        else
            worse += 1;
    }
    if (gain.classes.empty()) throw ConfigError("gain comparison covers no classes");
    const auto n = static_cast<double>(gain.classes.size());
    gain.improved_fraction = static_cast<double>(improved) / n;
    gain.unchanged_fraction = static_cast<double>(unchanged) / n;
    gain.worse_fraction = static_cast<double>(worse) / n;
    return gain;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ShapeError("correlation inputs differ in length");
    if (x.size() < 2) throw NumericError("correlation needs at least two points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw NumericError("correlation undefined: an input has zero variance");
    return sxy / std::sqrt(sxx * syy);
}

double gain_label_correlation(const GainReport& gain,
                              const std::vector<std::size_t>& labels_per_class) {
    std::vector<double> counts;
    counts.reserve(gain.classes.size());
    for (std::size_t c : gain.classes) {
        if (c >= labels_per_class.size())
            throw ConfigError("label counts do not cover class " + std::to_string(c));
        counts.push_back(static_cast<double>(labels_per_class[c]));
    }
    return pearson(gain.delta, counts);
}

std::vector<std::vector<std::size_t>> nearest_neighbors(const ModelParams& params,
                                                        const Dataset& queries,
                                                        const Dataset& gallery, std::size_t k) {
    if (k == 0) throw ConfigError("nearest_neighbors needs k >= 1");
    if (gallery.examples.empty()) throw DataError("nearest_neighbors gallery is empty");
    if (queries.dim() != gallery.dim())
        throw ShapeError("query and gallery dimensions differ");
    const std::size_t take = std::min(k, gallery.examples.size());

    Tensor qf = forward_features(params, dataset_features(queries));
    Tensor gf = forward_features(params, dataset_features(gallery));
    const std::size_t f = qf.cols();

    std::vector<std::vector<std::size_t>> out(queries.examples.size());
    std::vector<std::pair<double, std::size_t>> dist(gallery.examples.size());
    for (std::size_t i = 0; i < queries.examples.size(); ++i) {
        for (std::size_t j = 0; j < gallery.examples.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t t = 0; t < f; ++t) {
                const double d = qf.data[i * f + t] - gf.data[j * f + t];
                d2 += d * d;
            }
            dist[j] = {d2, j};
        }
        std::sort(dist.begin(), dist.end());
        out[i].reserve(take);
        for (std::size_t j = 0; j < take; ++j) out[i].push_back(dist[j].second);
    }
    return out;
}

std::string eval_report_to_json(const EvalReport& report, const AttributeSchema& schema) {
    nlohmann::ordered_json j;
    j["overall_accuracy"] = report.overall_accuracy;
    j["num_examples"] = report.num_examples;
    j["evaluated_classes"] = report.evaluated_classes;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
    for (std::size_t c : report.evaluated_classes) {
        nlohmann::ordered_json row;
        row["class"] = c;
        row["count"] = report.per_class_counts[c];
        row["accuracy"] = report.per_class_accuracy[c];
        per_class.push_back(row);
    }
    j["per_class"] = per_class;
    nlohmann::ordered_json attrs = nlohmann::ordered_json::array();
    for (std::size_t n = 0; n < schema.num_attributes(); ++n) {
        nlohmann::ordered_json row;
        row["attribute"] = schema.attributes[n].name;
        row["accuracy"] = report.attribute_accuracy[n];
        attrs.push_back(row);
    }
    j["attributes"] = attrs;
    return j.dump();
}

void write_per_class_csv(std::ostream& out, const EvalReport& report, const GainReport* gain) {
    out << (gain ? "class_id,n_examples,accuracy,delta\n" : "class_id,n_examples,accuracy\n");
    for (std::size_t i = 0; i < report.evaluated_classes.size(); ++i) {
        const std::size_t c = report.evaluated_classes[i];
        out << c << ',' << report.per_class_counts[c] << ','
            << format_g17(report.per_class_accuracy[c]);
        if (gain) {
            if (gain->classes != report.evaluated_classes)
                throw ConfigError("gain report does not match the evaluated classes");
            out << ',' << format_g17(gain->delta[i]);
        }
        out << '\n';
    }
}

}  // namespace madapt
