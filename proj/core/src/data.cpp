#include "madapt/data.hpp"

#include <cmath>
#include <fstream>

#include "madapt/textio.hpp"

namespace madapt {

namespace label_audit {

namespace {
Hook g_hook;
Phase g_phase = Phase::setup;
}  // namespace

void set_hook(Hook h) { g_hook = std::move(h); }
void clear_hook() { g_hook = nullptr; }
void set_phase(Phase p) { g_phase = p; }
Phase phase() { return g_phase; }

void notify_read(const Example& ex, int class_label, bool attribute_read) {
    if (g_hook) g_hook(ReadEvent{&ex, class_label, attribute_read, g_phase});
}

}  // namespace label_audit

void Example::set_truth(int class_label, const AttributeSchema& schema) {
    if (class_label < 0 || static_cast<std::size_t>(class_label) >= schema.num_classes) {
        throw DataError("class label " + std::to_string(class_label) + " out of range [0, " +
                        std::to_string(schema.num_classes) + ")");
    }
    class_label_ = class_label;
    attribute_labels_.clear();
    attribute_labels_.reserve(schema.attributes.size());
    for (const Attribute& a : schema.attributes) {
        attribute_labels_.push_back(
            static_cast<int>(a.class_to_category[static_cast<std::size_t>(class_label)]));
    }
    labeled_ = true;
}

void Example::show_labels() {
    if (!class_label_.has_value()) {
        throw DataError("cannot mark an example labeled: it has no ground truth");
    }
    labeled_ = true;
}

std::optional<int> Example::visible_class_label() const {
    if (!labeled_) return std::nullopt;
    return class_label_;
}

const std::vector<int>* Example::visible_attribute_labels() const {
    if (!labeled_ || !class_label_.has_value()) return nullptr;
    return &attribute_labels_;
}

int Example::truth_class_label() const {
    if (!class_label_.has_value()) {
        throw DataError("example has no ground-truth class label");
    }
    label_audit::notify_read(*this, *class_label_, false);
    return *class_label_;
}

const std::vector<int>& Example::truth_attribute_labels() const {
    if (!class_label_.has_value()) {
        throw DataError("example has no ground-truth attribute labels");
    }
    label_audit::notify_read(*this, *class_label_, true);
    return attribute_labels_;
}

std::size_t Dataset::count(Domain d) const {
    std::size_t n = 0;
    for (const Example& e : examples) n += e.domain == d;
    return n;
}

std::size_t Dataset::count_labeled(Domain d) const {
    std::size_t n = 0;
    for (const Example& e : examples) n += e.domain == d && e.labeled();
    return n;
}

Dataset load_dataset(const std::string& path, const AttributeSchema& schema) {
    schema.validate();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);

    Dataset ds;
    ds.schema = schema;
    std::string line;
    std::size_t lineno = 0;
    auto where = [&]() { return path + " line " + std::to_string(lineno); };

    if (!std::getline(in, line)) throw DataError(path + ": empty dataset file");
    ++lineno;
    auto head = split_ws(trim(line));
    if (head.size() != 4 || head[0] != "dims" || head[2] != "examples") {
        throw DataError(where() + ": expected 'dims <D> examples <N>'");
    }
    const long long dims = parse_int(head[1], where());
    const long long count = parse_int(head[3], where());
    if (dims < 1) throw DataError(where() + ": dimension must be >= 1");
    if (count < 0) throw DataError(where() + ": negative example count");
    ds.examples.reserve(static_cast<std::size_t>(count));

    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(trim(line));
        if (toks.empty()) continue;
        if (toks.size() != 4 + static_cast<std::size_t>(dims)) {
            throw DataError(where() + ": expected 4 fields + " + std::to_string(dims) +
                            " features, got " + std::to_string(toks.size()) + " tokens");
        }
        Example ex;
        if (toks[0] == "s") {
            ex.domain = Domain::source;
        } else if (toks[0] == "t") {
            ex.domain = Domain::target;
        } else {
            throw DataError(where() + ": domain must be 's' or 't', got '" + toks[0] + "'");
        }
        bool labeled;
        if (toks[1] == "0") {
            labeled = false;
        } else if (toks[1] == "1") {
            labeled = true;
        } else {
            throw DataError(where() + ": labeled flag must be 0 or 1, got '" + toks[1] + "'");
        }

        ex.features.resize(static_cast<std::size_t>(dims));
        for (std::size_t i = 0; i < ex.features.size(); ++i) {
            ex.features[i] = parse_double(toks[4 + i], where());
            if (!std::isfinite(ex.features[i])) {
                throw DataError(where() + ": non-finite feature value '" + toks[4 + i] + "'");
            }
        }

        if (toks[2] == "-") {
            if (labeled) throw DataError(where() + ": labeled example lacks a class label");
            if (toks[3] != "-") {
                throw DataError(where() + ": attribute labels present without a class label");
            }
        } else {
            const long long cid = parse_int(toks[2], where());
            if (cid < 0 || cid >= static_cast<long long>(schema.num_classes)) {
                throw DataError(where() + ": class label " + std::to_string(cid) +
                                " out of range [0, " + std::to_string(schema.num_classes) + ")");
            }
            ex.set_truth(static_cast<int>(cid), schema);
            if (toks[3] == "-") {
                throw DataError(where() + ": class label present but attribute labels missing");
            }
            auto attr_toks = split_on(toks[3], ',');
            if (attr_toks.size() != schema.attributes.size()) {
                throw DataError(where() + ": expected " + std::to_string(schema.attributes.size()) +
                                " attribute labels, got " + std::to_string(attr_toks.size()));
            }
            const auto& expected = ex.truth_attribute_labels();
            for (std::size_t n = 0; n < attr_toks.size(); ++n) {
                const long long got = parse_int(attr_toks[n], where());
                if (got != expected[n]) {
                    throw DataError(where() + ": attribute '" + schema.attributes[n].name +
                                    "' label " + std::to_string(got) +
                                    " inconsistent with schema (class " + std::to_string(cid) +
                                    " maps to " + std::to_string(expected[n]) + ")");
                }
            }
            if (!labeled) ex.hide_labels();
        }
        ds.examples.push_back(std::move(ex));
    }

    if (ds.examples.size() != static_cast<std::size_t>(count)) {
        throw DataError(path + ": header declares " + std::to_string(count) + " examples, found " +
                        std::to_string(ds.examples.size()));
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    const std::size_t dims = ds.dim();
    if (dims == 0) throw DataError("refusing to save a dataset with no examples");
    out << "dims " << dims << " examples " << ds.examples.size() << "\n";
    for (const Example& ex : ds.examples) {
        if (ex.features.size() != dims) {
            throw DataError("inconsistent feature dimension within dataset");
        }
        out << (ex.domain == Domain::source ? "s" : "t") << " " << (ex.labeled() ? "1" : "0") << " ";
        if (ex.has_truth()) {
            out << ex.truth_class_label() << " ";
            const auto& attrs = ex.truth_attribute_labels();
            for (std::size_t n = 0; n < attrs.size(); ++n) {
                out << (n ? "," : "") << attrs[n];
            }
        } else {
            out << "- -";
        }
        for (double v : ex.features) out << " " << format_g17(v);
        out << "\n";
    }
    if (!out) throw DataError("failed writing dataset file: " + path);
}

}  // namespace madapt
