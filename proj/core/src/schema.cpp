#include "madapt/schema.hpp"

#include <fstream>

#include "madapt/textio.hpp"

namespace madapt {

void AttributeSchema::validate() const {
    if (num_classes < 2) {
        throw DataError("schema: need at least 2 classes, got " + std::to_string(num_classes));
    }
    if (attributes.empty()) {
        throw DataError("schema: need at least one attribute");
    }
    for (std::size_t n = 0; n < attributes.size(); ++n) {
        const Attribute& a = attributes[n];
        const std::string who = "schema: attribute '" + a.name + "'";
        if (a.name.empty()) throw DataError("schema: attribute " + std::to_string(n) + " has an empty name");
        if (a.categories < 2) throw DataError(who + ": need at least 2 categories");
        if (a.categories > num_classes) {
            throw DataError(who + ": more categories (" + std::to_string(a.categories) +
                            ") than classes (" + std::to_string(num_classes) + ")");
        }
        if (a.class_to_category.size() != num_classes) {
            throw DataError(who + ": class map covers " + std::to_string(a.class_to_category.size()) +
                            " classes, expected " + std::to_string(num_classes));
        }
        std::vector<std::size_t> sizes(a.categories, 0);
        for (std::size_t c = 0; c < num_classes; ++c) {
            if (a.class_to_category[c] >= a.categories) {
                throw DataError(who + ": class " + std::to_string(c) + " maps to category " +
                                std::to_string(a.class_to_category[c]) + " out of range");
            }
            ++sizes[a.class_to_category[c]];
        }
        for (std::size_t k = 0; k < a.categories; ++k) {
            if (sizes[k] == 0) {
                throw DataError(who + ": empty attribute category " + std::to_string(k));
            }
        }
    }
}

std::vector<std::vector<std::size_t>> AttributeSchema::category_members(std::size_t n) const {
    if (n >= attributes.size()) {
        throw DataError("schema: attribute index " + std::to_string(n) + " out of range");
    }
    std::vector<std::vector<std::size_t>> members(attributes[n].categories);
    for (std::size_t c = 0; c < num_classes; ++c) {
        members[attributes[n].class_to_category[c]].push_back(c);
    }
    return members;
}

Tensor AttributeSchema::averaging_matrix(std::size_t n) const {
    auto members = category_members(n);
    Tensor m = Tensor::zeros({num_classes, attributes[n].categories});
    for (std::size_t k = 0; k < members.size(); ++k) {
        const double w = 1.0 / static_cast<double>(members[k].size());
        for (std::size_t c : members[k]) {
            m.data[c * attributes[n].categories + k] = w;
        }
    }
    return m;
}

AttributeSchema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file: " + path);

    AttributeSchema schema;
    std::string line;
    std::size_t lineno = 0;
    auto where = [&]() { return path + " line " + std::to_string(lineno); };

    auto next_line = [&](std::vector<std::string>& toks) {
        while (std::getline(in, line)) {
            ++lineno;
            toks = split_ws(trim(line));
            if (!toks.empty()) return true;
        }
        return false;
    };

    std::vector<std::string> toks;
    if (!next_line(toks) || toks.size() != 2 || toks[0] != "classes") {
        throw DataError(where() + ": expected 'classes <K>'");
    }
    long long k = parse_int(toks[1], where());
    if (k < 0) throw DataError(where() + ": negative class count");
    schema.num_classes = static_cast<std::size_t>(k);

    while (next_line(toks)) {
        if (toks[0] != "attribute" || toks.size() != 3) {
            throw DataError(where() + ": expected 'attribute <name> <categories>'");
        }
        Attribute attr;
        attr.name = toks[1];
        long long cats = parse_int(toks[2], where());
        if (cats < 0) throw DataError(where() + ": negative category count");
        attr.categories = static_cast<std::size_t>(cats);
        attr.class_to_category.assign(schema.num_classes, 0);
        std::vector<bool> seen(schema.num_classes, false);
        for (std::size_t i = 0; i < schema.num_classes; ++i) {
            if (!next_line(toks) || toks.size() != 4 || toks[0] != "class" || toks[2] != "category") {
                throw DataError(where() + ": expected 'class <id> category <id>'");
            }
            long long cid = parse_int(toks[1], where());
            long long cat = parse_int(toks[3], where());
            if (cid < 0 || cid >= static_cast<long long>(schema.num_classes)) {
                throw DataError(where() + ": class id " + std::to_string(cid) + " out of range");
            }
            if (seen[static_cast<std::size_t>(cid)]) {
                throw DataError(where() + ": duplicate class id " + std::to_string(cid));
            }
            if (cat < 0) throw DataError(where() + ": negative category id");
            seen[static_cast<std::size_t>(cid)] = true;
            attr.class_to_category[static_cast<std::size_t>(cid)] = static_cast<std::size_t>(cat);
        }
        schema.attributes.push_back(std::move(attr));
    }

    schema.validate();
    return schema;
}

void save_schema(const AttributeSchema& schema, const std::string& path) {
    schema.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write schema file: " + path);
    out << "classes " << schema.num_classes << "\n";
    for (const Attribute& a : schema.attributes) {
        out << "attribute " << a.name << " " << a.categories << "\n";
        for (std::size_t c = 0; c < schema.num_classes; ++c) {
            out << "class " << c << " category " << a.class_to_category[c] << "\n";
        }
    }
    if (!out) throw DataError("failed writing schema file: " + path);
}

}  // namespace madapt
