#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "madapt/tensor.hpp"

namespace madapt {

struct Attribute {
    std::string name;
    std::size_t categories = 0;                   // a_K
    std::vector<std::size_t> class_to_category;   // length K

    bool operator==(const Attribute&) const = default;
};

// Class count plus the class -> category map of every attribute.
struct AttributeSchema {
    std::size_t num_classes = 0;  // K
    std::vector<Attribute> attributes;

    std::size_t num_attributes() const { return attributes.size(); }

    // Throws DataError on any violated invariant.
    void validate() const;

    // Classes belonging to each category of attribute n.
    std::vector<std::vector<std::size_t>> category_members(std::size_t n) const;

    // Constant [K x a_K] matrix M with M[c][k] = 1/|category k| when class c
    // belongs to category k, so scores * M averages class scores per category.
    Tensor averaging_matrix(std::size_t n) const;

    bool operator==(const AttributeSchema&) const = default;
};

AttributeSchema load_schema(const std::string& path);
void save_schema(const AttributeSchema& schema, const std::string& path);

}  // namespace madapt
