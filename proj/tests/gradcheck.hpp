#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "madapt/tensor.hpp"

namespace gradcheck {

// Builds a scalar loss from leaves freshly registered on the given tape.
// Leaf order matches the values passed to check().
using LossBuilder =
    std::function<madapt::Tensor(madapt::Tape&, const std::vector<madapt::Tensor>&)>;

struct Report {
    double max_abs_diff = 0.0;
    double max_rel_diff = 0.0;  // |a - fd| / max(|a|, |fd|), 0 when both tiny
    bool ok = true;
};

// Central finite differences per element against reverse-mode gradients.
// Pass when |a - fd| <= abs_floor + rel_tol * max(|a|, |fd|).
inline Report check(const std::vector<madapt::Tensor>& leaf_values, const LossBuilder& build,
                    double rel_tol = 1e-4, double abs_floor = 1e-8, double h = 1e-5) {
    using madapt::Tape;
    using madapt::Tensor;
    Report rep;

    auto eval = [&](const std::vector<Tensor>& values) {
        Tape tape;
        std::vector<Tensor> leaves;
        leaves.reserve(values.size());
        for (const auto& v : values) leaves.push_back(tape.leaf(v));
        return build(tape, leaves).item();
    };

    Tape tape;
    std::vector<Tensor> leaves;
    leaves.reserve(leaf_values.size());
    for (const auto& v : leaf_values) leaves.push_back(tape.leaf(v));
    Tensor loss = build(tape, leaves);
    tape.backward(loss);

    for (std::size_t li = 0; li < leaf_values.size(); ++li) {
        const auto& analytic = tape.grad(leaves[li]);
        for (std::size_t i = 0; i < leaf_values[li].data.size(); ++i) {
            auto bumped = leaf_values;
            bumped[li].data[i] += h;
            const double up = eval(bumped);
            bumped[li].data[i] -= 2.0 * h;
            const double down = eval(bumped);
            const double fd = (up - down) / (2.0 * h);
            const double a = analytic[i];
            const double abs_diff = std::fabs(a - fd);
            const double mag = std::max(std::fabs(a), std::fabs(fd));
            rep.max_abs_diff = std::max(rep.max_abs_diff, abs_diff);
            if (mag > abs_floor) rep.max_rel_diff = std::max(rep.max_rel_diff, abs_diff / mag);
            if (abs_diff > abs_floor + rel_tol * mag) rep.ok = false;
        }
    }
    return rep;
}

}  // namespace gradcheck
