#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "madapt/error.hpp"

namespace madapt {

class Tape;

// Dense row-major tensor of doubles. Rank 0 is a scalar (one element).
// A tensor participates in autodiff when it carries a tape and a node id;
// plain value tensors have tape == nullptr.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    Tape* tape = nullptr;
    std::int64_t node = -1;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shp, std::vector<double> values);
    static Tensor scalar(double v);
    static Tensor zeros(std::vector<std::size_t> shp);
    static Tensor full(std::vector<std::size_t> shp, double v);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;
    double item() const;
    bool tracked() const { return tape != nullptr; }
};

// Reverse-mode tape. Forward ops append closures; backward() replays them in
// strict reverse insertion order, accumulating gradients in plain element
// order so results are bit-reproducible run to run. A closure receives the
// tape and the node id of the op's own output.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::int64_t out_node)>;

    // Registers a differentiable leaf (parameter or input) on this tape.
    Tensor leaf(Tensor value);

    // Records an op output plus the closure that propagates its gradient.
    Tensor record(Tensor value, BackwardFn backward);

    // Seeds d(loss)/d(loss) = 1 and replays all closures in reverse. The
    // loss must be a scalar recorded on this tape.
    void backward(const Tensor& loss);

    // Gradient from the last backward() with respect to `t` (same layout).
    const std::vector<double>& grad(const Tensor& t) const;

    std::vector<double>& grad_slot(std::int64_t node) {
        return grads_[static_cast<std::size_t>(node)];
    }

    std::size_t num_nodes() const { return sizes_.size(); }

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::vector<double>> grads_;
    std::vector<BackwardFn> ops_;
    std::vector<std::int64_t> op_nodes_;
};

// --- ops (all validate shapes; all check output finiteness) ---

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor log_elem(const Tensor& a);
Tensor exp_elem(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor clamp_min(const Tensor& a, double lo);  // grad passes iff x >= lo
Tensor softmax_rows(const Tensor& a, double temperature = 1.0);
Tensor mean_all(const Tensor& a);
Tensor sum_all(const Tensor& a);
Tensor mean_rows(const Tensor& a);                        // [N,C] -> [C]
Tensor add_rowwise(const Tensor& a, const Tensor& bias);  // [N,C] + [C]
Tensor take_rows(const Tensor& a, const std::vector<std::size_t>& idx);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor detach(const Tensor& a);  // value copy severed from the tape

// mean_n <a[n,:], w[n,:]> with w held constant (labels, soft targets).
Tensor mean_row_dot(const Tensor& a, const Tensor& w_const);

// Constant [N, classes] one-hot matrix; not an autodiff op.
Tensor one_hot_rows(const std::vector<int>& labels, std::size_t classes);

std::string shape_str(const Tensor& t);
void check_finite(const Tensor& t, const char* where);

}  // namespace madapt
