#include "madapt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace madapt {

namespace {

std::size_t numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

Tape* joint_tape(const Tensor& a, const Tensor& b) {
    if (a.tape && b.tape && a.tape != b.tape) {
        throw ShapeError("operands were recorded on different tapes");
    }
    return a.tape ? a.tape : b.tape;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape != b.shape) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                         shape_str(b));
    }
}

void require_matrix(const Tensor& a, const char* op) {
    if (a.rank() != 2) {
        throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_str(a));
    }
}

// Finishes an op: finiteness check, then tape recording when tracked.
Tensor finish(Tensor out, Tape* tape, const char* where, Tape::BackwardFn backward) {
    check_finite(out, where);
    if (!tape) return out;
    out.tape = tape;
    return tape->record(std::move(out), std::move(backward));
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shp, std::vector<double> values)
    : shape(std::move(shp)), data(std::move(values)) {
    if (numel(shape) != data.size()) {
        throw ShapeError("tensor data size " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(*this));
    }
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::zeros(std::vector<std::size_t> shp) {
    std::size_t n = numel(shp);
    return Tensor(std::move(shp), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shp, double v) {
    std::size_t n = numel(shp);
    return Tensor(std::move(shp), std::vector<double>(n, v));
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw ShapeError("rows(): not a matrix: " + shape_str(*this));
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw ShapeError("cols(): not a matrix: " + shape_str(*this));
    return shape[1];
}

double Tensor::item() const {
    if (data.size() != 1) {
        throw ShapeError("item(): tensor has " + std::to_string(data.size()) + " elements");
    }
    return data[0];
}

std::string shape_str(const Tensor& t) {
    std::string s = "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(t.shape[i]);
    }
    return s + "]";
}

void check_finite(const Tensor& t, const char* where) {
    for (double v : t.data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(where) + ": non-finite value in output");
        }
    }
}

Tensor Tape::leaf(Tensor value) {
    value.tape = this;
    value.node = static_cast<std::int64_t>(sizes_.size());
    sizes_.push_back(value.data.size());
    return value;
}

Tensor Tape::record(Tensor value, BackwardFn backward) {
    value.node = static_cast<std::int64_t>(sizes_.size());
    sizes_.push_back(value.data.size());
    ops_.push_back(std::move(backward));
    op_nodes_.push_back(value.node);
    return value;
}

void Tape::backward(const Tensor& loss) {
    if (loss.tape != this || loss.node < 0) {
        throw ShapeError("backward(): loss is not recorded on this tape");
    }
    if (loss.data.size() != 1) {
        throw ShapeError("backward(): loss must be a scalar, got " + shape_str(loss));
    }
    grads_.assign(sizes_.size(), {});
    for (std::size_t i = 0; i < sizes_.size(); ++i) grads_[i].assign(sizes_[i], 0.0);
    grads_[static_cast<std::size_t>(loss.node)][0] = 1.0;
    for (std::size_t i = ops_.size(); i-- > 0;) {
        ops_[i](*this, op_nodes_[i]);
    }
}

const std::vector<double>& Tape::grad(const Tensor& t) const {
    if (t.tape != this || t.node < 0) {
        throw ShapeError("grad(): tensor is not recorded on this tape");
    }
    if (grads_.empty()) throw ShapeError("grad(): backward() has not run");
    return grads_.at(static_cast<std::size_t>(t.node));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ: " + shape_str(a) + " x " + shape_str(b));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a.data[i * k + p];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                out.data[i * n + j] += av * b.data[p * n + j];
            }
        }
    }
    Tape* tape = joint_tape(a, b);
    const auto an = a.node, bn = b.node;
    auto ad = a.data;
    auto bd = b.data;
    return finish(std::move(out), tape, "matmul",
                  [an, bn, ad = std::move(ad), bd = std::move(bd), m, k, n](Tape& t, std::int64_t out_node) {
                      const auto& g = t.grad_slot(out_node);
                      if (an >= 0) {
                          auto& ga = t.grad_slot(an);
                          for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t j = 0; j < n; ++j) {
                                  const double gv = g[i * n + j];
                                  if (gv == 0.0) continue;
                                  for (std::size_t p = 0; p < k; ++p) {
                                      ga[i * k + p] += gv * bd[p * n + j];
                                  }
                              }
                      }
                      if (bn >= 0) {
                          auto& gb = t.grad_slot(bn);
                          for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t p = 0; p < k; ++p) {
                                  const double av = ad[i * k + p];
                                  if (av == 0.0) continue;
                                  for (std::size_t j = 0; j < n; ++j) {
                                      gb[p * n + j] += av * g[i * n + j];
                                  }
                              }
                      }
                  });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape, a.data);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    const auto an = a.node, bn = b.node;
    return finish(std::move(out), joint_tape(a, b), "add",
                  [an, bn](Tape& t, std::int64_t out_node) {
                      const auto& g = t.grad_slot(out_node);
                      if (an >= 0) {
                          auto& ga = t.grad_slot(an);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                      }
                      if (bn >= 0) {
                          auto& gb = t.grad_slot(bn);
                          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                      }
                  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out(a.shape, a.data);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    const auto an = a.node, bn = b.node;
    return finish(std::move(out), joint_tape(a, b), "sub",
                  [an, bn](Tape& t, std::int64_t out_node) {
                      const auto& g = t.grad_slot(out_node);
                      if (an >= 0) {
                          auto& ga = t.grad_slot(an);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                      }
                      if (bn >= 0) {
                          auto& gb = t.grad_slot(bn);
                          for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                      }
                  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out(a.shape, a.data);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    const auto an = a.node, bn = b.node;
    auto ad = a.data;
    auto bd = b.data;
    return finish(std::move(out), joint_tape(a, b), "mul",
                  [an, bn, ad = std::move(ad), bd = std::move(bd)](Tape& t, std::int64_t out_node) {
                      const auto& g = t.grad_slot(out_node);
                      if (an >= 0) {
                          auto& ga = t.grad_slot(an);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bd[i];
                      }
                      if (bn >= 0) {
                          auto& gb = t.grad_slot(bn);
                          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ad[i];
                      }
                  });
}

Tensor scale(const Tensor& a, double s) {
    Tensor out(a.shape, a.data);
    for (double& v : out.data) v *= s;
    const auto an = a.node;
    return finish(std::move(out), a.tape, "scale", [an, s](Tape& t, std::int64_t out_node) {
        if (an < 0) return;
        const auto& g = t.grad_slot(out_node);
        auto& ga = t.grad_slot(an);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s;
    });
}

Tensor add_scalar(const Tensor& a, double s) {
    Tensor out(a.shape, a.data);
    for (double& v : out.data) v += s;
    const auto an = a.node;
    return finish(std::move(out), a.tape, "add_scalar", [an](Tape& t, std::int64_t out_node) {
        if (an < 0) return;
        const auto& g = t.grad_slot(out_node);
        auto& ga = t.grad_slot(an);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

Tensor log_elem(const Tensor& a) {
    Tensor out(a.shape, a.data);
    for (double& v : out.data) v = std::log(v);
    const auto an = a.node;
    auto ad = a.data;
    return finish(std::move(out), a.tape, "log",
                  [an, ad = std::move(ad)](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const auto& g = t.grad_slot(out_node);
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / ad[i];
                  });
}

Tensor exp_elem(const Tensor& a) {
    Tensor out(a.shape, a.data);
    for (double& v : out.data) v = std::exp(v);
    const auto an = a.node;
    auto od = out.data;
    return finish(std::move(out), a.tape, "exp",
                  [an, od = std::move(od)](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const auto& g = t.grad_slot(out_node);
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * od[i];
                  });
}

Tensor relu(const Tensor& a) {
    Tensor out(a.shape, a.data);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    const auto an = a.node;
    auto ad = a.data;
    return finish(std::move(out), a.tape, "relu",
                  [an, ad = std::move(ad)](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const auto& g = t.grad_slot(out_node);
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < g.size(); ++i) {
                          if (ad[i] > 0.0) ga[i] += g[i];
                      }
                  });
}

Tensor clamp_min(const Tensor& a, double lo) {
    Tensor out(a.shape, a.data);
    for (double& v : out.data) v = v < lo ? lo : v;
    const auto an = a.node;
    auto ad = a.data;
    return finish(std::move(out), a.tape, "clamp_min",
                  [an, lo, ad = std::move(ad)](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const auto& g = t.grad_slot(out_node);
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < g.size(); ++i) {
                          if (ad[i] >= lo) ga[i] += g[i];
                      }
                  });
}

Tensor softmax_rows(const Tensor& a, double temperature) {
    require_matrix(a, "softmax_rows");
    if (!(temperature > 0.0)) {
        throw ShapeError("softmax_rows: temperature must be positive");
    }
    const std::size_t n = a.rows(), c = a.cols();
    Tensor out = Tensor::zeros({n, c});
    for (std::size_t i = 0; i < n; ++i) {
        double mx = a.data[i * c];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, a.data[i * c + j]);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double e = std::exp((a.data[i * c + j] - mx) / temperature);
            out.data[i * c + j] = e;
            z += e;
        }
        for (std::size_t j = 0; j < c; ++j) out.data[i * c + j] /= z;
    }
    const auto an = a.node;
    auto od = out.data;
    return finish(std::move(out), a.tape, "softmax_rows",
                  [an, temperature, n, c, od = std::move(od)](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const auto& g = t.grad_slot(out_node);
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < n; ++i) {
                          double dot = 0.0;
                          for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * od[i * c + j];
                          for (std::size_t j = 0; j < c; ++j) {
                              ga[i * c + j] +=
                                  od[i * c + j] * (g[i * c + j] - dot) / temperature;
                          }
                      }
                  });
}

Tensor mean_all(const Tensor& a) {
    if (a.data.empty()) throw ShapeError("mean_all: empty tensor");
    double s = 0.0;
    for (double v : a.data) s += v;
    Tensor out = Tensor::scalar(s / static_cast<double>(a.data.size()));
    const auto an = a.node;
    const double inv = 1.0 / static_cast<double>(a.data.size());
    const std::size_t sz = a.data.size();
    return finish(std::move(out), a.tape, "mean_all",
                  [an, inv, sz](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const double g = t.grad_slot(out_node)[0];
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < sz; ++i) ga[i] += g * inv;
                  });
}

Tensor sum_all(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data) s += v;
    Tensor out = Tensor::scalar(s);
    const auto an = a.node;
    const std::size_t sz = a.data.size();
    return finish(std::move(out), a.tape, "sum_all", [an, sz](Tape& t, std::int64_t out_node) {
        if (an < 0) return;
        const double g = t.grad_slot(out_node)[0];
        auto& ga = t.grad_slot(an);
        for (std::size_t i = 0; i < sz; ++i) ga[i] += g;
    });
}

Tensor mean_rows(const Tensor& a) {
    require_matrix(a, "mean_rows");
    const std::size_t n = a.rows(), c = a.cols();
    if (n == 0) throw ShapeError("mean_rows: zero rows");
    Tensor out = Tensor::zeros({c});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) out.data[j] += a.data[i * c + j];
    for (double& v : out.data) v /= static_cast<double>(n);
    const auto an = a.node;
    const double inv = 1.0 / static_cast<double>(n);
    return finish(std::move(out), a.tape, "mean_rows",
                  [an, n, c, inv](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const auto& g = t.grad_slot(out_node);
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < n; ++i)
                          for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j] * inv;
                  });
}

Tensor add_rowwise(const Tensor& a, const Tensor& bias) {
    require_matrix(a, "add_rowwise");
    if (bias.rank() != 1 || bias.shape[0] != a.cols()) {
        throw ShapeError("add_rowwise: bias " + shape_str(bias) + " does not match " +
                         shape_str(a));
    }
    const std::size_t n = a.rows(), c = a.cols();
    Tensor out(a.shape, a.data);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) out.data[i * c + j] += bias.data[j];
    const auto an = a.node, bn = bias.node;
    return finish(std::move(out), joint_tape(a, bias), "add_rowwise",
                  [an, bn, n, c](Tape& t, std::int64_t out_node) {
                      const auto& g = t.grad_slot(out_node);
                      if (an >= 0) {
                          auto& ga = t.grad_slot(an);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                      }
                      if (bn >= 0) {
                          auto& gb = t.grad_slot(bn);
                          for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
                      }
                  });
}

Tensor take_rows(const Tensor& a, const std::vector<std::size_t>& idx) {
    require_matrix(a, "take_rows");
    const std::size_t c = a.cols();
    Tensor out = Tensor::zeros({idx.size(), c});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= a.rows()) {
            throw ShapeError("take_rows: index " + std::to_string(idx[i]) + " out of range for " +
                             shape_str(a));
        }
        for (std::size_t j = 0; j < c; ++j) out.data[i * c + j] = a.data[idx[i] * c + j];
    }
    const auto an = a.node;
    auto indices = idx;
    return finish(std::move(out), a.tape, "take_rows",
                  [an, c, indices = std::move(indices)](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const auto& g = t.grad_slot(out_node);
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < indices.size(); ++i)
                          for (std::size_t j = 0; j < c; ++j)
                              ga[indices[i] * c + j] += g[i * c + j];
                  });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    require_matrix(a, "concat_rows");
    require_matrix(b, "concat_rows");
    if (a.cols() != b.cols()) {
        throw ShapeError("concat_rows: column mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
    const std::size_t na = a.rows(), nb = b.rows(), c = a.cols();
    Tensor out = Tensor::zeros({na + nb, c});
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(na * c));
    const auto an = a.node, bn = b.node;
    return finish(std::move(out), joint_tape(a, b), "concat_rows",
                  [an, bn, na, nb, c](Tape& t, std::int64_t out_node) {
                      const auto& g = t.grad_slot(out_node);
                      if (an >= 0) {
                          auto& ga = t.grad_slot(an);
                          for (std::size_t i = 0; i < na * c; ++i) ga[i] += g[i];
                      }
                      if (bn >= 0) {
                          auto& gb = t.grad_slot(bn);
                          for (std::size_t i = 0; i < nb * c; ++i) gb[i] += g[na * c + i];
                      }
                  });
}

Tensor detach(const Tensor& a) {
    Tensor out(a.shape, a.data);
    return out;
}

Tensor mean_row_dot(const Tensor& a, const Tensor& w_const) {
    require_matrix(a, "mean_row_dot");
    require_same_shape(a, w_const, "mean_row_dot");
    if (w_const.tracked()) {
        throw ShapeError("mean_row_dot: weights must be constant (detach them first)");
    }
    const std::size_t n = a.rows();
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * w_const.data[i];
    Tensor out = Tensor::scalar(s / static_cast<double>(n));
    const auto an = a.node;
    auto wd = w_const.data;
    const double inv = 1.0 / static_cast<double>(n);
    return finish(std::move(out), a.tape, "mean_row_dot",
                  [an, inv, wd = std::move(wd)](Tape& t, std::int64_t out_node) {
                      if (an < 0) return;
                      const double g = t.grad_slot(out_node)[0];
                      auto& ga = t.grad_slot(an);
                      for (std::size_t i = 0; i < wd.size(); ++i) ga[i] += g * wd[i] * inv;
                  });
}

Tensor one_hot_rows(const std::vector<int>& labels, std::size_t classes) {
    Tensor out = Tensor::zeros({labels.size(), classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
            throw ShapeError("one_hot_rows: label " + std::to_string(labels[i]) +
                             " out of range for " + std::to_string(classes) + " classes");
        }
        out.data[i * classes + static_cast<std::size_t>(labels[i])] = 1.0;
    }
    return out;
}

}  // namespace madapt
