#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tip/tensor.hpp"

namespace tip {

/// Named trainable tensor with a gradient slot of the same shape.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter(std::string name_, Tensor value_)
        : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

    void zero_grad() { grad.fill(0.0); }
};

/// Handle to a node recorded on a Tape.
struct Var {
    std::size_t id = 0;
};

/// Per-target neighbor lists; the adjacency view mean_aggregate consumes.
using AdjacencyList = std::vector<std::vector<std::size_t>>;

/// Records the forward computation and replays it in reverse to fill
/// Parameter gradients. Rebuilt for every forward pass.
class Tape {
public:
    Var constant(Tensor t) {
        return push(std::move(t), nullptr, {});
    }

    /// Leaf tied to a Parameter; backward accumulates into param.grad.
    Var param(Parameter& p) {
        Var v = push(p.value, nullptr, {});
        Parameter* target = &p;
        nodes_[v.id].backward = [this, v, target](/*self*/) {
            const Tensor& g = nodes_[v.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) target->grad[i] += g[i];
        };
        return v;
    }

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    const Tensor& grad(Var v) const { return nodes_[v.id].grad; }

    Var matmul(Var a, Var b) {
        const Tensor& ta = value(a);
        const Tensor& tb = value(b);
        if (ta.ndim() != 2 || tb.ndim() != 2 || ta.cols() != tb.rows()) {
            throw std::invalid_argument("matmul: incompatible shapes " +
                                        ta.shape_str() + " x " + tb.shape_str());
        }
        const std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
        Tensor out({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
                const double av = ta.at(i, p);
                if (av == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    out.at(i, j) += av * tb.at(p, j);
                }
            }
        }
        Var v = push(std::move(out), nullptr, {a, b});
        nodes_[v.id].backward = [this, v, a, b, m, k, n]() {
            const Tensor& g = nodes_[v.id].grad;
            const Tensor& ta = value(a);
            const Tensor& tb = value(b);
            Tensor& ga = nodes_[a.id].grad;
            Tensor& gb = nodes_[b.id].grad;
            // dA = dC * B^T
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += g.at(i, j) * tb.at(p, j);
                    ga.at(i, p) += s;
                }
            }
            // dB = A^T * dC
            for (std::size_t p = 0; p < k; ++p) {
                for (std::size_t i = 0; i < m; ++i) {
                    const double av = ta.at(i, p);
                    if (av == 0.0) continue;
                    for (std::size_t j = 0; j < n; ++j) {
                        gb.at(p, j) += av * g.at(i, j);
                    }
                }
            }
        };
        return v;
    }

    /// a * b^T for b stored row-major as [n x k]; returns [m x n].
    Var matmul_bt(Var a, Var b) {
        const Tensor& ta = value(a);
        const Tensor& tb = value(b);
        if (ta.ndim() != 2 || tb.ndim() != 2 || ta.cols() != tb.cols()) {
            throw std::invalid_argument("matmul_bt: incompatible shapes " +
                                        ta.shape_str() + " x " + tb.shape_str() + "^T");
        }
        const std::size_t m = ta.rows(), k = ta.cols(), n = tb.rows();
        Tensor out({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t p = 0; p < k; ++p) s += ta.at(i, p) * tb.at(j, p);
                out.at(i, j) = s;
            }
        }
        Var v = push(std::move(out), nullptr, {a, b});
        nodes_[v.id].backward = [this, v, a, b, m, k, n]() {
            const Tensor& g = nodes_[v.id].grad;
            const Tensor& ta = value(a);
            const Tensor& tb = value(b);
            Tensor& ga = nodes_[a.id].grad;
            Tensor& gb = nodes_[b.id].grad;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double gv = g.at(i, j);
                    if (gv == 0.0) continue;
                    for (std::size_t p = 0; p < k; ++p) {
                        ga.at(i, p) += gv * tb.at(j, p);
                        gb.at(j, p) += gv * ta.at(i, p);
                    }
                }
            }
        };
        return v;
    }

    Var relu(Var x) {
        Tensor out = value(x);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i] < 0.0) out[i] = 0.0;
        }
        Var v = push(std::move(out), nullptr, {x});
        nodes_[v.id].backward = [this, v, x]() {
            const Tensor& g = nodes_[v.id].grad;
            const Tensor& in = value(x);
            Tensor& gx = nodes_[x.id].grad;
            // subgradient at 0 is 0
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (in[i] > 0.0) gx[i] += g[i];
            }
        };
        return v;
    }

    Var sigmoid(Var x) {
        Tensor out = value(x);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double z = out[i];
            // split on sign keeps exp() argument non-positive
            out[i] = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                              : std::exp(z) / (1.0 + std::exp(z));
        }
        Var v = push(std::move(out), nullptr, {x});
        nodes_[v.id].backward = [this, v, x]() {
            const Tensor& g = nodes_[v.id].grad;
            const Tensor& y = value(v);
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                gx[i] += g[i] * y[i] * (1.0 - y[i]);
            }
        };
        return v;
    }

    /// log(max(x, floor)); gradient is zero in the clamped region.
    Var log_clamped(Var x, double floor = 1e-12) {
        Tensor out = value(x);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::log(out[i] > floor ? out[i] : floor);
        }
        Var v = push(std::move(out), nullptr, {x});
        nodes_[v.id].backward = [this, v, x, floor]() {
            const Tensor& g = nodes_[v.id].grad;
            const Tensor& in = value(x);
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (in[i] > floor) gx[i] += g[i] / in[i];
            }
        };
        return v;
    }

    Var add(Var a, Var b) {
        const Tensor& ta = value(a);
        const Tensor& tb = value(b);
        if (!ta.same_shape(tb)) {
            throw std::invalid_argument("add: shape mismatch " + ta.shape_str() +
                                        " vs " + tb.shape_str());
        }
        Tensor out = ta;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
        Var v = push(std::move(out), nullptr, {a, b});
        nodes_[v.id].backward = [this, v, a, b]() {
            const Tensor& g = nodes_[v.id].grad;
            Tensor& ga = nodes_[a.id].grad;
            Tensor& gb = nodes_[b.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i];
                gb[i] += g[i];
            }
        };
        return v;
    }

    Var mul(Var a, Var b) {
        const Tensor& ta = value(a);
        const Tensor& tb = value(b);
        if (!ta.same_shape(tb)) {
            throw std::invalid_argument("mul: shape mismatch " + ta.shape_str() +
                                        " vs " + tb.shape_str());
        }
        Tensor out = ta;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
        Var v = push(std::move(out), nullptr, {a, b});
        nodes_[v.id].backward = [this, v, a, b]() {
            const Tensor& g = nodes_[v.id].grad;
            const Tensor& ta = value(a);
            const Tensor& tb = value(b);
            Tensor& ga = nodes_[a.id].grad;
            Tensor& gb = nodes_[b.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i] * tb[i];
                gb[i] += g[i] * ta[i];
            }
        };
        return v;
    }

    /// Elementwise scale*x + shift with constants.
    Var affine(Var x, double scale, double shift) {
        Tensor out = value(x);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * out[i] + shift;
        Var v = push(std::move(out), nullptr, {x});
        nodes_[v.id].backward = [this, v, x, scale]() {
            const Tensor& g = nodes_[v.id].grad;
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += scale * g[i];
        };
        return v;
    }

    Var concat_cols(Var a, Var b) {
        const Tensor& ta = value(a);
        const Tensor& tb = value(b);
        if (ta.rows() != tb.rows()) {
            throw std::invalid_argument("concat_cols: row mismatch " + ta.shape_str() +
                                        " vs " + tb.shape_str());
        }
        const std::size_t m = ta.rows(), p = ta.cols(), q = tb.cols();
        Tensor out({m, p + q});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < p; ++j) out.at(i, j) = ta.at(i, j);
            for (std::size_t j = 0; j < q; ++j) out.at(i, p + j) = tb.at(i, j);
        }
        Var v = push(std::move(out), nullptr, {a, b});
        nodes_[v.id].backward = [this, v, a, b, m, p, q]() {
            const Tensor& g = nodes_[v.id].grad;
            Tensor& ga = nodes_[a.id].grad;
            Tensor& gb = nodes_[b.id].grad;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < p; ++j) ga.at(i, j) += g.at(i, j);
                for (std::size_t j = 0; j < q; ++j) gb.at(i, j) += g.at(i, p + j);
            }
        };
        return v;
    }

    /// Row i of output = mean of src rows over i's neighbor list; zero row
    /// when the list is empty.
    Var mean_aggregate(Var src, std::shared_ptr<const AdjacencyList> adj) {
        const Tensor& ts = value(src);
        if (ts.ndim() != 2) {
            throw std::invalid_argument("mean_aggregate: src must be 2-D");
        }
        const std::size_t n = ts.rows(), d = ts.cols();
        const std::size_t targets = adj->size();
        Tensor out({targets, d});
        for (std::size_t i = 0; i < targets; ++i) {
            const auto& nbrs = (*adj)[i];
            if (nbrs.empty()) continue;
            for (std::size_t j : nbrs) {
                if (j >= n) {
                    throw std::out_of_range("mean_aggregate: neighbor index out of range");
                }
                for (std::size_t c = 0; c < d; ++c) out.at(i, c) += ts.at(j, c);
            }
            const double inv = 1.0 / static_cast<double>(nbrs.size());
            for (std::size_t c = 0; c < d; ++c) out.at(i, c) *= inv;
        }
        Var v = push(std::move(out), nullptr, {src});
        nodes_[v.id].backward = [this, v, src, adj, targets, d]() {
            const Tensor& g = nodes_[v.id].grad;
            Tensor& gs = nodes_[src.id].grad;
            for (std::size_t i = 0; i < targets; ++i) {
                const auto& nbrs = (*adj)[i];
                if (nbrs.empty()) continue;
                const double inv = 1.0 / static_cast<double>(nbrs.size());
                for (std::size_t j : nbrs) {
                    for (std::size_t c = 0; c < d; ++c) {
                        gs.at(j, c) += inv * g.at(i, c);
                    }
                }
            }
        };
        return v;
    }

    Var gather_rows(Var x, std::vector<std::size_t> indices) {
        const Tensor& tx = value(x);
        if (tx.ndim() != 2) throw std::invalid_argument("gather_rows: x must be 2-D");
        const std::size_t d = tx.cols();
        Tensor out({indices.size(), d});
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= tx.rows()) {
                throw std::out_of_range("gather_rows: row index out of range");
            }
            for (std::size_t c = 0; c < d; ++c) out.at(i, c) = tx.at(indices[i], c);
        }
        Var v = push(std::move(out), nullptr, {x});
        auto idx = std::make_shared<std::vector<std::size_t>>(std::move(indices));
        nodes_[v.id].backward = [this, v, x, idx, d]() {
            const Tensor& g = nodes_[v.id].grad;
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < idx->size(); ++i) {
                for (std::size_t c = 0; c < d; ++c) {
                    gx.at((*idx)[i], c) += g.at(i, c);
                }
            }
        };
        return v;
    }

    /// Pick individual (row, col) entries of a 2-D tensor into a 1-D vector.
    Var gather_elements(Var x, std::vector<std::pair<std::size_t, std::size_t>> coords) {
        const Tensor& tx = value(x);
        if (tx.ndim() != 2) throw std::invalid_argument("gather_elements: x must be 2-D");
        Tensor out({coords.size()});
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (coords[i].first >= tx.rows() || coords[i].second >= tx.cols()) {
                throw std::out_of_range("gather_elements: coordinate out of range");
            }
            out[i] = tx.at(coords[i].first, coords[i].second);
        }
        Var v = push(std::move(out), nullptr, {x});
        auto cs = std::make_shared<std::vector<std::pair<std::size_t, std::size_t>>>(std::move(coords));
        nodes_[v.id].backward = [this, v, x, cs]() {
            const Tensor& g = nodes_[v.id].grad;
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < cs->size(); ++i) {
                gx.at((*cs)[i].first, (*cs)[i].second) += g[i];
            }
        };
        return v;
    }

    Var reshape(Var x, std::vector<std::size_t> shape) {
        const Tensor& tx = value(x);
        if (Tensor::count(shape) != tx.size()) {
            throw std::invalid_argument("reshape: element count mismatch");
        }
        Tensor out(std::move(shape), tx.values());
        Var v = push(std::move(out), nullptr, {x});
        nodes_[v.id].backward = [this, v, x]() {
            const Tensor& g = nodes_[v.id].grad;
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        };
        return v;
    }

    /// Sum over each row of a 2-D tensor -> 1-D vector of length rows.
    Var row_sum(Var x) {
        const Tensor& tx = value(x);
        if (tx.ndim() != 2) throw std::invalid_argument("row_sum: x must be 2-D");
        const std::size_t m = tx.rows(), d = tx.cols();
        Tensor out({m});
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += tx.at(i, c);
            out[i] = s;
        }
        Var v = push(std::move(out), nullptr, {x});
        nodes_[v.id].backward = [this, v, x, m, d]() {
            const Tensor& g = nodes_[v.id].grad;
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t c = 0; c < d; ++c) gx.at(i, c) += g[i];
            }
        };
        return v;
    }

    Var sum(Var x) {
        const Tensor& tx = value(x);
        double s = 0.0;
        for (std::size_t i = 0; i < tx.size(); ++i) s += tx[i];
        Var v = push(Tensor::scalar(s), nullptr, {x});
        nodes_[v.id].backward = [this, v, x]() {
            const double g = nodes_[v.id].grad[0];
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
        };
        return v;
    }

    Var mean(Var x) {
        const Tensor& tx = value(x);
        if (tx.size() == 0) throw std::invalid_argument("mean: empty tensor");
        const double inv = 1.0 / static_cast<double>(tx.size());
        double s = 0.0;
        for (std::size_t i = 0; i < tx.size(); ++i) s += tx[i];
        Var v = push(Tensor::scalar(s * inv), nullptr, {x});
        nodes_[v.id].backward = [this, v, x, inv]() {
            const double g = nodes_[v.id].grad[0] * inv;
            Tensor& gx = nodes_[x.id].grad;
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
        };
        return v;
    }

    /// Reverse sweep from a scalar loss; fills Parameter grads.
    void backward(Var loss) {
        if (value(loss).size() != 1) {
            throw std::invalid_argument("backward: loss must be a scalar");
        }
        for (auto& node : nodes_) {
            node.grad = Tensor(node.value.shape());
        }
        nodes_[loss.id].grad[0] = 1.0;
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            if (nodes_[i].backward) nodes_[i].backward();
        }
    }

    std::size_t num_nodes() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void()> backward;
        std::vector<Var> inputs;
    };

    Var push(Tensor value, std::function<void()> backward, std::vector<Var> inputs) {
        nodes_.push_back(Node{std::move(value), Tensor(), std::move(backward), std::move(inputs)});
        return Var{nodes_.size() - 1};
    }

    // deque: references returned by value()/grad() stay valid as later
    // ops append nodes
    std::deque<Node> nodes_;
};

}  // namespace tip
