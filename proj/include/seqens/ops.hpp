#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "seqens/tensor.hpp"

namespace seqens {

namespace detail {

inline TensorPtr op_result(std::vector<std::size_t> shape, std::vector<TensorPtr> parents) {
    auto out = make_tensor(std::move(shape));
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    out->requires_grad = rg;
    if (rg) out->parents = std::move(parents);
    return out;
}

inline void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a->shape) + " vs " + shape_str(b->shape));
    }
}

inline void require_rank2(const TensorPtr& t, const char* op) {
    if (t->shape.size() != 2) {
        throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor, got " +
                                    shape_str(t->shape));
    }
}

// Column vector over a batch: rank-1 [n] or rank-2 [n,1].
inline void require_length(const TensorPtr& v, std::size_t n, const char* op) {
    if (v->size() != n || v->shape.size() > 2 || (v->shape.size() == 2 && v->shape[1] != 1)) {
        throw std::invalid_argument(std::string(op) + ": expected length-" + std::to_string(n) +
                                    " vector, got " + shape_str(v->shape));
    }
}

inline void accumulate(Tensor& t, std::size_t i, double g) {
    if (!t.requires_grad) return;
    t.ensure_grad();
    t.grad[i] += g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise arithmetic (exact shape match or one scalar operand)
// ---------------------------------------------------------------------------

namespace detail {

enum class Broadcast { none, left_scalar, right_scalar };

inline Broadcast broadcast_mode(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape == b->shape) return Broadcast::none;
    if (b->is_scalar()) return Broadcast::right_scalar;
    if (a->is_scalar()) return Broadcast::left_scalar;
    require_same_shape(a, b, op);  // throws
    return Broadcast::none;
}

}  // namespace detail

inline TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    auto bc = detail::broadcast_mode(a, b, "add");
    const auto& big = bc == detail::Broadcast::left_scalar ? b : a;
    auto out = detail::op_result(big->shape, {a, b});
    const std::size_t n = out->size();
    for (std::size_t i = 0; i < n; ++i) {
        double av = bc == detail::Broadcast::left_scalar ? a->data[0] : a->data[i];
        double bv = bc == detail::Broadcast::right_scalar ? b->data[0] : b->data[i];
        out->data[i] = av + bv;
    }
    if (out->requires_grad) {
        out->backprop = [bc](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& b = *self.parents[1];
            for (std::size_t i = 0; i < self.size(); ++i) {
                double g = self.grad[i];
                detail::accumulate(a, bc == detail::Broadcast::left_scalar ? 0 : i, g);
                detail::accumulate(b, bc == detail::Broadcast::right_scalar ? 0 : i, g);
            }
        };
    }
    return out;
}

inline TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
    auto bc = detail::broadcast_mode(a, b, "sub");
    const auto& big = bc == detail::Broadcast::left_scalar ? b : a;
    auto out = detail::op_result(big->shape, {a, b});
    for (std::size_t i = 0; i < out->size(); ++i) {
        double av = bc == detail::Broadcast::left_scalar ? a->data[0] : a->data[i];
        double bv = bc == detail::Broadcast::right_scalar ? b->data[0] : b->data[i];
        out->data[i] = av - bv;
    }
    if (out->requires_grad) {
        out->backprop = [bc](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& b = *self.parents[1];
            for (std::size_t i = 0; i < self.size(); ++i) {
                double g = self.grad[i];
                detail::accumulate(a, bc == detail::Broadcast::left_scalar ? 0 : i, g);
                detail::accumulate(b, bc == detail::Broadcast::right_scalar ? 0 : i, -g);
            }
        };
    }
    return out;
}

inline TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    auto bc = detail::broadcast_mode(a, b, "mul");
    const auto& big = bc == detail::Broadcast::left_scalar ? b : a;
    auto out = detail::op_result(big->shape, {a, b});
    for (std::size_t i = 0; i < out->size(); ++i) {
        double av = bc == detail::Broadcast::left_scalar ? a->data[0] : a->data[i];
        double bv = bc == detail::Broadcast::right_scalar ? b->data[0] : b->data[i];
        out->data[i] = av * bv;
    }
    if (out->requires_grad) {
        out->backprop = [bc](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& b = *self.parents[1];
            for (std::size_t i = 0; i < self.size(); ++i) {
                double g = self.grad[i];
                std::size_t ai = bc == detail::Broadcast::left_scalar ? 0 : i;
                std::size_t bi = bc == detail::Broadcast::right_scalar ? 0 : i;
                detail::accumulate(a, ai, g * b.data[bi]);
                detail::accumulate(b, bi, g * a.data[ai]);
            }
        };
    }
    return out;
}

inline TensorPtr div(const TensorPtr& a, const TensorPtr& b) {
    auto bc = detail::broadcast_mode(a, b, "div");
    const auto& big = bc == detail::Broadcast::left_scalar ? b : a;
    auto out = detail::op_result(big->shape, {a, b});
    for (std::size_t i = 0; i < out->size(); ++i) {
        double av = bc == detail::Broadcast::left_scalar ? a->data[0] : a->data[i];
        double bv = bc == detail::Broadcast::right_scalar ? b->data[0] : b->data[i];
        out->data[i] = av / bv;
    }
    if (out->requires_grad) {
        out->backprop = [bc](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& b = *self.parents[1];
            for (std::size_t i = 0; i < self.size(); ++i) {
                double g = self.grad[i];
                std::size_t ai = bc == detail::Broadcast::left_scalar ? 0 : i;
                std::size_t bi = bc == detail::Broadcast::right_scalar ? 0 : i;
                double bv = b.data[bi];
                detail::accumulate(a, ai, g / bv);
                detail::accumulate(b, bi, -g * a.data[ai] / (bv * bv));
            }
        };
    }
    return out;
}

inline TensorPtr add_scalar(const TensorPtr& a, double c) {
    auto out = detail::op_result(a->shape, {a});
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] + c;
    if (out->requires_grad) {
        out->backprop = [](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i)
                detail::accumulate(*self.parents[0], i, self.grad[i]);
        };
    }
    return out;
}

inline TensorPtr mul_scalar(const TensorPtr& a, double c) {
    auto out = detail::op_result(a->shape, {a});
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] * c;
    if (out->requires_grad) {
        out->backprop = [c](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i)
                detail::accumulate(*self.parents[0], i, self.grad[i] * c);
        };
    }
    return out;
}

// c - t, elementwise.
inline TensorPtr rsub_scalar(const TensorPtr& a, double c) {
    auto out = detail::op_result(a->shape, {a});
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = c - a->data[i];
    if (out->requires_grad) {
        out->backprop = [](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i)
                detail::accumulate(*self.parents[0], i, -self.grad[i]);
        };
    }
    return out;
}

inline TensorPtr one_minus(const TensorPtr& a) { return rsub_scalar(a, 1.0); }

inline TensorPtr abs_diff(const TensorPtr& a, const TensorPtr& b) {
    detail::require_same_shape(a, b, "abs_diff");
    auto out = detail::op_result(a->shape, {a, b});
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = std::abs(a->data[i] - b->data[i]);
    if (out->requires_grad) {
        out->backprop = [](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& b = *self.parents[1];
            for (std::size_t i = 0; i < self.size(); ++i) {
                double d = a.data[i] - b.data[i];
                double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
                detail::accumulate(a, i, self.grad[i] * s);
                detail::accumulate(b, i, -self.grad[i] * s);
            }
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// Activations and pointwise transcendentals
// ---------------------------------------------------------------------------

namespace detail {

template <class Fwd, class Bwd>
TensorPtr pointwise(const TensorPtr& a, Fwd fwd, Bwd bwd_from_out) {
    auto out = op_result(a->shape, {a});
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = fwd(a->data[i]);
    if (out->requires_grad) {
        out->backprop = [bwd_from_out](Tensor& self) {
            Tensor& a = *self.parents[0];
            for (std::size_t i = 0; i < self.size(); ++i)
                accumulate(a, i, self.grad[i] * bwd_from_out(a.data[i], self.data[i]));
        };
    }
    return out;
}

}  // namespace detail

inline TensorPtr tanh(const TensorPtr& a) {
    return detail::pointwise(
        a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

inline TensorPtr sigmoid(const TensorPtr& a) {
    return detail::pointwise(
        a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

// max(0, x); subgradient 0 at the kink.
inline TensorPtr relu(const TensorPtr& a) {
    return detail::pointwise(
        a, [](double x) { return x > 0 ? x : 0.0; },
        [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

inline TensorPtr log(const TensorPtr& a) {
    return detail::pointwise(
        a, [](double x) { return std::log(x); },
        [](double x, double) { return 1.0 / x; });
}

inline TensorPtr exp(const TensorPtr& a) {
    return detail::pointwise(
        a, [](double x) { return std::exp(x); },
        [](double, double y) { return y; });
}

// ---------------------------------------------------------------------------
// Linear algebra and structured ops
// ---------------------------------------------------------------------------

inline TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    detail::require_rank2(a, "matmul");
    detail::require_rank2(b, "matmul");
    if (a->shape[1] != b->shape[0]) {
        throw std::invalid_argument("matmul: shape mismatch " + shape_str(a->shape) + " vs " +
                                    shape_str(b->shape));
    }
    const std::size_t n = a->shape[0], m = a->shape[1], k = b->shape[1];
    auto out = detail::op_result({n, k}, {a, b});
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = &a->data[i * m];
        double* crow = &out->data[i * k];
        for (std::size_t p = 0; p < m; ++p) {
            double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = &b->data[p * k];
            for (std::size_t j = 0; j < k; ++j) crow[j] += av * brow[j];
        }
    }
    if (out->requires_grad) {
        out->backprop = [n, m, k](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& b = *self.parents[1];
            if (a.requires_grad) {
                a.ensure_grad();
                // dA = dC * B^T
                for (std::size_t i = 0; i < n; ++i) {
                    const double* grow = &self.grad[i * k];
                    double* garow = &a.grad[i * m];
                    for (std::size_t p = 0; p < m; ++p) {
                        const double* brow = &b.data[p * k];
                        double acc = 0.0;
                        for (std::size_t j = 0; j < k; ++j) acc += grow[j] * brow[j];
                        garow[p] += acc;
                    }
                }
            }
            if (b.requires_grad) {
                b.ensure_grad();
                // dB = A^T * dC
                for (std::size_t i = 0; i < n; ++i) {
                    const double* arow = &a.data[i * m];
                    const double* grow = &self.grad[i * k];
                    for (std::size_t p = 0; p < m; ++p) {
                        double av = arow[p];
                        if (av == 0.0) continue;
                        double* gbrow = &b.grad[p * k];
                        for (std::size_t j = 0; j < k; ++j) gbrow[j] += av * grow[j];
                    }
                }
            }
        };
    }
    return out;
}

// A[n,m] + b[m], broadcast over rows (bias add).
inline TensorPtr add_rowwise(const TensorPtr& a, const TensorPtr& b) {
    detail::require_rank2(a, "add_rowwise");
    if (b->size() != a->shape[1]) {
        throw std::invalid_argument("add_rowwise: shape mismatch " + shape_str(a->shape) +
                                    " vs " + shape_str(b->shape));
    }
    const std::size_t n = a->shape[0], m = a->shape[1];
    auto out = detail::op_result(a->shape, {a, b});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out->data[i * m + j] = a->data[i * m + j] + b->data[j];
    if (out->requires_grad) {
        out->backprop = [n, m](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& b = *self.parents[1];
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    detail::accumulate(a, i * m + j, self.grad[i * m + j]);
                    detail::accumulate(b, j, self.grad[i * m + j]);
                }
        };
    }
    return out;
}

// C[i,j] = A[i,j] * v[i]; v is a per-row weight of length n.
inline TensorPtr mul_colwise(const TensorPtr& a, const TensorPtr& v) {
    detail::require_rank2(a, "mul_colwise");
    detail::require_length(v, a->shape[0], "mul_colwise");
    const std::size_t n = a->shape[0], m = a->shape[1];
    auto out = detail::op_result(a->shape, {a, v});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out->data[i * m + j] = a->data[i * m + j] * v->data[i];
    if (out->requires_grad) {
        out->backprop = [n, m](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& v = *self.parents[1];
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    double g = self.grad[i * m + j];
                    detail::accumulate(a, i * m + j, g * v.data[i]);
                    detail::accumulate(v, i, g * a.data[i * m + j]);
                }
        };
    }
    return out;
}

// C[i,j] = A[i,j] / v[i].
inline TensorPtr div_colwise(const TensorPtr& a, const TensorPtr& v) {
    detail::require_rank2(a, "div_colwise");
    detail::require_length(v, a->shape[0], "div_colwise");
    const std::size_t n = a->shape[0], m = a->shape[1];
    auto out = detail::op_result(a->shape, {a, v});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out->data[i * m + j] = a->data[i * m + j] / v->data[i];
    if (out->requires_grad) {
        out->backprop = [n, m](Tensor& self) {
            Tensor& a = *self.parents[0];
            Tensor& v = *self.parents[1];
            for (std::size_t i = 0; i < n; ++i) {
                double vi = v.data[i];
                for (std::size_t j = 0; j < m; ++j) {
                    double g = self.grad[i * m + j];
                    detail::accumulate(a, i * m + j, g / vi);
                    detail::accumulate(v, i, -g * a.data[i * m + j] / (vi * vi));
                }
            }
        };
    }
    return out;
}

// Row-wise numerically stable softmax; rank-1 input is treated as one row.
inline TensorPtr softmax_rows(const TensorPtr& a) {
    if (a->shape.size() > 2) {
        throw std::invalid_argument("softmax_rows: expected rank <= 2, got " +
                                    shape_str(a->shape));
    }
    const std::size_t n = a->shape.size() == 2 ? a->shape[0] : 1;
    const std::size_t m = a->shape.size() == 2 ? a->shape[1] : a->size();
    auto out = detail::op_result(a->shape, {a});
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = &a->data[i * m];
        double* y = &out->data[i * m];
        double mx = x[0];
        for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, x[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            y[j] = std::exp(x[j] - mx);
            z += y[j];
        }
        for (std::size_t j = 0; j < m; ++j) y[j] /= z;
    }
    if (out->requires_grad) {
        out->backprop = [n, m](Tensor& self) {
            Tensor& a = *self.parents[0];
            if (!a.requires_grad) return;
            a.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) {
                const double* y = &self.data[i * m];
                const double* g = &self.grad[i * m];
                double dot = 0.0;
                for (std::size_t j = 0; j < m; ++j) dot += g[j] * y[j];
                for (std::size_t j = 0; j < m; ++j) a.grad[i * m + j] += y[j] * (g[j] - dot);
            }
        };
    }
    return out;
}

inline TensorPtr sum(const TensorPtr& a) {
    auto out = detail::op_result({std::size_t{1}}, {a});
    double acc = 0.0;
    for (double x : a->data) acc += x;
    out->data[0] = acc;
    if (out->requires_grad) {
        out->backprop = [](Tensor& self) {
            Tensor& a = *self.parents[0];
            for (std::size_t i = 0; i < a.size(); ++i)
                detail::accumulate(a, i, self.grad[0]);
        };
    }
    return out;
}

inline TensorPtr mean(const TensorPtr& a) {
    const double inv = 1.0 / static_cast<double>(a->size());
    auto out = detail::op_result({std::size_t{1}}, {a});
    double acc = 0.0;
    for (double x : a->data) acc += x;
    out->data[0] = acc * inv;
    if (out->requires_grad) {
        out->backprop = [inv](Tensor& self) {
            Tensor& a = *self.parents[0];
            for (std::size_t i = 0; i < a.size(); ++i)
                detail::accumulate(a, i, self.grad[0] * inv);
        };
    }
    return out;
}

// Per-row sum of a rank-2 tensor: [n,m] -> [n].
inline TensorPtr row_sum(const TensorPtr& a) {
    detail::require_rank2(a, "row_sum");
    const std::size_t n = a->shape[0], m = a->shape[1];
    auto out = detail::op_result({n}, {a});
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += a->data[i * m + j];
        out->data[i] = acc;
    }
    if (out->requires_grad) {
        out->backprop = [n, m](Tensor& self) {
            Tensor& a = *self.parents[0];
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    detail::accumulate(a, i * m + j, self.grad[i]);
        };
    }
    return out;
}

// y[i] = A[i, idx[i]]; rejects out-of-range indices.
inline TensorPtr gather_rows(const TensorPtr& a, std::vector<int> idx) {
    detail::require_rank2(a, "gather_rows");
    const std::size_t n = a->shape[0], m = a->shape[1];
    if (idx.size() != n) {
        throw std::invalid_argument("gather_rows: got " + std::to_string(idx.size()) +
                                    " indices for " + std::to_string(n) + " rows");
    }
    for (int v : idx) {
        if (v < 0 || static_cast<std::size_t>(v) >= m) {
            throw std::invalid_argument("gather_rows: index " + std::to_string(v) +
                                        " out of range [0, " + std::to_string(m) + ")");
        }
    }
    auto out = detail::op_result({n}, {a});
    for (std::size_t i = 0; i < n; ++i)
        out->data[i] = a->data[i * m + static_cast<std::size_t>(idx[i])];
    if (out->requires_grad) {
        out->backprop = [idx = std::move(idx), m](Tensor& self) {
            Tensor& a = *self.parents[0];
            for (std::size_t i = 0; i < self.size(); ++i)
                detail::accumulate(a, i * m + static_cast<std::size_t>(idx[i]), self.grad[i]);
        };
    }
    return out;
}

// Horizontal concatenation of rank-2 blocks with equal row counts.
inline TensorPtr concat_cols(const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty input");
    const std::size_t n = parts[0]->rows();
    std::size_t total = 0;
    for (const auto& p : parts) {
        detail::require_rank2(p, "concat_cols");
        if (p->shape[0] != n) {
            throw std::invalid_argument("concat_cols: row mismatch " + shape_str(parts[0]->shape) +
                                        " vs " + shape_str(p->shape));
        }
        total += p->shape[1];
    }
    auto out = detail::op_result({n, total}, {parts.begin(), parts.end()});
    std::size_t off = 0;
    for (const auto& p : parts) {
        const std::size_t m = p->shape[1];
        for (std::size_t i = 0; i < n; ++i)
            std::copy_n(&p->data[i * m], m, &out->data[i * total + off]);
        off += m;
    }
    if (out->requires_grad) {
        out->backprop = [n, total](Tensor& self) {
            std::size_t off = 0;
            for (auto& pp : self.parents) {
                Tensor& p = *pp;
                const std::size_t m = p.shape[1];
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < m; ++j)
                        detail::accumulate(p, i * m + j, self.grad[i * total + off + j]);
                off += m;
            }
        };
    }
    return out;
}

inline TensorPtr reshape(const TensorPtr& a, std::vector<std::size_t> new_shape) {
    if (shape_numel(new_shape) != a->size()) {
        throw std::invalid_argument("reshape: size mismatch " + shape_str(a->shape) + " -> " +
                                    shape_str(new_shape));
    }
    auto out = detail::op_result(std::move(new_shape), {a});
    out->data = a->data;
    if (out->requires_grad) {
        out->backprop = [](Tensor& self) {
            Tensor& a = *self.parents[0];
            for (std::size_t i = 0; i < self.size(); ++i)
                detail::accumulate(a, i, self.grad[i]);
        };
    }
    return out;
}

// Stop-gradient: a fresh constant leaf carrying the same values.
inline TensorPtr detach(const TensorPtr& a) {
    return make_tensor(a->shape, a->data, /*requires_grad=*/false);
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

// The DAG reachable from a root, in topological order over requires_grad
// nodes. Backward seeds the root with 1, zeroes transient interior grads, and
// accumulates into leaves so repeated passes add up until grads are zeroed.
struct Graph {
    std::vector<Tensor*> order;  // topological: parents before children

    static Graph from(const TensorPtr& root) {
        Graph g;
        if (!root->requires_grad) return g;
        std::unordered_set<Tensor*> seen;
        // Iterative post-order DFS over the requires_grad subgraph.
        std::vector<std::pair<Tensor*, std::size_t>> stack{{root.get(), 0}};
        seen.insert(root.get());
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->parents.size()) {
                Tensor* p = node->parents[next++].get();
                if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
            } else {
                g.order.push_back(node);
                stack.pop_back();
            }
        }
        return g;
    }

    std::vector<Tensor*> leaves() const {
        std::vector<Tensor*> out;
        for (Tensor* t : order)
            if (t->is_leaf()) out.push_back(t);
        return out;
    }

    void run_backward(Tensor& root) {
        for (Tensor* t : order) {
            t->ensure_grad();
            if (!t->is_leaf()) t->zero_grad();
        }
        if (root.is_leaf()) {
            root.grad[0] += 1.0;
        } else {
            root.grad[0] = 1.0;
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            if ((*it)->backprop) (*it)->backprop(**it);
        }
    }
};

inline void backward(const TensorPtr& root) {
    if (!root->is_scalar()) {
        throw std::invalid_argument("backward: root must be scalar, got " +
                                    shape_str(root->shape));
    }
    if (!root->requires_grad) return;
    Graph::from(root).run_backward(*root);
}

}  // namespace seqens
