#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seqens {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

inline std::string shape_str(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

inline std::size_t shape_numel(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, std::size_t b) { return a * b; });
}

// Dense row-major float64 array, optionally a node in the reverse-mode
// graph. Ops in ops.hpp link an output to its parents and attach a pull-back
// closure that scatters the output's grad into the parents' grads.
//
// grad is lazily allocated; on leaf tensors it accumulates across backward
// passes until explicitly zeroed, matching the optimizer protocol.
class Tensor {
public:
    std::vector<std::size_t> shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;

    std::vector<TensorPtr> parents;
    std::function<void(Tensor&)> backprop;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> sh, double fill = 0.0, bool rg = false)
        : shape(std::move(sh)), data(shape_numel(shape), fill), requires_grad(rg) {}

    Tensor(std::vector<std::size_t> sh, std::vector<double> values, bool rg = false)
        : shape(std::move(sh)), data(std::move(values)), requires_grad(rg) {
        if (data.size() != shape_numel(shape)) {
            throw std::invalid_argument("tensor: data length " + std::to_string(data.size()) +
                                        " does not match shape " + shape_str(shape));
        }
    }

    std::size_t size() const { return data.size(); }
    bool is_scalar() const { return data.size() == 1; }
    bool is_leaf() const { return parents.empty(); }

    double value() const {
        if (!is_scalar()) {
            throw std::invalid_argument("tensor: value() on non-scalar " + shape_str(shape));
        }
        return data[0];
    }

    // Rank-2 accessors; rank-1 tensors are treated as a single column.
    std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }

    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    }
};

inline TensorPtr make_tensor(std::vector<std::size_t> shape, double fill = 0.0,
                             bool requires_grad = false) {
    return std::make_shared<Tensor>(std::move(shape), fill, requires_grad);
}

inline TensorPtr make_tensor(std::vector<std::size_t> shape, std::vector<double> values,
                             bool requires_grad = false) {
    return std::make_shared<Tensor>(std::move(shape), std::move(values), requires_grad);
}

inline TensorPtr scalar_tensor(double v, bool requires_grad = false) {
    return make_tensor({std::size_t{1}}, std::vector<double>{v}, requires_grad);
}

inline void zero_grads(const std::vector<TensorPtr>& params) {
    for (const auto& p : params) p->zero_grad();
}

}  // namespace seqens
