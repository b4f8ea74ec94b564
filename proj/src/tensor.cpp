#include "attx/tensor.hpp"

#include <stdexcept>

namespace attx {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) throw std::invalid_argument("tensor extents must be positive");
        n *= e;
    }
    return n;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    auto p = std::make_shared<TensorImpl>();
    p->data.assign(shape_numel(shape), 0.0);
    p->shape = std::move(shape);
    p->requires_grad = requires_grad;
    return Tensor(std::move(p));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (auto& x : t.vec()) x = value;
    return t;
}

Tensor Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> data,
                         bool requires_grad) {
    if (shape_numel(shape) != data.size())
        throw std::invalid_argument("tensor data length does not match shape");
    auto p = std::make_shared<TensorImpl>();
    p->shape = std::move(shape);
    p->data = std::move(data);
    p->requires_grad = requires_grad;
    return Tensor(std::move(p));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

double* Tensor::grad() {
    if (p_->grad.empty()) p_->grad.assign(p_->data.size(), 0.0);
    return p_->grad.data();
}

void Tensor::zero_grad() { p_->grad.clear(); }

double Tensor::value() const {
    if (numel() != 1) throw std::logic_error("value() requires a 1-element tensor");
    return p_->data[0];
}

double Tensor::at(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != ndim()) throw std::invalid_argument("index rank mismatch");
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx) {
        if (i >= p_->shape[axis]) throw std::out_of_range("tensor index out of range");
        flat = flat * p_->shape[axis] + i;
        ++axis;
    }
    return p_->data[flat];
}

void Tape::record(std::function<void()> backward_step) {
    nodes_.push_back(std::move(backward_step));
}

void Tape::backward(Tensor& loss) {
    if (loss.numel() != 1) throw std::invalid_argument("backward() requires a scalar loss");
    if (!loss.requires_grad())
        throw std::invalid_argument("loss does not depend on any differentiable tensor");
    if (consumed_) throw std::logic_error("tape already consumed by a backward pass");
    consumed_ = true;
    loss.grad()[0] += 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        nodes_[i]();
        nodes_[i] = nullptr;  // release captured activations as we go
    }
}

void Tape::clear() {
    nodes_.clear();
    consumed_ = false;
}

}  // namespace attx
