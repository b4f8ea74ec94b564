#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <vector>

namespace attx {

struct TensorImpl {
    std::vector<std::size_t> shape;
    std::vector<double> data;  // row-major
    std::vector<double> grad;  // empty until touched by backward
    bool requires_grad = false;
};

// Shared handle to a dense N-d array of doubles. Copying a Tensor aliases the
// same storage; ops that record onto a tape capture handles by value.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<std::size_t> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<std::size_t> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(p_); }
    const std::vector<std::size_t>& shape() const { return p_->shape; }
    std::size_t ndim() const { return p_->shape.size(); }
    std::size_t numel() const { return p_->data.size(); }
    std::size_t extent(std::size_t axis) const { return p_->shape[axis]; }

    double* data() { return p_->data.data(); }
    const double* data() const { return p_->data.data(); }
    std::vector<double>& vec() { return p_->data; }
    const std::vector<double>& vec() const { return p_->data; }

    bool requires_grad() const { return p_->requires_grad; }
    void set_requires_grad(bool rg) { p_->requires_grad = rg; }

    // Gradient buffer, allocated zeroed on first access.
    double* grad();
    const std::vector<double>& grad_vec() const { return p_->grad; }
    bool has_grad() const { return !p_->grad.empty(); }
    void zero_grad();

    // Value of a 0-d / 1-element tensor.
    double value() const;
    double at(std::initializer_list<std::size_t> idx) const;

    TensorImpl* impl() const { return p_.get(); }

private:
    explicit Tensor(std::shared_ptr<TensorImpl> p) : p_(std::move(p)) {}
    std::shared_ptr<TensorImpl> p_;
};

// Reverse-mode tape. Operations append themselves in execution order, which
// is a topological order by construction; backward() walks it once in
// reverse. Nodes are released as they run so activation memory is returned
// during the backward pass, which means a tape can be consumed only once.
class Tape {
public:
    void record(std::function<void()> backward_step);
    bool recording() const { return recording_; }
    void set_recording(bool on) { recording_ = on; }

    void backward(Tensor& loss);

    void clear();
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<std::function<void()>> nodes_;
    bool recording_ = true;
    bool consumed_ = false;
};

// RAII guard that disables recording for its scope.
class NoGrad {
public:
    explicit NoGrad(Tape& t) : tape_(t), prev_(t.recording()) { tape_.set_recording(false); }
    ~NoGrad() { tape_.set_recording(prev_); }

private:
    Tape& tape_;
    bool prev_;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);

}  // namespace attx
