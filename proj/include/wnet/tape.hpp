#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wnet/kernels.hpp"
#include "wnet/tensor.hpp"

namespace wnet {

template <typename S>
class Tape;

// Handle to a value in a computation.  Untracked vars (tape == nullptr) are
// constants: no node, no gradient, and any op whose inputs are all untracked
// produces another untracked var without touching the tape.  Frozen layers
// ride this path, so backward never visits them.
template <typename S>
struct Var {
    Tensor<S> value;
    Tape<S>* tape = nullptr;
    i64 node = -1;

    bool tracked() const { return tape != nullptr; }
};

// Named trainable tensor.  The var cache lets a forward pass bind the same
// parameter once per tape generation no matter how often a module reuses it.
template <typename S>
struct Parameter {
    std::string name;
    Tensor<S> value;
    bool trainable = true;

    Tape<S>* bound_tape = nullptr;
    i64 bound_stamp = -1;
    Var<S> bound_var;

    bool bound_on(const Tape<S>& tape) const;
};

// Reverse-mode gradient tape.  Each training step builds a fresh graph:
// bind parameters with param(), run ops, call backward(loss), read grads,
// then reset().
template <typename S>
class Tape {
public:
    static Var<S> constant(Tensor<S> value) {
        Var<S> v;
        v.value = std::move(value);
        return v;
    }

    // Tracked leaf; its gradient is available after backward().  With
    // gradients disabled the value passes through as a constant, so a
    // whole inference pass records nothing.
    Var<S> watch(Tensor<S> value) {
        if (!grad_enabled_) {
            return constant(std::move(value));
        }
        return record(std::move(value), nullptr);
    }

    // Binds a parameter for the current generation: a tracked leaf when
    // trainable, a constant otherwise.
    Var<S> param(Parameter<S>& p) {
        if (p.bound_tape == this && p.bound_stamp == stamp_) {
            return p.bound_var;
        }
        p.bound_var = p.trainable ? watch(p.value) : constant(p.value);
        p.bound_tape = this;
        p.bound_stamp = stamp_;
        return p.bound_var;
    }

    void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
    bool grad_enabled() const { return grad_enabled_; }

    // Appends a node holding the op result.  backward receives the node's
    // accumulated gradient and is responsible for pushing gradient to the
    // op's inputs via accumulate(); leaves pass nullptr.
    Var<S> record(Tensor<S> value, std::function<void(const Tensor<S>&)> backward) {
        Var<S> v;
        v.value = std::move(value);
        v.tape = this;
        v.node = static_cast<i64>(nodes_.size());
        nodes_.push_back(NodeRec{v.value.shape(), Tensor<S>(), std::move(backward)});
        return v;
    }

    // Adds g into v's gradient buffer.  No-op for constants, so backward
    // closures can push to every input unconditionally.
    void accumulate(const Var<S>& v, const Tensor<S>& g) {
        if (!v.tracked()) return;
        check_owned(v);
        NodeRec& n = nodes_[static_cast<std::size_t>(v.node)];
        if (g.shape() != n.shape) {
            throw ShapeError("gradient shape " + g.shape_string() + " does not match node shape");
        }
        if (!n.grad.defined()) {
            n.grad = g.clone();
            return;
        }
        kernels::ref::add(n.grad.data(), g.data(), n.grad.mutable_data(),
                          static_cast<std::size_t>(g.numel()));
    }

    // Gradient of a tracked var after backward(); zeros if the var never
    // influenced the loss.
    Tensor<S> grad(const Var<S>& v) const {
        if (!v.tracked()) {
            throw ValueError("gradient requested for a constant");
        }
        check_owned(v);
        const NodeRec& n = nodes_[static_cast<std::size_t>(v.node)];
        if (!n.grad.defined()) {
            return Tensor<S>::zeros(n.shape);
        }
        return n.grad;
    }

    void backward(const Var<S>& loss) {
        if (!loss.tracked()) {
            throw ValueError("loss does not depend on any watched value");
        }
        check_owned(loss);
        if (loss.value.numel() != 1) {
            throw ShapeError("backward() needs a scalar loss, got shape " +
                             loss.value.shape_string());
        }
        nodes_[static_cast<std::size_t>(loss.node)].grad =
            Tensor<S>::full(loss.value.shape(), S(1));
        for (i64 i = loss.node; i >= 0; --i) {
            NodeRec& n = nodes_[static_cast<std::size_t>(i)];
            if (n.grad.defined() && n.backward) {
                n.backward(n.grad);
            }
        }
    }

    // Drops the graph and invalidates parameter bindings.
    void reset() {
        nodes_.clear();
        ++stamp_;
    }

    i64 stamp() const { return stamp_; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct NodeRec {
        std::vector<i64> shape;
        Tensor<S> grad;
        std::function<void(const Tensor<S>&)> backward;
    };

    void check_owned(const Var<S>& v) const {
        if (v.tape != this || v.node < 0 || v.node >= static_cast<i64>(nodes_.size())) {
            throw ValueError("var does not belong to this tape generation");
        }
    }

    std::vector<NodeRec> nodes_;
    i64 stamp_ = 0;
    bool grad_enabled_ = true;
};

template <typename S>
bool Parameter<S>::bound_on(const Tape<S>& tape) const {
    return bound_tape == &tape && bound_stamp == tape.stamp();
}

}  // namespace wnet
