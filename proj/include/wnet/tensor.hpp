#pragma once

#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wnet/common.hpp"

namespace wnet {

// Dense row-major tensor.  Copies share the underlying buffer; ops allocate
// fresh outputs, and in-place writes through mutable_data() are reserved for
// owners that want sharing semantics (parameter updates).
template <typename S>
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<i64> shape) {
        return Tensor(std::move(shape), S(0));
    }

    static Tensor full(std::vector<i64> shape, S value) {
        return Tensor(std::move(shape), value);
    }

    static Tensor from(std::vector<i64> shape, std::vector<S> values) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.check_shape();
        if (static_cast<i64>(values.size()) != t.numel_from_shape()) {
            std::ostringstream msg;
            msg << "value count " << values.size() << " does not match shape "
                << t.shape_string();
            throw ShapeError(msg.str());
        }
        t.data_ = std::make_shared<std::vector<S>>(std::move(values));
        return t;
    }

    static Tensor scalar(S value) { return Tensor({}, value); }

    bool defined() const { return data_ != nullptr; }

    const std::vector<i64>& shape() const { return shape_; }

    i64 rank() const { return static_cast<i64>(shape_.size()); }

    i64 dim(i64 axis) const {
        if (axis < 0 || axis >= rank()) {
            throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                             shape_string());
        }
        return shape_[axis];
    }

    i64 numel() const { return defined() ? static_cast<i64>(data_->size()) : 0; }

    const S* data() const {
        require_defined();
        return data_->data();
    }

    S* mutable_data() {
        require_defined();
        return data_->data();
    }

    const std::vector<S>& values() const {
        require_defined();
        return *data_;
    }

    S item() const {
        require_defined();
        if (numel() != 1) {
            throw ShapeError("item() on tensor of shape " + shape_string());
        }
        return (*data_)[0];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::string shape_string() const {
        std::ostringstream out;
        out << "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i > 0) out << ",";
            out << shape_[i];
        }
        out << "]";
        return out.str();
    }

    Tensor clone() const {
        require_defined();
        Tensor t;
        t.shape_ = shape_;
        t.data_ = std::make_shared<std::vector<S>>(*data_);
        return t;
    }

    // Same buffer, new shape with the same element count.
    Tensor reshaped(std::vector<i64> shape) const {
        require_defined();
        Tensor t;
        t.shape_ = std::move(shape);
        t.check_shape();
        if (t.numel_from_shape() != numel()) {
            throw ShapeError("cannot reshape " + shape_string() + " to " + t.shape_string());
        }
        t.data_ = data_;
        return t;
    }

private:
    Tensor(std::vector<i64> shape, S fill) : shape_(std::move(shape)) {
        check_shape();
        data_ = std::make_shared<std::vector<S>>(static_cast<std::size_t>(numel_from_shape()),
                                                 fill);
    }

    void require_defined() const {
        if (!defined()) throw ValueError("use of undefined tensor");
    }

    void check_shape() const {
        for (i64 d : shape_) {
            if (d < 0) throw ShapeError("negative extent in shape " + shape_string());
        }
    }

    i64 numel_from_shape() const {
        i64 n = 1;
        for (i64 d : shape_) n *= d;
        return n;
    }

    std::vector<i64> shape_;
    std::shared_ptr<std::vector<S>> data_;
};

}  // namespace wnet
