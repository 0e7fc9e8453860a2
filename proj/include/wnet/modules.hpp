#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wnet/layers.hpp"
#include "wnet/rng.hpp"

namespace wnet::nn {

// Non-trainable tensor that still belongs to a module's saved state, e.g.
// batch-norm running statistics.
template <typename S>
struct ModuleBuffer {
    std::string name;
    Tensor<S> value;
};

namespace detail {

template <typename S>
Tensor<S> he_normal(Rng& rng, std::vector<i64> shape, i64 fan_in) {
    Tensor<S> t = Tensor<S>::zeros(std::move(shape));
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    S* p = t.mutable_data();
    for (i64 i = 0; i < t.numel(); ++i) {
        p[i] = static_cast<S>(rng.normal(0.0, stddev));
    }
    return t;
}

}  // namespace detail

template <typename S>
class Conv2d {
public:
    Conv2d(const std::string& name, i64 in_ch, i64 out_ch, i64 kernel, i64 stride, i64 pad,
           Rng& rng)
        : stride_(stride), pad_(pad) {
        weight_.name = name + ".weight";
        weight_.value =
            detail::he_normal<S>(rng, {out_ch, in_ch, kernel, kernel}, in_ch * kernel * kernel);
        bias_.name = name + ".bias";
        bias_.value = Tensor<S>::zeros({out_ch});
    }

    Var<S> forward(Tape<S>& tape, const Var<S>& x) {
        return conv2d(tape, x, tape.param(weight_), tape.param(bias_), stride_, pad_);
    }

    void collect(std::vector<Parameter<S>*>& params) {
        params.push_back(&weight_);
        params.push_back(&bias_);
    }

    void set_trainable(bool trainable) {
        weight_.trainable = trainable;
        bias_.trainable = trainable;
    }

private:
    Parameter<S> weight_;
    Parameter<S> bias_;
    i64 stride_;
    i64 pad_;
};

template <typename S>
class BatchNorm2d {
public:
    BatchNorm2d(const std::string& name, i64 channels, S eps = S(1e-5), S momentum = S(0.9))
        : eps_(eps), momentum_(momentum) {
        gamma_.name = name + ".gamma";
        gamma_.value = Tensor<S>::full({channels}, S(1));
        beta_.name = name + ".beta";
        beta_.value = Tensor<S>::zeros({channels});
        running_mean_.name = name + ".running_mean";
        running_mean_.value = Tensor<S>::zeros({channels});
        running_var_.name = name + ".running_var";
        running_var_.value = Tensor<S>::full({channels}, S(1));
    }

    // Training mode normalizes with batch statistics and decays them into
    // the running estimates; the running estimates update even when the
    // affine parameters are frozen, since they start uninitialized rather
    // than pretrained.
    Var<S> forward(Tape<S>& tape, const Var<S>& x, bool training) {
        if (!training) {
            return batchnorm2d_eval(tape, x, tape.param(gamma_), tape.param(beta_),
                                    running_mean_.value, running_var_.value, eps_);
        }
        BatchNormOut<S> out =
            batchnorm2d_train(tape, x, tape.param(gamma_), tape.param(beta_), eps_);
        S* rm = running_mean_.value.mutable_data();
        S* rv = running_var_.value.mutable_data();
        for (std::size_t c = 0; c < out.batch_mean.size(); ++c) {
            rm[c] = momentum_ * rm[c] + (S(1) - momentum_) * out.batch_mean[c];
            rv[c] = momentum_ * rv[c] + (S(1) - momentum_) * out.batch_var[c];
        }
        return out.y;
    }

    void collect(std::vector<Parameter<S>*>& params) {
        params.push_back(&gamma_);
        params.push_back(&beta_);
    }

    void collect_buffers(std::vector<ModuleBuffer<S>*>& buffers) {
        buffers.push_back(&running_mean_);
        buffers.push_back(&running_var_);
    }

    void set_trainable(bool trainable) {
        gamma_.trainable = trainable;
        beta_.trainable = trainable;
    }

private:
    Parameter<S> gamma_;
    Parameter<S> beta_;
    ModuleBuffer<S> running_mean_;
    ModuleBuffer<S> running_var_;
    S eps_;
    S momentum_;
};

template <typename S>
class Dense {
public:
    Dense(const std::string& name, i64 in_features, i64 out_features, Rng& rng) {
        weight_.name = name + ".weight";
        weight_.value = detail::he_normal<S>(rng, {in_features, out_features}, in_features);
        bias_.name = name + ".bias";
        bias_.value = Tensor<S>::zeros({out_features});
    }

    Var<S> forward(Tape<S>& tape, const Var<S>& x) {
        return ops::bias_add(tape, ops::matmul(tape, x, tape.param(weight_)),
                             tape.param(bias_));
    }

    void collect(std::vector<Parameter<S>*>& params) {
        params.push_back(&weight_);
        params.push_back(&bias_);
    }

    void set_trainable(bool trainable) {
        weight_.trainable = trainable;
        bias_.trainable = trainable;
    }

private:
    Parameter<S> weight_;
    Parameter<S> bias_;
};

// Two 3x3 conv+bn stages with an additive shortcut; the shortcut gains a
// 1x1 projection when the block changes resolution or width.
template <typename S>
class ResidualBlock {
public:
    ResidualBlock(const std::string& name, i64 in_ch, i64 out_ch, i64 stride, Rng& rng)
        : conv1_(name + ".conv1", in_ch, out_ch, 3, stride, 1, rng),
          bn1_(name + ".bn1", out_ch),
          conv2_(name + ".conv2", out_ch, out_ch, 3, 1, 1, rng),
          bn2_(name + ".bn2", out_ch) {
        if (stride != 1 || in_ch != out_ch) {
            proj_.emplace(name + ".proj", in_ch, out_ch, 1, stride, 0, rng);
            proj_bn_.emplace(name + ".proj_bn", out_ch);
        }
    }

    Var<S> forward(Tape<S>& tape, const Var<S>& x, bool training) {
        Var<S> h = ops::relu(tape, bn1_.forward(tape, conv1_.forward(tape, x), training));
        h = bn2_.forward(tape, conv2_.forward(tape, h), training);
        Var<S> shortcut = x;
        if (proj_) {
            shortcut = proj_bn_->forward(tape, proj_->forward(tape, x), training);
        }
        return ops::relu(tape, ops::add(tape, h, shortcut));
    }

    void collect(std::vector<Parameter<S>*>& params) {
        conv1_.collect(params);
        bn1_.collect(params);
        conv2_.collect(params);
        bn2_.collect(params);
        if (proj_) {
            proj_->collect(params);
            proj_bn_->collect(params);
        }
    }

    void collect_buffers(std::vector<ModuleBuffer<S>*>& buffers) {
        bn1_.collect_buffers(buffers);
        bn2_.collect_buffers(buffers);
        if (proj_bn_) {
            proj_bn_->collect_buffers(buffers);
        }
    }

    void set_trainable(bool trainable) {
        conv1_.set_trainable(trainable);
        bn1_.set_trainable(trainable);
        conv2_.set_trainable(trainable);
        bn2_.set_trainable(trainable);
        if (proj_) {
            proj_->set_trainable(trainable);
            proj_bn_->set_trainable(trainable);
        }
    }

private:
    Conv2d<S> conv1_;
    BatchNorm2d<S> bn1_;
    Conv2d<S> conv2_;
    BatchNorm2d<S> bn2_;
    std::optional<Conv2d<S>> proj_;
    std::optional<BatchNorm2d<S>> proj_bn_;
};

}  // namespace wnet::nn
