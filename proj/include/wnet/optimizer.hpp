#pragma once

#include <cmath>
#include <unordered_map>
#include <vector>

#include "wnet/tape.hpp"

namespace wnet {

// Adam with bias correction.  Moment buffers are keyed by parameter
// identity and created on first update, so freezing or unfreezing between
// steps is safe.
template <typename S>
class Adam {
public:
    explicit Adam(S lr, S beta1 = S(0.9), S beta2 = S(0.999), S eps = S(1e-8))
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    // Applies one update from the gradients accumulated on the tape.
    // Frozen parameters are untouched; a trainable parameter that was not
    // bound into the current graph has no gradient to apply and is a
    // caller error.
    void step(Tape<S>& tape, const std::vector<Parameter<S>*>& params) {
        ++t_;
        const S bc1 = S(1) - std::pow(beta1_, S(t_));
        const S bc2 = S(1) - std::pow(beta2_, S(t_));
        for (Parameter<S>* p : params) {
            if (!p->trainable) {
                continue;
            }
            if (!p->bound_on(tape) || !p->bound_var.tracked()) {
                throw ValueError("trainable parameter " + p->name + " has no gradient");
            }
            const Tensor<S> g = tape.grad(p->bound_var);
            Moments& m = moments_[p];
            if (!m.m.defined()) {
                m.m = Tensor<S>::zeros(p->value.shape());
                m.v = Tensor<S>::zeros(p->value.shape());
            }
            S* mp = m.m.mutable_data();
            S* vp = m.v.mutable_data();
            S* w = p->value.mutable_data();
            const S* gp = g.data();
            for (i64 i = 0; i < g.numel(); ++i) {
                mp[i] = beta1_ * mp[i] + (S(1) - beta1_) * gp[i];
                vp[i] = beta2_ * vp[i] + (S(1) - beta2_) * gp[i] * gp[i];
                const S mhat = mp[i] / bc1;
                const S vhat = vp[i] / bc2;
                w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

    i64 steps_taken() const { return t_; }

private:
    struct Moments {
        Tensor<S> m;
        Tensor<S> v;
    };

    S lr_;
    S beta1_;
    S beta2_;
    S eps_;
    i64 t_ = 0;
    std::unordered_map<const Parameter<S>*, Moments> moments_;
};

}  // namespace wnet
