#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "wnet/ops.hpp"

namespace wnet::nn {

template <typename S>
Var<S> sigmoid(Tape<S>& tape, const Var<S>& x) {
    Tensor<S> out = Tensor<S>::zeros(x.value.shape());
    const S* xp = x.value.data();
    S* o = out.mutable_data();
    for (i64 i = 0; i < x.value.numel(); ++i) {
        const S z = xp[i];
        if (z >= S(0)) {
            o[i] = S(1) / (S(1) + std::exp(-z));
        } else {
            const S e = std::exp(z);
            o[i] = e / (S(1) + e);
        }
    }
    Tensor<S> saved = out;
    auto backward = [x, saved, &tape](const Tensor<S>& g) {
        Tensor<S> gx = Tensor<S>::zeros(g.shape());
        const S* gp = g.data();
        const S* yp = saved.data();
        S* gxp = gx.mutable_data();
        for (i64 i = 0; i < g.numel(); ++i) {
            gxp[i] = gp[i] * yp[i] * (S(1) - yp[i]);
        }
        tape.accumulate(x, gx);
    };
    return ops::detail::emit(tape, x.tracked(), std::move(out), std::move(backward));
}

// Row-wise softmax over the class axis of logits [N,C], shifted by the row
// max before exponentiation.
template <typename S>
Var<S> softmax(Tape<S>& tape, const Var<S>& x) {
    if (x.value.rank() != 2) {
        throw ShapeError("softmax needs [N,C] logits, got " + x.value.shape_string());
    }
    const i64 n = x.value.dim(0);
    const i64 c = x.value.dim(1);
    Tensor<S> out = Tensor<S>::zeros(x.value.shape());
    const S* xp = x.value.data();
    S* o = out.mutable_data();
    for (i64 r = 0; r < n; ++r) {
        const S* row = xp + r * c;
        S m = row[0];
        for (i64 j = 1; j < c; ++j) {
            if (row[j] > m) m = row[j];
        }
        S denom = S(0);
        for (i64 j = 0; j < c; ++j) {
            const S e = std::exp(row[j] - m);
            o[r * c + j] = e;
            denom += e;
        }
        for (i64 j = 0; j < c; ++j) {
            o[r * c + j] /= denom;
        }
    }
    Tensor<S> saved = out;
    auto backward = [x, saved, n, c, &tape](const Tensor<S>& g) {
        Tensor<S> gx = Tensor<S>::zeros(g.shape());
        const S* gp = g.data();
        const S* yp = saved.data();
        S* gxp = gx.mutable_data();
        for (i64 r = 0; r < n; ++r) {
            S dot = S(0);
            for (i64 j = 0; j < c; ++j) {
                dot += gp[r * c + j] * yp[r * c + j];
            }
            for (i64 j = 0; j < c; ++j) {
                gxp[r * c + j] = yp[r * c + j] * (gp[r * c + j] - dot);
            }
        }
        tape.accumulate(x, gx);
    };
    return ops::detail::emit(tape, x.tracked(), std::move(out), std::move(backward));
}

template <typename S>
struct SoftmaxCrossEntropy {
    Var<S> loss;
    Tensor<S> probs;
};

// Mean cross-entropy of softmax(logits) against integer labels, fused so
// the backward pass is the clean (probs - onehot) / N form.
template <typename S>
SoftmaxCrossEntropy<S> softmax_cross_entropy(Tape<S>& tape, const Var<S>& logits,
                                             const std::vector<i64>& labels) {
    if (logits.value.rank() != 2) {
        throw ShapeError("cross-entropy needs [N,C] logits, got " + logits.value.shape_string());
    }
    const i64 n = logits.value.dim(0);
    const i64 c = logits.value.dim(1);
    if (static_cast<i64>(labels.size()) != n) {
        throw ShapeError("label count does not match batch size");
    }
    for (i64 label : labels) {
        if (label < 0 || label >= c) {
            throw ValueError("label " + std::to_string(label) + " out of range for " +
                             std::to_string(c) + " classes");
        }
    }

    Tensor<S> probs = Tensor<S>::zeros(logits.value.shape());
    const S* xp = logits.value.data();
    S* pp = probs.mutable_data();
    S total = S(0);
    for (i64 r = 0; r < n; ++r) {
        const S* row = xp + r * c;
        S m = row[0];
        for (i64 j = 1; j < c; ++j) {
            if (row[j] > m) m = row[j];
        }
        S denom = S(0);
        for (i64 j = 0; j < c; ++j) {
            const S e = std::exp(row[j] - m);
            pp[r * c + j] = e;
            denom += e;
        }
        for (i64 j = 0; j < c; ++j) {
            pp[r * c + j] /= denom;
        }
        S p = pp[r * c + labels[static_cast<std::size_t>(r)]];
        if (p < S(1e-30)) p = S(1e-30);
        total += -std::log(p);
    }
    Tensor<S> loss_val = Tensor<S>::scalar(total / S(n));

    Tensor<S> saved = probs;
    auto backward = [logits, saved, labels, n, c, &tape](const Tensor<S>& g) {
        const S scale = g.item() / S(n);
        Tensor<S> gx = Tensor<S>::zeros(logits.value.shape());
        const S* yp = saved.data();
        S* gxp = gx.mutable_data();
        for (i64 r = 0; r < n; ++r) {
            const i64 label = labels[static_cast<std::size_t>(r)];
            for (i64 j = 0; j < c; ++j) {
                const S onehot = (j == label) ? S(1) : S(0);
                gxp[r * c + j] = scale * (yp[r * c + j] - onehot);
            }
        }
        tape.accumulate(logits, gx);
    };
    SoftmaxCrossEntropy<S> result;
    result.loss = ops::detail::emit(tape, logits.tracked(), std::move(loss_val), std::move(backward));
    result.probs = probs;
    return result;
}

// Mean binary cross-entropy against targets in {0,1}.  Probabilities are
// clipped to [1e-7, 1 - 1e-7]; a clipped coordinate contributes no gradient.
template <typename S>
Var<S> binary_cross_entropy(Tape<S>& tape, const Var<S>& probs, const Tensor<S>& targets) {
    const i64 n = probs.value.numel();
    if (targets.numel() != n) {
        throw ShapeError("target count " + targets.shape_string() +
                         " does not match predictions " + probs.value.shape_string());
    }
    const S clip = S(1e-7);
    const S* yp = probs.value.data();
    const S* tp = targets.data();
    S total = S(0);
    for (i64 i = 0; i < n; ++i) {
        S y = yp[i];
        if (y < clip) y = clip;
        if (y > S(1) - clip) y = S(1) - clip;
        total += -(tp[i] * std::log(y) + (S(1) - tp[i]) * std::log(S(1) - y));
    }
    Tensor<S> loss_val = Tensor<S>::scalar(total / S(n));
    auto backward = [probs, targets, n, clip, &tape](const Tensor<S>& g) {
        const S scale = g.item() / S(n);
        Tensor<S> gy = Tensor<S>::zeros(probs.value.shape());
        const S* yp2 = probs.value.data();
        const S* tp2 = targets.data();
        S* gp = gy.mutable_data();
        for (i64 i = 0; i < n; ++i) {
            const S y = yp2[i];
            if (y < clip || y > S(1) - clip) {
                continue;
            }
            gp[i] = scale * (-tp2[i] / y + (S(1) - tp2[i]) / (S(1) - y));
        }
        tape.accumulate(probs, gy);
    };
    return ops::detail::emit(tape, probs.tracked(), std::move(loss_val), std::move(backward));
}

namespace detail {

inline i64 conv_out_extent(i64 in, i64 kernel, i64 stride, i64 pad) {
    const i64 span = in + 2 * pad - kernel;
    if (span < 0) {
        throw ShapeError("kernel larger than padded input");
    }
    return span / stride + 1;
}

// Gathers the kh*kw patch under each output position of one sample into a
// [C*kh*kw, OH*OW] matrix; out-of-bounds taps read as zero.
template <typename S>
void im2col(const S* x, i64 c, i64 h, i64 w, i64 kh, i64 kw, i64 stride, i64 pad, i64 oh, i64 ow,
            S* cols) {
    for (i64 ch = 0; ch < c; ++ch) {
        for (i64 ki = 0; ki < kh; ++ki) {
            for (i64 kj = 0; kj < kw; ++kj) {
                const i64 row = (ch * kh + ki) * kw + kj;
                S* dst = cols + row * (oh * ow);
                for (i64 i = 0; i < oh; ++i) {
                    const i64 hi = i * stride + ki - pad;
                    for (i64 j = 0; j < ow; ++j) {
                        const i64 wj = j * stride + kj - pad;
                        const bool inside = hi >= 0 && hi < h && wj >= 0 && wj < w;
                        dst[i * ow + j] = inside ? x[(ch * h + hi) * w + wj] : S(0);
                    }
                }
            }
        }
    }
}

// Scatter-add inverse of im2col.
template <typename S>
void col2im(const S* cols, i64 c, i64 h, i64 w, i64 kh, i64 kw, i64 stride, i64 pad, i64 oh,
            i64 ow, S* x) {
    for (i64 ch = 0; ch < c; ++ch) {
        for (i64 ki = 0; ki < kh; ++ki) {
            for (i64 kj = 0; kj < kw; ++kj) {
                const i64 row = (ch * kh + ki) * kw + kj;
                const S* src = cols + row * (oh * ow);
                for (i64 i = 0; i < oh; ++i) {
                    const i64 hi = i * stride + ki - pad;
                    if (hi < 0 || hi >= h) continue;
                    for (i64 j = 0; j < ow; ++j) {
                        const i64 wj = j * stride + kj - pad;
                        if (wj < 0 || wj >= w) continue;
                        x[(ch * h + hi) * w + wj] += src[i * ow + j];
                    }
                }
            }
        }
    }
}

}  // namespace detail

// 2-D convolution of x [N,C,H,W] with w [F,C,kh,kw] and bias b [F], done as
// im2col + matmul per sample.  The patch matrix is rebuilt in the backward
// pass instead of being captured; at stem sizes it dwarfs the activations.
template <typename S>
Var<S> conv2d(Tape<S>& tape, const Var<S>& x, const Var<S>& w, const Var<S>& b, i64 stride,
              i64 pad) {
    const Tensor<S>& xv = x.value;
    const Tensor<S>& wv = w.value;
    if (xv.rank() != 4 || wv.rank() != 4) {
        throw ShapeError("conv2d needs [N,C,H,W] input and [F,C,kh,kw] weights");
    }
    if (xv.dim(1) != wv.dim(1)) {
        throw ShapeError("conv2d channel mismatch " + xv.shape_string() + " vs " +
                         wv.shape_string());
    }
    if (stride < 1) throw ValueError("conv2d stride must be positive");
    const i64 n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
    const i64 f = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
    if (b.value.numel() != f) {
        throw ShapeError("conv2d bias shape " + b.value.shape_string() + " does not match " +
                         std::to_string(f) + " filters");
    }
    const i64 oh = detail::conv_out_extent(h, kh, stride, pad);
    const i64 ow = detail::conv_out_extent(wd, kw, stride, pad);
    const i64 patch = c * kh * kw;
    const i64 cells = oh * ow;

    Tensor<S> out = Tensor<S>::zeros({n, f, oh, ow});
    {
        Tensor<S> cols = Tensor<S>::zeros({patch, cells});
        const S* bp = b.value.data();
        for (i64 s = 0; s < n; ++s) {
            detail::im2col(xv.data() + s * c * h * wd, c, h, wd, kh, kw, stride, pad, oh, ow,
                           cols.mutable_data());
            S* yp = out.mutable_data() + s * f * cells;
            ops::detail::k_gemm(wv.data(), cols.data(), yp, static_cast<std::size_t>(f),
                                static_cast<std::size_t>(patch), static_cast<std::size_t>(cells));
            for (i64 fo = 0; fo < f; ++fo) {
                const S bias = bp[fo];
                for (i64 i = 0; i < cells; ++i) yp[fo * cells + i] += bias;
            }
        }
    }

    const bool tracked = x.tracked() || w.tracked() || b.tracked();
    auto backward = [x, w, b, n, c, h, wd, f, kh, kw, stride, pad, oh, ow, patch, cells,
                     &tape](const Tensor<S>& g) {
        const Tensor<S> w2t = ops::transposed2d(w.value.reshaped({f, patch}));
        Tensor<S> cols = Tensor<S>::zeros({patch, cells});
        Tensor<S> gw = Tensor<S>::zeros({f, patch});
        Tensor<S> gw_part = Tensor<S>::zeros({f, patch});
        Tensor<S> gb = Tensor<S>::zeros({f});
        Tensor<S> gx = Tensor<S>::zeros(x.value.shape());
        Tensor<S> gcols = Tensor<S>::zeros({patch, cells});
        for (i64 s = 0; s < n; ++s) {
            const S* gs = g.data() + s * f * cells;
            if (w.tracked()) {
                detail::im2col(x.value.data() + s * c * h * wd, c, h, wd, kh, kw, stride, pad, oh,
                               ow, cols.mutable_data());
                const Tensor<S> colst = ops::transposed2d(cols);
                ops::detail::k_gemm(gs, colst.data(), gw_part.mutable_data(),
                                    static_cast<std::size_t>(f), static_cast<std::size_t>(cells),
                                    static_cast<std::size_t>(patch));
                ops::detail::k_add(gw.data(), gw_part.data(), gw.mutable_data(),
                                   static_cast<std::size_t>(f * patch));
            }
            if (x.tracked()) {
                ops::detail::k_gemm(w2t.data(), gs, gcols.mutable_data(),
                                    static_cast<std::size_t>(patch),
                                    static_cast<std::size_t>(f), static_cast<std::size_t>(cells));
                detail::col2im(gcols.data(), c, h, wd, kh, kw, stride, pad, oh, ow,
                               gx.mutable_data() + s * c * h * wd);
            }
            if (b.tracked()) {
                S* gbp = gb.mutable_data();
                for (i64 fo = 0; fo < f; ++fo) {
                    for (i64 i = 0; i < cells; ++i) gbp[fo] += gs[fo * cells + i];
                }
            }
        }
        if (x.tracked()) tape.accumulate(x, gx);
        if (w.tracked()) tape.accumulate(w, gw.reshaped(w.value.shape()));
        if (b.tracked()) tape.accumulate(b, gb);
    };
    return ops::detail::emit(tape, tracked, std::move(out), std::move(backward));
}

// Batch normalization over [N,C,H,W] in training form: per-channel batch
// mean and biased variance.  Returns the computed stats so the caller can
// fold them into its running estimates.
template <typename S>
struct BatchNormOut {
    Var<S> y;
    std::vector<S> batch_mean;
    std::vector<S> batch_var;
};

template <typename S>
BatchNormOut<S> batchnorm2d_train(Tape<S>& tape, const Var<S>& x, const Var<S>& gamma,
                                  const Var<S>& beta, S eps) {
    const Tensor<S>& xv = x.value;
    if (xv.rank() != 4) {
        throw ShapeError("batchnorm needs [N,C,H,W], got " + xv.shape_string());
    }
    const i64 n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    if (gamma.value.numel() != c || beta.value.numel() != c) {
        throw ShapeError("batchnorm parameter size does not match " + std::to_string(c) +
                         " channels");
    }
    const i64 plane = h * w;
    const i64 m = n * plane;
    if (m == 0) throw ShapeError("batchnorm over empty batch");

    std::vector<S> mean(static_cast<std::size_t>(c), S(0));
    std::vector<S> var(static_cast<std::size_t>(c), S(0));
    const S* xp = xv.data();
    for (i64 ch = 0; ch < c; ++ch) {
        S acc = S(0);
        for (i64 s = 0; s < n; ++s) {
            const S* base = xp + (s * c + ch) * plane;
            for (i64 i = 0; i < plane; ++i) acc += base[i];
        }
        mean[static_cast<std::size_t>(ch)] = acc / S(m);
    }
    for (i64 ch = 0; ch < c; ++ch) {
        const S mu = mean[static_cast<std::size_t>(ch)];
        S acc = S(0);
        for (i64 s = 0; s < n; ++s) {
            const S* base = xp + (s * c + ch) * plane;
            for (i64 i = 0; i < plane; ++i) {
                const S d = base[i] - mu;
                acc += d * d;
            }
        }
        var[static_cast<std::size_t>(ch)] = acc / S(m);
    }

    std::vector<S> ivar(static_cast<std::size_t>(c));
    for (i64 ch = 0; ch < c; ++ch) {
        ivar[static_cast<std::size_t>(ch)] =
            S(1) / std::sqrt(var[static_cast<std::size_t>(ch)] + eps);
    }

    Tensor<S> xhat = Tensor<S>::zeros(xv.shape());
    Tensor<S> out = Tensor<S>::zeros(xv.shape());
    {
        S* xh = xhat.mutable_data();
        S* o = out.mutable_data();
        const S* gp = gamma.value.data();
        const S* bp = beta.value.data();
        for (i64 s = 0; s < n; ++s) {
            for (i64 ch = 0; ch < c; ++ch) {
                const i64 base = (s * c + ch) * plane;
                const S mu = mean[static_cast<std::size_t>(ch)];
                const S iv = ivar[static_cast<std::size_t>(ch)];
                const S ga = gp[ch];
                const S be = bp[ch];
                for (i64 i = 0; i < plane; ++i) {
                    const S v = (xp[base + i] - mu) * iv;
                    xh[base + i] = v;
                    o[base + i] = ga * v + be;
                }
            }
        }
    }

    const bool tracked = x.tracked() || gamma.tracked() || beta.tracked();
    auto backward = [x, gamma, beta, xhat, ivar, n, c, plane, m, &tape](const Tensor<S>& g) {
        const S* gp = g.data();
        const S* xh = xhat.data();
        if (gamma.tracked() || beta.tracked()) {
            Tensor<S> ggamma = Tensor<S>::zeros({c});
            Tensor<S> gbeta = Tensor<S>::zeros({c});
            S* ggp = ggamma.mutable_data();
            S* gbp = gbeta.mutable_data();
            for (i64 s = 0; s < n; ++s) {
                for (i64 ch = 0; ch < c; ++ch) {
                    const i64 base = (s * c + ch) * plane;
                    for (i64 i = 0; i < plane; ++i) {
                        ggp[ch] += gp[base + i] * xh[base + i];
                        gbp[ch] += gp[base + i];
                    }
                }
            }
            tape.accumulate(gamma, ggamma);
            tape.accumulate(beta, gbeta);
        }
        if (x.tracked()) {
            std::vector<S> sum_g(static_cast<std::size_t>(c), S(0));
            std::vector<S> sum_gx(static_cast<std::size_t>(c), S(0));
            for (i64 s = 0; s < n; ++s) {
                for (i64 ch = 0; ch < c; ++ch) {
                    const i64 base = (s * c + ch) * plane;
                    for (i64 i = 0; i < plane; ++i) {
                        sum_g[static_cast<std::size_t>(ch)] += gp[base + i];
                        sum_gx[static_cast<std::size_t>(ch)] += gp[base + i] * xh[base + i];
                    }
                }
            }
            Tensor<S> gx = Tensor<S>::zeros(x.value.shape());
            S* gxp = gx.mutable_data();
            const S* ga = gamma.value.data();
            for (i64 s = 0; s < n; ++s) {
                for (i64 ch = 0; ch < c; ++ch) {
                    const i64 base = (s * c + ch) * plane;
                    const S k = ga[ch] * ivar[static_cast<std::size_t>(ch)];
                    const S mg = sum_g[static_cast<std::size_t>(ch)] / S(m);
                    const S mgx = sum_gx[static_cast<std::size_t>(ch)] / S(m);
                    for (i64 i = 0; i < plane; ++i) {
                        gxp[base + i] = k * (gp[base + i] - mg - xh[base + i] * mgx);
                    }
                }
            }
            tape.accumulate(x, gx);
        }
    };

    BatchNormOut<S> result;
    result.y = ops::detail::emit(tape, tracked, std::move(out), std::move(backward));
    result.batch_mean = std::move(mean);
    result.batch_var = std::move(var);
    return result;
}

// Inference form: per-channel affine transform from the running estimates.
template <typename S>
Var<S> batchnorm2d_eval(Tape<S>& tape, const Var<S>& x, const Var<S>& gamma, const Var<S>& beta,
                        const Tensor<S>& running_mean, const Tensor<S>& running_var, S eps) {
    const Tensor<S>& xv = x.value;
    if (xv.rank() != 4) {
        throw ShapeError("batchnorm needs [N,C,H,W], got " + xv.shape_string());
    }
    const i64 n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    if (gamma.value.numel() != c || beta.value.numel() != c || running_mean.numel() != c ||
        running_var.numel() != c) {
        throw ShapeError("batchnorm parameter size does not match " + std::to_string(c) +
                         " channels");
    }
    const i64 plane = h * w;
    std::vector<S> ivar(static_cast<std::size_t>(c));
    for (i64 ch = 0; ch < c; ++ch) {
        ivar[static_cast<std::size_t>(ch)] = S(1) / std::sqrt(running_var.data()[ch] + eps);
    }

    Tensor<S> out = Tensor<S>::zeros(xv.shape());
    const S* xp = xv.data();
    S* o = out.mutable_data();
    const S* gp = gamma.value.data();
    const S* bp = beta.value.data();
    const S* rm = running_mean.data();
    for (i64 s = 0; s < n; ++s) {
        for (i64 ch = 0; ch < c; ++ch) {
            const i64 base = (s * c + ch) * plane;
            const S iv = ivar[static_cast<std::size_t>(ch)];
            const S mu = rm[ch];
            const S ga = gp[ch];
            const S be = bp[ch];
            for (i64 i = 0; i < plane; ++i) {
                o[base + i] = ga * (xp[base + i] - mu) * iv + be;
            }
        }
    }

    const bool tracked = x.tracked() || gamma.tracked() || beta.tracked();
    auto backward = [x, gamma, beta, running_mean, ivar, n, c, plane, &tape](const Tensor<S>& g) {
        const S* gp2 = g.data();
        const S* xp2 = x.value.data();
        const S* rm2 = running_mean.data();
        if (gamma.tracked() || beta.tracked()) {
            Tensor<S> ggamma = Tensor<S>::zeros({c});
            Tensor<S> gbeta = Tensor<S>::zeros({c});
            S* ggp = ggamma.mutable_data();
            S* gbp = gbeta.mutable_data();
            for (i64 s = 0; s < n; ++s) {
                for (i64 ch = 0; ch < c; ++ch) {
                    const i64 base = (s * c + ch) * plane;
                    const S iv = ivar[static_cast<std::size_t>(ch)];
                    const S mu = rm2[ch];
                    for (i64 i = 0; i < plane; ++i) {
                        ggp[ch] += gp2[base + i] * (xp2[base + i] - mu) * iv;
                        gbp[ch] += gp2[base + i];
                    }
                }
            }
            tape.accumulate(gamma, ggamma);
            tape.accumulate(beta, gbeta);
        }
        if (x.tracked()) {
            Tensor<S> gx = Tensor<S>::zeros(x.value.shape());
            S* gxp = gx.mutable_data();
            const S* ga = gamma.value.data();
            for (i64 s = 0; s < n; ++s) {
                for (i64 ch = 0; ch < c; ++ch) {
                    const i64 base = (s * c + ch) * plane;
                    const S k = ga[ch] * ivar[static_cast<std::size_t>(ch)];
                    for (i64 i = 0; i < plane; ++i) {
                        gxp[base + i] = k * gp2[base + i];
                    }
                }
            }
            tape.accumulate(x, gx);
        }
    };
    return ops::detail::emit(tape, tracked, std::move(out), std::move(backward));
}

// Max pooling over [N,C,H,W]; padding cells never win.  Ties go to the
// earliest window position.
template <typename S>
Var<S> maxpool2d(Tape<S>& tape, const Var<S>& x, i64 kernel, i64 stride, i64 pad) {
    const Tensor<S>& xv = x.value;
    if (xv.rank() != 4) {
        throw ShapeError("maxpool needs [N,C,H,W], got " + xv.shape_string());
    }
    const i64 n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    const i64 oh = detail::conv_out_extent(h, kernel, stride, pad);
    const i64 ow = detail::conv_out_extent(w, kernel, stride, pad);

    Tensor<S> out = Tensor<S>::zeros({n, c, oh, ow});
    auto argmax = std::make_shared<std::vector<i64>>(
        static_cast<std::size_t>(n * c * oh * ow), i64(-1));
    const S* xp = xv.data();
    S* o = out.mutable_data();
    i64 oidx = 0;
    for (i64 s = 0; s < n; ++s) {
        for (i64 ch = 0; ch < c; ++ch) {
            const i64 base = (s * c + ch) * h * w;
            for (i64 i = 0; i < oh; ++i) {
                for (i64 j = 0; j < ow; ++j, ++oidx) {
                    S best = S(0);
                    i64 best_at = -1;
                    for (i64 ki = 0; ki < kernel; ++ki) {
                        const i64 hi = i * stride + ki - pad;
                        if (hi < 0 || hi >= h) continue;
                        for (i64 kj = 0; kj < kernel; ++kj) {
                            const i64 wj = j * stride + kj - pad;
                            if (wj < 0 || wj >= w) continue;
                            const S v = xp[base + hi * w + wj];
                            if (best_at < 0 || v > best) {
                                best = v;
                                best_at = base + hi * w + wj;
                            }
                        }
                    }
                    if (best_at < 0) {
                        throw ShapeError("maxpool window contains no input cells");
                    }
                    o[oidx] = best;
                    (*argmax)[static_cast<std::size_t>(oidx)] = best_at;
                }
            }
        }
    }

    auto backward = [x, argmax, &tape](const Tensor<S>& g) {
        Tensor<S> gx = Tensor<S>::zeros(x.value.shape());
        S* gxp = gx.mutable_data();
        const S* gp = g.data();
        for (i64 i = 0; i < g.numel(); ++i) {
            gxp[(*argmax)[static_cast<std::size_t>(i)]] += gp[i];
        }
        tape.accumulate(x, gx);
    };
    return ops::detail::emit(tape, x.tracked(), std::move(out), std::move(backward));
}

// [N,C,H,W] -> [N,C] by averaging each channel plane.
template <typename S>
Var<S> global_avgpool(Tape<S>& tape, const Var<S>& x) {
    const Tensor<S>& xv = x.value;
    if (xv.rank() != 4) {
        throw ShapeError("global_avgpool needs [N,C,H,W], got " + xv.shape_string());
    }
    const i64 n = xv.dim(0), c = xv.dim(1), plane = xv.dim(2) * xv.dim(3);
    if (plane == 0) throw ShapeError("global_avgpool over empty plane");
    Tensor<S> out = Tensor<S>::zeros({n, c});
    const S* xp = xv.data();
    S* o = out.mutable_data();
    for (i64 s = 0; s < n; ++s) {
        for (i64 ch = 0; ch < c; ++ch) {
            const S* base = xp + (s * c + ch) * plane;
            S acc = S(0);
            for (i64 i = 0; i < plane; ++i) acc += base[i];
            o[s * c + ch] = acc / S(plane);
        }
    }
    auto backward = [x, n, c, plane, &tape](const Tensor<S>& g) {
        Tensor<S> gx = Tensor<S>::zeros(x.value.shape());
        S* gxp = gx.mutable_data();
        const S* gp = g.data();
        for (i64 s = 0; s < n; ++s) {
            for (i64 ch = 0; ch < c; ++ch) {
                const S v = gp[s * c + ch] / S(plane);
                S* base = gxp + (s * c + ch) * plane;
                for (i64 i = 0; i < plane; ++i) base[i] = v;
            }
        }
        tape.accumulate(x, gx);
    };
    return ops::detail::emit(tape, x.tracked(), std::move(out), std::move(backward));
}

}  // namespace wnet::nn
