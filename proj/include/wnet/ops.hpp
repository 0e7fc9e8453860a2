#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "wnet/kernels.hpp"
#include "wnet/tape.hpp"
#include "wnet/tensor.hpp"

namespace wnet::ops {

namespace detail {

// Float goes through the runtime-selected kernel backend; every other
// scalar type uses the reference templates.
template <typename S>
inline void k_add(const S* a, const S* b, S* out, std::size_t n) {
    kernels::ref::add(a, b, out, n);
}
template <>
inline void k_add<float>(const float* a, const float* b, float* out, std::size_t n) {
    kernels::active().add(a, b, out, n);
}

template <typename S>
inline void k_sub(const S* a, const S* b, S* out, std::size_t n) {
    kernels::ref::sub(a, b, out, n);
}
template <>
inline void k_sub<float>(const float* a, const float* b, float* out, std::size_t n) {
    kernels::active().sub(a, b, out, n);
}

template <typename S>
inline void k_mul(const S* a, const S* b, S* out, std::size_t n) {
    kernels::ref::mul(a, b, out, n);
}
template <>
inline void k_mul<float>(const float* a, const float* b, float* out, std::size_t n) {
    kernels::active().mul(a, b, out, n);
}

template <typename S>
inline void k_relu(const S* a, S* out, std::size_t n) {
    kernels::ref::relu(a, out, n);
}
template <>
inline void k_relu<float>(const float* a, float* out, std::size_t n) {
    kernels::active().relu(a, out, n);
}

template <typename S>
inline void k_relu_mask_mul(const S* a, const S* g, S* out, std::size_t n) {
    kernels::ref::relu_mask_mul(a, g, out, n);
}
template <>
inline void k_relu_mask_mul<float>(const float* a, const float* g, float* out, std::size_t n) {
    kernels::active().relu_mask_mul(a, g, out, n);
}

template <typename S>
inline void k_gemm(const S* a, const S* b, S* c, std::size_t m, std::size_t k, std::size_t n) {
    kernels::ref::gemm(a, b, c, m, k, n);
}
template <>
inline void k_gemm<float>(const float* a, const float* b, float* c, std::size_t m, std::size_t k,
                          std::size_t n) {
    kernels::active().gemm(a, b, c, m, k, n);
}

template <typename S, typename F>
inline Var<S> emit(Tape<S>& tape, bool tracked, Tensor<S> value, F backward) {
    if (!tracked) {
        return Tape<S>::constant(std::move(value));
    }
    return tape.record(std::move(value), std::move(backward));
}

template <typename S>
inline S reduce_sum(const Tensor<S>& t) {
    const S* p = t.data();
    S acc = S(0);
    for (i64 i = 0; i < t.numel(); ++i) acc += p[i];
    return acc;
}

}  // namespace detail

// Raw 2-D transpose; not itself differentiable, used by matmul backward.
template <typename S>
Tensor<S> transposed2d(const Tensor<S>& t) {
    if (t.rank() != 2) {
        throw ShapeError("transpose needs a rank-2 tensor, got " + t.shape_string());
    }
    const i64 rows = t.dim(0);
    const i64 cols = t.dim(1);
    Tensor<S> out = Tensor<S>::zeros({cols, rows});
    const S* src = t.data();
    S* dst = out.mutable_data();
    for (i64 r = 0; r < rows; ++r) {
        for (i64 c = 0; c < cols; ++c) {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
    return out;
}

// Elementwise binary op with scalar broadcast on either side.  kind selects
// forward arithmetic and the matching gradient flow.
enum class BinaryKind { Add, Sub, Mul };

template <typename S>
Var<S> binary(Tape<S>& tape, const Var<S>& a, const Var<S>& b, BinaryKind kind) {
    const Tensor<S>& av = a.value;
    const Tensor<S>& bv = b.value;
    const bool same = av.same_shape(bv);
    const bool b_scalar = !same && bv.numel() == 1;
    const bool a_scalar = !same && !b_scalar && av.numel() == 1;
    if (!same && !b_scalar && !a_scalar) {
        throw ShapeError("shape mismatch " + av.shape_string() + " vs " + bv.shape_string());
    }

    const std::size_t n = static_cast<std::size_t>(same || b_scalar ? av.numel() : bv.numel());
    Tensor<S> out = Tensor<S>::zeros(same || b_scalar ? av.shape() : bv.shape());
    S* o = out.mutable_data();
    const S* ap = av.data();
    const S* bp = bv.data();
    if (same) {
        switch (kind) {
            case BinaryKind::Add: detail::k_add(ap, bp, o, n); break;
            case BinaryKind::Sub: detail::k_sub(ap, bp, o, n); break;
            case BinaryKind::Mul: detail::k_mul(ap, bp, o, n); break;
        }
    } else if (b_scalar) {
        const S s = bp[0];
        switch (kind) {
            case BinaryKind::Add:
                for (std::size_t i = 0; i < n; ++i) o[i] = ap[i] + s;
                break;
            case BinaryKind::Sub:
                for (std::size_t i = 0; i < n; ++i) o[i] = ap[i] - s;
                break;
            case BinaryKind::Mul:
                for (std::size_t i = 0; i < n; ++i) o[i] = ap[i] * s;
                break;
        }
    } else {
        const S s = ap[0];
        switch (kind) {
            case BinaryKind::Add:
                for (std::size_t i = 0; i < n; ++i) o[i] = s + bp[i];
                break;
            case BinaryKind::Sub:
                for (std::size_t i = 0; i < n; ++i) o[i] = s - bp[i];
                break;
            case BinaryKind::Mul:
                for (std::size_t i = 0; i < n; ++i) o[i] = s * bp[i];
                break;
        }
    }

    const bool tracked = a.tracked() || b.tracked();
    auto backward = [a, b, kind, same, b_scalar, &tape](const Tensor<S>& g) {
        auto grad_for = [&](const Var<S>& side, bool is_a) {
            const bool side_scalar = !same && (is_a ? !b_scalar : b_scalar);
            const S sign = (kind == BinaryKind::Sub && !is_a) ? S(-1) : S(1);
            Tensor<S> piece;
            if (kind == BinaryKind::Mul) {
                const Tensor<S>& other = is_a ? b.value : a.value;
                piece = Tensor<S>::zeros(g.shape());
                S* pp = piece.mutable_data();
                const S* gp = g.data();
                const S* op = other.data();
                const std::size_t cnt = static_cast<std::size_t>(g.numel());
                if (other.numel() == 1) {
                    const S s = op[0];
                    for (std::size_t i = 0; i < cnt; ++i) pp[i] = gp[i] * s;
                } else {
                    detail::k_mul(gp, op, pp, cnt);
                }
            } else if (sign == S(1)) {
                piece = g;
            } else {
                piece = Tensor<S>::zeros(g.shape());
                S* pp = piece.mutable_data();
                const S* gp = g.data();
                for (i64 i = 0; i < g.numel(); ++i) pp[i] = -gp[i];
            }
            if (side_scalar) {
                Tensor<S> reduced = Tensor<S>::zeros(side.value.shape());
                reduced.mutable_data()[0] = detail::reduce_sum(piece);
                tape.accumulate(side, reduced);
            } else {
                tape.accumulate(side, piece);
            }
        };
        grad_for(a, true);
        grad_for(b, false);
    };
    return detail::emit(tape, tracked, std::move(out), std::move(backward));
}

template <typename S>
Var<S> add(Tape<S>& tape, const Var<S>& a, const Var<S>& b) {
    return binary(tape, a, b, BinaryKind::Add);
}

template <typename S>
Var<S> sub(Tape<S>& tape, const Var<S>& a, const Var<S>& b) {
    return binary(tape, a, b, BinaryKind::Sub);
}

template <typename S>
Var<S> mul(Tape<S>& tape, const Var<S>& a, const Var<S>& b) {
    return binary(tape, a, b, BinaryKind::Mul);
}

template <typename S>
Var<S> scale(Tape<S>& tape, const Var<S>& a, S c) {
    Tensor<S> out = Tensor<S>::zeros(a.value.shape());
    const S* ap = a.value.data();
    S* o = out.mutable_data();
    for (i64 i = 0; i < a.value.numel(); ++i) o[i] = ap[i] * c;
    auto backward = [a, c, &tape](const Tensor<S>& g) {
        Tensor<S> piece = Tensor<S>::zeros(g.shape());
        const S* gp = g.data();
        S* pp = piece.mutable_data();
        for (i64 i = 0; i < g.numel(); ++i) pp[i] = gp[i] * c;
        tape.accumulate(a, piece);
    };
    return detail::emit(tape, a.tracked(), std::move(out), std::move(backward));
}

// C[m,n] = A[m,k] * B[k,n].
template <typename S>
Var<S> matmul(Tape<S>& tape, const Var<S>& a, const Var<S>& b) {
    const Tensor<S>& av = a.value;
    const Tensor<S>& bv = b.value;
    if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
        throw ShapeError("matmul shape mismatch " + av.shape_string() + " vs " +
                         bv.shape_string());
    }
    const std::size_t m = static_cast<std::size_t>(av.dim(0));
    const std::size_t k = static_cast<std::size_t>(av.dim(1));
    const std::size_t n = static_cast<std::size_t>(bv.dim(1));
    Tensor<S> out = Tensor<S>::zeros({av.dim(0), bv.dim(1)});
    detail::k_gemm(av.data(), bv.data(), out.mutable_data(), m, k, n);

    const bool tracked = a.tracked() || b.tracked();
    auto backward = [a, b, m, k, n, &tape](const Tensor<S>& g) {
        if (a.tracked()) {
            const Tensor<S> bt = transposed2d(b.value);
            Tensor<S> ga = Tensor<S>::zeros(a.value.shape());
            detail::k_gemm(g.data(), bt.data(), ga.mutable_data(), m, n, k);
            tape.accumulate(a, ga);
        }
        if (b.tracked()) {
            const Tensor<S> at = transposed2d(a.value);
            Tensor<S> gb = Tensor<S>::zeros(b.value.shape());
            detail::k_gemm(at.data(), g.data(), gb.mutable_data(), k, m, n);
            tape.accumulate(b, gb);
        }
    };
    return detail::emit(tape, tracked, std::move(out), std::move(backward));
}

template <typename S>
Var<S> relu(Tape<S>& tape, const Var<S>& a) {
    Tensor<S> out = Tensor<S>::zeros(a.value.shape());
    detail::k_relu(a.value.data(), out.mutable_data(), static_cast<std::size_t>(a.value.numel()));
    auto backward = [a, &tape](const Tensor<S>& g) {
        Tensor<S> ga = Tensor<S>::zeros(a.value.shape());
        detail::k_relu_mask_mul(a.value.data(), g.data(), ga.mutable_data(),
                                static_cast<std::size_t>(g.numel()));
        tape.accumulate(a, ga);
    };
    return detail::emit(tape, a.tracked(), std::move(out), std::move(backward));
}

template <typename S>
Var<S> sum(Tape<S>& tape, const Var<S>& a) {
    Tensor<S> out = Tensor<S>::scalar(detail::reduce_sum(a.value));
    auto backward = [a, &tape](const Tensor<S>& g) {
        tape.accumulate(a, Tensor<S>::full(a.value.shape(), g.item()));
    };
    return detail::emit(tape, a.tracked(), std::move(out), std::move(backward));
}

template <typename S>
Var<S> mean(Tape<S>& tape, const Var<S>& a) {
    const i64 n = a.value.numel();
    if (n == 0) throw ShapeError("mean of empty tensor");
    Tensor<S> out = Tensor<S>::scalar(detail::reduce_sum(a.value) / S(n));
    auto backward = [a, n, &tape](const Tensor<S>& g) {
        tape.accumulate(a, Tensor<S>::full(a.value.shape(), g.item() / S(n)));
    };
    return detail::emit(tape, a.tracked(), std::move(out), std::move(backward));
}

// x[m,n] + b[n], b broadcast across rows.
template <typename S>
Var<S> bias_add(Tape<S>& tape, const Var<S>& x, const Var<S>& b) {
    const Tensor<S>& xv = x.value;
    const Tensor<S>& bv = b.value;
    if (xv.rank() != 2 || bv.rank() != 1 || bv.dim(0) != xv.dim(1)) {
        throw ShapeError("bias_add shape mismatch " + xv.shape_string() + " vs " +
                         bv.shape_string());
    }
    const i64 m = xv.dim(0);
    const i64 n = xv.dim(1);
    Tensor<S> out = Tensor<S>::zeros(xv.shape());
    const S* xp = xv.data();
    const S* bp = bv.data();
    S* o = out.mutable_data();
    for (i64 r = 0; r < m; ++r) {
        detail::k_add(xp + r * n, bp, o + r * n, static_cast<std::size_t>(n));
    }
    const bool tracked = x.tracked() || b.tracked();
    auto backward = [x, b, m, n, &tape](const Tensor<S>& g) {
        tape.accumulate(x, g);
        if (b.tracked()) {
            Tensor<S> gb = Tensor<S>::zeros({n});
            const S* gp = g.data();
            S* gbp = gb.mutable_data();
            for (i64 r = 0; r < m; ++r) {
                for (i64 c = 0; c < n; ++c) gbp[c] += gp[r * n + c];
            }
            tape.accumulate(b, gb);
        }
    };
    return detail::emit(tape, tracked, std::move(out), std::move(backward));
}

// Shape change that shares the buffer; gradient flows back reshaped.
template <typename S>
Var<S> reshape(Tape<S>& tape, const Var<S>& a, std::vector<i64> shape) {
    Tensor<S> out = a.value.reshaped(shape);
    auto backward = [a, &tape](const Tensor<S>& g) {
        tape.accumulate(a, g.reshaped(a.value.shape()));
    };
    return detail::emit(tape, a.tracked(), std::move(out), std::move(backward));
}

}  // namespace wnet::ops
