#pragma once

#include <cstddef>

#include "wnet/common.hpp"

namespace wnet::kernels {

// Elementwise and matmul primitives behind function pointers so the same
// calling code runs the scalar reference or a SIMD variant.  Every variant
// must produce bit-identical results: same accumulation order, no FMA
// contraction (the build sets -ffp-contract=off globally).
struct Backend {
    const char* name;
    void (*add)(const float* a, const float* b, float* out, std::size_t n);
    void (*sub)(const float* a, const float* b, float* out, std::size_t n);
    void (*mul)(const float* a, const float* b, float* out, std::size_t n);
    void (*relu)(const float* a, float* out, std::size_t n);
    // out[i] += g[i] where a[i] > 0; the backward pass of relu.
    void (*relu_mask_mul)(const float* a, const float* g, float* out, std::size_t n);
    // Row-major C[m,n] = A[m,k] * B[k,n], accumulating over k in index order.
    void (*gemm)(const float* a, const float* b, float* c, std::size_t m, std::size_t k,
                 std::size_t n);
};

const Backend& scalar_backend();
// Null when the build or the running CPU lacks the instruction set.
const Backend* avx2_backend();
const Backend* neon_backend();

// Best available backend, overridable with WNET_BACKEND=scalar|avx2|neon.
// Resolved once on first call; throws ValueError for an unknown or
// unavailable override.
const Backend& active();

// Reference implementations, shared by the scalar backend and by any code
// that needs a double-precision path (gradient checking).  The k-outer loop
// order in gemm is the contract all variants must reproduce.
namespace ref {

template <typename S>
void add(const S* a, const S* b, S* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename S>
void sub(const S* a, const S* b, S* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

template <typename S>
void mul(const S* a, const S* b, S* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <typename S>
void relu(const S* a, S* out, std::size_t n) {
    // Written as max(a, 0) taking the second operand on ties so that -0.0
    // maps to +0.0, matching the SIMD max instructions.
    for (std::size_t i = 0; i < n; ++i) out[i] = (a[i] > S(0)) ? a[i] : S(0);
}

template <typename S>
void relu_mask_mul(const S* a, const S* g, S* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] > S(0)) out[i] += g[i];
    }
}

template <typename S>
void gemm(const S* a, const S* b, S* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = S(0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const S aip = a[i * k + p];
            const S* brow = b + p * n;
            S* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] = crow[j] + aip * brow[j];
            }
        }
    }
}

}  // namespace ref

}  // namespace wnet::kernels
