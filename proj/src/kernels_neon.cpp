// NEON variant for aarch64 builds; elsewhere this file only provides the
// null neon_backend().

#include "wnet/kernels.hpp"

#ifdef WNET_HAVE_NEON
#include <arm_neon.h>
#endif

namespace wnet::kernels {

#ifdef WNET_HAVE_NEON

namespace {

void add_f32(const float* a, const float* b, float* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(out + i, vaddq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
    }
    ref::add(a + i, b + i, out + i, n - i);
}

void sub_f32(const float* a, const float* b, float* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(out + i, vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
    }
    ref::sub(a + i, b + i, out + i, n - i);
}

void mul_f32(const float* a, const float* b, float* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(out + i, vmulq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
    }
    ref::mul(a + i, b + i, out + i, n - i);
}

void relu_f32(const float* a, float* out, std::size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(out + i, vmaxq_f32(vld1q_f32(a + i), zero));
    }
    ref::relu(a + i, out + i, n - i);
}

void relu_mask_mul_f32(const float* a, const float* g, float* out, std::size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const uint32x4_t mask = vcgtq_f32(vld1q_f32(a + i), zero);
        const float32x4_t gated =
            vreinterpretq_f32_u32(vandq_u32(vreinterpretq_u32_f32(vld1q_f32(g + i)), mask));
        vst1q_f32(out + i, vaddq_f32(vld1q_f32(out + i), gated));
    }
    ref::relu_mask_mul(a + i, g + i, out + i, n - i);
}

// Same accumulation order as ref::gemm; vmulq then vaddq, never vmlaq, so
// the result matches the scalar reference bit for bit.
void gemm_f32(const float* a, const float* b, float* c, std::size_t m, std::size_t k,
              std::size_t n) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0f;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const float aip = a[i * k + p];
            const float32x4_t va = vdupq_n_f32(aip);
            const float* brow = b + p * n;
            float* crow = c + i * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                const float32x4_t prod = vmulq_f32(va, vld1q_f32(brow + j));
                vst1q_f32(crow + j, vaddq_f32(vld1q_f32(crow + j), prod));
            }
            for (; j < n; ++j) {
                crow[j] = crow[j] + aip * brow[j];
            }
        }
    }
}

}  // namespace

const Backend* neon_backend() {
    static const Backend backend{
        "neon", add_f32, sub_f32, mul_f32, relu_f32, relu_mask_mul_f32, gemm_f32,
    };
    return &backend;
}

#else

const Backend* neon_backend() { return nullptr; }

#endif

}  // namespace wnet::kernels
