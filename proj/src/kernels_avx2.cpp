// Compiled with -mavx2 when the toolchain targets x86-64 (WNET_HAVE_AVX2 is
// set by the build in that case); on other targets this file only provides
// the null avx2_backend().

#include "wnet/kernels.hpp"

#ifdef WNET_HAVE_AVX2
#include <immintrin.h>
#endif

namespace wnet::kernels {

#ifdef WNET_HAVE_AVX2

namespace {

void add_f32(const float* a, const float* b, float* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    }
    ref::add(a + i, b + i, out + i, n - i);
}

void sub_f32(const float* a, const float* b, float* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    }
    ref::sub(a + i, b + i, out + i, n - i);
}

void mul_f32(const float* a, const float* b, float* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    }
    ref::mul(a + i, b + i, out + i, n - i);
}

void relu_f32(const float* a, float* out, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(out + i, _mm256_max_ps(_mm256_loadu_ps(a + i), zero));
    }
    ref::relu(a + i, out + i, n - i);
}

void relu_mask_mul_f32(const float* a, const float* g, float* out, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(a + i), zero, _CMP_GT_OQ);
        const __m256 gated = _mm256_and_ps(_mm256_loadu_ps(g + i), mask);
        _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(out + i), gated));
    }
    ref::relu_mask_mul(a + i, g + i, out + i, n - i);
}

// Same k-outer accumulation order as ref::gemm, with the inner j loop done
// eight lanes at a time.  mul then add, never fmadd: the scalar reference is
// built with contraction off and the results must match bit for bit.
void gemm_f32(const float* a, const float* b, float* c, std::size_t m, std::size_t k,
              std::size_t n) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0f;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const float aip = a[i * k + p];
            const __m256 va = _mm256_set1_ps(aip);
            const float* brow = b + p * n;
            float* crow = c + i * n;
            std::size_t j = 0;
            for (; j + 8 <= n; j += 8) {
                const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(brow + j));
                _mm256_storeu_ps(crow + j, _mm256_add_ps(_mm256_loadu_ps(crow + j), prod));
            }
            for (; j < n; ++j) {
                crow[j] = crow[j] + aip * brow[j];
            }
        }
    }
}

}  // namespace

const Backend* avx2_backend() {
    if (!__builtin_cpu_supports("avx2")) {
        return nullptr;
    }
    static const Backend backend{
        "avx2", add_f32, sub_f32, mul_f32, relu_f32, relu_mask_mul_f32, gemm_f32,
    };
    return &backend;
}

#else

const Backend* avx2_backend() { return nullptr; }

#endif

}  // namespace wnet::kernels
