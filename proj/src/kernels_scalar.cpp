#include "wnet/kernels.hpp"

namespace wnet::kernels {

namespace {

void add_f32(const float* a, const float* b, float* out, std::size_t n) { ref::add(a, b, out, n); }
void sub_f32(const float* a, const float* b, float* out, std::size_t n) { ref::sub(a, b, out, n); }
void mul_f32(const float* a, const float* b, float* out, std::size_t n) { ref::mul(a, b, out, n); }
void relu_f32(const float* a, float* out, std::size_t n) { ref::relu(a, out, n); }
void relu_mask_mul_f32(const float* a, const float* g, float* out, std::size_t n) {
    ref::relu_mask_mul(a, g, out, n);
}
void gemm_f32(const float* a, const float* b, float* c, std::size_t m, std::size_t k,
              std::size_t n) {
    ref::gemm(a, b, c, m, k, n);
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend backend{
        "scalar", add_f32, sub_f32, mul_f32, relu_f32, relu_mask_mul_f32, gemm_f32,
    };
    return backend;
}

}  // namespace wnet::kernels
