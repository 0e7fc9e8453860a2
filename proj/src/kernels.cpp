#include "wnet/kernels.hpp"

#include <cstdlib>
#include <string>

namespace wnet::kernels {

namespace {

const Backend& resolve() {
    const char* request = std::getenv("WNET_BACKEND");
    if (request != nullptr) {
        const std::string name(request);
        if (name == "scalar") {
            return scalar_backend();
        }
        if (name == "avx2") {
            const Backend* b = avx2_backend();
            if (b == nullptr) {
                throw ValueError("WNET_BACKEND=avx2 but AVX2 is not available");
            }
            return *b;
        }
        if (name == "neon") {
            const Backend* b = neon_backend();
            if (b == nullptr) {
                throw ValueError("WNET_BACKEND=neon but NEON is not available");
            }
            return *b;
        }
        throw ValueError("unknown WNET_BACKEND value: " + name);
    }
    if (const Backend* b = avx2_backend()) {
        return *b;
    }
    if (const Backend* b = neon_backend()) {
        return *b;
    }
    return scalar_backend();
}

}  // namespace

const Backend& active() {
    static const Backend& backend = resolve();
    return backend;
}

}  // namespace wnet::kernels
