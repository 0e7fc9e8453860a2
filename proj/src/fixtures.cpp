#include "wnet/fixtures.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wnet/classifier.hpp"
#include "wnet/image.hpp"
#include "wnet/rng.hpp"

namespace fs = std::filesystem;

namespace wnet {

namespace {

struct ClassSignature {
    float intensity;
    std::array<float, 3> tint;
    float stripe_cycles;
    float stripe_angle_deg;
};

// Signatures are indexed by (class count, class index) so two- and
// three-way tasks each get well-spread levels.
ClassSignature signature_for(std::size_t n_classes, std::size_t class_idx) {
    static const std::array<ClassSignature, 3> ternary = {{
        {0.22f, {1.15f, 0.95f, 0.85f}, 2.0f, 0.0f},
        {0.52f, {0.90f, 1.15f, 0.90f}, 5.0f, 45.0f},
        {0.82f, {0.85f, 0.95f, 1.15f}, 9.0f, 90.0f},
    }};
    static const std::array<ClassSignature, 2> binary = {{
        {0.28f, {1.15f, 0.90f, 0.90f}, 3.0f, 20.0f},
        {0.74f, {0.88f, 1.00f, 1.12f}, 7.0f, 70.0f},
    }};
    if (n_classes == 3) return ternary[class_idx];
    if (n_classes == 2) return binary[class_idx];
    throw ValueError("fixture generator supports 2 or 3 classes per task");
}

Image render(const ClassSignature& sig, i64 size, Rng& rng) {
    Image img;
    img.width = size;
    img.height = size;
    img.pixels.resize(static_cast<std::size_t>(size * size) * 3);

    const float base = sig.intensity + static_cast<float>(rng.uniform(-0.03, 0.03));
    const float phase = static_cast<float>(rng.uniform(0.0, 2.0 * 3.14159265358979323846));
    const float angle = sig.stripe_angle_deg * 3.14159265358979323846f / 180.0f;
    const float ca = std::cos(angle);
    const float sa = std::sin(angle);
    const float freq = 2.0f * 3.14159265358979323846f * sig.stripe_cycles /
                       static_cast<float>(size);

    for (i64 y = 0; y < size; ++y) {
        for (i64 x = 0; x < size; ++x) {
            const float proj = ca * static_cast<float>(x) + sa * static_cast<float>(y);
            const float stripe = 1.0f + 0.25f * std::sin(freq * proj + phase);
            const float noise = static_cast<float>(rng.uniform(-0.05, 0.05));
            for (i64 c = 0; c < 3; ++c) {
                float v = base * sig.tint[static_cast<std::size_t>(c)] * stripe + noise;
                if (v < 0.0f) v = 0.0f;
                if (v > 1.0f) v = 1.0f;
                img.at(y, x, c) = v;
            }
        }
    }
    return img;
}

}  // namespace

void generate_fixtures(const std::string& root, i64 per_class, u64 seed, i64 size) {
    if (per_class <= 0) {
        throw ValueError("per-class fixture count must be positive");
    }
    if (size < 4) {
        throw ValueError("fixture size must be at least 4");
    }
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec || !fs::is_directory(root)) {
        throw DataError("cannot create fixture root: " + root);
    }

    for (std::size_t ti = 0; ti < task_names().size(); ++ti) {
        const ClassifierSpec spec = spec_for_task(task_names()[ti]);
        for (std::size_t ci = 0; ci < spec.classes.size(); ++ci) {
            const fs::path dir = fs::path(root) / spec.task / spec.classes[ci];
            fs::create_directories(dir, ec);
            if (ec || !fs::is_directory(dir)) {
                throw DataError("cannot create fixture directory: " + dir.string());
            }
            for (i64 i = 0; i < per_class; ++i) {
                Rng rng(mix_seed(mix_seed(mix_seed(mix_seed(seed, 0xf1c5), ti), ci),
                                 static_cast<u64>(i)));
                const Image img = render(signature_for(spec.classes.size(), ci), size, rng);
                char name[32];
                std::snprintf(name, sizeof(name), "img_%04lld.ppm", static_cast<long long>(i));
                save_image((dir / name).string(), img);
            }
        }
    }
}

}  // namespace wnet
