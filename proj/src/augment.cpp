#include "wnet/augment.hpp"

#include <cmath>

namespace wnet {

void AugmentationConfig::validate() const {
    if (!(rescale > 0.0f)) {
        throw ValueError("rescale factor must be positive");
    }
    if (shear_deg < -45.0 || shear_deg > 45.0) {
        throw ValueError("shear range must lie within [-45, 45] degrees");
    }
    if (flip_p < 0.0 || flip_p > 1.0) {
        throw ValueError("flip probability must lie in [0,1]");
    }
    if (zoom_lo < 0.5 || zoom_hi > 2.0 || zoom_lo > zoom_hi) {
        throw ValueError("zoom range must be an interval within [0.5, 2.0]");
    }
}

AugmentDraw draw_augment(const AugmentationConfig& config, Rng& rng) {
    AugmentDraw draw;
    draw.flip = rng.bernoulli(config.flip_p);
    const double shear_span = std::fabs(config.shear_deg);
    draw.shear_deg = rng.uniform(-shear_span, shear_span);
    draw.zoom = rng.uniform(config.zoom_lo, config.zoom_hi);
    return draw;
}

Image hflip(const Image& img) {
    Image out;
    out.width = img.width;
    out.height = img.height;
    out.pixels.resize(img.pixels.size());
    for (i64 y = 0; y < img.height; ++y) {
        for (i64 x = 0; x < img.width; ++x) {
            for (i64 c = 0; c < 3; ++c) {
                out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
            }
        }
    }
    return out;
}

Image warp_shear_zoom(const Image& img, double shear_deg, double zoom) {
    if (shear_deg == 0.0 && zoom == 1.0) {
        return img;
    }
    if (!(zoom > 0.0)) {
        throw ValueError("zoom factor must be positive");
    }
    Image out;
    out.width = img.width;
    out.height = img.height;
    out.pixels.resize(img.pixels.size());

    const double shear = std::tan(shear_deg * 3.14159265358979323846 / 180.0);
    const double cx = static_cast<double>(img.width - 1) / 2.0;
    const double cy = static_cast<double>(img.height - 1) / 2.0;
    const double max_x = static_cast<double>(img.width - 1);
    const double max_y = static_cast<double>(img.height - 1);

    for (i64 y = 0; y < out.height; ++y) {
        for (i64 x = 0; x < out.width; ++x) {
            // invert zoom then shear around the center; off-image sources
            // clamp to the border (edge replication)
            const double dx = (static_cast<double>(x) - cx) / zoom;
            const double dy = (static_cast<double>(y) - cy) / zoom;
            double fx = dx - shear * dy + cx;
            double fy = dy + cy;
            if (fx < 0.0) fx = 0.0;
            if (fx > max_x) fx = max_x;
            if (fy < 0.0) fy = 0.0;
            if (fy > max_y) fy = max_y;
            const i64 x0 = static_cast<i64>(fx);
            const i64 x1 = x0 < img.width - 1 ? x0 + 1 : x0;
            const i64 y0 = static_cast<i64>(fy);
            const i64 y1 = y0 < img.height - 1 ? y0 + 1 : y0;
            const float tx = static_cast<float>(fx - static_cast<double>(x0));
            const float ty = static_cast<float>(fy - static_cast<double>(y0));
            for (i64 c = 0; c < 3; ++c) {
                const float top = img.at(y0, x0, c) + tx * (img.at(y0, x1, c) - img.at(y0, x0, c));
                const float bot = img.at(y1, x0, c) + tx * (img.at(y1, x1, c) - img.at(y1, x0, c));
                float v = top + ty * (bot - top);
                if (v < 0.0f) v = 0.0f;
                if (v > 1.0f) v = 1.0f;
                out.at(y, x, c) = v;
            }
        }
    }
    return out;
}

Image apply_augment(const Image& img, const AugmentDraw& draw) {
    Image out = draw.flip ? hflip(img) : img;
    return warp_shear_zoom(out, draw.shear_deg, draw.zoom);
}

}  // namespace wnet
