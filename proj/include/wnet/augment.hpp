#pragma once

#include "wnet/image.hpp"
#include "wnet/rng.hpp"

namespace wnet {

// Training-time augmentation settings.  rescale is applied once at decode;
// the geometric transforms are drawn per sample.
struct AugmentationConfig {
    float rescale = 1.0f / 255.0f;
    double shear_deg = 10.0;
    double flip_p = 0.5;
    double zoom_lo = 0.9;
    double zoom_hi = 1.1;

    void validate() const;
};

struct AugmentDraw {
    bool flip = false;
    double shear_deg = 0.0;
    double zoom = 1.0;
};

// Always consumes exactly three rng draws (flip, shear, zoom) so the stream
// stays aligned regardless of which transforms end up as identities.
AugmentDraw draw_augment(const AugmentationConfig& config, Rng& rng);

// Pixel-exact mirror around the vertical axis.
Image hflip(const Image& img);

// Shear-then-zoom about the image center, sampled by inverse mapping with
// edge replication; output values are clamped to [0,1].
Image warp_shear_zoom(const Image& img, double shear_deg, double zoom);

Image apply_augment(const Image& img, const AugmentDraw& draw);

}  // namespace wnet
