#pragma once

#include <string>
#include <vector>

#include "wnet/common.hpp"

namespace wnet {

// Interleaved H x W x 3 float image with values in [0,1].
struct Image {
    i64 width = 0;
    i64 height = 0;
    std::vector<float> pixels;

    float at(i64 y, i64 x, i64 c) const {
        return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
    }
    float& at(i64 y, i64 x, i64 c) {
        return pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
    }
};

// Binary PPM (P6) and PGM (P5) with maxval 255; grayscale is replicated to
// three channels.  Pixel bytes are scaled by `rescale` (1/255 maps them
// onto [0,1]).
Image decode_ppm(const std::vector<u8>& bytes, float rescale = 1.0f / 255.0f);

// P6 encoding; values are clamped to [0,1] and rounded to bytes.
std::vector<u8> encode_ppm(const Image& img);

Image load_image(const std::string& path, float rescale = 1.0f / 255.0f);
void save_image(const std::string& path, const Image& img);

// True when the first bytes look like a supported format; used to skip
// non-image files during dataset indexing without decoding them.
bool sniff_ppm(const std::string& path);

// Bilinear resampling with half-pixel centers; exact on constant images
// and the identity when sizes match.
Image resize_bilinear(const Image& img, i64 out_width, i64 out_height);

}  // namespace wnet
