#include "wnet/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace wnet {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(const std::vector<u8>& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    std::string token;
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
        token.push_back(c);
        ++pos;
    }
    if (token.empty()) {
        throw DecodeError("truncated image header");
    }
    return token;
}

i64 parse_extent(const std::string& token, const char* what) {
    i64 value = 0;
    for (char c : token) {
        if (c < '0' || c > '9') {
            throw DecodeError(std::string("malformed ") + what + " in image header: " + token);
        }
        value = value * 10 + (c - '0');
        if (value > 1 << 20) {
            throw DecodeError(std::string(what) + " out of range: " + token);
        }
    }
    if (value <= 0) {
        throw DecodeError(std::string(what) + " must be positive, got " + token);
    }
    return value;
}

}  // namespace

Image decode_ppm(const std::vector<u8>& bytes, float rescale) {
    std::size_t pos = 0;
    const std::string magic = next_token(bytes, pos);
    if (magic != "P6" && magic != "P5") {
        throw DecodeError("unsupported image format (expected P6 or P5), got \"" + magic + "\"");
    }
    const bool gray = magic == "P5";
    const i64 width = parse_extent(next_token(bytes, pos), "width");
    const i64 height = parse_extent(next_token(bytes, pos), "height");
    const std::string maxval = next_token(bytes, pos);
    if (maxval != "255") {
        throw DecodeError("unsupported maxval " + maxval + " (only 255)");
    }
    if (pos >= bytes.size()) {
        throw DecodeError("missing pixel data");
    }
    ++pos;  // single whitespace byte after maxval

    const std::size_t channels = gray ? 1 : 3;
    const std::size_t need = static_cast<std::size_t>(width * height) * channels;
    if (bytes.size() - pos < need) {
        throw DecodeError("pixel data truncated: need " + std::to_string(need) + " bytes, have " +
                          std::to_string(bytes.size() - pos));
    }

    Image img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width * height) * 3);
    const u8* src = bytes.data() + pos;
    if (gray) {
        for (std::size_t i = 0; i < static_cast<std::size_t>(width * height); ++i) {
            const float v = static_cast<float>(src[i]) * rescale;
            img.pixels[i * 3 + 0] = v;
            img.pixels[i * 3 + 1] = v;
            img.pixels[i * 3 + 2] = v;
        }
    } else {
        for (std::size_t i = 0; i < need; ++i) {
            img.pixels[i] = static_cast<float>(src[i]) * rescale;
        }
    }
    return img;
}

std::vector<u8> encode_ppm(const Image& img) {
    char header[64];
    const int header_len =
        std::snprintf(header, sizeof(header), "P6\n%lld %lld\n255\n",
                      static_cast<long long>(img.width), static_cast<long long>(img.height));
    std::vector<u8> out;
    out.reserve(static_cast<std::size_t>(header_len) + img.pixels.size());
    out.insert(out.end(), header, header + header_len);
    for (float v : img.pixels) {
        if (v < 0.0f) v = 0.0f;
        if (v > 1.0f) v = 1.0f;
        out.push_back(static_cast<u8>(std::lround(v * 255.0f)));
    }
    return out;
}

Image load_image(const std::string& path, float rescale) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open image file: " + path);
    }
    std::vector<u8> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_ppm(bytes, rescale);
    } catch (const DecodeError& e) {
        throw DecodeError(path + ": " + e.what());
    }
}

void save_image(const std::string& path, const Image& img) {
    const std::vector<u8> bytes = encode_ppm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open image file for writing: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError("short write to image file: " + path);
    }
}

bool sniff_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[2] = {0, 0};
    in.read(magic, 2);
    return in.gcount() == 2 && magic[0] == 'P' && (magic[1] == '6' || magic[1] == '5');
}

Image resize_bilinear(const Image& img, i64 out_width, i64 out_height) {
    if (out_width <= 0 || out_height <= 0) {
        throw ValueError("resize target must be positive");
    }
    if (img.width <= 0 || img.height <= 0) {
        throw ValueError("resize of empty image");
    }
    if (out_width == img.width && out_height == img.height) {
        return img;
    }
    Image out;
    out.width = out_width;
    out.height = out_height;
    out.pixels.resize(static_cast<std::size_t>(out_width * out_height) * 3);

    const double sx = static_cast<double>(img.width) / static_cast<double>(out_width);
    const double sy = static_cast<double>(img.height) / static_cast<double>(out_height);
    for (i64 y = 0; y < out_height; ++y) {
        double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
        if (fy < 0.0) fy = 0.0;
        if (fy > static_cast<double>(img.height - 1)) fy = static_cast<double>(img.height - 1);
        const i64 y0 = static_cast<i64>(fy);
        const i64 y1 = y0 < img.height - 1 ? y0 + 1 : y0;
        const float ty = static_cast<float>(fy - static_cast<double>(y0));
        for (i64 x = 0; x < out_width; ++x) {
            double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
            if (fx < 0.0) fx = 0.0;
            if (fx > static_cast<double>(img.width - 1)) fx = static_cast<double>(img.width - 1);
            const i64 x0 = static_cast<i64>(fx);
            const i64 x1 = x0 < img.width - 1 ? x0 + 1 : x0;
            const float tx = static_cast<float>(fx - static_cast<double>(x0));
            for (i64 c = 0; c < 3; ++c) {
                // lerp in a + t*(b-a) form so constant neighborhoods come
                // through exactly
                const float top = img.at(y0, x0, c) + tx * (img.at(y0, x1, c) - img.at(y0, x0, c));
                const float bot = img.at(y1, x0, c) + tx * (img.at(y1, x1, c) - img.at(y1, x0, c));
                out.at(y, x, c) = top + ty * (bot - top);
            }
        }
    }
    return out;
}

}  // namespace wnet
