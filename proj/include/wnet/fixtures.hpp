#pragma once

#include <string>

#include "wnet/common.hpp"

namespace wnet {

// Writes a synthetic PPM dataset under root: one subtree per task
// (root/night, root/glare, root/precip, root/fog), each holding its class
// directories with per_class images of the given square size.  Classes are
// separated by mean intensity, channel tint, and stripe frequency, with
// per-pixel noise on top, so a small classifier can learn them while no
// single pixel is decisive.  Output is a pure function of (seed, count,
// size).
void generate_fixtures(const std::string& root, i64 per_class, u64 seed, i64 size = 32);

}  // namespace wnet
