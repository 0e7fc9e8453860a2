#pragma once

#include <cstddef>
#include <string>

#include "wnet/common.hpp"

namespace wnet {

/// CRC-32 (IEEE 802.3, reflected). Pass the previous value to continue a
/// running checksum over multiple buffers.
u32 crc32(const void* data, std::size_t size, u32 crc = 0);

/// Incremental SHA-256.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t size);
    /// Finalizes and returns the lowercase hex digest. The object must not be
    /// updated afterwards.
    std::string hex_digest();

private:
    void process_block(const u8* block);

    u32 state_[8];
    u64 total_bytes_ = 0;
    u8 buffer_[64];
    std::size_t buffered_ = 0;
    bool finalized_ = false;
};

std::string sha256_hex(const void* data, std::size_t size);

}  // namespace wnet
