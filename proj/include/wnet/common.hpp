#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wnet {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using u32 = std::uint32_t;
using u8 = std::uint8_t;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Rejected input: incompatible tensor shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Rejected input: values violate an operation's contract.
class ValueError : public Error {
public:
    using Error::Error;
};

/// Dataset layout or content problems.
class DataError : public Error {
public:
    using Error::Error;
};

/// Undecodable image file.
class DecodeError : public DataError {
public:
    using DataError::DataError;
};

/// Malformed or truncated model container; carries the byte offset at which
/// the problem was detected.
class ModelIoError : public Error {
public:
    ModelIoError(const std::string& msg, std::size_t offset)
        : Error(msg + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t byte_offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Non-finite values where the numeric contract requires finite ones.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace wnet
