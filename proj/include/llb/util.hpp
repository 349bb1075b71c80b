// Small shared utilities: error types, 17-digit formatting, FNV hashing.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace llb {

inline constexpr const char* kVersion = "0.1.0";

// Base error for everything raised by the library.
struct LlbError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration / bad arguments (wrong key, wrong shape, domain violation).
struct ConfigError : LlbError {
  using LlbError::LlbError;
};

// Non-finite values detected in numeric data.
struct NumericError : LlbError {
  using LlbError::LlbError;
};

// Format a double with 17 significant digits (round-trips exactly).
std::string fmt_g17(double v);

// FNV-1a 64-bit hash; used for config digests in output headers.
std::uint64_t fnv1a64(std::string_view s);

// Hex rendering of a 64-bit value (16 lowercase digits).
std::string hex64(std::uint64_t v);

}  // namespace llb
