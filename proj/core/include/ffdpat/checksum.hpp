#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace ffdpat {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::span<const double> values);
std::uint64_t fnv1a64(std::string_view text);

std::string to_hex(std::uint64_t value);

}  // namespace ffdpat
