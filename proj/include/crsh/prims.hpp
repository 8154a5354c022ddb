#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "crsh/parallel.hpp"

namespace crsh {

using U32Array = std::vector<std::uint32_t>;

/// out[i] = in[0] + ... + in[i]  (mod 2^32).
U32Array inclusive_scan(std::span<const std::uint32_t> values, const Executor& ex = {});

/// out[0] = 0, out[i] = in[0] + ... + in[i-1]  (mod 2^32).
U32Array exclusive_scan(std::span<const std::uint32_t> values, const Executor& ex = {});

/// Stable LSD radix sort of (key, value) pairs, four 8-bit digit passes.
/// Throws InvalidArgument when the arrays differ in length.
std::pair<U32Array, U32Array> radix_sort_pairs(std::span<const std::uint32_t> keys,
                                               std::span<const std::uint32_t> values,
                                               const Executor& ex = {});

/// Removes every entry whose flag is 1 (empty slot), keeping order. Each
/// survivor at i moves left by inclusive_scan(flags)[i]. Throws
/// InvalidArgument on length mismatch or a flag outside {0, 1}.
std::pair<U32Array, U32Array> trim_compact(std::span<const std::uint32_t> empty_flags,
                                           std::span<const std::uint32_t> keys,
                                           std::span<const std::uint32_t> values,
                                           const Executor& ex = {});

/// Single-array form of trim_compact.
U32Array trim_compact(std::span<const std::uint32_t> empty_flags,
                      std::span<const std::uint32_t> values,
                      const Executor& ex = {});

} // namespace crsh
