#include "crsh/prims.hpp"

#include <array>

#include "crsh/error.hpp"

namespace crsh {

namespace {

// Two-pass blocked scan: per-block totals, serial carry, then local scans.
U32Array blocked_scan(std::span<const std::uint32_t> in, const Executor& ex, bool inclusive)
{
    const std::size_t n = in.size();
    U32Array out(n);
    const std::size_t blocks = block_count(ex, n, 1 << 16);
    std::vector<std::uint32_t> carry(blocks + 1, 0);

    for_each_block(ex, n, blocks, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        std::uint32_t sum = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            sum += in[i];
        }
        carry[b + 1] = sum;
    });
    for (std::size_t b = 0; b < blocks; ++b) {
        carry[b + 1] += carry[b];
    }
    for_each_block(ex, n, blocks, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        std::uint32_t running = carry[b];
        for (std::size_t i = lo; i < hi; ++i) {
            if (inclusive) {
                running += in[i];
                out[i] = running;
            } else {
                out[i] = running;
                running += in[i];
            }
        }
    });
    return out;
}

void check_flags(std::span<const std::uint32_t> flags)
{
    for (std::uint32_t f : flags) {
        if (f > 1) {
            throw InvalidArgument("trim_compact: flag value other than 0/1");
        }
    }
}

} // namespace

U32Array inclusive_scan(std::span<const std::uint32_t> values, const Executor& ex)
{
    return blocked_scan(values, ex, true);
}

U32Array exclusive_scan(std::span<const std::uint32_t> values, const Executor& ex)
{
    return blocked_scan(values, ex, false);
}

std::pair<U32Array, U32Array> radix_sort_pairs(std::span<const std::uint32_t> keys,
                                               std::span<const std::uint32_t> values,
                                               const Executor& ex)
{
    if (keys.size() != values.size()) {
        throw InvalidArgument("radix_sort_pairs: keys and values differ in length");
    }
    const std::size_t n = keys.size();
    U32Array k(keys.begin(), keys.end());
    U32Array v(values.begin(), values.end());
    U32Array k_tmp(n);
    U32Array v_tmp(n);

    constexpr int kDigitBits = 8;
    constexpr std::size_t kBuckets = 1u << kDigitBits;
    const std::size_t blocks = block_count(ex, n, 1 << 16);
    std::vector<std::array<std::uint32_t, kBuckets>> offsets(blocks);

    for (int shift = 0; shift < 32; shift += kDigitBits) {
        for_each_block(ex, n, blocks, [&](std::size_t b, std::size_t lo, std::size_t hi) {
            auto& hist = offsets[b];
            hist.fill(0);
            for (std::size_t i = lo; i < hi; ++i) {
                ++hist[(k[i] >> shift) & (kBuckets - 1)];
            }
        });
        // Digit-major, block-minor offsets keep equal digits in input order.
        std::uint32_t running = 0;
        for (std::size_t d = 0; d < kBuckets; ++d) {
            for (std::size_t b = 0; b < blocks; ++b) {
                const std::uint32_t count = offsets[b][d];
                offsets[b][d] = running;
                running += count;
            }
        }
        for_each_block(ex, n, blocks, [&](std::size_t b, std::size_t lo, std::size_t hi) {
            auto& next = offsets[b];
            for (std::size_t i = lo; i < hi; ++i) {
                const std::uint32_t dst = next[(k[i] >> shift) & (kBuckets - 1)]++;
                k_tmp[dst] = k[i];
                v_tmp[dst] = v[i];
            }
        });
        k.swap(k_tmp);
        v.swap(v_tmp);
    }
    return {std::move(k), std::move(v)};
}

U32Array trim_compact(std::span<const std::uint32_t> empty_flags,
                      std::span<const std::uint32_t> values,
                      const Executor& ex)
{
    if (empty_flags.size() != values.size()) {
        throw InvalidArgument("trim_compact: flags and values differ in length");
    }
    check_flags(empty_flags);
    const std::size_t n = values.size();
    if (n == 0) {
        return {};
    }
    const U32Array shift = inclusive_scan(empty_flags, ex);
    U32Array out(n - shift.back());
    parallel_for(ex, n, [&](std::size_t i) {
        if (empty_flags[i] == 0) {
            out[i - shift[i]] = values[i];
        }
    }, 1 << 14);
    return out;
}

std::pair<U32Array, U32Array> trim_compact(std::span<const std::uint32_t> empty_flags,
                                           std::span<const std::uint32_t> keys,
                                           std::span<const std::uint32_t> values,
                                           const Executor& ex)
{
    if (keys.size() != values.size() || keys.size() != empty_flags.size()) {
        throw InvalidArgument("trim_compact: flags, keys and values differ in length");
    }
    check_flags(empty_flags);
    const std::size_t n = keys.size();
    if (n == 0) {
        return {};
    }
    const U32Array shift = inclusive_scan(empty_flags, ex);
    U32Array out_keys(n - shift.back());
    U32Array out_values(out_keys.size());
    parallel_for(ex, n, [&](std::size_t i) {
        if (empty_flags[i] == 0) {
            out_keys[i - shift[i]] = keys[i];
            out_values[i - shift[i]] = values[i];
        }
    }, 1 << 14);
    return {std::move(out_keys), std::move(out_values)};
}

} // namespace crsh
