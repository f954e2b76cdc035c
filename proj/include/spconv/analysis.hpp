// Closed-form count of non-zero multiplications in a padded, strided
// convolution, plus a brute-force overlap oracle to validate it.
//
// c1(x) counts padding rows under the kernel at vertical slide x, c2(y) the
// padding columns at horizontal slide y. The kernel then meets
// max(0, k-c1(x)) * max(0, k-c2(y)) input cells at placement (x, y); the
// clipping matters once p > k, when whole placements sit inside the padding.

#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "spconv/conv.hpp"

namespace spconv {

/// Padding rows under the kernel at vertical slide x.
inline index_t c1(index_t x, const ConvSpec& spec) {
    if (x < 0 || x >= spec.m_out()) {
        throw std::invalid_argument("c1: slide " + std::to_string(x) + " outside [0, " +
                                    std::to_string(spec.m_out()) + ") for " + spec.str());
    }
    return std::max<index_t>(0, spec.p - spec.s * x) +
           std::max<index_t>(0, spec.s * x + spec.k - spec.m - spec.p);
}

/// Padding columns under the kernel at horizontal slide y.
inline index_t c2(index_t y, const ConvSpec& spec) {
    if (y < 0 || y >= spec.n_out()) {
        throw std::invalid_argument("c2: slide " + std::to_string(y) + " outside [0, " +
                                    std::to_string(spec.n_out()) + ") for " + spec.str());
    }
    return std::max<index_t>(0, spec.p - spec.s * y) +
           std::max<index_t>(0, spec.s * y + spec.k - spec.n - spec.p);
}

/// Non-zero multiplication count per output cell, raster order:
/// max(0, k-c1(x)) * max(0, k-c2(y)).
inline std::vector<index_t> nnz_per_output(const ConvSpec& spec) {
    std::vector<index_t> out;
    out.reserve(static_cast<std::size_t>(spec.output_len()));
    for (index_t x = 0; x < spec.m_out(); ++x) {
        const index_t rows = std::max<index_t>(0, spec.k - c1(x, spec));
        for (index_t y = 0; y < spec.n_out(); ++y) {
            const index_t cols = std::max<index_t>(0, spec.k - c2(y, spec));
            out.push_back(rows * cols);
        }
    }
    return out;
}

/// Total non-zero multiplications over all placements. Exact integer; equals
/// m_out*n_out*k^2 when no placement overlaps padding.
inline index_t nnz_bound(const ConvSpec& spec) {
    index_t total = 0;
    for (index_t x = 0; x < spec.m_out(); ++x) {
        const index_t rows = std::max<index_t>(0, spec.k - c1(x, spec));
        for (index_t y = 0; y < spec.n_out(); ++y) {
            total += rows * std::max<index_t>(0, spec.k - c2(y, spec));
        }
    }
    return total;
}

/// Independent check of nnz_bound: marks the original input region inside a
/// dense padded 0/1 mask and sums mask cells under every kernel placement.
inline index_t nnz_oracle(const ConvSpec& spec) {
    std::vector<char> mask(static_cast<std::size_t>(spec.padded_len()), 0);
    for (index_t r = 0; r < spec.m; ++r) {
        for (index_t c = 0; c < spec.n; ++c) {
            mask[static_cast<std::size_t>((r + spec.p) * spec.padded_cols() + c + spec.p)] = 1;
        }
    }
    index_t total = 0;
    for (index_t x = 0; x < spec.m_out(); ++x) {
        for (index_t y = 0; y < spec.n_out(); ++y) {
            for (index_t j = 0; j < spec.k; ++j) {
                const index_t base = (spec.s * x + j) * spec.padded_cols() + spec.s * y;
                for (index_t i = 0; i < spec.k; ++i) {
                    total += mask[static_cast<std::size_t>(base + i)];
                }
            }
        }
    }
    return total;
}

struct NnzReport {
    ConvSpec spec;
    index_t bound;        ///< non-zero multiplications
    index_t dense_count;  ///< m_out * n_out * k^2
    double savings_ratio; ///< 1 - bound/dense_count
};

inline NnzReport make_nnz_report(const ConvSpec& spec) {
    const index_t bound = nnz_bound(spec);
    const index_t dense = spec.output_len() * spec.k * spec.k;
    return NnzReport{spec, bound, dense,
                     1.0 - static_cast<double>(bound) / static_cast<double>(dense)};
}

}  // namespace spconv
