// Reference convolution implementations: a four-loop direct sliding window
// (the correctness oracle) and im2col lowering followed by a dense product
// (the performance comparator). Neither touches the sparse path.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spconv/conv.hpp"
#include "spconv/grid.hpp"

namespace spconv {

namespace detail {

inline void check_input_dims(const Grid& a, const ConvSpec& spec, const char* who) {
    if (a.rows != spec.m || a.cols != spec.n) {
        throw std::invalid_argument(std::string(who) + ": input is " + std::to_string(a.rows) +
                                    "x" + std::to_string(a.cols) + " but spec is " + spec.str());
    }
}

inline Grid zero_padded(const Grid& a, const ConvSpec& spec) {
    Grid pad(spec.padded_rows(), spec.padded_cols());
    for (index_t r = 0; r < a.rows; ++r) {
        for (index_t c = 0; c < a.cols; ++c) {
            pad.at(r + spec.p, c + spec.p) = a.at(r, c);
        }
    }
    return pad;
}

}  // namespace detail

/// Direct sliding-window convolution over a dense zero-padded copy:
/// out[x][y] = sum_{j,i} K[j][i] * Apad[s*x+j][s*y+i].
inline Grid direct_conv(const Grid& a, const Kernel& kern, const ConvSpec& spec) {
    detail::check_input_dims(a, spec, "direct_conv");
    if (kern.k != spec.k) {
        throw std::invalid_argument("direct_conv: kernel side " + std::to_string(kern.k) +
                                    " does not match spec " + spec.str());
    }
    const Grid pad = detail::zero_padded(a, spec);
    Grid out(spec.m_out(), spec.n_out());
    for (index_t x = 0; x < spec.m_out(); ++x) {
        for (index_t y = 0; y < spec.n_out(); ++y) {
            double acc = 0.0;
            for (index_t j = 0; j < spec.k; ++j) {
                for (index_t i = 0; i < spec.k; ++i) {
                    acc += kern.at(j, i) * pad.at(spec.s * x + j, spec.s * y + i);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

/// Dense k^2 x (m_out*n_out) patch matrix, row-major. Column x*n_out + y is
/// the row-major flattening of the padded-input patch under placement (x, y).
struct Im2colMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> values;
};

/// Lowers the input for one convolution. The zero padding is materialized
/// explicitly and every patch is copied; this per-call cost is what the
/// precomputed sparse transform avoids.
inline Im2colMatrix im2col(const Grid& a, const ConvSpec& spec) {
    detail::check_input_dims(a, spec, "im2col");
    const Grid pad = detail::zero_padded(a, spec);
    const index_t k2 = spec.k * spec.k;
    const index_t patches = spec.output_len();
    Im2colMatrix m{k2, patches, std::vector<double>(static_cast<std::size_t>(k2 * patches))};
    for (index_t x = 0; x < spec.m_out(); ++x) {
        for (index_t y = 0; y < spec.n_out(); ++y) {
            const index_t t = x * spec.n_out() + y;
            for (index_t j = 0; j < spec.k; ++j) {
                for (index_t i = 0; i < spec.k; ++i) {
                    m.values[static_cast<std::size_t>((j * spec.k + i) * patches + t)] =
                        pad.at(spec.s * x + j, spec.s * y + i);
                }
            }
        }
    }
    return m;
}

namespace detail {

template <bool Count>
inline Grid im2col_product(const Kernel& kern, const Im2colMatrix& m, const ConvSpec& spec,
                           std::uint64_t* mults) {
    // vec(K)^T times the patch matrix, accumulated one patch-row at a time.
    std::vector<double> out(static_cast<std::size_t>(m.cols), 0.0);
    for (index_t r = 0; r < m.rows; ++r) {
        const double kv = kern.values[static_cast<std::size_t>(r)];
        const double* row = m.values.data() + static_cast<std::size_t>(r * m.cols);
        for (index_t t = 0; t < m.cols; ++t) {
            out[static_cast<std::size_t>(t)] += kv * row[t];
            if constexpr (Count) ++*mults;
        }
    }
    return Grid(spec.m_out(), spec.n_out(), std::move(out));
}

}  // namespace detail

/// im2col lowering plus dense product, reshaped to the output grid.
inline Grid im2col_conv(const Grid& a, const Kernel& kern, const ConvSpec& spec) {
    if (kern.k != spec.k) {
        throw std::invalid_argument("im2col_conv: kernel side " + std::to_string(kern.k) +
                                    " does not match spec " + spec.str());
    }
    const Im2colMatrix m = im2col(a, spec);
    return detail::im2col_product<false>(kern, m, spec, nullptr);
}

/// Same computation with the scalar multiplications counted.
inline std::pair<Grid, std::uint64_t> im2col_conv_counted(const Grid& a, const Kernel& kern,
                                                          const ConvSpec& spec) {
    if (kern.k != spec.k) {
        throw std::invalid_argument("im2col_conv: kernel side " + std::to_string(kern.k) +
                                    " does not match spec " + spec.str());
    }
    const Im2colMatrix m = im2col(a, spec);
    std::uint64_t mults = 0;
    Grid out = detail::im2col_product<true>(kern, m, spec, &mults);
    return {std::move(out), mults};
}

}  // namespace spconv
