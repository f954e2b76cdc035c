// Dense row-major grid type and its text representation.

#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spconv {

using index_t = std::int64_t;

/// A dense vector of 64-bit floats.
using DenseVector = std::vector<double>;

/// Dense matrix stored row-major.
struct Grid {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> values;

    Grid() = default;

    Grid(index_t r, index_t c, double fill = 0.0)
        : rows(r), cols(c), values(static_cast<std::size_t>(r * c), fill) {
        if (r < 0 || c < 0) {
            throw std::invalid_argument("Grid: negative dimensions");
        }
    }

    Grid(index_t r, index_t c, std::vector<double> v)
        : rows(r), cols(c), values(std::move(v)) {
        if (static_cast<index_t>(values.size()) != r * c) {
            throw std::invalid_argument(
                "Grid: value count " + std::to_string(values.size()) +
                " does not match " + std::to_string(r) + "x" + std::to_string(c));
        }
    }

    double& at(index_t r, index_t c) {
        return values[static_cast<std::size_t>(r * cols + c)];
    }
    double at(index_t r, index_t c) const {
        return values[static_cast<std::size_t>(r * cols + c)];
    }

    index_t size() const { return rows * cols; }
};

/// Formats a double with 17 significant digits (lossless round trip).
inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Writes `rows cols` on the first line, then one row of values per line.
inline void write_grid(std::ostream& os, const Grid& g) {
    os << g.rows << ' ' << g.cols << '\n';
    for (index_t r = 0; r < g.rows; ++r) {
        for (index_t c = 0; c < g.cols; ++c) {
            if (c > 0) os << ' ';
            os << format_value(g.at(r, c));
        }
        os << '\n';
    }
}

inline Grid read_grid(std::istream& is) {
    index_t rows = 0;
    index_t cols = 0;
    if (!(is >> rows >> cols)) {
        throw std::runtime_error("read_grid: missing 'rows cols' header");
    }
    if (rows < 0 || cols < 0) {
        throw std::runtime_error("read_grid: negative dimensions in header");
    }
    Grid g(rows, cols);
    for (index_t i = 0; i < rows * cols; ++i) {
        if (!(is >> g.values[static_cast<std::size_t>(i)])) {
            throw std::runtime_error("read_grid: expected " + std::to_string(rows * cols) +
                                     " values, got " + std::to_string(i));
        }
    }
    return g;
}

}  // namespace spconv
