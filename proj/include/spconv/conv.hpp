// Convolution as a precomputed sparse transform: a padding matrix P embeds
// the vectorized input into the vectorized zero-padded grid, a convolution
// matrix C holds one kernel placement per row, and T = C*P maps vec(input)
// straight to vec(output). Building T is a one-time cost; each convolution
// afterwards is a single SpMV.
//
// Flat-index conventions (row-major everywhere, the one place they live):
//   grid cell (r, c)                -> r*cols + c
//   padded grid width               -> n + 2p columns
//   output cell (x, y)              -> x*n_out + y
//   kernel tap (j, i) at placement (x, y) covers padded cell
//     (s*x + j, s*y + i)            -> (s*x + j)*(n + 2p) + s*y + i

#pragma once

#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spconv/grid.hpp"
#include "spconv/sparse.hpp"

namespace spconv {

/// Geometry of one padded, strided convolution: m x n input, k x k kernel,
/// stride s, symmetric zero padding p.
struct ConvSpec {
    index_t m = 1;
    index_t n = 1;
    index_t k = 1;
    index_t s = 1;
    index_t p = 0;

    ConvSpec(index_t m_, index_t n_, index_t k_, index_t s_, index_t p_)
        : m(m_), n(n_), k(k_), s(s_), p(p_) {
        if (m < 1 || n < 1 || k < 1 || s < 1 || p < 0) {
            throw std::invalid_argument("ConvSpec: need m,n,k,s >= 1 and p >= 0, got " + str());
        }
        if (k > m + 2 * p || k > n + 2 * p) {
            throw std::invalid_argument("ConvSpec: kernel larger than padded input, " + str());
        }
    }

    index_t padded_rows() const { return m + 2 * p; }
    index_t padded_cols() const { return n + 2 * p; }
    index_t m_out() const { return (m + 2 * p - k) / s + 1; }
    index_t n_out() const { return (n + 2 * p - k) / s + 1; }
    /// Trailing columns the kernel cannot cover after the last horizontal slide.
    index_t col_remainder() const { return n + 2 * p - k - s * (n_out() - 1); }
    /// Trailing rows after the last vertical slide.
    index_t row_remainder() const { return m + 2 * p - k - s * (m_out() - 1); }
    index_t vertical_slides() const { return m_out() - 1; }

    index_t input_len() const { return m * n; }
    index_t padded_len() const { return padded_rows() * padded_cols(); }
    index_t output_len() const { return m_out() * n_out(); }

    std::string str() const {
        std::ostringstream os;
        os << "(m=" << m << ", n=" << n << ", k=" << k << ", s=" << s << ", p=" << p << ")";
        return os.str();
    }

    bool operator==(const ConvSpec&) const = default;
};

/// Dense k x k kernel, row-major.
struct Kernel {
    index_t k = 1;
    std::vector<double> values;

    Kernel(index_t k_, std::vector<double> v) : k(k_), values(std::move(v)) {
        if (k < 1) throw std::invalid_argument("Kernel: side must be >= 1");
        if (static_cast<index_t>(values.size()) != k * k) {
            throw std::invalid_argument("Kernel: expected " + std::to_string(k * k) +
                                        " values, got " + std::to_string(values.size()));
        }
    }

    explicit Kernel(const Grid& g) : Kernel(g.rows, g.values) {
        if (g.rows != g.cols) {
            throw std::invalid_argument("Kernel: grid is " + std::to_string(g.rows) + "x" +
                                        std::to_string(g.cols) + ", expected square");
        }
    }

    double at(index_t j, index_t i) const {
        return values[static_cast<std::size_t>(j * k + i)];
    }
};

/// 180-degree rotation. The builders below place the kernel unflipped
/// (sliding-window correlation, the CNN convention); flip first to get
/// textbook convolution semantics.
inline Kernel flipped(const Kernel& kern) {
    std::vector<double> v(kern.values.size());
    for (index_t j = 0; j < kern.k; ++j) {
        for (index_t i = 0; i < kern.k; ++i) {
            v[static_cast<std::size_t>(j * kern.k + i)] = kern.at(kern.k - 1 - j, kern.k - 1 - i);
        }
    }
    return Kernel(kern.k, std::move(v));
}

inline DenseVector vectorize(const Grid& a) { return a.values; }

inline Grid unvectorize(DenseVector x, index_t rows, index_t cols) {
    if (static_cast<index_t>(x.size()) != rows * cols) {
        throw std::invalid_argument("unvectorize: vector length " + std::to_string(x.size()) +
                                    " does not match " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    }
    return Grid(rows, cols, std::move(x));
}

/// Selector matrix of shape ((m+2p)(n+2p), m*n) with one 1 per input cell:
/// P * vec(A) is the vectorized zero-padded input. Row i of the input lands
/// at padded rows offset by p top rows and p left columns.
inline SparseMatrix build_padding_matrix(const ConvSpec& spec, Layout layout = Layout::CSR) {
    Triplets t(spec.padded_len(), spec.input_len());
    t.reserve(static_cast<std::size_t>(spec.input_len()));
    for (index_t i = 0; i < spec.m; ++i) {
        const index_t row_start = spec.padded_cols() * (i + spec.p) + spec.p;
        for (index_t j = 0; j < spec.n; ++j) {
            t.add(row_start + j, spec.n * i + j, 1.0);
        }
    }
    return SparseMatrix::compile(t, layout);
}

/// Convolution matrix of shape (m_out*n_out, (m+2p)(n+2p)): row x*n_out + y
/// holds all k*k kernel taps of placement (x, y) at their padded-grid flat
/// positions. Kernel zeros are stored explicitly, so nnz is always
/// k^2 * m_out * n_out.
inline SparseMatrix build_conv_matrix(const Kernel& kern, const ConvSpec& spec,
                                      Layout layout = Layout::CSR) {
    if (kern.k != spec.k) {
        throw std::invalid_argument("build_conv_matrix: kernel side " + std::to_string(kern.k) +
                                    " does not match spec " + spec.str());
    }
    const index_t w = spec.padded_cols();
    Triplets t(spec.output_len(), spec.padded_len());
    t.reserve(static_cast<std::size_t>(spec.output_len() * spec.k * spec.k));
    for (index_t x = 0; x < spec.m_out(); ++x) {
        for (index_t y = 0; y < spec.n_out(); ++y) {
            const index_t row = x * spec.n_out() + y;
            for (index_t j = 0; j < spec.k; ++j) {
                const index_t base = (spec.s * x + j) * w + spec.s * y;
                for (index_t i = 0; i < spec.k; ++i) {
                    t.add(row, base + i, kern.at(j, i));
                }
            }
        }
    }
    return SparseMatrix::compile(t, layout);
}

/// The composed operator T = C*P together with its geometry.
struct Transform {
    ConvSpec spec;
    SparseMatrix matrix;
};

enum class TransformRoute {
    Spgemm,        ///< general sparse product of C and P
    ColumnGather,  ///< gather C's columns through the selector P
};

/// Builds T = C*P in the requested layout. The default route multiplies the
/// two matrices; ColumnGather exploits that P is a selector, so T's columns
/// are a subset of C's. Both routes drop entries that are exactly zero and
/// produce identical results.
inline Transform build_transform(const Kernel& kern, const ConvSpec& spec,
                                 Layout layout = Layout::CSR,
                                 TransformRoute route = TransformRoute::Spgemm) {
    if (route == TransformRoute::Spgemm) {
        const SparseMatrix c = build_conv_matrix(kern, spec);
        const SparseMatrix p = build_padding_matrix(spec);
        return Transform{spec, spgemm(c, p, layout)};
    }

    // padded flat position -> input flat position, -1 on padding cells
    std::vector<index_t> input_cell(static_cast<std::size_t>(spec.padded_len()), -1);
    for (index_t i = 0; i < spec.m; ++i) {
        const index_t row_start = spec.padded_cols() * (i + spec.p) + spec.p;
        for (index_t j = 0; j < spec.n; ++j) {
            input_cell[static_cast<std::size_t>(row_start + j)] = spec.n * i + j;
        }
    }
    const SparseMatrix c = build_conv_matrix(kern, spec);
    Triplets t(spec.output_len(), spec.input_len());
    t.reserve(static_cast<std::size_t>(c.nnz()));
    for (const Entry& e : c.entries()) {
        const index_t cell = input_cell[static_cast<std::size_t>(e.col)];
        if (cell >= 0 && e.value != 0.0) t.add(e.row, cell, e.value);
    }
    return Transform{spec, SparseMatrix::compile(t, layout)};
}

/// Applies a built transform: vec, SpMV, reshape.
inline Grid convolve(const Transform& t, const Grid& a, int threads = 0) {
    if (a.rows != t.spec.m || a.cols != t.spec.n) {
        throw std::invalid_argument("convolve: input is " + std::to_string(a.rows) + "x" +
                                    std::to_string(a.cols) + " but transform expects " +
                                    t.spec.str());
    }
    DenseVector out = spmv(t.matrix, std::span<const double>(a.values), threads);
    return Grid(t.spec.m_out(), t.spec.n_out(), std::move(out));
}

// Transform file format: a geometry header line, then the sparse matrix in
// coordinate text form.
//   %%transform m n k s p layout

inline void write_transform(std::ostream& os, const Transform& t) {
    os << "%%transform " << t.spec.m << ' ' << t.spec.n << ' ' << t.spec.k << ' ' << t.spec.s
       << ' ' << t.spec.p << ' ' << layout_name(t.matrix.layout()) << '\n';
    write_sparse(os, t.matrix);
}

inline Transform read_transform(std::istream& is) {
    std::string tag;
    index_t m = 0, n = 0, k = 0, s = 0, p = 0;
    std::string layout_str;
    if (!(is >> tag >> m >> n >> k >> s >> p >> layout_str) || tag != "%%transform") {
        throw std::runtime_error("read_transform: bad header line");
    }
    is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    const ConvSpec spec(m, n, k, s, p);
    SparseMatrix mat = read_sparse(is, layout_from_name(layout_str));
    if (mat.rows() != spec.output_len() || mat.cols() != spec.input_len()) {
        throw std::runtime_error("read_transform: matrix is " + std::to_string(mat.rows()) + "x" +
                                 std::to_string(mat.cols()) + " but spec " + spec.str() +
                                 " requires " + std::to_string(spec.output_len()) + "x" +
                                 std::to_string(spec.input_len()));
    }
    return Transform{spec, std::move(mat)};
}

}  // namespace spconv
