// Sparse matrix core: triplet builder, compiled CSR/CSC storage, SpMV,
// sparse-sparse product and block assembly.
//
// Compiled matrices are immutable; all mutation happens on Triplets before
// compile(). Indices are 0-based throughout. Values are 64-bit floats.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "spconv/grid.hpp"

namespace spconv {

enum class Layout { CSR, CSC };

inline const char* layout_name(Layout l) { return l == Layout::CSR ? "csr" : "csc"; }

inline Layout layout_from_name(const std::string& s) {
    if (s == "csr" || s == "CSR") return Layout::CSR;
    if (s == "csc" || s == "CSC") return Layout::CSC;
    throw std::invalid_argument("unknown layout '" + s + "' (expected csr or csc)");
}

/// One stored coordinate.
struct Entry {
    index_t row;
    index_t col;
    double value;
};

/// Coordinate-format builder. Each (row, col) pair may be added at most once;
/// duplicates are rejected at compile time since every construction site in
/// this library emits each coordinate exactly once.
class Triplets {
public:
    Triplets(index_t rows, index_t cols) : rows_(rows), cols_(cols) {
        if (rows < 1 || cols < 1) {
            throw std::invalid_argument("Triplets: dimensions must be at least 1x1, got " +
                                        std::to_string(rows) + "x" + std::to_string(cols));
        }
    }

    void reserve(std::size_t n) { entries_.reserve(n); }

    void add(index_t row, index_t col, double value) {
        if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
            throw std::invalid_argument("Triplets: entry (" + std::to_string(row) + ", " +
                                        std::to_string(col) + ") outside " +
                                        std::to_string(rows_) + "x" + std::to_string(cols_));
        }
        entries_.push_back({row, col, value});
    }

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    index_t rows_;
    index_t cols_;
    std::vector<Entry> entries_;
};

/// Compressed sparse matrix, row (CSR) or column (CSC) major.
///
/// Invariants: ptr is non-decreasing with ptr.size() == major_dim()+1 and
/// ptr.back() == nnz; minor indices are strictly increasing within each
/// major slice. Stored values may be explicit zeros; compile() never drops
/// them (see pruned()).
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix compile(const Triplets& t, Layout layout) {
        SparseMatrix m;
        m.layout_ = layout;
        m.rows_ = t.rows();
        m.cols_ = t.cols();

        std::vector<Entry> sorted = t.entries();
        const bool csr = layout == Layout::CSR;
        std::sort(sorted.begin(), sorted.end(), [csr](const Entry& a, const Entry& b) {
            const index_t amaj = csr ? a.row : a.col, amin = csr ? a.col : a.row;
            const index_t bmaj = csr ? b.row : b.col, bmin = csr ? b.col : b.row;
            return amaj != bmaj ? amaj < bmaj : amin < bmin;
        });
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            if (sorted[i].row == sorted[i - 1].row && sorted[i].col == sorted[i - 1].col) {
                throw std::invalid_argument("SparseMatrix: duplicate entry at (" +
                                            std::to_string(sorted[i].row) + ", " +
                                            std::to_string(sorted[i].col) + ")");
            }
        }

        const index_t major = csr ? m.rows_ : m.cols_;
        m.ptr_.assign(static_cast<std::size_t>(major) + 1, 0);
        m.idx_.reserve(sorted.size());
        m.val_.reserve(sorted.size());
        for (const Entry& e : sorted) {
            m.ptr_[static_cast<std::size_t>((csr ? e.row : e.col)) + 1]++;
            m.idx_.push_back(csr ? e.col : e.row);
            m.val_.push_back(e.value);
        }
        for (index_t i = 0; i < major; ++i) {
            m.ptr_[static_cast<std::size_t>(i) + 1] += m.ptr_[static_cast<std::size_t>(i)];
        }
        return m;
    }

    Layout layout() const { return layout_; }
    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t nnz() const { return static_cast<index_t>(val_.size()); }
    index_t major_dim() const { return layout_ == Layout::CSR ? rows_ : cols_; }
    index_t minor_dim() const { return layout_ == Layout::CSR ? cols_ : rows_; }

    const std::vector<index_t>& ptr() const { return ptr_; }
    const std::vector<index_t>& idx() const { return idx_; }
    const std::vector<double>& val() const { return val_; }

    /// Stored entries in storage order (row-major for CSR, column-major for CSC).
    std::vector<Entry> entries() const {
        std::vector<Entry> out;
        out.reserve(val_.size());
        for (index_t maj = 0; maj < major_dim(); ++maj) {
            for (index_t k = ptr_[static_cast<std::size_t>(maj)];
                 k < ptr_[static_cast<std::size_t>(maj) + 1]; ++k) {
                const index_t min = idx_[static_cast<std::size_t>(k)];
                const double v = val_[static_cast<std::size_t>(k)];
                if (layout_ == Layout::CSR) {
                    out.push_back({maj, min, v});
                } else {
                    out.push_back({min, maj, v});
                }
            }
        }
        return out;
    }

    /// Row-major dense expansion.
    std::vector<double> to_dense() const {
        std::vector<double> d(static_cast<std::size_t>(rows_ * cols_), 0.0);
        for (const Entry& e : entries()) {
            d[static_cast<std::size_t>(e.row * cols_ + e.col)] = e.value;
        }
        return d;
    }

private:
    Layout layout_ = Layout::CSR;
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<index_t> ptr_;
    std::vector<index_t> idx_;
    std::vector<double> val_;
};

/// Thread count used by spmv when the caller does not pass one.
/// Controlled by SPCONV_THREADS; defaults to 1.
inline int thread_cap() {
    const char* env = std::getenv("SPCONV_THREADS");
    if (env == nullptr) return 1;
    const long v = std::strtol(env, nullptr, 10);
    return v >= 1 ? static_cast<int>(v) : 1;
}

namespace detail {

inline void spmv_csr_rows(const SparseMatrix& m, std::span<const double> x, double* y,
                          index_t row_begin, index_t row_end) {
    const index_t* ptr = m.ptr().data();
    const index_t* idx = m.idx().data();
    const double* val = m.val().data();
    for (index_t i = row_begin; i < row_end; ++i) {
        double acc = 0.0;
        for (index_t k = ptr[i]; k < ptr[i + 1]; ++k) {
            acc += val[k] * x[static_cast<std::size_t>(idx[k])];
        }
        y[i] = acc;
    }
}

inline void spmv_csc_cols(const SparseMatrix& m, std::span<const double> x, double* y,
                          index_t col_begin, index_t col_end) {
    const index_t* ptr = m.ptr().data();
    const index_t* idx = m.idx().data();
    const double* val = m.val().data();
    for (index_t j = col_begin; j < col_end; ++j) {
        const double xj = x[static_cast<std::size_t>(j)];
        for (index_t k = ptr[j]; k < ptr[j + 1]; ++k) {
            y[idx[k]] += val[k] * xj;
        }
    }
}

}  // namespace detail

/// Sparse matrix-vector product y = M x.
///
/// threads == 0 uses thread_cap(). Parallel runs split the major dimension
/// into contiguous chunks; results are deterministic for a fixed thread count
/// (CSC partials are combined in thread order).
inline DenseVector spmv(const SparseMatrix& m, std::span<const double> x, int threads = 0) {
    if (m.cols() != static_cast<index_t>(x.size())) {
        throw std::invalid_argument("spmv: matrix has " + std::to_string(m.cols()) +
                                    " columns but vector has " + std::to_string(x.size()) +
                                    " elements");
    }
    DenseVector y(static_cast<std::size_t>(m.rows()), 0.0);
    int nt = threads > 0 ? threads : thread_cap();
    const index_t major = m.major_dim();
    if (nt > major) nt = static_cast<int>(major > 0 ? major : 1);

    if (nt <= 1) {
        if (m.layout() == Layout::CSR) {
            detail::spmv_csr_rows(m, x, y.data(), 0, m.rows());
        } else {
            detail::spmv_csc_cols(m, x, y.data(), 0, m.cols());
        }
        return y;
    }

    const index_t chunk = (major + nt - 1) / nt;
    if (m.layout() == Layout::CSR) {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) {
            const index_t lo = std::min<index_t>(static_cast<index_t>(t) * chunk, major);
            const index_t hi = std::min<index_t>(lo + chunk, major);
            pool.emplace_back([&, lo, hi] { detail::spmv_csr_rows(m, x, y.data(), lo, hi); });
        }
        for (auto& th : pool) th.join();
    } else {
        std::vector<DenseVector> partial(static_cast<std::size_t>(nt),
                                         DenseVector(y.size(), 0.0));
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) {
            const index_t lo = std::min<index_t>(static_cast<index_t>(t) * chunk, major);
            const index_t hi = std::min<index_t>(lo + chunk, major);
            pool.emplace_back([&, lo, hi, t] {
                detail::spmv_csc_cols(m, x, partial[static_cast<std::size_t>(t)].data(), lo, hi);
            });
        }
        for (auto& th : pool) th.join();
        for (int t = 0; t < nt; ++t) {
            const DenseVector& p = partial[static_cast<std::size_t>(t)];
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += p[i];
        }
    }
    return y;
}

inline DenseVector spmv(const SparseMatrix& m, const DenseVector& x, int threads = 0) {
    return spmv(m, std::span<const double>(x), threads);
}

/// Recompiles a matrix into the requested layout (no-op copy when equal).
inline SparseMatrix relayout(const SparseMatrix& m, Layout layout) {
    if (m.layout() == layout) return m;
    Triplets t(m.rows(), m.cols());
    t.reserve(static_cast<std::size_t>(m.nnz()));
    for (const Entry& e : m.entries()) t.add(e.row, e.col, e.value);
    return SparseMatrix::compile(t, layout);
}

inline SparseMatrix transposed(const SparseMatrix& m) {
    Triplets t(m.cols(), m.rows());
    t.reserve(static_cast<std::size_t>(m.nnz()));
    for (const Entry& e : m.entries()) t.add(e.col, e.row, e.value);
    return SparseMatrix::compile(t, m.layout());
}

/// Copy without stored exact zeros.
inline SparseMatrix pruned(const SparseMatrix& m) {
    Triplets t(m.rows(), m.cols());
    t.reserve(static_cast<std::size_t>(m.nnz()));
    for (const Entry& e : m.entries()) {
        if (e.value != 0.0) t.add(e.row, e.col, e.value);
    }
    return SparseMatrix::compile(t, m.layout());
}

/// Sparse product A*B with a row-wise accumulator (Gustavson schedule) over
/// CSR views of the operands. Result entries that accumulate to exactly 0.0
/// are dropped.
inline SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b,
                           Layout out_layout = Layout::CSR) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("spgemm: inner dimensions differ, " +
                                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()));
    }
    const SparseMatrix acsr = a.layout() == Layout::CSR ? a : relayout(a, Layout::CSR);
    const SparseMatrix bcsr = b.layout() == Layout::CSR ? b : relayout(b, Layout::CSR);

    Triplets out(a.rows(), b.cols());
    std::vector<double> acc(static_cast<std::size_t>(b.cols()), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(b.cols()), 0);
    std::vector<index_t> touched;

    const auto& aptr = acsr.ptr();
    const auto& aidx = acsr.idx();
    const auto& aval = acsr.val();
    const auto& bptr = bcsr.ptr();
    const auto& bidx = bcsr.idx();
    const auto& bval = bcsr.val();

    for (index_t i = 0; i < a.rows(); ++i) {
        touched.clear();
        for (index_t ka = aptr[static_cast<std::size_t>(i)];
             ka < aptr[static_cast<std::size_t>(i) + 1]; ++ka) {
            const index_t k = aidx[static_cast<std::size_t>(ka)];
            const double av = aval[static_cast<std::size_t>(ka)];
            for (index_t kb = bptr[static_cast<std::size_t>(k)];
                 kb < bptr[static_cast<std::size_t>(k) + 1]; ++kb) {
                const index_t j = bidx[static_cast<std::size_t>(kb)];
                if (!seen[static_cast<std::size_t>(j)]) {
                    seen[static_cast<std::size_t>(j)] = 1;
                    acc[static_cast<std::size_t>(j)] = 0.0;
                    touched.push_back(j);
                }
                acc[static_cast<std::size_t>(j)] += av * bval[static_cast<std::size_t>(kb)];
            }
        }
        for (index_t j : touched) {
            if (acc[static_cast<std::size_t>(j)] != 0.0) {
                out.add(i, j, acc[static_cast<std::size_t>(j)]);
            }
            seen[static_cast<std::size_t>(j)] = 0;
        }
    }
    return SparseMatrix::compile(out, out_layout);
}

/// Concatenates blocks left to right. All blocks must share the row count.
inline SparseMatrix hstack_blocks(std::span<const SparseMatrix> blocks,
                                  Layout out_layout = Layout::CSR) {
    if (blocks.empty()) throw std::invalid_argument("hstack_blocks: no blocks");
    const index_t rows = blocks[0].rows();
    index_t cols = 0;
    std::size_t nnz = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].rows() != rows) {
            throw std::invalid_argument("hstack_blocks: block " + std::to_string(b) + " has " +
                                        std::to_string(blocks[b].rows()) + " rows, expected " +
                                        std::to_string(rows));
        }
        cols += blocks[b].cols();
        nnz += static_cast<std::size_t>(blocks[b].nnz());
    }
    Triplets t(rows, cols);
    t.reserve(nnz);
    index_t col_off = 0;
    for (const SparseMatrix& blk : blocks) {
        for (const Entry& e : blk.entries()) t.add(e.row, col_off + e.col, e.value);
        col_off += blk.cols();
    }
    return SparseMatrix::compile(t, out_layout);
}

/// Concatenates blocks top to bottom. All blocks must share the column count.
inline SparseMatrix vstack_blocks(std::span<const SparseMatrix> blocks,
                                  Layout out_layout = Layout::CSR) {
    if (blocks.empty()) throw std::invalid_argument("vstack_blocks: no blocks");
    const index_t cols = blocks[0].cols();
    index_t rows = 0;
    std::size_t nnz = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].cols() != cols) {
            throw std::invalid_argument("vstack_blocks: block " + std::to_string(b) + " has " +
                                        std::to_string(blocks[b].cols()) + " cols, expected " +
                                        std::to_string(cols));
        }
        rows += blocks[b].rows();
        nnz += static_cast<std::size_t>(blocks[b].nnz());
    }
    Triplets t(rows, cols);
    t.reserve(nnz);
    index_t row_off = 0;
    for (const SparseMatrix& blk : blocks) {
        for (const Entry& e : blk.entries()) t.add(row_off + e.row, e.col, e.value);
        row_off += blk.rows();
    }
    return SparseMatrix::compile(t, out_layout);
}

// Coordinate text format:
//   %%sparse coordinate real
//   rows cols nnz
//   row col value          (1-based, one entry per line, 17 significant digits)

inline void write_sparse(std::ostream& os, const SparseMatrix& m) {
    os << "%%sparse coordinate real\n";
    os << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    for (const Entry& e : m.entries()) {
        os << (e.row + 1) << ' ' << (e.col + 1) << ' ' << format_value(e.value) << '\n';
    }
}

inline SparseMatrix read_sparse(std::istream& is, Layout layout = Layout::CSR) {
    std::string header;
    std::getline(is, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != "%%sparse coordinate real") {
        throw std::runtime_error("read_sparse: bad header line '" + header + "'");
    }
    index_t rows = 0, cols = 0, nnz = 0;
    if (!(is >> rows >> cols >> nnz) || rows < 1 || cols < 1 || nnz < 0) {
        throw std::runtime_error("read_sparse: bad 'rows cols nnz' line");
    }
    Triplets t(rows, cols);
    t.reserve(static_cast<std::size_t>(nnz));
    for (index_t i = 0; i < nnz; ++i) {
        index_t r = 0, c = 0;
        double v = 0.0;
        if (!(is >> r >> c >> v)) {
            throw std::runtime_error("read_sparse: expected " + std::to_string(nnz) +
                                     " entries, got " + std::to_string(i));
        }
        t.add(r - 1, c - 1, v);
    }
    return SparseMatrix::compile(t, layout);
}

}  // namespace spconv
