// Exhaustive small-size verification sweep: for every geometry in the grid
// (m, n up to max_dim; p in 0..3; s in 1..3; k up to min(m,n)+2p) the sparse
// transform, the direct sliding window and im2col must agree, the closed-form
// multiplication count must match both the brute-force overlap oracle and
// the stored size of T, and the padding matrix must satisfy its selector
// identities.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spconv/analysis.hpp"
#include "spconv/bench.hpp"
#include "spconv/conv.hpp"
#include "spconv/reference.hpp"
#include "spconv/rng.hpp"
#include "spconv/sparse.hpp"

namespace spconv {

struct VerifyOptions {
    index_t max_dim = 12;
    int seeds = 3;
    std::uint64_t base_seed = 42;
    double conv_tol = 1e-10;
    double layout_tol = 1e-12;
    std::size_t max_failures = 20;  ///< stop collecting after this many
};

struct VerifyReport {
    index_t specs = 0;
    index_t conv_cases = 0;
    index_t clipped_specs = 0;  ///< specs where some placement sees only padding
    double max_conv_dev = 0.0;
    double max_layout_dev = 0.0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

namespace detail {

inline Kernel nonzero_kernel(index_t k, std::uint64_t seed) {
    for (int attempt = 0;; ++attempt) {
        Kernel kern = random_normal_kernel(k, seed + static_cast<std::uint64_t>(attempt));
        if (std::none_of(kern.values.begin(), kern.values.end(),
                         [](double v) { return v == 0.0; })) {
            return kern;
        }
    }
}

}  // namespace detail

inline VerifyReport run_verification(const VerifyOptions& opt = {}) {
    VerifyReport rep;
    auto fail = [&rep, &opt](const std::string& msg) {
        if (rep.failures.size() < opt.max_failures) rep.failures.push_back(msg);
    };

    std::uint64_t case_index = 0;
    for (index_t m = 1; m <= opt.max_dim; ++m) {
        for (index_t n = 1; n <= opt.max_dim; ++n) {
            for (index_t p = 0; p <= 3; ++p) {
                for (index_t s = 1; s <= 3; ++s) {
                    const index_t k_max = std::min(m, n) + 2 * p;
                    for (index_t k = 1; k <= k_max; ++k) {
                        const ConvSpec spec(m, n, k, s, p);
                        ++rep.specs;

                        const index_t bound = nnz_bound(spec);
                        const index_t oracle = nnz_oracle(spec);
                        if (bound != oracle) {
                            fail("nnz_bound " + std::to_string(bound) + " != oracle " +
                                 std::to_string(oracle) + " for " + spec.str());
                        }
                        const index_t dense = spec.output_len() * k * k;
                        if (p == 0 && bound != dense) {
                            fail("p=0 bound " + std::to_string(bound) + " != dense " +
                                 std::to_string(dense) + " for " + spec.str());
                        }
                        if (bound < 0 || bound > dense) {
                            fail("bound outside [0, dense] for " + spec.str());
                        }
                        const auto per_output = nnz_per_output(spec);
                        if (std::any_of(per_output.begin(), per_output.end(),
                                        [](index_t v) { return v == 0; })) {
                            ++rep.clipped_specs;
                        }

                        // Padding-matrix laws depend only on (m, n, p).
                        if (k == 1 && s == 1) {
                            const SparseMatrix pm = build_padding_matrix(spec);
                            const SparseMatrix ptp = spgemm(transposed(pm), pm);
                            bool identity = ptp.rows() == spec.input_len() &&
                                            ptp.cols() == spec.input_len() &&
                                            ptp.nnz() == spec.input_len();
                            if (identity) {
                                for (const Entry& e : ptp.entries()) {
                                    if (e.row != e.col || e.value != 1.0) identity = false;
                                }
                            }
                            if (!identity) fail("PtP != identity for " + spec.str());

                            const Grid a =
                                random_normal_grid(m, n, derive_seed(opt.base_seed, case_index++));
                            const Grid padded = unvectorize(spmv(pm, vectorize(a)),
                                                            spec.padded_rows(), spec.padded_cols());
                            bool pad_ok = true;
                            for (index_t r = 0; r < spec.padded_rows() && pad_ok; ++r) {
                                for (index_t c = 0; c < spec.padded_cols() && pad_ok; ++c) {
                                    const bool inside = r >= p && r < p + m && c >= p && c < p + n;
                                    const double want = inside ? a.at(r - p, c - p) : 0.0;
                                    if (padded.at(r, c) != want) pad_ok = false;
                                }
                            }
                            if (!pad_ok) fail("P*vec(A) != zero-padded A for " + spec.str());
                        }

                        for (int sd = 0; sd < opt.seeds; ++sd) {
                            const std::uint64_t cs = derive_seed(opt.base_seed, case_index++);
                            const Grid a = random_normal_grid(m, n, cs);
                            const Kernel kern = detail::nonzero_kernel(k, derive_seed(cs, 7));

                            const Transform t_csr = build_transform(kern, spec, Layout::CSR);
                            const SparseMatrix t_csc_m = relayout(t_csr.matrix, Layout::CSC);
                            const Transform t_csc{spec, t_csc_m};

                            const Grid ref = direct_conv(a, kern, spec);
                            const Grid sp_csr = convolve(t_csr, a);
                            const Grid sp_csc = convolve(t_csc, a);
                            const Grid i2c = im2col_conv(a, kern, spec);
                            ++rep.conv_cases;

                            double dev = 0.0;
                            for (const Grid* g : {&sp_csr, &sp_csc, &i2c}) {
                                dev = std::max(dev, detail::max_abs_dev(*g, ref));
                            }
                            dev = std::max(dev, detail::max_abs_dev(sp_csr, i2c));
                            rep.max_conv_dev = std::max(rep.max_conv_dev, dev);
                            if (dev > opt.conv_tol) {
                                fail("convolution mismatch (dev " + format_value(dev) + ") for " +
                                     spec.str() + " seed " + std::to_string(sd));
                            }

                            const double ldev = detail::max_abs_dev(sp_csr, sp_csc);
                            rep.max_layout_dev = std::max(rep.max_layout_dev, ldev);
                            if (ldev > opt.layout_tol) {
                                fail("CSR/CSC mismatch (dev " + format_value(ldev) + ") for " +
                                     spec.str() + " seed " + std::to_string(sd));
                            }

                            if (t_csr.matrix.nnz() != bound) {
                                fail("nnz(T) " + std::to_string(t_csr.matrix.nnz()) +
                                     " != bound " + std::to_string(bound) + " for " + spec.str());
                            }
                        }
                        if (rep.failures.size() >= opt.max_failures) return rep;
                    }
                }
            }
        }
    }
    return rep;
}

}  // namespace spconv
