// Layer-table ingestion and the CPU timing harness.
//
// Per layer and method, a warmup is discarded and every timed trial performs
// one full convolution on the monotonic clock. The SpMV methods reuse one
// prebuilt transform per layout and time vec + SpMV + reshape; the im2col
// comparator re-lowers the input on every trial, which is the cost the
// precomputed transform removes. Inputs and kernels are seeded standard
// normals; outputs of all methods are cross-checked once per layer before
// anything is timed.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spconv/analysis.hpp"
#include "spconv/conv.hpp"
#include "spconv/grid.hpp"
#include "spconv/reference.hpp"
#include "spconv/rng.hpp"
#include "spconv/sparse.hpp"

namespace spconv {

struct LayerConfig {
    std::string name;
    index_t m = 1, n = 1, k = 1, s = 1, p = 0;

    ConvSpec spec() const { return ConvSpec(m, n, k, s, p); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline index_t parse_count(const std::string& s, const std::string& context) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not an integer: '" + s + "'");
    }
    if (pos != s.size()) throw std::runtime_error(context + ": not an integer: '" + s + "'");
    return static_cast<index_t>(v);
}

}  // namespace detail

/// Parses a `name,m,n,k,s,p` CSV. Every row must form a valid ConvSpec.
inline std::vector<LayerConfig> load_layer_table(std::istream& is, const std::string& source) {
    std::string line;
    if (!std::getline(is, line)) {
        throw std::runtime_error(source + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "name,m,n,k,s,p") {
        throw std::runtime_error(source + ":1: expected header 'name,m,n,k,s,p', got '" + line +
                                 "'");
    }
    std::vector<LayerConfig> layers;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(lineno);
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 6) {
            throw std::runtime_error(where + ": expected 6 fields, got " +
                                     std::to_string(fields.size()));
        }
        LayerConfig cfg;
        cfg.name = fields[0];
        cfg.m = detail::parse_count(fields[1], where);
        cfg.n = detail::parse_count(fields[2], where);
        cfg.k = detail::parse_count(fields[3], where);
        cfg.s = detail::parse_count(fields[4], where);
        cfg.p = detail::parse_count(fields[5], where);
        try {
            (void)cfg.spec();
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": layer '" + cfg.name + "': " + e.what());
        }
        layers.push_back(std::move(cfg));
    }
    return layers;
}

inline std::vector<LayerConfig> load_layer_table(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open layer table '" + path + "'");
    return load_layer_table(f, path);
}

enum class Method { CsrSpmv, CscSpmv, Im2col };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::CsrSpmv: return "CSR-SpMV";
        case Method::CscSpmv: return "CSC-SpMV";
        default: return "im2col";
    }
}

struct BenchResult {
    std::string layer;
    Method method;
    index_t trials = 0;
    double mean_us = 0.0;
    double sem_us = 0.0;
    double build_time_us = 0.0;  ///< one-time transform construction; 0 for im2col
};

struct LayerProblem {
    Grid input;
    Kernel kernel;
};

/// Input and kernel for one layer, fully determined by (cfg, seed).
inline LayerProblem make_layer_problem(const LayerConfig& cfg, std::uint64_t seed) {
    Grid input = random_normal_grid(cfg.m, cfg.n, seed);
    Kernel kernel = random_normal_kernel(cfg.k, derive_seed(seed, 1));
    return LayerProblem{std::move(input), std::move(kernel)};
}

namespace detail {

inline void keep_alive(const void* p) {
#if defined(__GNUC__) || defined(__clang__)
    asm volatile("" : : "g"(p) : "memory");
#else
    static volatile const void* sink;
    sink = p;
#endif
}

struct TrialStats {
    double mean_us = 0.0;
    double sem_us = 0.0;
};

inline TrialStats summarize_us(const std::vector<double>& samples) {
    TrialStats st;
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double v : samples) sum += v;
    st.mean_us = sum / n;
    if (samples.size() > 1) {
        double sq = 0.0;
        for (double v : samples) sq += (v - st.mean_us) * (v - st.mean_us);
        st.sem_us = std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
    }
    return st;
}

template <typename F>
inline TrialStats time_trials(index_t trials, index_t warmup, F&& run_once) {
    using clock = std::chrono::steady_clock;
    for (index_t i = 0; i < warmup; ++i) run_once();
    std::vector<double> us(static_cast<std::size_t>(trials));
    for (index_t i = 0; i < trials; ++i) {
        const auto t0 = clock::now();
        run_once();
        const auto t1 = clock::now();
        us[static_cast<std::size_t>(i)] =
            std::chrono::duration<double, std::micro>(t1 - t0).count();
    }
    return summarize_us(us);
}

inline double max_abs_dev(const Grid& a, const Grid& b) {
    double dev = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dev = std::max(dev, std::abs(a.values[i] - b.values[i]));
    }
    return dev;
}

}  // namespace detail

/// Times all three methods on one layer. The transforms are built once and
/// their construction cost reported separately; timing covers only the apply
/// step (plus the per-trial lowering for im2col).
inline std::vector<BenchResult> run_layer_bench(const LayerConfig& cfg, index_t trials,
                                                index_t warmup, std::uint64_t seed,
                                                int threads = 1) {
    if (trials < 1) throw std::invalid_argument("run_layer_bench: trials must be >= 1");
    const ConvSpec spec = cfg.spec();
    const LayerProblem prob = make_layer_problem(cfg, seed);

    using clock = std::chrono::steady_clock;
    const auto b0 = clock::now();
    const Transform t_csr = build_transform(prob.kernel, spec, Layout::CSR);
    const auto b1 = clock::now();
    const Transform t_csc = build_transform(prob.kernel, spec, Layout::CSC);
    const auto b2 = clock::now();
    const double build_csr_us = std::chrono::duration<double, std::micro>(b1 - b0).count();
    const double build_csc_us = std::chrono::duration<double, std::micro>(b2 - b1).count();

    // Cross-check every method against the direct reference before timing.
    {
        const Grid ref = direct_conv(prob.input, prob.kernel, spec);
        const Grid out_csr = convolve(t_csr, prob.input, threads);
        const Grid out_csc = convolve(t_csc, prob.input, threads);
        const Grid out_i2c = im2col_conv(prob.input, prob.kernel, spec);
        double dev = 0.0;
        for (const Grid* g : {&out_csr, &out_csc, &out_i2c}) {
            dev = std::max(dev, detail::max_abs_dev(*g, ref));
        }
        dev = std::max(dev, detail::max_abs_dev(out_csr, out_csc));
        if (dev > 1e-10) {
            throw std::runtime_error("cross-check failed for layer '" + cfg.name +
                                     "': max abs deviation " + format_value(dev));
        }
    }

    std::vector<BenchResult> results;
    for (Method method : {Method::CsrSpmv, Method::CscSpmv, Method::Im2col}) {
        const Transform* t = method == Method::CsrSpmv   ? &t_csr
                             : method == Method::CscSpmv ? &t_csc
                                                         : nullptr;
        detail::TrialStats st = detail::time_trials(trials, warmup, [&] {
            if (t != nullptr) {
                const Grid out = convolve(*t, prob.input, threads);
                detail::keep_alive(out.values.data());
            } else {
                const Grid out = im2col_conv(prob.input, prob.kernel, spec);
                detail::keep_alive(out.values.data());
            }
        });
        BenchResult r;
        r.layer = cfg.name;
        r.method = method;
        r.trials = trials;
        r.mean_us = st.mean_us;
        r.sem_us = st.sem_us;
        r.build_time_us = method == Method::CsrSpmv   ? build_csr_us
                          : method == Method::CscSpmv ? build_csc_us
                                                      : 0.0;
        results.push_back(std::move(r));
    }
    return results;
}

/// Runs the whole table; layer i draws its problem from derive_seed(seed, i).
inline std::vector<BenchResult> run_table_bench(
    const std::vector<LayerConfig>& layers, index_t trials, index_t warmup, std::uint64_t seed,
    int threads = 1, const std::function<void(const LayerConfig&, std::size_t)>& progress = {}) {
    std::vector<BenchResult> all;
    all.reserve(layers.size() * 3);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (progress) progress(layers[i], i);
        auto rs = run_layer_bench(layers[i], trials, warmup, derive_seed(seed, i), threads);
        all.insert(all.end(), std::make_move_iterator(rs.begin()),
                   std::make_move_iterator(rs.end()));
    }
    return all;
}

enum class ReportFormat { Csv, Markdown };

/// Renders per-layer rows, followed by one TOTAL row per method when the
/// report spans more than one layer. Totals are the exact sums of the
/// reported per-layer means (no re-timing); total SEM is the root sum of
/// squares of the per-layer SEMs.
inline std::string emit_report(const std::vector<BenchResult>& results, ReportFormat format) {
    if (results.empty()) throw std::invalid_argument("emit_report: no results");

    std::vector<Method> methods;
    std::vector<std::string> layers;
    for (const BenchResult& r : results) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
            methods.push_back(r.method);
        }
        if (std::find(layers.begin(), layers.end(), r.layer) == layers.end()) {
            layers.push_back(r.layer);
        }
    }

    struct Total {
        double mean = 0.0;
        double sem_sq = 0.0;
        double build = 0.0;
    };
    std::vector<Total> totals(methods.size());
    for (const BenchResult& r : results) {
        const auto mi = static_cast<std::size_t>(
            std::find(methods.begin(), methods.end(), r.method) - methods.begin());
        totals[mi].mean += r.mean_us;
        totals[mi].sem_sq += r.sem_us * r.sem_us;
        totals[mi].build += r.build_time_us;
    }

    std::ostringstream os;
    const bool md = format == ReportFormat::Markdown;
    if (md) {
        os << "Single-threaded CPU timings in microseconds (mean over trials, SEM = "
              "stddev/sqrt(trials)).\n"
           << "The im2col comparator is the in-repo dense lowering + product, not an optimized "
              "BLAS; build_time_us\nis the one-time transform construction for the SpMV "
              "methods.\n\n";
        os << "| layer | method | mean_us | sem_us | build_time_us |\n";
        os << "|---|---|---|---|---|\n";
    } else {
        os << "layer,method,mean_us,sem_us,build_time_us\n";
    }

    auto put_row = [&](const std::string& layer, Method method, double mean, double sem,
                       double build) {
        if (md) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "| %s | %s | %.3f | %.3f | %.3f |", layer.c_str(),
                          method_name(method), mean, sem, build);
            os << buf << '\n';
        } else {
            os << layer << ',' << method_name(method) << ',' << format_value(mean) << ','
               << format_value(sem) << ',' << format_value(build) << '\n';
        }
    };

    for (const BenchResult& r : results) {
        put_row(r.layer, r.method, r.mean_us, r.sem_us, r.build_time_us);
    }
    if (layers.size() > 1) {
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            put_row("TOTAL", methods[mi], totals[mi].mean, std::sqrt(totals[mi].sem_sq),
                    totals[mi].build);
        }
    }
    return os.str();
}

}  // namespace spconv
