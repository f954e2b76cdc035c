// Command-line front end: build/save transforms, apply them to inputs,
// run the verification sweep, evaluate multiplication counts, and run the
// layer-table benchmark.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spconv/spconv.hpp"

namespace {

using namespace spconv;

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return f;
}

struct SpecFlags {
    index_t m = 1, n = 1, k = 1, s = 1, p = 0;

    void attach(CLI::App* cmd, bool required) {
        auto* om = cmd->add_option("--m", m, "input rows");
        auto* on = cmd->add_option("--n", n, "input cols");
        auto* ok = cmd->add_option("--k", k, "kernel side");
        cmd->add_option("--s", s, "stride")->capture_default_str();
        cmd->add_option("--p", p, "zero padding")->capture_default_str();
        if (required) {
            om->required();
            on->required();
            ok->required();
        }
    }

    ConvSpec spec() const { return ConvSpec(m, n, k, s, p); }
};

int cmd_build(const SpecFlags& flags, const std::string& kernel_path, std::uint64_t seed,
              const std::string& layout_str, const std::string& out_path) {
    const ConvSpec spec = flags.spec();
    Kernel kern = [&] {
        if (kernel_path.empty()) return random_normal_kernel(spec.k, seed);
        auto f = open_in(kernel_path);
        return Kernel(read_grid(f));
    }();
    if (kern.k != spec.k) {
        throw std::runtime_error("kernel file is " + std::to_string(kern.k) + "x" +
                                 std::to_string(kern.k) + " but --k is " + std::to_string(spec.k));
    }
    const Transform t = build_transform(kern, spec, layout_from_name(layout_str));
    auto f = open_out(out_path);
    write_transform(f, t);
    std::cout << "wrote transform " << spec.str() << " layout " << layout_str << " nnz "
              << t.matrix.nnz() << " to " << out_path << "\n";
    return 0;
}

int cmd_convolve(const std::string& transform_path, const std::string& input_path,
                 const std::string& out_path) {
    auto tf = open_in(transform_path);
    const Transform t = read_transform(tf);
    auto inf = open_in(input_path);
    const Grid a = read_grid(inf);
    const Grid out = convolve(t, a);
    if (out_path.empty()) {
        write_grid(std::cout, out);
    } else {
        auto f = open_out(out_path);
        write_grid(f, out);
    }
    return 0;
}

int cmd_verify(index_t max_dim, int seeds, std::uint64_t seed) {
    VerifyOptions opt;
    opt.max_dim = max_dim;
    opt.seeds = seeds;
    opt.base_seed = seed;
    const VerifyReport rep = run_verification(opt);
    std::cout << "verify: " << rep.specs << " specs, " << rep.conv_cases
              << " convolution cases, " << rep.clipped_specs << " specs with padding-only "
              << "placements\n"
              << "max |sparse - reference| = " << format_value(rep.max_conv_dev) << "\n"
              << "max |CSR - CSC|         = " << format_value(rep.max_layout_dev) << "\n";
    if (!rep.ok()) {
        for (const auto& f : rep.failures) std::cout << "FAIL: " << f << "\n";
        std::cout << "verify: FAILED (" << rep.failures.size() << " failures shown)\n";
        return 1;
    }
    std::cout << "verify: OK\n";
    return 0;
}

int cmd_nnz(const SpecFlags& flags, bool have_spec, const std::string& layers_path,
            const std::string& out_path) {
    std::ostringstream os;
    if (!layers_path.empty()) {
        os << "name,m,n,k,s,p,bound,dense_count,savings_ratio\n";
        for (const LayerConfig& cfg : load_layer_table(layers_path)) {
            const NnzReport r = make_nnz_report(cfg.spec());
            os << cfg.name << ',' << r.spec.m << ',' << r.spec.n << ',' << r.spec.k << ','
               << r.spec.s << ',' << r.spec.p << ',' << r.bound << ',' << r.dense_count << ','
               << format_value(r.savings_ratio) << '\n';
        }
    } else if (have_spec) {
        const NnzReport r = make_nnz_report(flags.spec());
        os << "m,n,k,s,p,bound,dense_count,savings_ratio\n";
        os << r.spec.m << ',' << r.spec.n << ',' << r.spec.k << ',' << r.spec.s << ',' << r.spec.p
           << ',' << r.bound << ',' << r.dense_count << ',' << format_value(r.savings_ratio)
           << '\n';
    } else {
        throw std::runtime_error("nnz: pass --m/--n/--k (and optionally --s/--p) or --layers");
    }
    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        open_out(out_path) << os.str();
    }
    return 0;
}

int cmd_bench(const std::string& layers_path, index_t trials, index_t warmup, std::uint64_t seed,
              const std::string& format_str, int threads, const std::string& out_path,
              bool quiet) {
    const auto layers = load_layer_table(layers_path);
    if (!quiet) {
        std::cerr << "bench: " << layers.size() << " layers, " << trials << " trials, warmup "
                  << warmup << ", seed " << seed << ", threads " << threads << "\n";
    }
    const auto results = run_table_bench(
        layers, trials, warmup, seed, threads,
        [&](const LayerConfig& cfg, std::size_t i) {
            if (!quiet) {
                std::cerr << "  [" << (i + 1) << "/" << layers.size() << "] " << cfg.name << "\n";
            }
        });
    const ReportFormat fmt =
        format_str == "markdown" ? ReportFormat::Markdown : ReportFormat::Csv;
    const std::string report = emit_report(results, fmt);
    if (out_path.empty()) {
        std::cout << report;
    } else {
        open_out(out_path) << report;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Padded strided 2-D convolution as a precomputed sparse transform"};
    app.require_subcommand(1);

    auto* build = app.add_subcommand("build", "construct a transform and save it");
    SpecFlags build_spec;
    build_spec.attach(build, true);
    std::string build_kernel, build_layout = "csr", build_out;
    std::uint64_t build_seed = 42;
    build->add_option("--kernel", build_kernel, "dense text file with the k x k kernel");
    build->add_option("--seed", build_seed, "seed for a random normal kernel when --kernel is absent")
        ->capture_default_str();
    build->add_option("--layout", build_layout, "csr or csc")->capture_default_str();
    build->add_option("--out", build_out, "output transform file")->required();

    auto* conv = app.add_subcommand("convolve", "apply a saved transform to an input grid");
    std::string conv_transform, conv_input, conv_out;
    conv->add_option("--transform", conv_transform, "transform file from 'build'")->required();
    conv->add_option("--input", conv_input, "dense text input grid")->required();
    conv->add_option("--out", conv_out, "output file (stdout when omitted)");

    auto* verify = app.add_subcommand("verify", "run the oracle sweep; nonzero exit on mismatch");
    index_t verify_max_dim = 12;
    int verify_seeds = 3;
    std::uint64_t verify_seed = 42;
    verify->add_option("--max-dim", verify_max_dim, "sweep m, n from 1 to this")
        ->capture_default_str();
    verify->add_option("--seeds", verify_seeds, "random cases per geometry")
        ->capture_default_str();
    verify->add_option("--seed", verify_seed, "base seed")->capture_default_str();

    auto* nnz = app.add_subcommand("nnz", "non-zero multiplication counts as CSV");
    SpecFlags nnz_spec;
    nnz_spec.attach(nnz, false);
    std::string nnz_layers, nnz_out;
    nnz->add_option("--layers", nnz_layers, "layer table CSV (reports every layer)");
    nnz->add_option("--out", nnz_out, "output file (stdout when omitted)");

    auto* bench = app.add_subcommand("bench", "time SpMV vs im2col over a layer table");
    std::string bench_layers = "data/densenet121_layers.csv";
    index_t bench_trials = 1000, bench_warmup = 10;
    std::uint64_t bench_seed = 42;
    std::string bench_format = "csv", bench_out;
    int bench_threads = 1;
    bool bench_quiet = false;
    bench->add_option("--layers", bench_layers, "layer table CSV")->capture_default_str();
    bench->add_option("--trials", bench_trials, "timed trials per layer and method")
        ->capture_default_str();
    bench->add_option("--warmup", bench_warmup, "discarded runs per layer and method")
        ->capture_default_str();
    bench->add_option("--seed", bench_seed, "base seed for inputs and kernels")
        ->capture_default_str();
    bench->add_option("--format", bench_format, "csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}))
        ->capture_default_str();
    bench->add_option("--threads", bench_threads, "SpMV threads (1 keeps the comparison "
                                                  "single-threaded)")
        ->capture_default_str();
    bench->add_option("--out", bench_out, "report file (stdout when omitted)");
    bench->add_flag("--quiet", bench_quiet, "suppress progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (build->parsed()) {
            return cmd_build(build_spec, build_kernel, build_seed, build_layout, build_out);
        }
        if (conv->parsed()) {
            return cmd_convolve(conv_transform, conv_input, conv_out);
        }
        if (verify->parsed()) {
            return cmd_verify(verify_max_dim, verify_seeds, verify_seed);
        }
        if (nnz->parsed()) {
            const bool have_spec = nnz->count("--m") > 0;
            return cmd_nnz(nnz_spec, have_spec, nnz_layers, nnz_out);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_layers, bench_trials, bench_warmup, bench_seed, bench_format,
                             bench_threads, bench_out, bench_quiet);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
