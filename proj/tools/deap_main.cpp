#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deap/deap.hpp"

namespace {

using deap::json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

// Collects every file a run produces so the manifest can list them. The
// manifest carries no timestamps: re-running a command with the same
// arguments and config must be byte-identical.
class RunContext {
public:
    RunContext(std::string output_dir, std::vector<std::string> argv)
        : output_dir_(std::move(output_dir)), argv_(std::move(argv)) {
        std::filesystem::create_directories(output_dir_);
    }

    std::string write(const std::string& name, const std::string& content) {
        const std::string path = (std::filesystem::path(output_dir_) / name).string();
        deap::detail::write_file_text(path, content);
        outputs_.push_back(path);
        return path;
    }

    // For files written elsewhere (e.g. an explicit --out path).
    void record(const std::string& path) { outputs_.push_back(path); }

    // Resolve a name inside the output directory and record it; the caller
    // does the writing.
    std::string claim(const std::string& name) {
        const std::string path = (std::filesystem::path(output_dir_) / name).string();
        outputs_.push_back(path);
        return path;
    }

    void write_manifest(const std::string& command, const deap::RunConfig& cfg) {
        json m;
        m["tool"] = deap::kProjectName;
        m["version"] = deap::kProjectVersion;
        m["command"] = command;
        m["argv"] = argv_;
        std::ostringstream hash;
        hash << std::hex << deap::config_hash(cfg);
        m["config_hash"] = hash.str();
        m["outputs"] = outputs_;
        const std::string path =
            (std::filesystem::path(output_dir_) / "manifest.json").string();
        deap::detail::write_file_text(path, m.dump(2) + "\n");
    }

private:
    std::string output_dir_;
    std::vector<std::string> argv_;
    std::vector<std::string> outputs_;
};

struct GlobalArgs {
    std::string config_path;
    std::string output_dir = "out";
    std::string mode;
    int quant_bits = -1;  // -1 keep config; 0 disables quantization
    long long seed = -1;
    int threads = -1;
    bool fast = false;
};

deap::RunConfig effective_config(const GlobalArgs& g) {
    deap::RunConfig cfg;
    if (!g.config_path.empty()) cfg = deap::load_run_config(g.config_path);
    if (!g.mode.empty()) cfg.params.mode = deap::eq_mode_from_string(g.mode);
    if (g.quant_bits == 0) {
        cfg.quant.enabled = false;
    } else if (g.quant_bits > 0) {
        cfg.quant.bits = g.quant_bits;
        cfg.quant.enabled = true;
    }
    if (g.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(g.seed);
    if (g.threads >= 0) cfg.threads = g.threads;
    if (g.fast) cfg.fast = true;
    cfg.validate();
    // The env var is the documented cap and wins if already set.
    if (cfg.threads > 0 && std::getenv("DEAP_SIM_THREADS") == nullptr)
        setenv("DEAP_SIM_THREADS", std::to_string(cfg.threads).c_str(), 0);
    return cfg;
}

deap::Dataset load_split(const deap::RunConfig& cfg, bool train_split, int limit) {
    const std::string dir = cfg.mnist_dir;
    const std::string images =
        dir + (train_split ? "/train-images-idx3-ubyte" : "/t10k-images-idx3-ubyte");
    const std::string labels =
        dir + (train_split ? "/train-labels-idx1-ubyte" : "/t10k-labels-idx1-ubyte");
    deap::Dataset ds = deap::load_mnist(images, labels);
    if (limit > 0 && static_cast<std::size_t>(limit) < ds.images.size()) {
        ds.images.resize(static_cast<std::size_t>(limit));
        ds.labels.resize(static_cast<std::size_t>(limit));
    }
    return ds;
}

int run_device_curve(RunContext& ctx, const deap::RunConfig& cfg, int samples) {
    const std::uint64_t before = deap::nonphysical_eval_count();
    std::ostringstream csv;
    csv << "phi,T_n,T_p,T_d,mode\n";
    const char* mode = deap::to_string(cfg.params.mode);
    for (int i = 0; i < samples; ++i) {
        const double phi = deap::kTwoPi * static_cast<double>(i) /
                           static_cast<double>(samples - 1);
        csv << fmt17(phi) << ',' << fmt17(deap::allpass_transmission(phi, cfg.params))
            << ',' << fmt17(deap::adddrop_through(phi, cfg.params)) << ','
            << fmt17(deap::adddrop_drop(phi, cfg.params)) << ',' << mode << "\n";
    }
    const std::string path = ctx.write("device_curve.csv", csv.str());
    std::cout << "wrote " << path << " (" << samples << " samples, mode " << mode
              << ")\n";
    const std::uint64_t flagged = deap::nonphysical_eval_count() - before;
    if (flagged > 0)
        std::cerr << "note: " << flagged
                  << " add-drop evaluations fell on the nonphysical branch (T > 1; "
                     "occurs below the denominator pole when a < 1)\n";
    return 0;
}

int run_dot(RunContext& ctx, const deap::RunConfig& cfg, std::vector<double> inputs,
            std::vector<double> weights, int random_n, bool signed_mode) {
    if (random_n > 0) {
        deap::TrainRng rng(cfg.train.seed);
        inputs.clear();
        weights.clear();
        for (int i = 0; i < random_n; ++i) {
            const double u = rng.uniform();
            inputs.push_back(signed_mode ? 2.0 * u - 1.0 : u);
            weights.push_back(20.0 * rng.uniform() - 10.0);
        }
    }
    if (inputs.empty() || weights.empty())
        throw deap::ContractError(
            "dot: provide --inputs and --weights, or --random N to generate them");
    if (inputs.size() != weights.size())
        throw deap::ContractError("dot: input and weight counts differ");

    deap::PwbConfig pc;
    pc.weights_f = weights;
    pc.params = cfg.params;
    pc.quant = cfg.quant;
    pc.fast = cfg.fast;
    const double v = signed_mode
                         ? deap::signed_pwb_dot(inputs, pc)
                         : deap::pwb_dot(deap::EnvelopeVector{inputs}, pc);

    double oracle = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) oracle += inputs[i] * weights[i];

    std::cout << "deap " << fmt17(v) << "\n";
    std::cout << "oracle " << fmt17(oracle) << "\n";
    std::cout << "abs_error " << fmt17(std::fabs(v - oracle)) << "\n";

    json out;
    out["signed"] = signed_mode;
    out["inputs"] = inputs;
    out["weights"] = weights;
    out["deap"] = v;
    out["oracle"] = oracle;
    out["abs_error"] = std::fabs(v - oracle);
    out["quant_enabled"] = cfg.quant.enabled;
    out["quant_bits"] = cfg.quant.bits;
    out["mode"] = deap::to_string(cfg.params.mode);
    ctx.write("dot.json", out.dump(2) + "\n");
    return 0;
}

int run_convolve(RunContext& ctx, const deap::RunConfig& cfg,
                 const std::string& input_path, const std::string& kernels_path,
                 const std::vector<int>& gen_shape, int stride,
                 const std::string& backend_str, int n_conv) {
    deap::Tensor3 input;
    deap::Tensor4 kernels;
    if (!gen_shape.empty()) {
        if (gen_shape.size() != 6)
            throw deap::ContractError(
                "convolve: --shape needs h,w,d,k,r,s (6 comma-separated integers)");
        const int h = gen_shape[0], w = gen_shape[1], d = gen_shape[2];
        const int k = gen_shape[3], r = gen_shape[4];
        stride = gen_shape[5];
        deap::TrainRng rng(cfg.train.seed);
        input = deap::Tensor3(h, w, d);
        for (double& x : input.v) x = rng.uniform();
        kernels = deap::Tensor4(r, r, d, k);
        for (double& x : kernels.v) x = 2.0 * rng.uniform() - 1.0;
        ctx.write("convolve_input.json", deap::tensor3_to_json(input).dump() + "\n");
        ctx.write("convolve_kernels.json", deap::tensor4_to_json(kernels).dump() + "\n");
    } else {
        if (input_path.empty() || kernels_path.empty())
            throw deap::ContractError(
                "convolve: provide --input and --kernels files, or --shape to generate");
        input = deap::load_tensor3(input_path);
        kernels = deap::load_tensor4(kernels_path);
    }

    const deap::ConvShape shape = deap::shape_of(input, kernels, stride);
    deap::DeapBounds bounds = cfg.bounds;
    if (n_conv > 0) bounds.n_conv = n_conv;
    bounds.validate();

    const deap::Backend backend = deap::backend_from_string(backend_str);
    const deap::Tensor3 oracle = deap::oracle_convolve(input, kernels, stride);
    deap::Tensor3 out;
    std::int64_t cycles = 0;
    if (backend == deap::Backend::photonic) {
        deap::ConvResult res = deap::deap_convolve(input, kernels, shape, bounds,
                                                   cfg.quant, cfg.params, cfg.fast);
        out = std::move(res.out);
        cycles = res.cycles;
        double max_err = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i)
            max_err = std::max(max_err, std::fabs(out.v[i] - oracle.v[i]));
        std::cout << "max_abs_error_vs_oracle " << fmt17(max_err) << "\n";
    } else {
        out = oracle;
        const deap::OutputDims od = deap::output_dims(shape);
        cycles = deap::conv_cycles(shape.k,
                                   static_cast<std::int64_t>(od.oh) * od.ow,
                                   bounds.n_conv);
    }
    std::cout << "output " << out.shape_str() << "\n";
    std::cout << "cycles " << cycles << " (n_conv " << bounds.n_conv << ")\n";
    std::cout << "estimated_runtime_s "
              << fmt17(deap::estimate_runtime_cycles(shape, bounds.n_conv)) << "\n";
    ctx.write("convolve_output.json", deap::tensor3_to_json(out).dump() + "\n");
    return 0;
}

int run_train(RunContext& ctx, const deap::RunConfig& cfg, int epochs, int batch_size,
              double lr, int train_size, std::string out_path) {
    deap::TrainConfig tc = cfg.train;
    if (epochs > 0) tc.epochs = epochs;
    if (batch_size > 0) tc.batch_size = batch_size;
    if (lr > 0.0) tc.lr = lr;

    const deap::Dataset ds = load_split(cfg, true, train_size);
    std::cout << "training on " << ds.size() << " images (seed " << tc.seed << ", "
              << tc.epochs << " epochs, batch " << tc.batch_size << ")\n";
    const deap::TrainResult res = deap::train_reference(ds, tc, &std::cout);

    std::string model_path;
    if (out_path.empty()) {
        model_path = ctx.claim("mnist_cnn.json");
    } else {
        model_path = out_path;
        ctx.record(model_path);
    }
    deap::save_model(model_path, res.model);

    json log;
    log["epochs"] = tc.epochs;
    log["batch_size"] = tc.batch_size;
    log["lr"] = tc.lr;
    log["seed"] = tc.seed;
    log["train_size"] = ds.size();
    log["epoch_mean_loss"] = res.epoch_mean_loss;
    log["batch_losses"] = res.batch_losses;
    ctx.write("train_log.json", log.dump(2) + "\n");
    std::cout << "final_epoch_mean_loss " << fmt17(res.epoch_mean_loss.back()) << "\n";
    std::cout << "wrote " << model_path << "\n";
    return 0;
}

int run_infer(RunContext& ctx, const deap::RunConfig& cfg, const std::string& model_path,
              const std::string& image_path, int index, const std::string& backend_str) {
    const deap::CnnModel model = deap::load_model(model_path);
    const deap::Backend backend = deap::backend_from_string(backend_str);

    deap::Tensor3 image;
    int true_label = -1;
    std::string source;
    if (!image_path.empty()) {
        image = deap::load_tensor3(image_path);
        source = image_path;
    } else {
        const deap::Dataset ds = load_split(cfg, false, 0);
        if (index < 0 || static_cast<std::size_t>(index) >= ds.size())
            throw deap::ContractError("infer: --index " + std::to_string(index) +
                                      " out of range (test set has " +
                                      std::to_string(ds.size()) + " images)");
        image = ds.images[static_cast<std::size_t>(index)];
        true_label = ds.labels[static_cast<std::size_t>(index)];
        source = "test[" + std::to_string(index) + "]";
    }

    const std::vector<double> scores = deap::deap_infer(
        model, image, cfg.bounds, cfg.quant, backend, cfg.params, cfg.fast);
    const int predicted = deap::predict_class(scores);

    std::cout << "source " << source << "\n";
    std::cout << "backend " << deap::to_string(backend) << "\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
        std::cout << "score[" << i << "] " << fmt17(scores[i]) << "\n";
    std::cout << "predicted " << predicted << "\n";
    if (true_label >= 0) std::cout << "label " << true_label << "\n";

    json out;
    out["source"] = source;
    out["backend"] = deap::to_string(backend);
    out["scores"] = scores;
    out["predicted"] = predicted;
    if (true_label >= 0) out["label"] = true_label;
    ctx.write("infer.json", out.dump(2) + "\n");
    return 0;
}

int run_evaluate(RunContext& ctx, const deap::RunConfig& cfg,
                 const std::string& model_path, const std::string& backend_str,
                 int test_size, double min_accuracy) {
    const deap::CnnModel model = deap::load_model(model_path);
    const deap::Backend backend = deap::backend_from_string(backend_str);
    const deap::Dataset ds = load_split(cfg, false, test_size);

    const double acc = deap::evaluate(model, ds, backend, cfg.quant, cfg.bounds,
                                      cfg.params, cfg.fast);
    std::cout << "backend " << deap::to_string(backend) << "\n";
    std::cout << "images " << ds.size() << "\n";
    std::cout << "accuracy " << fmt17(acc) << "\n";

    json out;
    out["backend"] = deap::to_string(backend);
    out["images"] = ds.size();
    out["accuracy"] = acc;
    out["quant_enabled"] = cfg.quant.enabled;
    out["quant_bits"] = cfg.quant.bits;
    out["mode"] = deap::to_string(cfg.params.mode);
    if (min_accuracy >= 0.0) out["min_accuracy"] = min_accuracy;
    ctx.write("evaluate.json", out.dump(2) + "\n");
    ctx.write_manifest("evaluate", cfg);

    if (min_accuracy >= 0.0 && acc < min_accuracy) {
        std::cerr << "check failed: accuracy " << fmt17(acc) << " < required "
                  << fmt17(min_accuracy) << "\n";
        return 2;
    }
    return 0;
}

int run_power(RunContext& ctx, const deap::RunConfig& cfg, int r_w, int r_h, int d,
              int n_conv) {
    if (r_h <= 0) r_h = r_w;
    const deap::PowerBreakdown pb =
        deap::unit_power_rect(r_w, r_h, d, cfg.perf, cfg.bounds.mrr_budget);
    const int units = n_conv > 0 ? n_conv : 1;

    std::cout << "lasers " << pb.lasers << "\n";
    std::cout << "mod_mrrs " << pb.mod_mrrs << "\n";
    std::cout << "wb_mrrs " << pb.wb_mrrs << "\n";
    std::cout << "dacs " << pb.mod_dacs + pb.wb_dacs << "\n";
    std::cout << "tias " << pb.tias << "\n";
    std::cout << "adcs " << pb.adcs << "\n";
    std::cout << "laser_total_w " << fmt17(pb.laser_total_w) << "\n";
    std::cout << "mrr_total_w " << fmt17(pb.mrr_total_w) << "\n";
    std::cout << "dac_total_w " << fmt17(pb.dac_total_w) << "\n";
    std::cout << "tia_total_w " << fmt17(pb.tia_total_w) << "\n";
    std::cout << "adc_total_w " << fmt17(pb.adc_total_w) << "\n";
    std::cout << "unit_total_w " << fmt17(pb.total_w) << "\n";
    std::cout << "units " << units << "\n";
    std::cout << "total_w " << fmt17(pb.total_w * units) << "\n";
    std::cout << "over_budget " << (pb.over_budget ? "true" : "false") << "\n";

    json out;
    out["r_w"] = r_w;
    out["r_h"] = r_h;
    out["d"] = d;
    out["units"] = units;
    out["lasers"] = pb.lasers;
    out["mod_mrrs"] = pb.mod_mrrs;
    out["wb_mrrs"] = pb.wb_mrrs;
    out["dacs"] = pb.mod_dacs + pb.wb_dacs;
    out["tias"] = pb.tias;
    out["adcs"] = pb.adcs;
    out["laser_total_w"] = pb.laser_total_w;
    out["mrr_total_w"] = pb.mrr_total_w;
    out["dac_total_w"] = pb.dac_total_w;
    out["tia_total_w"] = pb.tia_total_w;
    out["adc_total_w"] = pb.adc_total_w;
    out["unit_total_w"] = pb.total_w;
    out["total_w"] = pb.total_w * units;
    out["over_budget"] = pb.over_budget;
    ctx.write("power.json", out.dump(2) + "\n");
    return 0;
}

// Internal-consistency gate for the report arithmetic: speedups must invert
// back to the GPU runtimes, energy ratios to the power quotients, and
// runtime * n_conv must be constant per shape (perfect strong scaling of the
// analytic estimate).
bool check_report(const deap::Report& report) {
    bool ok = true;
    auto close = [](double x, double y) {
        const double scale = std::max(std::fabs(x), std::fabs(y));
        return std::fabs(x - y) <= 1e-12 * std::max(scale, 1e-300);
    };
    for (const auto& e : report.entries) {
        for (const auto& g : e.gpus) {
            if (!close(g.speedup * e.deap_runtime_s, g.runtime_s)) {
                std::cerr << "check failed: speedup does not invert to the GPU runtime "
                             "for "
                          << g.name << "\n";
                ok = false;
            }
            if (g.has_power && !close(g.energy_ratio * g.power_w, e.deap_power_w)) {
                std::cerr << "check failed: energy ratio does not invert to the power "
                             "quotient for "
                          << g.name << "\n";
                ok = false;
            }
        }
    }
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        for (std::size_t j = i + 1; j < report.entries.size(); ++j) {
            const auto& a = report.entries[i];
            const auto& b = report.entries[j];
            const bool same_shape = a.shape.w == b.shape.w && a.shape.h == b.shape.h &&
                                    a.shape.d == b.shape.d && a.shape.n == b.shape.n &&
                                    a.shape.k == b.shape.k && a.shape.r_w == b.shape.r_w &&
                                    a.shape.r_h == b.shape.r_h && a.shape.s == b.shape.s;
            if (!same_shape) continue;
            if (!close(a.deap_runtime_s * a.n_conv, b.deap_runtime_s * b.n_conv)) {
                std::cerr << "check failed: runtime * n_conv is not constant for shape "
                          << a.shape.w << "x" << a.shape.h << "x" << a.shape.d << "\n";
                ok = false;
            }
        }
    }
    return ok;
}

int run_bench(RunContext& ctx, const deap::RunConfig& cfg, const std::string& bench_path,
              std::vector<int> n_conv_list, bool check, bool with_svg,
              const std::string& command) {
    if (n_conv_list.empty()) n_conv_list.push_back(cfg.bounds.n_conv);
    const deap::LoadedBench bench = deap::load_deepbench(bench_path);
    for (const auto& w : bench.warnings) std::cerr << "warning: " << w << "\n";

    const deap::Report report = deap::compare_report(bench.shapes, n_conv_list, cfg.perf);
    std::cout << "pixel_time_s " << fmt17(report.pixel_time_s) << "\n";
    std::cout << "mean_gpu_power_w " << fmt17(report.mean_gpu_power_w) << "\n";
    for (const auto& e : report.entries) {
        std::cout << "shape " << e.shape.w << "x" << e.shape.h << "x" << e.shape.d
                  << " n=" << e.shape.n << " k=" << e.shape.k << " r=" << e.shape.r_w
                  << "x" << e.shape.r_h << " s=" << e.shape.s << " n_conv=" << e.n_conv
                  << " runtime_s=" << fmt17(e.deap_runtime_s)
                  << " power_w=" << fmt17(e.deap_power_w);
        if (e.power_over_budget) std::cout << " over_budget";
        if (e.partial) std::cout << " partial";
        std::cout << "\n";
        for (const auto& g : e.gpus) {
            std::cout << "  gpu " << g.name << " runtime_s=" << fmt17(g.runtime_s)
                      << " speedup=" << fmt17(g.speedup);
            if (g.has_power)
                std::cout << " power_w=" << fmt17(g.power_w)
                          << " energy_ratio=" << fmt17(g.energy_ratio);
            std::cout << "\n";
        }
    }

    ctx.write("report.json", deap::report_to_json(report).dump(2) + "\n");
    ctx.write("report.csv", deap::report_to_csv(report));
    if (with_svg) ctx.write("report.svg", deap::render_report_svg(report));
    ctx.write_manifest(command, cfg);

    if (check && !check_report(report)) return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> raw_args;
    for (int i = 1; i < argc; ++i) raw_args.emplace_back(argv[i]);

    CLI::App app{"Desk-scale simulator of an analog-photonic convolution accelerator"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "run configuration JSON")
        ->check(CLI::ExistingFile);
    app.add_option("--output-dir", g.output_dir,
                   "directory for outputs and manifest (default out)");
    app.add_option("--mode", g.mode, "device equation mode")
        ->check(CLI::IsMember({"verbatim", "consistent"}));
    app.add_option("--quant-bits", g.quant_bits,
                   "DAC/ADC resolution in bits; 0 disables quantization")
        ->check(CLI::Range(0, 16));
    app.add_option("--seed", g.seed, "RNG seed for training and generated data")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--threads", g.threads,
                   "worker cap (DEAP_SIM_THREADS overrides when set)");
    app.add_flag("--fast", g.fast,
                 "skip the device inversion pair when programming weights");

    // device-curve
    auto* sc_curve = app.add_subcommand(
        "device-curve", "sample ring transfer functions over one phase period");
    int curve_samples = 1000;
    sc_curve->add_option("--samples", curve_samples, "sample count (default 1000)")
        ->check(CLI::Range(2, 1000000));
    sc_curve->fallthrough();

    // dot
    auto* sc_dot =
        app.add_subcommand("dot", "one photonic weight-bank dot product vs the oracle");
    std::vector<double> dot_inputs, dot_weights;
    int dot_random = 0;
    bool dot_signed = false;
    sc_dot->add_option("--inputs", dot_inputs, "comma-separated inputs")
        ->delimiter(',');
    sc_dot->add_option("--weights", dot_weights, "comma-separated weights")
        ->delimiter(',');
    sc_dot->add_option("--random", dot_random, "generate N random input/weight pairs")
        ->check(CLI::Range(1, deap::kMaxWeightsPerLine));
    sc_dot->add_flag("--signed", dot_signed,
                     "inputs in [-1,1] via the balanced signed encoding");
    sc_dot->fallthrough();

    // convolve
    auto* sc_conv = app.add_subcommand("convolve", "run one convolution");
    std::string conv_input, conv_kernels, conv_backend = "photonic";
    std::vector<int> conv_shape;
    int conv_stride = 1, conv_nconv = 0;
    sc_conv->add_option("--input", conv_input, "input tensor JSON (h x w x d)");
    sc_conv->add_option("--kernels", conv_kernels, "kernel stack JSON (r x r x d x k)");
    sc_conv->add_option("--shape", conv_shape,
                        "generate random tensors: h,w,d,k,r,s")
        ->delimiter(',');
    sc_conv->add_option("--stride", conv_stride, "stride for file inputs (default 1)")
        ->check(CLI::PositiveNumber);
    sc_conv->add_option("--backend", conv_backend, "photonic or digital")
        ->check(CLI::IsMember({"photonic", "digital"}));
    sc_conv->add_option("--n-conv", conv_nconv, "parallel convolutional units");
    sc_conv->fallthrough();

    // train
    auto* sc_train = app.add_subcommand("train", "train the reference CNN digitally");
    int train_epochs = 0, train_batch = 0, train_size = 0;
    double train_lr = 0.0;
    std::string train_out;
    sc_train->add_option("--epochs", train_epochs, "override epochs");
    sc_train->add_option("--batch-size", train_batch, "override batch size");
    sc_train->add_option("--lr", train_lr, "override learning rate");
    sc_train->add_option("--train-size", train_size, "use only the first N images");
    sc_train->add_option("--out", train_out,
                         "model output path (default <output-dir>/mnist_cnn.json)");
    sc_train->fallthrough();

    // infer
    auto* sc_infer = app.add_subcommand("infer", "classify one image");
    std::string infer_model, infer_image, infer_backend = "photonic";
    int infer_index = -1;
    sc_infer->add_option("--model", infer_model, "model JSON path");
    sc_infer->add_option("--image", infer_image, "image tensor JSON (28 x 28 x 1)");
    sc_infer->add_option("--index", infer_index, "index into the test split");
    sc_infer->add_option("--backend", infer_backend, "photonic or digital")
        ->check(CLI::IsMember({"photonic", "digital"}));
    sc_infer->fallthrough();

    // evaluate
    auto* sc_eval = app.add_subcommand("evaluate", "accuracy over the test split");
    std::string eval_model, eval_backend = "photonic";
    int eval_size = 0;
    double eval_min = -1.0;
    sc_eval->add_option("--model", eval_model, "model JSON path");
    sc_eval->add_option("--backend", eval_backend, "photonic or digital")
        ->check(CLI::IsMember({"photonic", "digital"}));
    sc_eval->add_option("--test-size", eval_size, "use only the first N test images");
    sc_eval->add_option("--min-accuracy", eval_min,
                        "exit 2 when accuracy falls below this threshold");
    sc_eval->fallthrough();

    // bench
    auto* sc_bench =
        app.add_subcommand("bench", "runtime/power report from a benchmark CSV");
    std::string bench_file;
    std::vector<int> bench_nconv;
    bool bench_check = false;
    sc_bench->add_option("--deepbench", bench_file, "benchmark CSV path");
    sc_bench->add_option("--n-conv", bench_nconv, "comma-separated unit counts")
        ->delimiter(',');
    sc_bench->add_flag("--check", bench_check,
                       "exit 2 unless the report arithmetic is self-consistent");
    sc_bench->fallthrough();

    // power
    auto* sc_power = app.add_subcommand("power", "component power breakdown");
    int power_rw = 5, power_rh = 0, power_d = 10, power_units = 1;
    sc_power->add_option("--r", power_rw, "kernel edge (rings per line = r * r_h)")
        ->check(CLI::PositiveNumber);
    sc_power->add_option("--r-h", power_rh, "kernel height when not square");
    sc_power->add_option("--d", power_d, "input depth (lines)")
        ->check(CLI::PositiveNumber);
    sc_power->add_option("--n-conv", power_units, "parallel convolutional units")
        ->check(CLI::PositiveNumber);
    sc_power->fallthrough();

    // report
    auto* sc_report = app.add_subcommand(
        "report", "bench outputs plus an SVG runtime chart");
    std::string report_file;
    std::vector<int> report_nconv;
    sc_report->add_option("--deepbench", report_file, "benchmark CSV path");
    sc_report->add_option("--n-conv", report_nconv, "comma-separated unit counts")
        ->delimiter(',');
    sc_report->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const deap::RunConfig cfg = effective_config(g);
        RunContext ctx(g.output_dir, raw_args);

        int rc = 0;
        if (*sc_curve) {
            rc = run_device_curve(ctx, cfg, curve_samples);
            ctx.write_manifest("device-curve", cfg);
        } else if (*sc_dot) {
            rc = run_dot(ctx, cfg, dot_inputs, dot_weights, dot_random, dot_signed);
            ctx.write_manifest("dot", cfg);
        } else if (*sc_conv) {
            rc = run_convolve(ctx, cfg, conv_input, conv_kernels, conv_shape,
                              conv_stride, conv_backend, conv_nconv);
            ctx.write_manifest("convolve", cfg);
        } else if (*sc_train) {
            rc = run_train(ctx, cfg, train_epochs, train_batch, train_lr, train_size,
                           train_out);
            ctx.write_manifest("train", cfg);
        } else if (*sc_infer) {
            const std::string model =
                infer_model.empty() ? cfg.model_path : infer_model;
            rc = run_infer(ctx, cfg, model, infer_image, infer_index, infer_backend);
            ctx.write_manifest("infer", cfg);
        } else if (*sc_eval) {
            const std::string model = eval_model.empty() ? cfg.model_path : eval_model;
            rc = run_evaluate(ctx, cfg, model, eval_backend, eval_size, eval_min);
        } else if (*sc_bench) {
            const std::string file = bench_file.empty() ? cfg.bench_path : bench_file;
            rc = run_bench(ctx, cfg, file, bench_nconv, bench_check, false, "bench");
        } else if (*sc_power) {
            rc = run_power(ctx, cfg, power_rw, power_rh, power_d, power_units);
            ctx.write_manifest("power", cfg);
        } else if (*sc_report) {
            const std::string file = report_file.empty() ? cfg.bench_path : report_file;
            rc = run_bench(ctx, cfg, file, report_nconv, false, true, "report");
        }
        return rc;
    } catch (const deap::Error& e) {
        std::cerr << "deap-sim: error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "deap-sim: error: " << e.what() << "\n";
        return 1;
    }
}
