// Acceptance harness: one pass/fail line per criterion, exit 0 only if every
// requested criterion passes. Modes: "fast" (everything except the MNIST
// pipeline), "mnist" (training plus accuracy checks), "all".
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "deap/deap.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s A%d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
}

// --- A1: inversion/forward roundtrips in consistent mode --------------------

void criterion_1() {
    const auto t0 = Clock::now();
    deap::MrrParams p;  // r = a = 0.99, consistent
    deap::TrainRng rng(101);

    double worst = 0.0;
    const auto [lo_a, hi_a] = deap::allpass_intensity_range(p);
    for (int i = 0; i < 10000; ++i) {
        const double target = lo_a + (hi_a - lo_a) * rng.uniform();
        const double back =
            deap::allpass_transmission(deap::allpass_phase_for_intensity(target, p), p);
        worst = std::max(worst, std::fabs(back - target));
    }

    const double floor = deap::weight_floor(p);
    for (int i = 0; i < 10000; ++i) {
        const double target = floor + (1.0 - floor) * rng.uniform();
        const double back =
            deap::weight_from_phase(deap::drop_phase_for_weight(target, p), p);
        worst = std::max(worst, std::fabs(back - target));
    }

    const double dt = seconds_since(t0);
    report(1, worst <= 1e-9 && dt < 1.0,
           "device roundtrips, 2x10^4 targets: max error " + fmt(worst) + " (<= 1e-9), " +
               fmt(dt) + " s (< 1 s)");
}

// --- A2: through/drop complementarity at a = 1 ------------------------------

void criterion_2() {
    deap::MrrParams p;
    p.a = 1.0;
    deap::TrainRng rng(202);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double phi = deap::kTwoPi * rng.uniform();
        const double sum = deap::adddrop_through(phi, p) + deap::adddrop_drop(phi, p);
        worst = std::max(worst, std::fabs(sum - 1.0));
    }
    report(2, worst <= 1e-12,
           "lossless complementarity, 10^4 phases: max |T_p+T_d-1| = " + fmt(worst) +
               " (<= 1e-12)");
}

// --- A3/A4: hardware path vs oracle over a randomized corpus ----------------

struct CorpusCase {
    deap::Tensor3 input;
    deap::Tensor4 kernels;
    int stride = 1;
};

std::vector<CorpusCase> build_corpus() {
    deap::TrainRng rng(3344);
    std::vector<CorpusCase> corpus;
    for (int c = 0; c < 200; ++c) {
        const int r = 1 + static_cast<int>(rng.below(5));
        const int d = 1 + static_cast<int>(rng.below(8));
        const int s = 1 + static_cast<int>(rng.below(3));
        const int k = 1 + static_cast<int>(rng.below(4));
        const int h = r + static_cast<int>(rng.below(10));
        const int w = r + static_cast<int>(rng.below(10));
        CorpusCase cc;
        cc.input = deap::Tensor3(h, w, d);
        for (double& x : cc.input.v) x = rng.uniform();
        cc.kernels = deap::Tensor4(r, r, d, k);
        for (double& x : cc.kernels.v) x = 2.0 * rng.uniform() - 1.0;
        cc.stride = s;
        corpus.push_back(std::move(cc));
    }
    return corpus;
}

void criterion_3(const std::vector<CorpusCase>& corpus) {
    const auto t0 = Clock::now();
    const deap::DeapBounds bounds;
    const deap::QuantSpec quant_off{7, false};
    double worst = 0.0;
    for (const auto& cc : corpus) {
        const deap::ConvShape shape = deap::shape_of(cc.input, cc.kernels, cc.stride);
        const deap::Tensor3 oracle =
            deap::oracle_convolve(cc.input, cc.kernels, cc.stride);
        const deap::ConvResult res =
            deap::deap_convolve(cc.input, cc.kernels, shape, bounds, quant_off);
        for (std::size_t i = 0; i < oracle.size(); ++i)
            worst = std::max(worst, std::fabs(res.out.v[i] - oracle.v[i]));
    }
    const double dt = seconds_since(t0);
    report(3, worst <= 1e-9 && dt < 30.0,
           "oracle equivalence, 200 shapes: max error " + fmt(worst) + " (<= 1e-9), " +
               fmt(dt) + " s (< 30 s)");
}

void criterion_4(const std::vector<CorpusCase>& corpus) {
    const deap::DeapBounds bounds;
    const deap::QuantSpec quant7{7, true};
    const double unit = std::pow(2.0, -6) + std::pow(2.0, -14);
    double worst_margin = -1.0;  // largest error/bound ratio seen
    bool ok = true;
    for (const auto& cc : corpus) {
        const deap::ConvShape shape = deap::shape_of(cc.input, cc.kernels, cc.stride);
        const deap::Tensor3 oracle =
            deap::oracle_convolve(cc.input, cc.kernels, cc.stride);
        const deap::ConvResult res =
            deap::deap_convolve(cc.input, cc.kernels, shape, bounds, quant7);
        for (int q = 0; q < shape.k; ++q) {
            double g = 0.0;
            const deap::Tensor3 kq = cc.kernels.kernel(q);
            for (double v : kq.v) g = std::max(g, std::fabs(v));
            const double bound =
                g * static_cast<double>(shape.r_w) * shape.r_h * shape.d * unit;
            const deap::OutputDims od = deap::output_dims(shape);
            for (int i = 0; i < od.oh; ++i)
                for (int j = 0; j < od.ow; ++j) {
                    const double err =
                        std::fabs(res.out.at(i, j, q) - oracle.at(i, j, q));
                    if (bound > 0.0) worst_margin = std::max(worst_margin, err / bound);
                    if (err > bound) ok = false;
                }
        }
    }
    report(4, ok,
           "7-bit per-pixel error within g*R^2*D*(2^-6+2^-14); worst error/bound ratio " +
               fmt(worst_margin));
}

// --- A5: MNIST accuracy on the desk-scale subset ----------------------------

void criterion_5() {
    const auto load = [](const char* img, const char* lab) {
        return deap::load_mnist(std::string("data/mnist/") + img,
                                std::string("data/mnist/") + lab);
    };
    const deap::Dataset train = load("train-images-idx3-ubyte", "train-labels-idx1-ubyte");
    const deap::Dataset test = load("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte");

    const deap::TrainConfig tc;  // 12 epochs, batch 64, seed 1
    std::printf("  .. training on %zu images (%d epochs, seed %llu)\n", train.size(),
                tc.epochs, static_cast<unsigned long long>(tc.seed));
    std::fflush(stdout);
    const auto t_train = Clock::now();
    const deap::TrainResult res = deap::train_reference(train, tc);
    const double train_s = seconds_since(t_train);

    const deap::QuantSpec quant7{7, true};
    const deap::DeapBounds bounds;
    const double acc_digital =
        deap::evaluate(res.model, test, deap::Backend::digital, quant7, bounds);
    const auto t_eval = Clock::now();
    const double acc_photonic =
        deap::evaluate(res.model, test, deap::Backend::photonic, quant7, bounds);
    const double eval_s = seconds_since(t_eval);

    const double gap = std::fabs(acc_digital - acc_photonic);
    const bool pass = acc_digital >= 0.97 && acc_photonic >= 0.965 && gap <= 0.015 &&
                      train_s <= 900.0 && eval_s <= 120.0;
    report(5, pass,
           "MNIST subset: digital " + fmt(acc_digital) + " (>= 0.97), photonic 7-bit " +
               fmt(acc_photonic) + " (>= 0.965, gap " + fmt(gap) +
               " <= 0.015); train " + fmt(train_s) + " s (<= 900), photonic eval " +
               fmt(eval_s) + " s (<= 120)");
}

// --- A6: analytical performance numbers -------------------------------------

void criterion_6() {
    const auto t0 = Clock::now();
    const deap::PerfConfig cfg;
    bool ok = true;
    std::string detail;

    const double t_prop = deap::propagation_time(100, 10e-6, cfg);
    ok = ok && std::fabs(t_prop - 2.0958450219516818e-11) <= 1e-23 &&
         std::fabs(t_prop - 21e-12) <= 0.05 * 21e-12;
    detail += "t_prop " + fmt(t_prop * 1e12) + " ps (20.96, +-5% of 21)";

    const deap::Throughput th = deap::system_throughput(cfg);
    const double pixel = 1.0 / th.sps;
    ok = ok && th.sps == 5e9 && th.bottleneck == "dac/adc" && pixel == 200e-12;
    detail += "; throughput " + fmt(th.sps / 1e9) + " GS/s bottleneck " + th.bottleneck +
              ", pixel " + fmt(pixel * 1e12) + " ps";

    const double p95 = deap::unit_power(3, 113, cfg).total_w;
    const double p112 = deap::unit_power(10, 12, cfg).total_w;
    ok = ok && std::fabs(p95 - 95.0) <= 0.10 * 95.0 &&
         std::fabs(p112 - 112.0) <= 0.15 * 112.0;
    detail += "; unit power " + fmt(p95) + " W (+-10% of 95), " + fmt(p112) +
              " W (+-15% of 112)";

    deap::ConvShape row3;
    row3.w = 7;
    row3.h = 7;
    row3.d = 832;
    row3.n = 16;
    row3.k = 256;
    row3.r_w = 1;
    row3.r_h = 1;
    row3.s = 1;
    const double rt = deap::estimate_runtime(row3, 1, pixel);
    ok = ok && std::fabs(rt - 4.01408e-5) <= 1e-12 * 4.01408e-5;
    detail += "; runtime row3 " + fmt(rt * 1e6) + " us (40.1408 exact)";

    double mean = 0.0;
    for (const auto& [name, w] : deap::known_gpu_powers()) mean += w;
    mean /= static_cast<double>(deap::known_gpu_powers().size());
    const double ratio = deap::energy_ratio(110.0, mean);
    ok = ok && mean == 293.75 && std::fabs(ratio - 0.37) <= 0.01;
    detail += "; energy ratio " + fmt(ratio) + " (0.37 +- 0.01)";

    const double dt = seconds_since(t0);
    ok = ok && dt < 1.0;
    report(6, ok, "perf numbers: " + detail + "; " + fmt(dt) + " s (< 1 s)");
}

// --- A7: cycle law and unit-count invariance --------------------------------

void criterion_7() {
    bool law_ok = true;
    for (int k = 1; k <= 8 && law_ok; ++k)
        for (std::int64_t p = 1; p <= 100 && law_ok; ++p)
            for (int n = 1; n <= 5 && law_ok; ++n)
                if (deap::conv_cycles(k, p, n) !=
                    static_cast<std::int64_t>(k) * ((p + n - 1) / n))
                    law_ok = false;

    deap::TrainRng rng(707);
    deap::Tensor3 input(12, 12, 4);
    for (double& x : input.v) x = rng.uniform();
    deap::Tensor4 kernels(3, 3, 4, 3);
    for (double& x : kernels.v) x = 2.0 * rng.uniform() - 1.0;
    const deap::ConvShape shape = deap::shape_of(input, kernels, 1);
    const deap::QuantSpec quant7{7, true};

    bool bits_ok = true;
    std::vector<double> reference;
    std::string cycles_seen;
    for (int n_conv : {1, 2, 4}) {
        deap::DeapBounds bounds;
        bounds.n_conv = n_conv;
        const deap::ConvResult res =
            deap::deap_convolve(input, kernels, shape, bounds, quant7);
        const std::int64_t pixels = 100;  // 10x10 output
        if (res.cycles != deap::conv_cycles(shape.k, pixels, n_conv)) bits_ok = false;
        if (reference.empty()) {
            reference = res.out.v;
        } else if (res.out.v != reference) {
            bits_ok = false;
        }
        cycles_seen += (cycles_seen.empty() ? "" : "/") + std::to_string(res.cycles);
    }

    report(7, law_ok && bits_ok,
           "cycle law K*ceil(P/n) over 4000 triples and bit-identical outputs across "
           "n_conv {1,2,4} (cycles " +
               cycles_seen + ")");
}

// --- A8: report pipeline on the fixture -------------------------------------

void criterion_8() {
    const deap::LoadedBench bench = deap::load_deepbench("fixtures/gpu_bench.csv");
    const deap::Report report_data =
        deap::compare_report(bench.shapes, {1}, deap::PerfConfig{});

    bool ok = bench.shapes.size() == 3 && report_data.mean_gpu_power_w == 293.75;
    double lo_speedup = 1e300, hi_speedup = 0.0;
    auto close = [](double x, double y) {
        return std::fabs(x - y) <= 1e-12 * std::max(std::fabs(x), std::fabs(y));
    };
    int gpu_rows = 0;
    for (const auto& e : report_data.entries) {
        if (e.partial) ok = false;
        for (const auto& g : e.gpus) {
            ++gpu_rows;
            if (!close(g.speedup * e.deap_runtime_s, g.runtime_s)) ok = false;
            if (!g.has_power || !close(g.energy_ratio * g.power_w, e.deap_power_w))
                ok = false;
            lo_speedup = std::min(lo_speedup, g.speedup);
            hi_speedup = std::max(hi_speedup, g.speedup);
        }
    }
    ok = ok && gpu_rows == 12;

    report(8, ok,
           "report pipeline on fixture: ratio arithmetic exact over " +
               std::to_string(gpu_rows) + " GPU rows, fixture speedups " +
               fmt(lo_speedup) + "x-" + fmt(hi_speedup) +
               "x; headline GPU span itself needs external runtimes (placeholder "
               "timings, documented limitation)");
}

}  // namespace

int main(int argc, char** argv) {
    std::string mode = "all";
    if (argc > 1) mode = argv[1];
    if (mode != "fast" && mode != "mnist" && mode != "all") {
        std::fprintf(stderr, "usage: %s [fast|mnist|all]\n", argv[0]);
        return 2;
    }

    const bool fast = mode == "fast" || mode == "all";
    const bool mnist = mode == "mnist" || mode == "all";

    if (fast) {
        criterion_1();
        criterion_2();
        const std::vector<CorpusCase> corpus = build_corpus();
        criterion_3(corpus);
        criterion_4(corpus);
    }
    if (mnist) criterion_5();
    if (fast) {
        criterion_6();
        criterion_7();
        criterion_8();
    }

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all requested criteria passed\n");
    return 0;
}
