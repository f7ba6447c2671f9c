#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conv.hpp"
#include "errors.hpp"
#include "mrr.hpp"

namespace deap {

// Component unit powers, throughputs and optical constants for the
// analytical model.
struct PerfConfig {
    double laser_w = 0.100;
    double mrr_w = 0.0195;
    double dac_w = 0.026;
    double tia_w = 0.017;
    double adc_w = 0.076;

    double pd_sps = 25e9;
    double tia_sps = 10e9;
    double dac_sps = 5e9;
    double adc_sps = 5e9;
    double mrr_mod_sps = 128e9;

    double mrr_radius_m = 10e-6;
    int mrr_count_per_path = 100;
    double light_speed = 299792458.0;

    void validate() const {
        const double vals[] = {laser_w, mrr_w,   dac_w,       tia_w,      adc_w,
                               pd_sps,  tia_sps, dac_sps,     adc_sps,    mrr_mod_sps,
                               mrr_radius_m,     light_speed, static_cast<double>(mrr_count_per_path)};
        for (double v : vals)
            if (!(v > 0.0)) throw ConfigError("PerfConfig: all fields must be positive");
    }
};

// Time for light to traverse k ring circumferences: t = k * 2*pi*r / c.
inline double propagation_time(int k, double radius_m, const PerfConfig& cfg) {
    cfg.validate();
    if (k < 1) throw ContractError("propagation_time: k must be >= 1");
    if (!(radius_m > 0.0)) throw ContractError("propagation_time: radius must be > 0");
    return static_cast<double>(k) * kTwoPi * radius_m / cfg.light_speed;
}

struct Throughput {
    double sps = 0.0;
    std::string bottleneck;  // slowest component(s); ties joined with '/'
};

// The system runs at the slowest component in the chain: optical
// propagation, balanced PD, TIA, DAC, ADC, and ring modulation speed.
inline Throughput system_throughput(const PerfConfig& cfg) {
    cfg.validate();
    const double prop_sps =
        1.0 / propagation_time(cfg.mrr_count_per_path, cfg.mrr_radius_m, cfg);
    const std::pair<const char*, double> parts[] = {
        {"propagation", prop_sps}, {"pd", cfg.pd_sps},   {"tia", cfg.tia_sps},
        {"dac", cfg.dac_sps},      {"adc", cfg.adc_sps}, {"mrr_mod", cfg.mrr_mod_sps},
    };
    double lo = parts[0].second;
    for (const auto& [name, sps] : parts) lo = std::min(lo, sps);
    Throughput out;
    out.sps = lo;
    for (const auto& [name, sps] : parts) {
        if (sps <= lo * (1.0 + 1e-12)) {
            if (!out.bottleneck.empty()) out.bottleneck += "/";
            out.bottleneck += name;
        }
    }
    return out;
}

// Component counts and power of one convolutional unit sized for a kernel
// occupying rings_per_line rings on each of d lines: rings_per_line lasers,
// a ring + DAC per modulator cell, a ring + DAC per weight cell, a TIA per
// line, one ADC. Exceeding the modulator-ring budget sets over_budget
// rather than failing, since the analytical model is well defined beyond
// the manufacturable envelope.
struct PowerBreakdown {
    long long lasers = 0;
    long long mod_mrrs = 0;
    long long mod_dacs = 0;
    long long wb_mrrs = 0;
    long long wb_dacs = 0;
    long long tias = 0;
    long long adcs = 1;

    double laser_total_w = 0.0;
    double mrr_total_w = 0.0;
    double dac_total_w = 0.0;
    double tia_total_w = 0.0;
    double adc_total_w = 0.0;
    double total_w = 0.0;

    bool over_budget = false;
};

inline PowerBreakdown unit_power_rings(long long rings_per_line, int d,
                                       const PerfConfig& cfg, int mrr_budget = 1024) {
    cfg.validate();
    if (rings_per_line < 1 || d < 1)
        throw ContractError("unit_power: rings_per_line and d must be >= 1");
    if (rings_per_line > kMaxWeightsPerLine)
        throw ConfigError("unit_power: " + std::to_string(rings_per_line) +
                          " rings exceed the 100-wavelength line capacity");
    PowerBreakdown b;
    b.lasers = rings_per_line;
    b.mod_mrrs = rings_per_line * d;
    b.mod_dacs = b.mod_mrrs;
    b.wb_mrrs = rings_per_line * d;
    b.wb_dacs = b.wb_mrrs;
    b.tias = d;
    b.adcs = 1;
    b.over_budget = b.mod_mrrs > mrr_budget;

    b.laser_total_w = static_cast<double>(b.lasers) * cfg.laser_w;
    b.mrr_total_w = static_cast<double>(b.mod_mrrs + b.wb_mrrs) * cfg.mrr_w;
    b.dac_total_w = static_cast<double>(b.mod_dacs + b.wb_dacs) * cfg.dac_w;
    b.tia_total_w = static_cast<double>(b.tias) * cfg.tia_w;
    b.adc_total_w = static_cast<double>(b.adcs) * cfg.adc_w;
    b.total_w = b.laser_total_w + b.mrr_total_w + b.dac_total_w + b.tia_total_w +
                b.adc_total_w;
    return b;
}

inline PowerBreakdown unit_power(int r, int d, const PerfConfig& cfg,
                                 int mrr_budget = 1024) {
    if (r < 1) throw ContractError("unit_power: r must be >= 1");
    return unit_power_rings(static_cast<long long>(r) * r, d, cfg, mrr_budget);
}

inline PowerBreakdown unit_power_rect(int r_w, int r_h, int d, const PerfConfig& cfg,
                                      int mrr_budget = 1024) {
    if (r_w < 1 || r_h < 1) throw ContractError("unit_power: kernel edges must be >= 1");
    return unit_power_rings(static_cast<long long>(r_w) * r_h, d, cfg, mrr_budget);
}

// Analytical convolution runtime with real-valued (unfloored) stride
// factors:
//   t = pixel_time * (N K / n_conv) * ((H-R_h)/S + 1) * ((W-R_w)/S + 1).
inline double estimate_runtime(const ConvShape& shape, int n_conv,
                               double pixel_time = 200e-12) {
    shape.validate();
    if (n_conv < 1) throw ContractError("estimate_runtime: n_conv must be >= 1");
    if (!(pixel_time > 0.0)) throw ContractError("estimate_runtime: pixel_time must be > 0");
    const double nk = static_cast<double>(shape.n) * static_cast<double>(shape.k) /
                      static_cast<double>(n_conv);
    const double rows = (static_cast<double>(shape.h) - shape.r_h) / shape.s + 1.0;
    const double cols = (static_cast<double>(shape.w) - shape.r_w) / shape.s + 1.0;
    return pixel_time * nk * rows * cols;
}

// Alternate runtime from whole scheduled cycles (floored pixel grid,
// round-robin over n_conv units, batch N sequential).
inline double estimate_runtime_cycles(const ConvShape& shape, int n_conv,
                                      double pixel_time = 200e-12) {
    shape.validate();
    if (n_conv < 1) throw ContractError("estimate_runtime_cycles: n_conv must be >= 1");
    const OutputDims od = output_dims(shape);
    const std::int64_t pixels = static_cast<std::int64_t>(od.oh) * od.ow;
    const std::int64_t cycles = conv_cycles(shape.k, pixels, n_conv);
    return pixel_time * static_cast<double>(cycles) * static_cast<double>(shape.n);
}

struct GpuRecord {
    std::string name;
    double power_w = 0.0;  // 0 when unknown
    double runtime_s = 0.0;

    void validate() const {
        if (name.empty()) throw ContractError("GpuRecord: empty name");
        if (!(runtime_s > 0.0)) throw ContractError("GpuRecord: runtime must be > 0");
    }
};

// Published board powers for the benchmarked GPUs.
inline const std::vector<std::pair<std::string, double>>& known_gpu_powers() {
    static const std::vector<std::pair<std::string, double>> table = {
        {"AMD Vega FE", 375.0},
        {"AMD MI25", 300.0},
        {"NVIDIA Tesla P100", 250.0},
        {"NVIDIA GTX 1080 Ti", 250.0},
    };
    return table;
}

inline std::optional<double> gpu_power_lookup(const std::string& name) {
    for (const auto& [known, w] : known_gpu_powers())
        if (known == name) return w;
    return std::nullopt;
}

// Plain power ratio; the headline energy comparison treats both sides as
// running continuously, so energy ratio == power ratio.
inline double energy_ratio(double deap_power_w, double gpu_power_w) {
    if (!(deap_power_w > 0.0) || !(gpu_power_w > 0.0))
        throw ContractError("energy_ratio: powers must be > 0");
    return deap_power_w / gpu_power_w;
}

// One benchmark shape plus whatever GPU timings were ingested for it.
struct BenchShape {
    ConvShape shape;
    std::vector<GpuRecord> gpus;
};

struct GpuComparison {
    std::string name;
    double runtime_s = 0.0;
    double power_w = 0.0;
    bool has_power = false;
    double speedup = 0.0;       // gpu runtime / deap runtime
    double energy_ratio = 0.0;  // deap power / gpu power (0 when power unknown)
};

struct ReportEntry {
    ConvShape shape;
    int n_conv = 1;
    double deap_runtime_s = 0.0;         // real-valued stride factors
    double deap_runtime_cycles_s = 0.0;  // whole scheduled cycles
    double deap_power_w = 0.0;           // unit power x n_conv
    bool power_over_budget = false;
    double energy_ratio_vs_mean_gpu = 0.0;  // 0 when no GPU powers known
    std::vector<GpuComparison> gpus;
    bool partial = false;  // some GPU rows lacked runtime or power data
};

struct Report {
    std::vector<ReportEntry> entries;
    double mean_gpu_power_w = 0.0;  // over distinct GPUs with known power
    double pixel_time_s = 0.0;
};

// Cross-tabulate every ingested shape against every requested unit count:
// runtime estimates, unit power (scaled by n_conv: more units burn
// proportionally more power for proportionally less time), speedups and
// energy ratios against each GPU row, and the ratio against the mean GPU
// power. Shapes with missing GPU data still get DEAP estimates, flagged
// partial.
inline Report compare_report(const std::vector<BenchShape>& rows,
                             const std::vector<int>& n_conv_list,
                             const PerfConfig& cfg) {
    cfg.validate();
    if (n_conv_list.empty())
        throw ContractError("compare_report: n_conv list must not be empty");
    Report report;
    report.pixel_time_s = 1.0 / system_throughput(cfg).sps;

    double power_sum = 0.0;
    int power_count = 0;
    std::vector<std::string> seen;
    for (const auto& row : rows)
        for (const auto& gpu : row.gpus) {
            if (std::find(seen.begin(), seen.end(), gpu.name) != seen.end()) continue;
            seen.push_back(gpu.name);
            const auto w = gpu.power_w > 0.0 ? std::optional<double>(gpu.power_w)
                                             : gpu_power_lookup(gpu.name);
            if (w) {
                power_sum += *w;
                ++power_count;
            }
        }
    report.mean_gpu_power_w = power_count > 0 ? power_sum / power_count : 0.0;

    for (const auto& row : rows) {
        for (int n_conv : n_conv_list) {
            if (n_conv < 1) throw ContractError("compare_report: n_conv must be >= 1");
            ReportEntry e;
            e.shape = row.shape;
            e.n_conv = n_conv;
            e.deap_runtime_s = estimate_runtime(row.shape, n_conv, report.pixel_time_s);
            e.deap_runtime_cycles_s =
                estimate_runtime_cycles(row.shape, n_conv, report.pixel_time_s);
            const PowerBreakdown pb =
                unit_power_rect(row.shape.r_w, row.shape.r_h, row.shape.d, cfg);
            e.deap_power_w = pb.total_w * n_conv;
            e.power_over_budget = pb.over_budget;
            e.partial = row.gpus.empty();
            for (const auto& gpu : row.gpus) {
                gpu.validate();
                GpuComparison c;
                c.name = gpu.name;
                c.runtime_s = gpu.runtime_s;
                const auto w = gpu.power_w > 0.0 ? std::optional<double>(gpu.power_w)
                                                 : gpu_power_lookup(gpu.name);
                if (w) {
                    c.power_w = *w;
                    c.has_power = true;
                    c.energy_ratio = energy_ratio(e.deap_power_w, *w);
                } else {
                    e.partial = true;
                }
                c.speedup = gpu.runtime_s / e.deap_runtime_s;
                e.gpus.push_back(std::move(c));
            }
            if (report.mean_gpu_power_w > 0.0)
                e.energy_ratio_vs_mean_gpu =
                    energy_ratio(e.deap_power_w, report.mean_gpu_power_w);
            report.entries.push_back(std::move(e));
        }
    }
    return report;
}

// Minimal grouped bar chart of runtimes (log scale): per shape, one bar per
// DEAP unit count plus one per GPU timing.
inline std::string render_report_svg(const Report& report) {
    struct Bar {
        std::string label;
        double seconds;
        bool deap;
    };
    auto shape_key = [](const ConvShape& s) {
        std::ostringstream os;
        os << s.w << "x" << s.h << "x" << s.d << " k=" << s.k << " r=" << s.r_w << "x"
           << s.r_h;
        return os.str();
    };
    std::vector<std::vector<Bar>> groups;
    std::vector<std::string> group_labels;
    for (const auto& e : report.entries) {
        const std::string key = shape_key(e.shape);
        if (group_labels.empty() || group_labels.back() != key) {
            // GPU timings belong to the shape, not the unit count, so they
            // appear once per group ahead of the DEAP bars.
            group_labels.push_back(key);
            groups.emplace_back();
            for (const auto& g : e.gpus) groups.back().push_back({g.name, g.runtime_s, false});
        }
        groups.back().push_back(
            {"DEAP n=" + std::to_string(e.n_conv), e.deap_runtime_s, true});
    }

    double lo = 1e300, hi = 0.0;
    for (const auto& grp : groups)
        for (const auto& b : grp) {
            lo = std::min(lo, b.seconds);
            hi = std::max(hi, b.seconds);
        }
    if (groups.empty() || !(hi > 0.0)) {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"320\" height=\"60\">"
               "<text x=\"10\" y=\"30\">no report data</text></svg>";
    }
    const double log_lo = std::floor(std::log10(lo));
    const double log_hi = std::ceil(std::log10(hi));
    const double span = std::max(1.0, log_hi - log_lo);

    const int bar_w = 26, gap = 8, group_gap = 34, chart_h = 260, top = 28, bottom = 120;
    int total_bars = 0;
    for (const auto& grp : groups) total_bars += static_cast<int>(grp.size());
    const int width = 70 + total_bars * (bar_w + gap) +
                      static_cast<int>(groups.size()) * group_gap;
    const int height = top + chart_h + bottom;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<text x=\"8\" y=\"16\">convolution runtime (log s), simulated unit vs "
           "ingested GPU timings</text>\n";
    int x = 60;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const int group_x = x;
        for (const auto& b : groups[g]) {
            const double frac = (std::log10(b.seconds) - log_lo) / span;
            const int h = std::max(2, static_cast<int>(frac * chart_h));
            const int y = top + chart_h - h;
            svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w
                << "\" height=\"" << h << "\" fill=\"" << (b.deap ? "#2b6cb0" : "#a0a0a0")
                << "\"/>\n";
            svg << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << top + chart_h + 12
                << "\" transform=\"rotate(60 " << x + bar_w / 2 << " "
                << top + chart_h + 12 << ")\">" << b.label << "</text>\n";
            x += bar_w + gap;
        }
        svg << "<text x=\"" << group_x << "\" y=\"" << height - 8 << "\">"
            << group_labels[g] << "</text>\n";
        x += group_gap;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace deap
