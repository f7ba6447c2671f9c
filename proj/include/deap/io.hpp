#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cnn.hpp"
#include "conv.hpp"
#include "errors.hpp"
#include "perf.hpp"
#include "pwb.hpp"
#include "quant.hpp"
#include "tensor.hpp"
#include "train.hpp"

namespace deap {

using json = nlohmann::json;

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline std::string read_file_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t offset,
                               const std::string& path) {
    if (offset + 4 > b.size())
        throw ParseError(path + ": truncated at byte offset " + std::to_string(offset) +
                         " (need 4 bytes)");
    return (static_cast<std::uint32_t>(b[offset]) << 24) |
           (static_cast<std::uint32_t>(b[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(b[offset + 2]) << 8) |
           static_cast<std::uint32_t>(b[offset + 3]);
}

}  // namespace detail

// ---- MNIST IDX ------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // unsigned bytes, 3 dims
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // unsigned bytes, 1 dim

// Standard IDX pair: big-endian magic + dims, then raw unsigned bytes.
// Pixels are scaled by 1/255 into [0,1].
inline Dataset load_mnist(const std::string& images_path, const std::string& labels_path) {
    const auto ib = detail::read_file_bytes(images_path);
    const auto lb = detail::read_file_bytes(labels_path);

    const std::uint32_t imagic = detail::read_be32(ib, 0, images_path);
    if (imagic != kIdxImageMagic) {
        std::ostringstream os;
        os << images_path << ": bad magic 0x" << std::hex << imagic
           << " at byte offset 0 (expected 0x803 image file)";
        throw ParseError(os.str());
    }
    const std::uint32_t lmagic = detail::read_be32(lb, 0, labels_path);
    if (lmagic != kIdxLabelMagic) {
        std::ostringstream os;
        os << labels_path << ": bad magic 0x" << std::hex << lmagic
           << " at byte offset 0 (expected 0x801 label file)";
        throw ParseError(os.str());
    }

    const std::uint32_t count = detail::read_be32(ib, 4, images_path);
    const std::uint32_t rows = detail::read_be32(ib, 8, images_path);
    const std::uint32_t cols = detail::read_be32(ib, 12, images_path);
    const std::uint32_t lcount = detail::read_be32(lb, 4, labels_path);
    if (count != lcount)
        throw ParseError(images_path + ": " + std::to_string(count) + " images vs " +
                         std::to_string(lcount) + " labels in " + labels_path);

    const std::size_t pixel_bytes = static_cast<std::size_t>(count) * rows * cols;
    if (ib.size() != 16 + pixel_bytes)
        throw ParseError(images_path + ": expected " + std::to_string(16 + pixel_bytes) +
                         " bytes, got " + std::to_string(ib.size()) +
                         " (truncated at byte offset " +
                         std::to_string(std::min(ib.size(), 16 + pixel_bytes)) + ")");
    if (lb.size() != 8 + count)
        throw ParseError(labels_path + ": expected " + std::to_string(8 + count) +
                         " bytes, got " + std::to_string(lb.size()));

    Dataset ds;
    ds.images.reserve(count);
    ds.labels.reserve(count);
    std::size_t off = 16;
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor3 img(static_cast<int>(rows), static_cast<int>(cols), 1);
        for (std::size_t p = 0; p < static_cast<std::size_t>(rows) * cols; ++p)
            img.v[p] = static_cast<double>(ib[off + p]) / 255.0;
        off += static_cast<std::size_t>(rows) * cols;
        ds.images.push_back(std::move(img));
        const int label = lb[8 + i];
        if (label > 9)
            throw ParseError(labels_path + ": label " + std::to_string(label) +
                             " out of range at index " + std::to_string(i));
        ds.labels.push_back(label);
    }
    return ds;
}

// ---- Tensor JSON ----------------------------------------------------------

inline json tensor3_to_json(const Tensor3& t) {
    return json{{"shape", {t.h, t.w, t.d}}, {"data", t.v}};
}

inline json tensor4_to_json(const Tensor4& t) {
    return json{{"shape", {t.h, t.w, t.d, t.k}}, {"data", t.v}};
}

inline Tensor3 tensor3_from_json(const json& j, const std::string& field) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
        throw SchemaError(field + ": expected {\"shape\":[h,w,d],\"data\":[...]}");
    const auto& shape = j.at("shape");
    if (!shape.is_array() || shape.size() != 3)
        throw SchemaError(field + ": shape must have 3 entries");
    Tensor3 t(shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>());
    const auto& data = j.at("data");
    if (!data.is_array() || data.size() != t.size())
        throw SchemaError(field + ": data has " + std::to_string(data.size()) +
                          " values, shape needs " + std::to_string(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) t.v[i] = data[i].get<double>();
    return t;
}

inline Tensor4 tensor4_from_json(const json& j, const std::string& field) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
        throw SchemaError(field + ": expected {\"shape\":[h,w,d,k],\"data\":[...]}");
    const auto& shape = j.at("shape");
    if (!shape.is_array() || shape.size() != 4)
        throw SchemaError(field + ": shape must have 4 entries");
    Tensor4 t(shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>(),
              shape[3].get<int>());
    const auto& data = j.at("data");
    if (!data.is_array() || data.size() != t.size())
        throw SchemaError(field + ": data has " + std::to_string(data.size()) +
                          " values, shape needs " + std::to_string(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) t.v[i] = data[i].get<double>();
    return t;
}

inline json parse_json_file(const std::string& path) {
    const std::string text = detail::read_file_text(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError(path + ": not valid JSON (truncated or malformed)");
    return j;
}

inline Tensor3 load_tensor3(const std::string& path) {
    return tensor3_from_json(parse_json_file(path), path);
}

inline Tensor4 load_tensor4(const std::string& path) {
    return tensor4_from_json(parse_json_file(path), path);
}

inline void save_tensor3(const std::string& path, const Tensor3& t) {
    detail::write_file_text(path, tensor3_to_json(t).dump() + "\n");
}

inline void save_tensor4(const std::string& path, const Tensor4& t) {
    detail::write_file_text(path, tensor4_to_json(t).dump() + "\n");
}

// ---- Model files ----------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

inline json model_to_json(const CnnModel& model) {
    model.validate();
    json j;
    j["format_version"] = kModelFormatVersion;
    j["conv1"] = tensor4_to_json(model.conv1);
    j["conv1_bias"] = model.conv1_bias;
    j["conv2"] = tensor4_to_json(model.conv2);
    j["conv2_bias"] = model.conv2_bias;
    j["fc1"] = json{{"shape", {model.fc1.rows, model.fc1.cols}}, {"data", model.fc1.v}};
    j["fc1_bias"] = model.fc1_bias;
    j["fc2"] = json{{"shape", {model.fc2.rows, model.fc2.cols}}, {"data", model.fc2.v}};
    j["fc2_bias"] = model.fc2_bias;
    return j;
}

inline Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
        throw SchemaError(field + ": expected {\"shape\":[rows,cols],\"data\":[...]}");
    const auto& shape = j.at("shape");
    if (!shape.is_array() || shape.size() != 2)
        throw SchemaError(field + ": shape must have 2 entries");
    Matrix m(shape[0].get<int>(), shape[1].get<int>());
    const auto& data = j.at("data");
    if (!data.is_array() || data.size() != m.v.size())
        throw SchemaError(field + ": data has " + std::to_string(data.size()) +
                          " values, shape needs " + std::to_string(m.v.size()));
    for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = data[i].get<double>();
    return m;
}

inline CnnModel model_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("model: top level must be an object");
    if (!j.contains("format_version") ||
        j.at("format_version").get<int>() != kModelFormatVersion)
        throw SchemaError("model: missing or unsupported format_version (expected " +
                          std::to_string(kModelFormatVersion) + ")");
    const char* required[] = {"conv1", "conv1_bias", "conv2", "conv2_bias",
                              "fc1",   "fc1_bias",   "fc2",   "fc2_bias"};
    for (const char* field : required)
        if (!j.contains(field))
            throw SchemaError(std::string("model: missing field '") + field + "'");
    CnnModel m;
    m.conv1 = tensor4_from_json(j.at("conv1"), "conv1");
    m.conv1_bias = j.at("conv1_bias").get<std::vector<double>>();
    m.conv2 = tensor4_from_json(j.at("conv2"), "conv2");
    m.conv2_bias = j.at("conv2_bias").get<std::vector<double>>();
    m.fc1 = matrix_from_json(j.at("fc1"), "fc1");
    m.fc1_bias = j.at("fc1_bias").get<std::vector<double>>();
    m.fc2 = matrix_from_json(j.at("fc2"), "fc2");
    m.fc2_bias = j.at("fc2_bias").get<std::vector<double>>();
    m.validate();
    return m;
}

inline CnnModel load_model(const std::string& path) {
    return model_from_json(parse_json_file(path));
}

inline void save_model(const std::string& path, const CnnModel& model) {
    detail::write_file_text(path, model_to_json(model).dump() + "\n");
}

// ---- DeepBench-style benchmark CSV ----------------------------------------

inline constexpr const char* kDeepbenchHeader = "w,h,d,n,k,r_w,r_h,s,gpu,runtime_s";

struct LoadedBench {
    std::vector<BenchShape> shapes;
    std::vector<std::string> warnings;
};

// CSV contract: the exact header above, then one row per (shape, GPU)
// timing. Rows repeating a shape accumulate GPU records onto it. Every row
// must satisfy the modulator budget r_w * r_h * d <= 1024.
inline LoadedBench load_deepbench(const std::string& path) {
    const std::string text = detail::read_file_text(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty file (missing header '" +
                         std::string(kDeepbenchHeader) + "')");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kDeepbenchHeader)
        throw ParseError(path + ": line 1: bad header '" + line + "' (expected '" +
                         std::string(kDeepbenchHeader) + "')");

    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };

    LoadedBench out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
        if (cells.size() != 10)
            throw ParseError(path + ": line " + std::to_string(lineno) + ": expected 10 "
                             "columns, got " + std::to_string(cells.size()));
        auto to_int = [&](int idx, const char* name) {
            try {
                std::size_t pos = 0;
                const int v = std::stoi(cells[idx], &pos);
                if (pos != cells[idx].size()) throw std::invalid_argument("trailing");
                return v;
            } catch (const std::exception&) {
                throw ParseError(path + ": line " + std::to_string(lineno) + ": bad " +
                                 name + " value '" + cells[idx] + "'");
            }
        };
        auto to_double = [&](int idx, const char* name) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cells[idx], &pos);
                if (pos != cells[idx].size()) throw std::invalid_argument("trailing");
                return v;
            } catch (const std::exception&) {
                throw ParseError(path + ": line " + std::to_string(lineno) + ": bad " +
                                 name + " value '" + cells[idx] + "'");
            }
        };
        ConvShape shape;
        shape.w = to_int(0, "w");
        shape.h = to_int(1, "h");
        shape.d = to_int(2, "d");
        shape.n = to_int(3, "n");
        shape.k = to_int(4, "k");
        shape.r_w = to_int(5, "r_w");
        shape.r_h = to_int(6, "r_h");
        shape.s = to_int(7, "s");
        try {
            shape.validate();
        } catch (const ContractError& e) {
            throw ParseError(path + ": line " + std::to_string(lineno) + ": " + e.what());
        }
        const long long rings = static_cast<long long>(shape.r_w) * shape.r_h * shape.d;
        if (rings > 1024)
            throw ConfigError(path + ": line " + std::to_string(lineno) +
                              ": r_w*r_h*d = " + std::to_string(rings) +
                              " exceeds the 1024 modulator budget");
        GpuRecord gpu;
        gpu.name = cells[8];
        gpu.runtime_s = to_double(9, "runtime_s");
        if (gpu.name.empty())
            throw ParseError(path + ": line " + std::to_string(lineno) + ": empty gpu name");
        if (!(gpu.runtime_s > 0.0))
            throw ParseError(path + ": line " + std::to_string(lineno) +
                             ": runtime_s must be > 0");
        if (const auto w = gpu_power_lookup(gpu.name)) gpu.power_w = *w;

        auto same = [&](const ConvShape& a, const ConvShape& b) {
            return a.w == b.w && a.h == b.h && a.d == b.d && a.n == b.n && a.k == b.k &&
                   a.r_w == b.r_w && a.r_h == b.r_h && a.s == b.s;
        };
        BenchShape* slot = nullptr;
        for (auto& existing : out.shapes)
            if (same(existing.shape, shape)) {
                slot = &existing;
                break;
            }
        if (!slot) {
            out.shapes.push_back(BenchShape{shape, {}});
            slot = &out.shapes.back();
        }
        slot->gpus.push_back(std::move(gpu));
    }
    if (out.shapes.empty())
        out.warnings.push_back(path + ": no benchmark rows; report will be empty");
    return out;
}

// ---- Report serialization --------------------------------------------------

inline json report_to_json(const Report& report) {
    json j;
    j["pixel_time_s"] = report.pixel_time_s;
    j["mean_gpu_power_w"] = report.mean_gpu_power_w;
    j["entries"] = json::array();
    for (const auto& e : report.entries) {
        json je;
        je["shape"] = {{"w", e.shape.w},     {"h", e.shape.h},     {"d", e.shape.d},
                       {"n", e.shape.n},     {"k", e.shape.k},     {"r_w", e.shape.r_w},
                       {"r_h", e.shape.r_h}, {"s", e.shape.s}};
        je["n_conv"] = e.n_conv;
        je["deap_runtime_s"] = e.deap_runtime_s;
        je["deap_runtime_cycles_s"] = e.deap_runtime_cycles_s;
        je["deap_power_w"] = e.deap_power_w;
        je["power_over_budget"] = e.power_over_budget;
        je["energy_ratio_vs_mean_gpu"] = e.energy_ratio_vs_mean_gpu;
        je["partial"] = e.partial;
        je["gpus"] = json::array();
        for (const auto& g : e.gpus) {
            json jg;
            jg["name"] = g.name;
            jg["runtime_s"] = g.runtime_s;
            jg["power_w"] = g.power_w;
            jg["has_power"] = g.has_power;
            jg["speedup"] = g.speedup;
            jg["energy_ratio"] = g.energy_ratio;
            je["gpus"].push_back(std::move(jg));
        }
        j["entries"].push_back(std::move(je));
    }
    return j;
}

inline std::string report_to_csv(const Report& report) {
    std::ostringstream os;
    os << "w,h,d,n,k,r_w,r_h,s,n_conv,deap_runtime_s,deap_runtime_cycles_s,"
          "deap_power_w,power_over_budget,gpu,gpu_runtime_s,gpu_power_w,speedup,"
          "energy_ratio,energy_ratio_vs_mean_gpu\n";
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& e : report.entries) {
        std::ostringstream prefix;
        prefix << e.shape.w << ',' << e.shape.h << ',' << e.shape.d << ',' << e.shape.n
               << ',' << e.shape.k << ',' << e.shape.r_w << ',' << e.shape.r_h << ','
               << e.shape.s << ',' << e.n_conv << ',' << num(e.deap_runtime_s) << ','
               << num(e.deap_runtime_cycles_s) << ',' << num(e.deap_power_w) << ','
               << (e.power_over_budget ? 1 : 0) << ',';
        if (e.gpus.empty()) {
            // Five blank cells: gpu, gpu_runtime_s, gpu_power_w, speedup,
            // energy_ratio.
            os << prefix.str() << ",,,,," << num(e.energy_ratio_vs_mean_gpu) << "\n";
            continue;
        }
        for (const auto& g : e.gpus) {
            os << prefix.str() << g.name << ',' << num(g.runtime_s) << ','
               << num(g.power_w) << ',' << num(g.speedup) << ',' << num(g.energy_ratio)
               << ',' << num(e.energy_ratio_vs_mean_gpu) << "\n";
        }
    }
    return os.str();
}

// ---- Run configuration -----------------------------------------------------

// One document collecting every knob a CLI run needs. Paths are validated
// by the command that actually uses them, so a config can name outputs that
// do not exist yet.
struct RunConfig {
    MrrParams params{};
    DeapBounds bounds{};
    QuantSpec quant{7, true};
    PerfConfig perf{};
    TrainConfig train{};
    int threads = 0;  // 0 = hardware default
    bool fast = false;
    std::string mnist_dir = "data/mnist";
    std::string model_path = "models/mnist_cnn.json";
    std::string bench_path = "fixtures/gpu_bench.csv";

    void validate() const {
        params.validate();
        bounds.validate();
        quant.validate();
        perf.validate();
        train.validate();
        if (threads < 0) throw ConfigError("threads must be >= 0");
    }
};

namespace detail {

template <typename T>
void read_field(const json& j, const char* name, T& into) {
    if (!j.contains(name)) return;
    try {
        into = j.at(name).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string("config field '") + name + "' has the wrong type");
    }
}

}  // namespace detail

inline RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("config: top level must be an object");
    RunConfig cfg;
    static const char* known[] = {"device", "bounds", "quant", "perf", "train",
                                  "threads", "fast", "mnist_dir", "model_path",
                                  "bench_path"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw SchemaError("config: unknown field '" + key + "'");
    }
    if (j.contains("device")) {
        const auto& d = j.at("device");
        detail::read_field(d, "r", cfg.params.r);
        detail::read_field(d, "a", cfg.params.a);
        detail::read_field(d, "radius_m", cfg.params.radius_m);
        detail::read_field(d, "n_eff", cfg.params.n_eff);
        if (d.contains("mode"))
            cfg.params.mode = eq_mode_from_string(d.at("mode").get<std::string>());
    }
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        detail::read_field(b, "r_m", cfg.bounds.r_m);
        detail::read_field(b, "d_m", cfg.bounds.d_m);
        detail::read_field(b, "n_conv", cfg.bounds.n_conv);
        detail::read_field(b, "mrr_budget", cfg.bounds.mrr_budget);
    }
    if (j.contains("quant")) {
        const auto& q = j.at("quant");
        detail::read_field(q, "bits", cfg.quant.bits);
        detail::read_field(q, "enabled", cfg.quant.enabled);
    }
    if (j.contains("perf")) {
        const auto& p = j.at("perf");
        detail::read_field(p, "laser_w", cfg.perf.laser_w);
        detail::read_field(p, "mrr_w", cfg.perf.mrr_w);
        detail::read_field(p, "dac_w", cfg.perf.dac_w);
        detail::read_field(p, "tia_w", cfg.perf.tia_w);
        detail::read_field(p, "adc_w", cfg.perf.adc_w);
        detail::read_field(p, "pd_sps", cfg.perf.pd_sps);
        detail::read_field(p, "tia_sps", cfg.perf.tia_sps);
        detail::read_field(p, "dac_sps", cfg.perf.dac_sps);
        detail::read_field(p, "adc_sps", cfg.perf.adc_sps);
        detail::read_field(p, "mrr_mod_sps", cfg.perf.mrr_mod_sps);
        detail::read_field(p, "mrr_radius_m", cfg.perf.mrr_radius_m);
        detail::read_field(p, "mrr_count_per_path", cfg.perf.mrr_count_per_path);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        detail::read_field(t, "epochs", cfg.train.epochs);
        detail::read_field(t, "batch_size", cfg.train.batch_size);
        detail::read_field(t, "lr", cfg.train.lr);
        detail::read_field(t, "seed", cfg.train.seed);
        detail::read_field(t, "lr_drop_epoch", cfg.train.lr_drop_epoch);
        detail::read_field(t, "lr_drop_factor", cfg.train.lr_drop_factor);
    }
    detail::read_field(j, "threads", cfg.threads);
    detail::read_field(j, "fast", cfg.fast);
    detail::read_field(j, "mnist_dir", cfg.mnist_dir);
    detail::read_field(j, "model_path", cfg.model_path);
    detail::read_field(j, "bench_path", cfg.bench_path);
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    return run_config_from_json(parse_json_file(path));
}

inline json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["device"] = {{"r", cfg.params.r},
                   {"a", cfg.params.a},
                   {"radius_m", cfg.params.radius_m},
                   {"n_eff", cfg.params.n_eff},
                   {"mode", to_string(cfg.params.mode)}};
    j["bounds"] = {{"r_m", cfg.bounds.r_m},
                   {"d_m", cfg.bounds.d_m},
                   {"n_conv", cfg.bounds.n_conv},
                   {"mrr_budget", cfg.bounds.mrr_budget}};
    j["quant"] = {{"bits", cfg.quant.bits}, {"enabled", cfg.quant.enabled}};
    j["perf"] = {{"laser_w", cfg.perf.laser_w},
                 {"mrr_w", cfg.perf.mrr_w},
                 {"dac_w", cfg.perf.dac_w},
                 {"tia_w", cfg.perf.tia_w},
                 {"adc_w", cfg.perf.adc_w},
                 {"pd_sps", cfg.perf.pd_sps},
                 {"tia_sps", cfg.perf.tia_sps},
                 {"dac_sps", cfg.perf.dac_sps},
                 {"adc_sps", cfg.perf.adc_sps},
                 {"mrr_mod_sps", cfg.perf.mrr_mod_sps},
                 {"mrr_radius_m", cfg.perf.mrr_radius_m},
                 {"mrr_count_per_path", cfg.perf.mrr_count_per_path}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"lr", cfg.train.lr},
                  {"seed", cfg.train.seed},
                  {"lr_drop_epoch", cfg.train.lr_drop_epoch},
                  {"lr_drop_factor", cfg.train.lr_drop_factor}};
    j["threads"] = cfg.threads;
    j["fast"] = cfg.fast;
    j["mnist_dir"] = cfg.mnist_dir;
    j["model_path"] = cfg.model_path;
    j["bench_path"] = cfg.bench_path;
    return j;
}

// FNV-1a over the canonical JSON dump; stable across runs and platforms.
inline std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string s = run_config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace deap
