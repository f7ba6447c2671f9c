#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "conv.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "tensor.hpp"

namespace deap {

enum class Backend { digital, photonic };

inline const char* to_string(Backend b) {
    return b == Backend::digital ? "digital" : "photonic";
}

inline Backend backend_from_string(const std::string& s) {
    if (s == "digital") return Backend::digital;
    if (s == "photonic") return Backend::photonic;
    throw ConfigError("unknown backend '" + s + "' (expected 'digital' or 'photonic')");
}

// Two convolutional layers (5x5x1x8 and 5x5x8x8) followed by two fully
// connected layers (800 -> 128 -> 10), with a bias vector per layer.
struct CnnModel {
    Tensor4 conv1;
    std::vector<double> conv1_bias;
    Tensor4 conv2;
    std::vector<double> conv2_bias;
    Matrix fc1;
    std::vector<double> fc1_bias;
    Matrix fc2;
    std::vector<double> fc2_bias;

    void validate() const {
        auto expect = [](bool ok, const char* field, const std::string& got) {
            if (!ok)
                throw SchemaError(std::string("CnnModel: field '") + field +
                                  "' has wrong shape (" + got + ")");
        };
        expect(conv1.h == 5 && conv1.w == 5 && conv1.d == 1 && conv1.k == 8, "conv1",
               conv1.shape_str());
        expect(conv1_bias.size() == 8, "conv1_bias", std::to_string(conv1_bias.size()));
        expect(conv2.h == 5 && conv2.w == 5 && conv2.d == 8 && conv2.k == 8, "conv2",
               conv2.shape_str());
        expect(conv2_bias.size() == 8, "conv2_bias", std::to_string(conv2_bias.size()));
        expect(fc1.rows == 128 && fc1.cols == 800, "fc1",
               std::to_string(fc1.rows) + "x" + std::to_string(fc1.cols));
        expect(fc1_bias.size() == 128, "fc1_bias", std::to_string(fc1_bias.size()));
        expect(fc2.rows == 10 && fc2.cols == 128, "fc2",
               std::to_string(fc2.rows) + "x" + std::to_string(fc2.cols));
        expect(fc2_bias.size() == 10, "fc2_bias", std::to_string(fc2_bias.size()));
        auto finite = [](const std::vector<double>& v) {
            for (double x : v)
                if (!std::isfinite(x)) return false;
            return true;
        };
        if (!finite(conv1.v) || !finite(conv2.v) || !finite(fc1.v) || !finite(fc2.v) ||
            !finite(conv1_bias) || !finite(conv2_bias) || !finite(fc1_bias) ||
            !finite(fc2_bias))
            throw SchemaError("CnnModel: non-finite value");
    }
};

// Grayscale images in [0,1] plus integer labels 0..9.
struct Dataset {
    std::vector<Tensor3> images;
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }
};

inline Tensor3 relu(Tensor3 t) {
    for (double& x : t.v) x = std::max(0.0, x);
    return t;
}

inline std::vector<double> relu(std::vector<double> v) {
    for (double& x : v) x = std::max(0.0, x);
    return v;
}

// 2x2 all-quarters averaging kernel, stride 1, applied per channel:
// (H, W, D) -> (H-1, W-1, D).
inline Tensor3 avg_pool_s1(const Tensor3& t) {
    if (t.h < 2 || t.w < 2)
        throw ContractError("avg_pool_s1: input " + t.shape_str() + " smaller than 2x2");
    Tensor3 out(t.h - 1, t.w - 1, t.d);
    for (int i = 0; i + 1 < t.h; ++i)
        for (int j = 0; j + 1 < t.w; ++j)
            for (int c = 0; c < t.d; ++c)
                out.at(i, j, c) = 0.25 * (t.at(i, j, c) + t.at(i, j + 1, c) +
                                          t.at(i + 1, j, c) + t.at(i + 1, j + 1, c));
    return out;
}

// Keep the even (zero-based) spatial indices in both dimensions:
// 19x19 -> 10x10, 4x4 -> 2x2, 1x1 -> 1x1.
inline Tensor3 even_index_downsample(const Tensor3& t) {
    Tensor3 out((t.h + 1) / 2, (t.w + 1) / 2, t.d);
    for (int i = 0; i < out.h; ++i)
        for (int j = 0; j < out.w; ++j)
            for (int c = 0; c < t.d; ++c)
                out.at(i, j, c) = t.at(2 * i, 2 * j, c);
    return out;
}

// Flatten in storage order: rows, then columns, then channels ascending.
inline std::vector<double> flatten(const Tensor3& t) { return t.v; }

inline std::vector<double> fully_connected(const std::vector<double>& x,
                                           const Matrix& weight,
                                           const std::vector<double>& bias) {
    if (static_cast<int>(x.size()) != weight.cols)
        throw ContractError("fully_connected: input length " + std::to_string(x.size()) +
                            " vs weight cols " + std::to_string(weight.cols));
    if (static_cast<int>(bias.size()) != weight.rows)
        throw ContractError("fully_connected: bias length " + std::to_string(bias.size()) +
                            " vs weight rows " + std::to_string(weight.rows));
    std::vector<double> y(bias);
    for (int i = 0; i < weight.rows; ++i) {
        double acc = 0.0;
        const double* row = weight.v.data() + static_cast<std::size_t>(i) * weight.cols;
        for (int j = 0; j < weight.cols; ++j) acc += row[j] * x[j];
        y[i] += acc;
    }
    return y;
}

namespace detail {

inline Tensor3 add_channel_bias(Tensor3 t, const std::vector<double>& bias) {
    if (static_cast<int>(bias.size()) != t.d)
        throw ContractError("bias length " + std::to_string(bias.size()) +
                            " vs channels " + std::to_string(t.d));
    for (int i = 0; i < t.h; ++i)
        for (int j = 0; j < t.w; ++j)
            for (int c = 0; c < t.d; ++c) t.at(i, j, c) += bias[c];
    return t;
}

// One convolution layer on the chosen backend. The photonic path scales the
// layer input by its max so every envelope sits in [0,1], runs the hardware
// convolution, and multiplies the measured scale back into the adder
// output; biases are added digitally afterwards in both paths.
inline Tensor3 conv_layer(const Tensor3& input, const Tensor4& kernels,
                          const std::vector<double>& bias, Backend backend,
                          const DeapBounds& bounds, const QuantSpec& quant,
                          const MrrParams& params, bool fast) {
    Tensor3 out;
    if (backend == Backend::digital) {
        out = oracle_convolve(input, kernels, 1);
    } else {
        double peak = 0.0;
        for (double x : input.v) {
            if (x < 0.0)
                throw ContractError("photonic conv layer: negative input cannot be "
                                    "power-encoded");
            peak = std::max(peak, x);
        }
        if (peak == 0.0) {
            const OutputDims od = output_dims(shape_of(input, kernels, 1));
            out = Tensor3(od.oh, od.ow, od.k);
        } else {
            Tensor3 scaled = input;
            for (double& x : scaled.v) x /= peak;
            out = deap_convolve(scaled, kernels, shape_of(scaled, kernels, 1), bounds,
                                quant, params, fast)
                      .out;
            for (double& x : out.v) x *= peak;
        }
    }
    return add_channel_bias(std::move(out), bias);
}

}  // namespace detail

// Full pipeline on one 28x28x1 image in [0,1]:
//   conv1 -> +bias -> ReLU -> conv2 -> +bias -> ReLU -> avg_pool_s1
//   -> even_index_downsample -> flatten(800) -> fc1 -> ReLU -> fc2.
// Returns the 10 raw class scores. Convolutions run on the chosen backend;
// pooling, downsampling and the fully connected layers are always digital.
inline std::vector<double> deap_infer(const CnnModel& model, const Tensor3& image,
                                      const DeapBounds& bounds, const QuantSpec& quant,
                                      Backend backend,
                                      const MrrParams& params = MrrParams{},
                                      bool fast = false) {
    model.validate();
    if (image.h != 28 || image.w != 28 || image.d != 1)
        throw ContractError("deap_infer: image must be 28x28x1, got " + image.shape_str());
    for (double x : image.v)
        if (!(x >= 0.0 && x <= 1.0))
            throw ContractError("deap_infer: image values must lie in [0,1]");

    Tensor3 t = relu(detail::conv_layer(image, model.conv1, model.conv1_bias, backend,
                                        bounds, quant, params, fast));
    t = relu(detail::conv_layer(t, model.conv2, model.conv2_bias, backend, bounds, quant,
                                params, fast));
    t = even_index_downsample(avg_pool_s1(t));
    std::vector<double> x = flatten(t);
    x = relu(fully_connected(x, model.fc1, model.fc1_bias));
    return fully_connected(x, model.fc2, model.fc2_bias);
}

// Argmax with ties broken toward the lowest class index.
inline int predict_class(const std::vector<double>& scores) {
    if (scores.empty()) throw ContractError("predict_class: empty score vector");
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

// Fraction of dataset images whose top score matches the label. Images are
// scored in parallel (cap via DEAP_SIM_THREADS); each image writes only its
// own slot, so the accuracy is independent of the thread count.
inline double evaluate(const CnnModel& model, const Dataset& ds, Backend backend,
                       const QuantSpec& quant, const DeapBounds& bounds = DeapBounds{},
                       const MrrParams& params = MrrParams{}, bool fast = false) {
    if (ds.images.empty()) throw ContractError("evaluate: empty dataset");
    if (ds.images.size() != ds.labels.size())
        throw ContractError("evaluate: " + std::to_string(ds.images.size()) +
                            " images vs " + std::to_string(ds.labels.size()) + " labels");
    model.validate();
    std::vector<char> correct(ds.images.size(), 0);
    parallel_for(ds.images.size(), [&](std::size_t i) {
        const auto scores =
            deap_infer(model, ds.images[i], bounds, quant, backend, params, fast);
        correct[i] = predict_class(scores) == ds.labels[i] ? 1 : 0;
    });
    std::size_t hits = 0;
    for (char c : correct) hits += static_cast<std::size_t>(c);
    return static_cast<double>(hits) / static_cast<double>(ds.images.size());
}

}  // namespace deap
