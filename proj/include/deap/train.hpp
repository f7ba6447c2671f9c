#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "cnn.hpp"
#include "errors.hpp"
#include "tensor.hpp"

namespace deap {

// Deterministic random source for training. The engine is the standardized
// mt19937_64; uniform/normal deviates are derived by hand (rather than the
// <random> distributions, whose outputs vary across standard libraries) so
// a seed produces the same weights everywhere.
class TrainRng {
public:
    explicit TrainRng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double normal() {  // Box-Muller, mean 0, stddev 1
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return mag * std::cos(kTwoPi * u2);
    }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct TrainConfig {
    int epochs = 12;
    int batch_size = 64;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 1;
    // After this many epochs the learning rate is multiplied by
    // lr_drop_factor (0 disables the drop).
    int lr_drop_epoch = 8;
    double lr_drop_factor = 0.5;

    void validate() const {
        if (epochs < 1 || batch_size < 1)
            throw ConfigError("TrainConfig: epochs and batch_size must be >= 1");
        if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) ||
            !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0))
            throw ConfigError("TrainConfig: bad optimizer hyperparameters");
    }
};

struct TrainResult {
    CnnModel model;
    std::vector<double> epoch_mean_loss;
    std::vector<double> batch_losses;  // every optimizer step, in order
};

namespace detail {

// All trainable parameters in one flat vector so the optimizer is a single
// loop. Offsets below define the layout.
struct ParamLayout {
    static constexpr int c1 = 0;                 // conv1 5*5*1*8
    static constexpr int c1b = c1 + 200;         // 8
    static constexpr int c2 = c1b + 8;           // conv2 5*5*8*8
    static constexpr int c2b = c2 + 1600;        // 8
    static constexpr int f1 = c2b + 8;           // fc1 128*800
    static constexpr int f1b = f1 + 102400;      // 128
    static constexpr int f2 = f1b + 128;         // fc2 10*128
    static constexpr int f2b = f2 + 1280;        // 10
    static constexpr int total = f2b + 10;
};

// Scratch space for one forward/backward pass; allocated once.
struct TrainWorkspace {
    std::vector<double> z1, a1, z2, a2, pool, down, z3, a3, z4;
    std::vector<double> dz1, da1, dz2, da2, dpool, ddown, dz3, dx;

    TrainWorkspace() {
        z1.assign(24 * 24 * 8, 0.0);
        a1.assign(24 * 24 * 8, 0.0);
        z2.assign(20 * 20 * 8, 0.0);
        a2.assign(20 * 20 * 8, 0.0);
        pool.assign(19 * 19 * 8, 0.0);
        down.assign(10 * 10 * 8, 0.0);
        z3.assign(128, 0.0);
        a3.assign(128, 0.0);
        z4.assign(10, 0.0);
        dz1.assign(24 * 24 * 8, 0.0);
        da1.assign(24 * 24 * 8, 0.0);
        dz2.assign(20 * 20 * 8, 0.0);
        da2.assign(20 * 20 * 8, 0.0);
        dpool.assign(19 * 19 * 8, 0.0);
        ddown.assign(10 * 10 * 8, 0.0);
        dz3.assign(128, 0.0);
        dx.assign(800, 0.0);
    }
};

// Channel-fastest index helpers for the fixed layer shapes.
inline int i3(int i, int j, int c, int w, int d) { return (i * w + j) * d + c; }

// conv layer, valid padding, stride 1, kernel edge 5; in: hi x wi x di,
// out: (hi-4) x (wi-4) x 8. Kernel layout matches Tensor4 (kernel fastest).
inline void conv5_forward(const double* in, int hi, int wi, int di, const double* kw,
                          const double* kb, double* out) {
    const int ho = hi - 4, wo = wi - 4;
    for (int i = 0; i < ho; ++i)
        for (int j = 0; j < wo; ++j) {
            double acc[8];
            for (int q = 0; q < 8; ++q) acc[q] = kb[q];
            for (int m = 0; m < 5; ++m)
                for (int n = 0; n < 5; ++n)
                    for (int c = 0; c < di; ++c) {
                        const double x = in[i3(i + m, j + n, c, wi, di)];
                        const double* kq = kw + ((m * 5 + n) * di + c) * 8;
                        for (int q = 0; q < 8; ++q) acc[q] += x * kq[q];
                    }
            double* o = out + (i * wo + j) * 8;
            for (int q = 0; q < 8; ++q) o[q] = acc[q];
        }
}

inline void conv5_backward(const double* in, int hi, int wi, int di, const double* kw,
                           const double* dout, double* din, double* dkw, double* dkb) {
    const int ho = hi - 4, wo = wi - 4;
    if (din) std::fill(din, din + hi * wi * di, 0.0);
    for (int i = 0; i < ho; ++i)
        for (int j = 0; j < wo; ++j) {
            const double* dz = dout + (i * wo + j) * 8;
            for (int q = 0; q < 8; ++q) dkb[q] += dz[q];
            for (int m = 0; m < 5; ++m)
                for (int n = 0; n < 5; ++n)
                    for (int c = 0; c < di; ++c) {
                        const int xi = i3(i + m, j + n, c, wi, di);
                        const double x = in[xi];
                        const int kbase = ((m * 5 + n) * di + c) * 8;
                        double dxv = 0.0;
                        for (int q = 0; q < 8; ++q) {
                            dkw[kbase + q] += dz[q] * x;
                            dxv += dz[q] * kw[kbase + q];
                        }
                        if (din) din[xi] += dxv;
                    }
        }
}

inline double forward_loss(const double* image, const std::vector<double>& theta,
                           int label, TrainWorkspace& ws) {
    using L = ParamLayout;
    const double* th = theta.data();
    conv5_forward(image, 28, 28, 1, th + L::c1, th + L::c1b, ws.z1.data());
    for (std::size_t i = 0; i < ws.z1.size(); ++i) ws.a1[i] = std::max(0.0, ws.z1[i]);
    conv5_forward(ws.a1.data(), 24, 24, 8, th + L::c2, th + L::c2b, ws.z2.data());
    for (std::size_t i = 0; i < ws.z2.size(); ++i) ws.a2[i] = std::max(0.0, ws.z2[i]);

    for (int i = 0; i < 19; ++i)
        for (int j = 0; j < 19; ++j)
            for (int c = 0; c < 8; ++c)
                ws.pool[i3(i, j, c, 19, 8)] =
                    0.25 * (ws.a2[i3(i, j, c, 20, 8)] + ws.a2[i3(i, j + 1, c, 20, 8)] +
                            ws.a2[i3(i + 1, j, c, 20, 8)] +
                            ws.a2[i3(i + 1, j + 1, c, 20, 8)]);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (int c = 0; c < 8; ++c)
                ws.down[i3(i, j, c, 10, 8)] = ws.pool[i3(2 * i, 2 * j, c, 19, 8)];

    for (int i = 0; i < 128; ++i) {
        double acc = th[L::f1b + i];
        const double* row = th + L::f1 + i * 800;
        for (int j = 0; j < 800; ++j) acc += row[j] * ws.down[j];
        ws.z3[i] = acc;
        ws.a3[i] = std::max(0.0, acc);
    }
    for (int i = 0; i < 10; ++i) {
        double acc = th[L::f2b + i];
        const double* row = th + L::f2 + i * 128;
        for (int j = 0; j < 128; ++j) acc += row[j] * ws.a3[j];
        ws.z4[i] = acc;
    }

    double zmax = ws.z4[0];
    for (int i = 1; i < 10; ++i) zmax = std::max(zmax, ws.z4[i]);
    double sum = 0.0;
    for (int i = 0; i < 10; ++i) sum += std::exp(ws.z4[i] - zmax);
    return std::log(sum) - (ws.z4[label] - zmax);
}

inline void backward(const double* image, const std::vector<double>& theta, int label,
                     TrainWorkspace& ws, std::vector<double>& grad) {
    using L = ParamLayout;
    const double* th = theta.data();
    double* g = grad.data();

    // softmax cross-entropy gradient on the scores
    double zmax = ws.z4[0];
    for (int i = 1; i < 10; ++i) zmax = std::max(zmax, ws.z4[i]);
    double sum = 0.0;
    double p[10];
    for (int i = 0; i < 10; ++i) {
        p[i] = std::exp(ws.z4[i] - zmax);
        sum += p[i];
    }
    for (int i = 0; i < 10; ++i) p[i] /= sum;
    p[label] -= 1.0;

    // fc2
    std::fill(ws.dz3.begin(), ws.dz3.end(), 0.0);
    for (int i = 0; i < 10; ++i) {
        g[L::f2b + i] += p[i];
        double* grow = g + L::f2 + i * 128;
        const double* row = th + L::f2 + i * 128;
        for (int j = 0; j < 128; ++j) {
            grow[j] += p[i] * ws.a3[j];
            ws.dz3[j] += p[i] * row[j];
        }
    }
    // fc1 (through the ReLU on z3)
    for (int j = 0; j < 128; ++j)
        if (ws.z3[j] <= 0.0) ws.dz3[j] = 0.0;
    std::fill(ws.dx.begin(), ws.dx.end(), 0.0);
    for (int i = 0; i < 128; ++i) {
        const double d = ws.dz3[i];
        if (d == 0.0) continue;
        g[L::f1b + i] += d;
        double* grow = g + L::f1 + i * 800;
        const double* row = th + L::f1 + i * 800;
        for (int j = 0; j < 800; ++j) {
            grow[j] += d * ws.down[j];
            ws.dx[j] += d * row[j];
        }
    }

    // undo downsample and average pool
    std::fill(ws.dpool.begin(), ws.dpool.end(), 0.0);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (int c = 0; c < 8; ++c)
                ws.dpool[i3(2 * i, 2 * j, c, 19, 8)] = ws.dx[i3(i, j, c, 10, 8)];
    std::fill(ws.da2.begin(), ws.da2.end(), 0.0);
    for (int i = 0; i < 19; ++i)
        for (int j = 0; j < 19; ++j)
            for (int c = 0; c < 8; ++c) {
                const double d = 0.25 * ws.dpool[i3(i, j, c, 19, 8)];
                if (d == 0.0) continue;
                ws.da2[i3(i, j, c, 20, 8)] += d;
                ws.da2[i3(i, j + 1, c, 20, 8)] += d;
                ws.da2[i3(i + 1, j, c, 20, 8)] += d;
                ws.da2[i3(i + 1, j + 1, c, 20, 8)] += d;
            }

    for (std::size_t i = 0; i < ws.da2.size(); ++i)
        ws.dz2[i] = ws.z2[i] > 0.0 ? ws.da2[i] : 0.0;
    conv5_backward(ws.a1.data(), 24, 24, 8, th + L::c2, ws.dz2.data(), ws.da1.data(),
                   g + L::c2, g + L::c2b);

    for (std::size_t i = 0; i < ws.da1.size(); ++i)
        ws.dz1[i] = ws.z1[i] > 0.0 ? ws.da1[i] : 0.0;
    conv5_backward(image, 28, 28, 1, th + L::c1, ws.dz1.data(), nullptr, g + L::c1,
                   g + L::c1b);
}

inline CnnModel model_from_theta(const std::vector<double>& theta) {
    using L = ParamLayout;
    CnnModel m;
    m.conv1 = Tensor4(5, 5, 1, 8);
    std::copy(theta.begin() + L::c1, theta.begin() + L::c1b, m.conv1.v.begin());
    m.conv1_bias.assign(theta.begin() + L::c1b, theta.begin() + L::c2);
    m.conv2 = Tensor4(5, 5, 8, 8);
    std::copy(theta.begin() + L::c2, theta.begin() + L::c2b, m.conv2.v.begin());
    m.conv2_bias.assign(theta.begin() + L::c2b, theta.begin() + L::f1);
    m.fc1 = Matrix(128, 800);
    std::copy(theta.begin() + L::f1, theta.begin() + L::f1b, m.fc1.v.begin());
    m.fc1_bias.assign(theta.begin() + L::f1b, theta.begin() + L::f2);
    m.fc2 = Matrix(10, 128);
    std::copy(theta.begin() + L::f2, theta.begin() + L::f2b, m.fc2.v.begin());
    m.fc2_bias.assign(theta.begin() + L::f2b, theta.end());
    return m;
}

}  // namespace detail

// Purely digital training of the fixed architecture: ADAM on softmax
// cross-entropy, shuffled mini-batches, single-threaded and bit-for-bit
// deterministic for a given seed and dataset.
inline TrainResult train_reference(const Dataset& train, const TrainConfig& cfg,
                                   std::ostream* log = nullptr) {
    cfg.validate();
    if (train.images.empty()) throw ContractError("train_reference: empty training set");
    if (train.images.size() != train.labels.size())
        throw ContractError("train_reference: image/label count mismatch");
    for (const auto& img : train.images)
        if (img.h != 28 || img.w != 28 || img.d != 1)
            throw ContractError("train_reference: images must be 28x28x1");

    using L = detail::ParamLayout;
    TrainRng rng(cfg.seed);
    std::vector<double> theta(L::total, 0.0);
    // He-style normal init scaled by fan-in; biases start at zero.
    auto init_span = [&](int from, int count, double stddev) {
        for (int i = 0; i < count; ++i) theta[from + i] = stddev * rng.normal();
    };
    init_span(L::c1, 200, std::sqrt(2.0 / 25.0));
    init_span(L::c2, 1600, std::sqrt(2.0 / 200.0));
    init_span(L::f1, 102400, std::sqrt(2.0 / 800.0));
    init_span(L::f2, 1280, std::sqrt(1.0 / 128.0));

    std::vector<double> grad(L::total, 0.0);
    std::vector<double> adam_m(L::total, 0.0);
    std::vector<double> adam_v(L::total, 0.0);
    detail::TrainWorkspace ws;
    TrainResult result;

    std::vector<std::size_t> order(train.images.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    long long step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = (cfg.lr_drop_epoch > 0 && epoch > cfg.lr_drop_epoch)
                              ? cfg.lr * cfg.lr_drop_factor
                              : cfg.lr;
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double inv = 1.0 / static_cast<double>(end - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t idx = start; idx < end; ++idx) {
                const auto& img = train.images[order[idx]];
                const int label = train.labels[order[idx]];
                if (label < 0 || label > 9)
                    throw ContractError("train_reference: label out of [0,9]");
                batch_loss += detail::forward_loss(img.v.data(), theta, label, ws);
                detail::backward(img.v.data(), theta, label, ws, grad);
            }
            batch_loss *= inv;
            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (int i = 0; i < L::total; ++i) {
                const double gi = grad[i] * inv;
                adam_m[i] = cfg.beta1 * adam_m[i] + (1.0 - cfg.beta1) * gi;
                adam_v[i] = cfg.beta2 * adam_v[i] + (1.0 - cfg.beta2) * gi * gi;
                const double mhat = adam_m[i] / bc1;
                const double vhat = adam_v[i] / bc2;
                theta[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
            }
            result.batch_losses.push_back(batch_loss);
            epoch_loss += batch_loss;
            ++batches;
        }
        result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(batches));
        if (log)
            (*log) << "epoch " << epoch << "/" << cfg.epochs
                   << " mean_loss=" << result.epoch_mean_loss.back() << " lr=" << lr
                   << "\n";
    }
    result.model = detail::model_from_theta(theta);
    return result;
}

}  // namespace deap
