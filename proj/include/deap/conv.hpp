#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "pwb.hpp"
#include "quant.hpp"
#include "tensor.hpp"

namespace deap {

// Convolution parameters. Kernels may be rectangular (r_h x r_w); the
// square case has r_h == r_w.
struct ConvShape {
    int n = 1;    // batch count
    int h = 0;    // padded input height
    int w = 0;    // padded input width
    int d = 0;    // input channels
    int r_h = 0;  // kernel height
    int r_w = 0;  // kernel width
    int k = 0;    // kernel count
    int s = 1;    // stride

    static ConvShape square(int h, int w, int d, int r, int k, int s, int n = 1) {
        return ConvShape{n, h, w, d, r, r, k, s};
    }

    void validate() const {
        if (n < 1 || h < 1 || w < 1 || d < 1 || r_h < 1 || r_w < 1 || k < 1 || s < 1)
            throw ContractError("ConvShape: all parameters must be positive");
        if (r_h > h || r_w > w)
            throw ContractError("ConvShape: kernel " + std::to_string(r_h) + "x" +
                                std::to_string(r_w) + " exceeds input " +
                                std::to_string(h) + "x" + std::to_string(w));
    }
};

// Hardware envelope of one deployment: line capacity, channel count,
// parallel convolutional units, and the modulator-ring budget.
struct DeapBounds {
    int r_m = 10;          // max kernel edge; r_m^2 <= 100 rings per line
    int d_m = 10;          // max channels (lines)
    int n_conv = 1;        // parallel convolutional units
    int mrr_budget = 1024; // modulator rings available in total

    void validate() const {
        if (r_m < 1 || d_m < 1)
            throw ConfigError("DeapBounds: r_m and d_m must be >= 1");
        if (r_m * r_m > kMaxWeightsPerLine)
            throw ConfigError("DeapBounds: r_m=" + std::to_string(r_m) +
                              " exceeds the 100-wavelength line capacity (r_m^2 <= 100)");
        if (n_conv < 1)
            throw ConfigError("DeapBounds: n_conv must be >= 1");
        if (mrr_budget < 1)
            throw ConfigError("DeapBounds: mrr_budget must be >= 1");
        if (static_cast<long long>(r_m) * r_m * d_m > mrr_budget)
            throw ConfigError("DeapBounds: r_m^2 * d_m = " +
                              std::to_string(static_cast<long long>(r_m) * r_m * d_m) +
                              " exceeds the modulator budget of " +
                              std::to_string(mrr_budget));
    }
};

struct OutputDims {
    int oh = 0, ow = 0, k = 0;      // strided enumeration (floor)
    int oh_ceil = 0, ow_ceil = 0;   // analytic ceiling convention
};

// Output feature dimensions under both conventions. The simulator strides
// with floor semantics; the ceiling form matches the analytic runtime
// model and only differs when the stride does not divide H-R (or W-R).
inline OutputDims output_dims(const ConvShape& shape) {
    shape.validate();
    OutputDims od;
    od.oh = (shape.h - shape.r_h) / shape.s + 1;
    od.ow = (shape.w - shape.r_w) / shape.s + 1;
    od.oh_ceil = (shape.h - shape.r_h + shape.s - 1) / shape.s + 1;
    od.ow_ceil = (shape.w - shape.r_w + shape.s - 1) / shape.s + 1;
    od.k = shape.k;
    return od;
}

inline ConvShape shape_of(const Tensor3& a, const Tensor4& f, int stride, int n = 1) {
    ConvShape shape{n, a.h, a.w, a.d, f.h, f.w, f.k, stride};
    if (f.d != a.d)
        throw ContractError("shape_of: kernel depth " + std::to_string(f.d) +
                            " != input depth " + std::to_string(a.d));
    shape.validate();
    return shape;
}

// Plain digital reference convolution (no padding; caller pads):
//   O[i,j,q] = sum_{m,n,c} F[m,n,c,q] * A[iS+m, jS+n, c].
inline Tensor3 oracle_convolve(const Tensor3& a, const Tensor4& f, int stride) {
    const ConvShape shape = shape_of(a, f, stride);
    const OutputDims od = output_dims(shape);
    Tensor3 out(od.oh, od.ow, shape.k);
    for (int i = 0; i < od.oh; ++i)
        for (int j = 0; j < od.ow; ++j)
            for (int q = 0; q < shape.k; ++q) {
                double acc = 0.0;
                for (int m = 0; m < f.h; ++m)
                    for (int n = 0; n < f.w; ++n)
                        for (int c = 0; c < f.d; ++c)
                            acc += f.at(m, n, c, q) * a.at(i * stride + m, j * stride + n, c);
                out.at(i, j, q) = acc;
            }
    return out;
}

inline Tensor3 zero_pad(const Tensor3& a, int pad) {
    if (pad < 0) throw ContractError("zero_pad: negative padding");
    if (pad == 0) return a;
    Tensor3 out(a.h + 2 * pad, a.w + 2 * pad, a.d, 0.0);
    for (int i = 0; i < a.h; ++i)
        for (int j = 0; j < a.w; ++j)
            for (int c = 0; c < a.d; ++c)
                out.at(i + pad, j + pad, c) = a.at(i, j, c);
    return out;
}

namespace detail {

inline void check_kernel_fits(int r_h, int r_w, int d, const DeapBounds& bounds) {
    bounds.validate();
    if (r_h * r_w > bounds.r_m * bounds.r_m)
        throw ConfigError("kernel " + std::to_string(r_h) + "x" + std::to_string(r_w) +
                          " needs " + std::to_string(r_h * r_w) +
                          " rings per line; unit supports " +
                          std::to_string(bounds.r_m * bounds.r_m));
    if (d > bounds.d_m)
        throw ConfigError("kernel depth " + std::to_string(d) +
                          " exceeds the unit's " + std::to_string(bounds.d_m) + " lines");
}

// Program the per-line weight banks for one kernel slice. Line c carries
// the vectorized (row-major) kernel values of channel c.
inline std::vector<ProgrammedBank> program_kernel(const Tensor3& kernel,
                                                  const QuantSpec& quant,
                                                  const MrrParams& params, bool fast) {
    std::vector<ProgrammedBank> banks;
    banks.reserve(kernel.d);
    for (int c = 0; c < kernel.d; ++c) {
        PwbConfig cfg;
        cfg.params = params;
        cfg.quant = quant;
        cfg.fast = fast;
        cfg.weights_f.reserve(static_cast<std::size_t>(kernel.h) * kernel.w);
        for (int m = 0; m < kernel.h; ++m)
            for (int n = 0; n < kernel.w; ++n)
                cfg.weights_f.push_back(kernel.at(m, n, c));
        banks.push_back(program_bank(cfg));
    }
    return banks;
}

// One convolved pixel from pre-programmed banks: each line's balanced-PD
// current, summed by the ideal voltage adder in ascending line order.
// Lines and rings beyond the kernel's extent hold exact zeros and add
// exactly 0.0 to every sum, so they are skipped rather than multiplied out.
inline double pixel_from_banks(const Tensor3& a, int top, int left,
                               const std::vector<ProgrammedBank>& banks, int r_h,
                               int r_w, const PwbConfig& line_cfg) {
    double adder = 0.0;
    EnvelopeVector env;
    env.mu.resize(static_cast<std::size_t>(r_h) * r_w);
    for (int c = 0; c < static_cast<int>(banks.size()); ++c) {
        std::size_t idx = 0;
        for (int m = 0; m < r_h; ++m)
            for (int n = 0; n < r_w; ++n)
                env.mu[idx++] = a.at(top + m, left + n, c);
        adder += bank_dot(env, banks[c], line_cfg);
    }
    return adder;
}

}  // namespace detail

// One convolved pixel through the hardware path: the window slice of each
// channel modulates one WDM line, the line's weight bank holds the
// vectorized kernel slice, and the per-line currents are summed by the
// voltage adder.
inline double single_pixel(const Tensor3& window, const Tensor3& kernel,
                           const DeapBounds& bounds, const QuantSpec& quant,
                           const MrrParams& params = MrrParams{}, bool fast = false) {
    if (!window.same_shape(kernel))
        throw ContractError("single_pixel: window " + window.shape_str() +
                            " vs kernel " + kernel.shape_str());
    detail::check_kernel_fits(kernel.h, kernel.w, kernel.d, bounds);
    const auto banks = detail::program_kernel(kernel, quant, params, fast);
    PwbConfig line_cfg;
    line_cfg.params = params;
    line_cfg.quant = quant;
    line_cfg.fast = fast;
    return detail::pixel_from_banks(window, 0, 0, banks, kernel.h, kernel.w, line_cfg);
}

struct ConvResult {
    Tensor3 out;
    std::int64_t cycles = 0;
};

// Cycle count of the strided schedule: each of the K kernels produces P
// output pixels, n_conv units produce n_conv pixels per cycle.
inline std::int64_t conv_cycles(int k, std::int64_t pixels_per_kernel, int n_conv) {
    if (k < 1 || pixels_per_kernel < 0 || n_conv < 1)
        throw ContractError("conv_cycles: bad arguments");
    return static_cast<std::int64_t>(k) * ((pixels_per_kernel + n_conv - 1) / n_conv);
}

// Full strided convolution on the simulated hardware. Weight banks are
// reloaded once per kernel; the window strides with floor semantics; output
// pixels are distributed round-robin over n_conv units, which changes only
// the cycle count, never the values.
inline ConvResult deap_convolve(const Tensor3& a, const Tensor4& f,
                                const ConvShape& shape, const DeapBounds& bounds,
                                const QuantSpec& quant,
                                const MrrParams& params = MrrParams{},
                                bool fast = false) {
    shape.validate();
    if (shape.h != a.h || shape.w != a.w || shape.d != a.d)
        throw ContractError("deap_convolve: shape says input " + std::to_string(shape.h) +
                            "x" + std::to_string(shape.w) + "x" + std::to_string(shape.d) +
                            " but tensor is " + a.shape_str());
    if (shape.r_h != f.h || shape.r_w != f.w || shape.d != f.d || shape.k != f.k)
        throw ContractError("deap_convolve: shape/kernel mismatch (" + f.shape_str() + ")");
    detail::check_kernel_fits(f.h, f.w, f.d, bounds);

    const OutputDims od = output_dims(shape);
    ConvResult result;
    result.out = Tensor3(od.oh, od.ow, shape.k);

    PwbConfig line_cfg;
    line_cfg.params = params;
    line_cfg.quant = quant;
    line_cfg.fast = fast;

    for (int q = 0; q < shape.k; ++q) {
        const auto banks = detail::program_kernel(f.kernel(q), quant, params, fast);
        for (int i = 0; i < od.oh; ++i)
            for (int j = 0; j < od.ow; ++j)
                result.out.at(i, j, q) = detail::pixel_from_banks(
                    a, i * shape.s, j * shape.s, banks, f.h, f.w, line_cfg);
    }
    const std::int64_t pixels = static_cast<std::int64_t>(od.oh) * od.ow;
    result.cycles = conv_cycles(shape.k, pixels, bounds.n_conv);
    return result;
}

}  // namespace deap
