#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "mrr.hpp"
#include "quant.hpp"

namespace deap {

// One WDM line can carry at most 100 distinct wavelengths, so a single
// weight bank holds at most 100 weights.
inline constexpr int kMaxWeightsPerLine = 100;

// Per-channel power envelopes, each in [0, 1].
struct EnvelopeVector {
    std::vector<double> mu;
};

struct PwbConfig {
    std::vector<double> weights_f;  // unnormalized weights F_i
    MrrParams params{};
    double responsivity_r0 = 1.0;   // detector responsivity constant R_0
    double field_scale_e0 = 1.0;    // source amplitude scale E_0
    QuantSpec quant{};
    // Skip the device inversion+forward pair when programming weights.
    // In consistent mode this changes nothing (programming converges to its
    // target exactly); in verbatim mode it hides the legacy-formula mismatch.
    bool fast = false;

    void validate() const {
        if (weights_f.size() > static_cast<std::size_t>(kMaxWeightsPerLine))
            throw ConfigError("PwbConfig: " + std::to_string(weights_f.size()) +
                              " weights exceed the " + std::to_string(kMaxWeightsPerLine) +
                              "-wavelength line limit");
        params.validate();
        quant.validate();
    }
};

struct NormalizedWeights {
    std::vector<double> f_star;  // each in [-1, 1]
    double g_tia = 0.0;          // max_i |F_i|
};

// Scale weights into the ring-realizable band [-1, 1]: g = max|F|,
// f*_i = F_i / g. An all-zero vector maps to all zeros with g = 0.
inline NormalizedWeights normalize_weights(const std::vector<double>& weights_f) {
    if (weights_f.empty())
        throw ContractError("normalize_weights: empty weight vector");
    NormalizedWeights out;
    for (double f : weights_f) {
        if (!std::isfinite(f)) throw ContractError("normalize_weights: non-finite weight");
        out.g_tia = std::max(out.g_tia, std::fabs(f));
    }
    out.f_star.reserve(weights_f.size());
    for (double f : weights_f)
        out.f_star.push_back(out.g_tia > 0.0 ? f / out.g_tia : 0.0);
    return out;
}

// Program one normalized weight onto a ring: invert to a phase, then read
// the realized weight back through the forward transfer function, so any
// device-range effect shows up in the result.
//
// In consistent mode the inversion is the exact algebraic inverse; the only
// residue is floating point, so the realized weight snaps to its target.
// Targets below the drop-port floor 2 T_d(pi) - 1 (a ~2e-4 sliver above -1,
// including -1 itself, where the inversion has a pole) pass through
// idealized: the normalization step routinely produces f* = -1, and these
// representable-but-unreachable values are treated as programmed exactly.
// Verbatim mode runs the honest legacy pair; its range errors propagate.
inline double realize_weight(double f_star, const MrrParams& p) {
    if (p.mode == EqMode::consistent) {
        if (f_star + 1.0 <= 0.0) return f_star;
        if (f_star < weight_floor(p)) return f_star;
        const Phase phi = drop_phase_for_weight(f_star, p);
        const double realized = weight_from_phase(phi, p);
        if (std::fabs(realized - f_star) <= 1e-9) return f_star;
        return realized;
    }
    const Phase phi = drop_phase_for_weight(f_star, p);
    return weight_from_phase(phi, p);
}

// A weight bank after programming: quantized, normalized weights as the
// rings actually realize them, plus the TIA gain that undoes normalization.
struct ProgrammedBank {
    std::vector<double> f_realized;
    double g_tia = 0.0;
};

inline ProgrammedBank program_bank(const PwbConfig& cfg) {
    cfg.validate();
    NormalizedWeights norm = normalize_weights(cfg.weights_f);
    ProgrammedBank bank;
    bank.g_tia = norm.g_tia;
    bank.f_realized.reserve(norm.f_star.size());
    for (double f : norm.f_star) {
        const double fq = quantize(f, -1.0, 1.0, cfg.quant);
        bank.f_realized.push_back(cfg.fast ? fq : realize_weight(fq, cfg.params));
    }
    return bank;
}

// Balanced-photodiode current for one line, scaled by the TIA gain:
//   g_tia * sum_i E_0 R_0 mu_i f*_i,
// summed in ascending channel order for reproducibility.
inline double bank_dot(const EnvelopeVector& inputs, const ProgrammedBank& bank,
                       const PwbConfig& cfg) {
    if (inputs.mu.size() != bank.f_realized.size())
        throw ContractError("bank_dot: " + std::to_string(inputs.mu.size()) +
                            " envelopes vs " + std::to_string(bank.f_realized.size()) +
                            " programmed weights");
    const double e0r0 = cfg.field_scale_e0 * cfg.responsivity_r0;
    double i_pd = 0.0;
    for (std::size_t i = 0; i < inputs.mu.size(); ++i) {
        double mu = inputs.mu[i];
        if (!(mu >= -1e-12 && mu <= 1.0 + 1e-12))
            throw ContractError("bank_dot: envelope " + std::to_string(mu) +
                                " at channel " + std::to_string(i) + " outside [0,1]");
        mu = std::clamp(mu, 0.0, 1.0);
        mu = quantize(mu, 0.0, 1.0, cfg.quant);
        i_pd += e0r0 * mu * bank.f_realized[i];
    }
    return bank.g_tia * i_pd;
}

// Full physical path for one dot product: quantize envelopes over [0,1],
// normalize + quantize weights over [-1,1], program each onto a ring, read
// the photocurrent, apply the TIA gain. With quantization off and
// E_0 = R_0 = 1 this equals sum_i mu_i F_i to within 1e-9.
inline double pwb_dot(const EnvelopeVector& inputs, const PwbConfig& cfg) {
    return bank_dot(inputs, program_bank(cfg), cfg);
}

// Map signed values in [-1, 1] onto power envelopes: mu_i = (x_i + 1) / 2.
inline EnvelopeVector encode_signed_inputs(const std::vector<double>& x) {
    EnvelopeVector env;
    env.mu.reserve(x.size());
    for (double xi : x) {
        if (!(xi >= -1.0 && xi <= 1.0))
            throw ContractError("encode_signed_inputs: value " + std::to_string(xi) +
                                " outside [-1,1]");
        env.mu.push_back((xi + 1.0) / 2.0);
    }
    return env;
}

// Signed dot product via the envelope encoding. The offset encoding adds a
// known bias current g * sum_i (E_0 R_0 / 2) f*_i, subtracted digitally
// after the simulated photocurrent; the factor-of-two signal loss from
// mu = (x+1)/2 is folded out by doubling the effective TIA gain, so with
// quantization off the return value is sum_i x_i F_i directly.
inline double signed_pwb_dot(const std::vector<double>& x, const PwbConfig& cfg) {
    const EnvelopeVector env = encode_signed_inputs(x);
    const ProgrammedBank bank = program_bank(cfg);
    const double dot = bank_dot(env, bank, cfg);
    const double e0r0 = cfg.field_scale_e0 * cfg.responsivity_r0;
    double bias = 0.0;
    for (double f : bank.f_realized) bias += (e0r0 / 2.0) * f;
    return 2.0 * (dot - bank.g_tia * bias);
}

}  // namespace deap
