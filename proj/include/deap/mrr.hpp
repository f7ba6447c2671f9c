#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>

#include "errors.hpp"

namespace deap {

// Two ways to evaluate the ring equations. `verbatim` keeps a legacy
// formulation that contains a sign error in the all-pass phase inversion,
// a (1-r)^2 drop-port numerator that caps the drop transmission near 0.25,
// and a 2r^2a divisor in the weight inversion. `consistent` applies the
// minimal algebraic corrections (sign flip, (1-r^2)^2 numerator, 2r^2
// divisor) so that every inversion round-trips through its forward form.
enum class EqMode { verbatim, consistent };

inline const char* to_string(EqMode m) {
    return m == EqMode::verbatim ? "verbatim" : "consistent";
}

inline EqMode eq_mode_from_string(const std::string& s) {
    if (s == "verbatim") return EqMode::verbatim;
    if (s == "consistent") return EqMode::consistent;
    throw ConfigError("unknown equation mode '" + s +
                      "' (expected 'verbatim' or 'consistent')");
}

struct MrrParams {
    double r = 0.99;         // self-coupling coefficient, 0 < r < 1
    double a = 0.99;         // single-pass amplitude loss, 0 < a <= 1
    double radius_m = 10e-6; // ring radius
    double n_eff = 2.4;      // effective refractive index
    EqMode mode = EqMode::consistent;

    void validate() const {
        if (!(r > 0.0 && r < 1.0))
            throw ConfigError("MrrParams: r must be in (0,1), got " + std::to_string(r));
        if (!(a > 0.0 && a <= 1.0))
            throw ConfigError("MrrParams: a must be in (0,1], got " + std::to_string(a));
        if (!(radius_m > 0.0))
            throw ConfigError("MrrParams: radius_m must be > 0");
        if (!(n_eff > 0.0))
            throw ConfigError("MrrParams: n_eff must be > 0");
    }
};

using Phase = double;  // radians; inversion outputs lie on the principal branch [0, pi]

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDenominatorEps = 1e-15;

// Evaluations of the add-drop forms can land on a branch where the shared
// denominator 1 - 2r^2 cos(phi) + (r^2 a)^2 goes negative (possible for
// a < 1 near resonance). Such calls return the raw value, flag it via the
// optional out-parameter, and tick this process-wide counter.
inline std::atomic<std::uint64_t> g_nonphysical_evals{0};

inline std::uint64_t nonphysical_eval_count() { return g_nonphysical_evals.load(); }
inline void reset_nonphysical_eval_count() { g_nonphysical_evals.store(0); }

namespace detail {

inline void check_denominator(double den, const char* where) {
    if (std::fabs(den) <= kDenominatorEps) {
        std::ostringstream os;
        os << where << ": transfer-function denominator ~0 (pole), |den|=" << std::fabs(den);
        throw RangeError(os.str());
    }
}

// Shared denominator of the add-drop through/drop forms. fma keeps this to
// one rounding, which matters near resonance where the value is ~1e-4.
inline double adddrop_denominator(double cos_phi, const MrrParams& p) {
    const double r2 = p.r * p.r;
    const double r2a = r2 * p.a;
    return std::fma(-2.0 * r2, cos_phi, 1.0 + r2a * r2a);
}

}  // namespace detail

// All-pass intensity transmission
//   T_n(phi) = (a^2 - 2ra cos(phi) + r^2) / (1 - 2ra cos(phi) + (ar)^2).
// Identical in both modes; total over valid params and finite phases.
inline double allpass_transmission(Phase phi, const MrrParams& p) {
    p.validate();
    const double c = std::cos(phi);
    const double ra = p.r * p.a;
    const double num = std::fma(-2.0 * ra, c, p.a * p.a + p.r * p.r);
    const double den = std::fma(-2.0 * ra, c, 1.0 + ra * ra);
    detail::check_denominator(den, "allpass_transmission");
    double t = num / den;
    // The exact value lies in [0,1]; trim any last-ulp excursion.
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return t;
}

// Phase accumulated by one round trip at the given wavelength,
//   phi = 4 pi^2 d n_eff / lambda, reduced modulo 2 pi.
inline Phase phase_from_wavelength(double lambda_m, const MrrParams& p) {
    p.validate();
    if (!(lambda_m > 0.0))
        throw ContractError("phase_from_wavelength: wavelength must be > 0");
    const double raw =
        4.0 * std::numbers::pi * std::numbers::pi * p.radius_m * p.n_eff / lambda_m;
    return std::fmod(raw, kTwoPi);
}

// Achievable all-pass intensity range [T_n(0), T_n(pi)] for these params.
inline std::pair<double, double> allpass_intensity_range(const MrrParams& p) {
    return {allpass_transmission(0.0, p), allpass_transmission(std::numbers::pi, p)};
}

// Phase that makes the all-pass ring transmit intensity A. In consistent
// mode this is the corrected inversion
//   phi = arccos[(a^2 + r^2 - A(1+(ar)^2)) / (2ra(1-A))],
// so allpass_transmission(result) == A. Verbatim mode evaluates the legacy
// form, whose numerator carries the opposite sign and does not round-trip.
inline Phase allpass_phase_for_intensity(double A, const MrrParams& p) {
    p.validate();
    if (!std::isfinite(A))
        throw ContractError("allpass_phase_for_intensity: target must be finite");
    if (A >= 1.0) {
        throw RangeError("allpass_phase_for_intensity: target " + std::to_string(A) +
                         " hits the 1-A pole; intensity 1 is not programmable");
    }
    const double ra = p.r * p.a;
    const double K = 1.0 + ra * ra;
    const double s = p.a * p.a + p.r * p.r;
    double num = std::fma(-A, K, s);            // a^2 + r^2 - A(1+(ar)^2)
    if (p.mode == EqMode::verbatim) num = -num; // legacy sign
    const double den = 2.0 * ra * (1.0 - A);
    double arg = num / den;
    if (arg > 1.0 && arg <= 1.0 + 1e-12) arg = 1.0;
    if (arg < -1.0 && arg >= -1.0 - 1e-12) arg = -1.0;
    if (arg < -1.0 || arg > 1.0) {
        const auto [lo, hi] = allpass_intensity_range(p);
        std::ostringstream os;
        os << "allpass_phase_for_intensity: target " << A
           << " outside achievable intensity range [" << lo << ", " << hi << "]";
        throw RangeError(os.str());
    }
    return std::acos(arg);
}

// Add-drop through-port intensity transmission
//   T_p(phi) = ((ar)^2 - 2r^2 cos(phi) + r^2) / (1 - 2r^2 cos(phi) + (r^2 a)^2).
// Identical in both modes. For a < 1 the value can leave [0,1] when the
// denominator goes negative; see g_nonphysical_evals.
inline double adddrop_through(Phase phi, const MrrParams& p, bool* nonphysical = nullptr) {
    p.validate();
    const double c = std::cos(phi);
    const double r2 = p.r * p.r;
    const double ar = p.a * p.r;
    const double num = std::fma(-2.0 * r2, c, ar * ar + r2);
    const double den = detail::adddrop_denominator(c, p);
    detail::check_denominator(den, "adddrop_through");
    if (nonphysical) *nonphysical = den < 0.0;
    if (den < 0.0) g_nonphysical_evals.fetch_add(1, std::memory_order_relaxed);
    return num / den;
}

// Add-drop drop-port intensity transmission over the same denominator.
// Verbatim numerator: (1-r)^2 a (caps T_d near 0.25 at r=0.99).
// Consistent numerator: (1-r^2)^2 a, which restores T_d(0)=1 and the a=1
// complementarity T_p + T_d = 1 needed for weights spanning [-1, 1].
inline double adddrop_drop(Phase phi, const MrrParams& p, bool* nonphysical = nullptr) {
    p.validate();
    const double c = std::cos(phi);
    double onemr = (p.mode == EqMode::verbatim) ? (1.0 - p.r) : (1.0 - p.r * p.r);
    const double num = onemr * onemr * p.a;
    const double den = detail::adddrop_denominator(c, p);
    detail::check_denominator(den, "adddrop_drop");
    if (nonphysical) *nonphysical = den < 0.0;
    if (den < 0.0) g_nonphysical_evals.fetch_add(1, std::memory_order_relaxed);
    return num / den;
}

// Weight realized by a balanced photodiode reading the drop/through pair:
//   f* = 2 T_d(phi) - 1.
inline double weight_from_phase(Phase phi, const MrrParams& p, bool* nonphysical = nullptr) {
    return 2.0 * adddrop_drop(phi, p, nonphysical) - 1.0;
}

// Most negative weight the drop port can reach, 2 T_d(pi) - 1 (about
// -0.9998 at r = a = 0.99). Weights below this floor have no phase.
inline double weight_floor(const MrrParams& p) {
    return weight_from_phase(std::numbers::pi, p);
}

// Phase that programs the balanced-PD weight f* = 2 T_d(phi) - 1.
// Consistent mode inverts the corrected drop form:
//   phi = arccos[(1 + (r^2 a)^2 - 2(1-r^2)^2 a / (f*+1)) / (2r^2)].
// Verbatim mode keeps the legacy (1-r)^2 numerator and 2r^2a divisor.
inline Phase drop_phase_for_weight(double f_star, const MrrParams& p) {
    p.validate();
    if (!std::isfinite(f_star))
        throw ContractError("drop_phase_for_weight: target must be finite");
    if (f_star + 1.0 <= 0.0) {
        throw RangeError("drop_phase_for_weight: target " + std::to_string(f_star) +
                         " hits the f*+1 pole; weights <= -1 are not programmable");
    }
    if (f_star > 1.0) {
        throw RangeError("drop_phase_for_weight: target " + std::to_string(f_star) +
                         " is above the balanced-detector cap of +1");
    }
    const double r2 = p.r * p.r;
    const double r2a = r2 * p.a;
    const double K = 1.0 + r2a * r2a;
    double onemr = (p.mode == EqMode::verbatim) ? (1.0 - p.r) : (1.0 - p.r * p.r);
    const double q = 2.0 * onemr * onemr * p.a;
    const double divisor = (p.mode == EqMode::verbatim) ? (2.0 * r2a) : (2.0 * r2);
    double arg = (K - q / (f_star + 1.0)) / divisor;
    if (arg > 1.0 && arg <= 1.0 + 1e-12) arg = 1.0;
    if (arg < -1.0 && arg >= -1.0 - 1e-12) arg = -1.0;
    if (arg < -1.0 || arg > 1.0) {
        // Name the reachable interval of this mode's inversion: the floor is
        // the arg = -1 bound (phi = pi), the cap the arg = +1 bound (phi = 0)
        // when that bound bites, otherwise +1.
        const double lo = q / (K + divisor) - 1.0;
        const double cap_den = K - divisor;
        const double hi = cap_den > 0.0 ? std::min(1.0, (q / cap_den) - 1.0) : 1.0;
        std::ostringstream os;
        os << "drop_phase_for_weight: target " << f_star
           << " outside achievable weight range [" << lo << ", " << hi << "]";
        throw RangeError(os.str());
    }
    return std::acos(arg);
}

}  // namespace deap
