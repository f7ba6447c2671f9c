#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "deap/pwb.hpp"
#include "deap/quant.hpp"

using Catch::Approx;
using namespace deap;

namespace {

QuantSpec quant_on(int bits = 7) {
    QuantSpec q;
    q.bits = bits;
    q.enabled = true;
    return q;
}

double plain_dot(const std::vector<double>& mu, const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) acc += mu[i] * f[i];
    return acc;
}

}  // namespace

TEST_CASE("uniform quantization snaps to the stated grid", "[quant]") {
    SECTION("disabled spec is the identity") {
        QuantSpec off;
        REQUIRE(quantize(0.123456, 0.0, 1.0, off) == 0.123456);
        REQUIRE(quantize(7.5, 0.0, 1.0, off) == 7.5);
    }

    SECTION("endpoints are exact grid levels") {
        const QuantSpec q = quant_on();
        REQUIRE(quantize(0.0, 0.0, 1.0, q) == 0.0);
        REQUIRE(quantize(1.0, 0.0, 1.0, q) == 1.0);
        REQUIRE(quantize(-1.0, -1.0, 1.0, q) == -1.0);
        REQUIRE(quantize(1.0, -1.0, 1.0, q) == 1.0);
    }

    SECTION("out-of-range values clamp to the interval") {
        const QuantSpec q = quant_on();
        REQUIRE(quantize(1.7, 0.0, 1.0, q) == 1.0);
        REQUIRE(quantize(-0.3, 0.0, 1.0, q) == 0.0);
    }

    SECTION("halfway cases round away from zero") {
        QuantSpec one_bit = quant_on(1);  // levels {-1, +1}
        REQUIRE(quantize(0.0, -1.0, 1.0, one_bit) == 1.0);
        QuantSpec two_bit = quant_on(2);  // levels {-1, -1/3, 1/3, 1}
        REQUIRE(quantize(0.0, -1.0, 1.0, two_bit) == Approx(1.0 / 3.0));
        // On an all-positive interval, "away from zero" means upward.
        QuantSpec q1 = quant_on(1);  // levels {0, 1}
        REQUIRE(quantize(0.5, 0.0, 1.0, q1) == 1.0);
    }

    SECTION("error is bounded by half a step and the map is idempotent") {
        const QuantSpec q = quant_on();
        const double half_step = 0.5 * 2.0 / (q.levels() - 1);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int i = 0; i < 5000; ++i) {
            const double v = dist(rng);
            const double qv = quantize(v, -1.0, 1.0, q);
            REQUIRE(std::fabs(qv - v) <= half_step + 1e-15);
            REQUIRE(quantize(qv, -1.0, 1.0, q) == qv);
        }
    }

    SECTION("level count is 2^bits") {
        REQUIRE(quant_on(7).levels() == 128);
        REQUIRE(quant_on(1).levels() == 2);
    }

    SECTION("bad specs and intervals are rejected") {
        REQUIRE_THROWS_AS(quantize(0.5, 0.0, 1.0, quant_on(0)), ConfigError);
        REQUIRE_THROWS_AS(quantize(0.5, 0.0, 1.0, quant_on(17)), ConfigError);
        REQUIRE_THROWS_AS(quantize(0.5, 1.0, 1.0, quant_on()), ContractError);
    }
}

TEST_CASE("weight normalization follows the max-magnitude rule", "[pwb]") {
    SECTION("textbook example") {
        const auto norm = normalize_weights({2.0, -4.0, 1.0});
        REQUIRE(norm.g_tia == 4.0);
        REQUIRE(norm.f_star == std::vector<double>{0.5, -1.0, 0.25});
    }

    SECTION("all-zero vector degenerates cleanly") {
        const auto norm = normalize_weights({0.0, 0.0});
        REQUIRE(norm.g_tia == 0.0);
        REQUIRE(norm.f_star == std::vector<double>{0.0, 0.0});
    }

    SECTION("single element normalizes to unity") {
        const auto norm = normalize_weights({0.3});
        REQUIRE(norm.g_tia == 0.3);
        REQUIRE(norm.f_star == std::vector<double>{1.0});
    }

    SECTION("scaling the weights scales only the gain") {
        const std::vector<double> f{1.5, -0.25, 0.75};
        const auto base = normalize_weights(f);
        std::vector<double> scaled;
        for (double v : f) scaled.push_back(4.0 * v);
        const auto big = normalize_weights(scaled);
        REQUIRE(big.g_tia == Approx(4.0 * base.g_tia));
        for (std::size_t i = 0; i < f.size(); ++i)
            REQUIRE(big.f_star[i] == Approx(base.f_star[i]).margin(1e-15));
    }

    SECTION("degenerate inputs are rejected") {
        REQUIRE_THROWS_AS(normalize_weights({}), ContractError);
        REQUIRE_THROWS_AS(normalize_weights({1.0, std::nan("")}), ContractError);
    }
}

TEST_CASE("bank dot reproduces the plain dot product", "[pwb]") {
    PwbConfig cfg;

    SECTION("two-channel example") {
        cfg.weights_f = {1.0, -1.0};
        REQUIRE(pwb_dot(EnvelopeVector{{0.5, 0.25}}, cfg) == Approx(0.25).margin(1e-9));
    }

    SECTION("zero weights give zero current") {
        cfg.weights_f = {0.0, 0.0, 0.0};
        REQUIRE(pwb_dot(EnvelopeVector{{0.9, 0.1, 0.4}}, cfg) == 0.0);
    }

    SECTION("gain times normalized dot") {
        cfg.weights_f = {2.0, -4.0, 1.0};
        REQUIRE(pwb_dot(EnvelopeVector{{1.0, 1.0, 1.0}}, cfg) == Approx(-1.0).margin(1e-9));
    }

    SECTION("detector constants scale the current") {
        cfg.weights_f = {1.0, -1.0};
        cfg.field_scale_e0 = 2.0;
        cfg.responsivity_r0 = 3.0;
        REQUIRE(pwb_dot(EnvelopeVector{{0.5, 0.25}}, cfg) == Approx(6.0 * 0.25).margin(1e-9));
    }

    SECTION("length mismatch is a contract violation") {
        cfg.weights_f = {1.0, 2.0};
        REQUIRE_THROWS_AS(pwb_dot(EnvelopeVector{{0.5}}, cfg), ContractError);
    }

    SECTION("envelopes outside [0,1] are rejected") {
        cfg.weights_f = {1.0};
        REQUIRE_THROWS_AS(pwb_dot(EnvelopeVector{{1.5}}, cfg), ContractError);
        REQUIRE_THROWS_AS(pwb_dot(EnvelopeVector{{-0.2}}, cfg), ContractError);
    }

    SECTION("line capacity tops out at 100 wavelengths") {
        cfg.weights_f.assign(101, 0.5);
        REQUIRE_THROWS_AS(pwb_dot(EnvelopeVector{std::vector<double>(101, 0.5)}, cfg),
                          ConfigError);
    }
}

TEST_CASE("bank dot matches the arithmetic oracle over random cases", "[pwb]") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> len_dist(1, 100);
    std::uniform_real_distribution<double> mu_dist(0.0, 1.0);
    std::uniform_real_distribution<double> f_dist(-10.0, 10.0);

    double worst = 0.0;
    for (int c = 0; c < 10000; ++c) {
        const int len = len_dist(rng);
        PwbConfig cfg;
        EnvelopeVector env;
        for (int i = 0; i < len; ++i) {
            cfg.weights_f.push_back(f_dist(rng));
            env.mu.push_back(mu_dist(rng));
        }
        const double got = pwb_dot(env, cfg);
        worst = std::max(worst, std::fabs(got - plain_dot(env.mu, cfg.weights_f)));
    }
    REQUIRE(worst <= 1e-9);
}

TEST_CASE("7-bit quantization error stays inside the analytic bound", "[pwb]") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> len_dist(1, 100);
    std::uniform_real_distribution<double> mu_dist(0.0, 1.0);
    std::uniform_real_distribution<double> f_dist(-10.0, 10.0);
    const double eps = std::pow(2.0, -7);
    const double per_term = eps + eps + eps * eps;

    for (int c = 0; c < 1000; ++c) {
        const int len = len_dist(rng);
        PwbConfig cfg;
        cfg.quant = quant_on();
        EnvelopeVector env;
        for (int i = 0; i < len; ++i) {
            cfg.weights_f.push_back(f_dist(rng));
            env.mu.push_back(mu_dist(rng));
        }
        const double g = normalize_weights(cfg.weights_f).g_tia;
        const double err = std::fabs(pwb_dot(env, cfg) - plain_dot(env.mu, cfg.weights_f));
        REQUIRE(err <= g * len * per_term);
    }
}

TEST_CASE("bank dot is homogeneous in the envelopes", "[pwb]") {
    PwbConfig cfg;
    cfg.weights_f = {3.0, -1.5, 0.25, 2.0};
    const EnvelopeVector env{{0.9, 0.3, 1.0, 0.05}};
    const double base = pwb_dot(env, cfg);
    for (double c : {0.0, 0.25, 0.5, 1.0}) {
        EnvelopeVector scaled = env;
        for (double& m : scaled.mu) m *= c;
        REQUIRE(pwb_dot(scaled, cfg) == Approx(c * base).margin(1e-12));
    }
}

TEST_CASE("signed encoding maps [-1,1] onto power envelopes", "[pwb]") {
    SECTION("endpoints and midpoint") {
        const auto env = encode_signed_inputs({-1.0, 0.0, 1.0});
        REQUIRE(env.mu == std::vector<double>{0.0, 0.5, 1.0});
    }

    SECTION("affine map") {
        REQUIRE(encode_signed_inputs({0.5}).mu == std::vector<double>{0.75});
    }

    SECTION("out-of-range values are rejected") {
        REQUIRE_THROWS_AS(encode_signed_inputs({1.2}), ContractError);
        REQUIRE_THROWS_AS(encode_signed_inputs({-1.01}), ContractError);
    }
}

TEST_CASE("signed dot product subtracts the encoding bias", "[pwb]") {
    PwbConfig cfg;

    SECTION("antisymmetric cancellation") {
        cfg.weights_f = {1.0, 1.0};
        REQUIRE(signed_pwb_dot({1.0, -1.0}, cfg) == Approx(0.0).margin(1e-9));
    }

    SECTION("all -1 inputs leave pure bias subtraction") {
        cfg.weights_f = {2.0, 3.0};
        REQUIRE(signed_pwb_dot({-1.0, -1.0}, cfg) == Approx(-5.0).margin(1e-9));
    }

    SECTION("mixed-signs example") {
        cfg.weights_f = {2.0, 4.0};
        REQUIRE(signed_pwb_dot({0.5, -0.25}, cfg) == Approx(0.0).margin(1e-9));
    }

    SECTION("matches the signed arithmetic oracle over random cases") {
        std::mt19937_64 rng(31);
        std::uniform_int_distribution<int> len_dist(1, 50);
        std::uniform_real_distribution<double> x_dist(-1.0, 1.0);
        std::uniform_real_distribution<double> f_dist(-5.0, 5.0);
        double worst = 0.0;
        for (int c = 0; c < 2000; ++c) {
            const int len = len_dist(rng);
            PwbConfig scfg;
            std::vector<double> x;
            for (int i = 0; i < len; ++i) {
                scfg.weights_f.push_back(f_dist(rng));
                x.push_back(x_dist(rng));
            }
            worst = std::max(worst,
                             std::fabs(signed_pwb_dot(x, scfg) - plain_dot(x, scfg.weights_f)));
        }
        REQUIRE(worst <= 1e-9);
    }
}

TEST_CASE("fast flag changes nothing in consistent mode", "[pwb]") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> len_dist(1, 40);
    std::uniform_real_distribution<double> mu_dist(0.0, 1.0);
    std::uniform_real_distribution<double> f_dist(-3.0, 3.0);

    for (bool quantized : {false, true}) {
        for (int c = 0; c < 500; ++c) {
            const int len = len_dist(rng);
            PwbConfig cfg;
            if (quantized) cfg.quant = quant_on();
            EnvelopeVector env;
            for (int i = 0; i < len; ++i) {
                cfg.weights_f.push_back(f_dist(rng));
                env.mu.push_back(mu_dist(rng));
            }
            const double slow = pwb_dot(env, cfg);
            cfg.fast = true;
            const double fast = pwb_dot(env, cfg);
            REQUIRE(slow == fast);  // bit-identical, not merely close
        }
    }
}

TEST_CASE("legacy mode cannot program a normalized bank", "[pwb][legacy]") {
    // Normalization always pins the largest-magnitude weight to +1 or -1.
    // Under the legacy drop-port numerator the cap is about -0.495 and -1
    // sits on the bias pole, so both polarities fail loudly.
    PwbConfig cfg;
    cfg.params.mode = EqMode::verbatim;

    cfg.weights_f = {0.5, 1.0};
    REQUIRE_THROWS_AS(pwb_dot(EnvelopeVector{{0.5, 0.5}}, cfg), RangeError);

    cfg.weights_f = {-2.0, 0.5};
    REQUIRE_THROWS_AS(pwb_dot(EnvelopeVector{{0.5, 0.5}}, cfg), RangeError);
}
