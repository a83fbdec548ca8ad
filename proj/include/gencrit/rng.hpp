#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "gencrit/errors.hpp"

namespace gencrit {

/// Stream-splittable random source.
///
/// All sampling in the library goes through explicitly passed Rng instances.
/// Child streams are derived by hashing the parent key with a list of words
/// (e.g. {step, kind, prompt_id}), so parallel and serial execution of the
/// same rollout produce identical draws. The variate transforms are
/// implemented here rather than taken from <random> so that a stream replay
/// is reproducible independent of the standard library build.
class Rng {
  public:
    explicit Rng(std::uint64_t key) : engine_(mix_(key ^ 0x9e3779b97f4a7c15ull)) {}

    /// Derive an independent child stream from this stream's key and extra words.
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
        std::uint64_t h = mix_(seed + 0x632be59bd9b4e019ull);
        for (std::uint64_t w : words) h = mix_(h ^ mix_(w + 0x9e3779b97f4a7c15ull));
        return Rng(h);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw ArgumentError("uniform_index: n must be positive");
        // rejection sampling avoids modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via the Marsaglia polar method; the spare deviate is
    /// cached, so stream position depends on call order only.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang, with the boosting trick for shape < 1.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw ArgumentError("gamma: shape must be positive");
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform_nonzero_(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_nonzero_();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    /// Index sampled from an unnormalized nonnegative weight vector.
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw ArgumentError("categorical: weights must have positive sum");
        double u = uniform() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return weights.size() - 1;
    }

  private:
    static std::uint64_t mix_(std::uint64_t z) {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform_nonzero_() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Stream kinds used when deriving per-purpose child streams.
namespace stream {
inline constexpr std::uint64_t kWorld = 1;
inline constexpr std::uint64_t kPolicyInit = 2;
inline constexpr std::uint64_t kQuestionBatch = 3;
inline constexpr std::uint64_t kResponse = 4;
inline constexpr std::uint64_t kCritique = 5;
inline constexpr std::uint64_t kRefinement = 6;
inline constexpr std::uint64_t kEvalSet = 7;
inline constexpr std::uint64_t kStaticData = 8;
inline constexpr std::uint64_t kCacheSample = 9;
inline constexpr std::uint64_t kFilter = 10;
inline constexpr std::uint64_t kAnalysis = 11;
}  // namespace stream

}  // namespace gencrit
