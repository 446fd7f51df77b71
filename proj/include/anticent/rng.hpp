#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace anticent {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based seed derivation: every randomized stage draws its seed as
// derive_seed(master, domain, a, b). Adding runs or reordering stages never
// perturbs the stream of an existing (domain, a, b) triple.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (domain * 0xd6e8feb86659fd93ULL));
    s = splitmix64(s ^ (a * 0xa3b195354a39b70dULL));
    s = splitmix64(s ^ (b * 0x1b03738712fad5c9ULL));
    return s;
}

// Seed domains, one per randomized stage.
namespace seed_domain {
constexpr std::uint64_t community = 1;
constexpr std::uint64_t walks = 2;
constexpr std::uint64_t train = 3;
constexpr std::uint64_t cns_rprime = 4;
constexpr std::uint64_t cns_centrality = 5;
constexpr std::uint64_t synth = 6;
constexpr std::uint64_t grid = 7;
} // namespace seed_domain

// mt19937_64 with hand-rolled draw helpers. The standard distributions are
// implementation-defined; these are not, so streams reproduce across
// compilers and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n). Rejection-free would bias by at most 2^-64 * n;
    // use rejection to keep draws exactly uniform.
    std::uint64_t next_index(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    double next_gaussian() {
        // Box-Muller, one value per call (the pair's twin is discarded to
        // keep the draw count predictable).
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double next_lognormal(double mu, double sigma) {
        return std::exp(mu + sigma * next_gaussian());
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), uniform without replacement,
    // by partial Fisher-Yates over a scratch index vector.
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n,
                                                          std::uint32_t k) {
        std::vector<std::uint32_t> idx(n);
        for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
        for (std::uint32_t i = 0; i < k; ++i) {
            const std::uint32_t j =
                i + static_cast<std::uint32_t>(next_index(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace anticent
