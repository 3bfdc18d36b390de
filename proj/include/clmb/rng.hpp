#ifndef CLMB_RNG_HPP
#define CLMB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "clmb/common.hpp"

namespace clmb {

/* splitmix64 finalizer, used to spread seed bits when deriving substreams. */
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/* Named substream of a master seed. Every consumer of randomness in the
   pipeline owns a label, so streams can be ablated independently. */
inline std::uint64_t substream(std::uint64_t master, std::string_view label) {
    return mix64(master ^ fnv1a(label.data(), label.size()));
}

inline std::uint64_t derive(std::uint64_t base, std::uint64_t a) {
    return mix64(base ^ mix64(a));
}

inline std::uint64_t derive(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return derive(derive(base, a), b);
}

inline std::uint64_t derive(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return derive(derive(base, a, b), c);
}

/* mt19937_64 with hand-rolled output transforms so the produced doubles do
   not depend on standard library distribution internals. */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /* uniform in [0, 1), 53-bit resolution */
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /* unbiased integer in [0, n) by rejection */
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    /* standard normal via Box-Muller, second value cached */
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /* Marsaglia-Tsang for shape >= 1, boosted for shape < 1 */
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            while (u <= 0.0) u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    void dirichlet(double alpha, double* out, std::size_t n) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = gamma(alpha);
            sum += out[i];
        }
        if (sum <= 0.0) {
            for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / static_cast<double>(n);
            return;
        }
        for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
    }

    /* Knuth product method in chunks of at most 16 so exp() never underflows;
       Poisson(a) + Poisson(b) = Poisson(a + b) makes the split exact. */
    long poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        long total = 0;
        while (lambda > 0.0) {
            double chunk = lambda > 16.0 ? 16.0 : lambda;
            lambda -= chunk;
            double limit = std::exp(-chunk);
            double prod = uniform();
            long k = 0;
            while (prod > limit) {
                ++k;
                prod *= uniform();
            }
            total += k;
        }
        return total;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    /* first m entries of a random permutation of [0, n) */
    std::vector<std::size_t> choose(std::size_t n, std::size_t m) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        if (m > n) m = n;
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(m);
        return idx;
    }

private:
    std::mt19937_64 eng_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

} // namespace clmb

#endif
