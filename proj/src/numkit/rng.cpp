#include "tnar/numkit/rng.hpp"

#include <cmath>

namespace tnar::numkit {

std::uint64_t Rng::mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    // rejection sampling removes modulo bias
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

Rng Rng::split(std::uint64_t key) {
    return Rng(next_u64() ^ mix(key + 0x632be59bd9b4e019ULL));
}

Vector gaussian(Rng& rng, std::size_t n, double sigma) {
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = sigma * rng.normal();
    return out;
}

Vector random_unit(Rng& rng, std::size_t n) { return l2_normalize(gaussian(rng, n, 1.0)); }

}  // namespace tnar::numkit
