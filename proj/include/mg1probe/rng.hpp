#pragma once

#include <cstdint>
#include <random>

namespace mg1probe {

// splitmix64; used to decorrelate substream seeds derived from one user seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// A seeded random stream. Substreams of the same base seed are independent,
// so e.g. arrival and probe clocks can each be reproduced in isolation.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static RngStream substream(std::uint64_t seed, std::uint64_t stream_id) {
        return RngStream(splitmix64(seed) ^ splitmix64(stream_id * 0x9e3779b97f4a7c15ULL + 1));
    }

    double exponential(double rate) {
        return std::exponential_distribution<double>(rate)(engine_);
    }
    double normal(double mu, double sigma) {
        return std::normal_distribution<double>(mu, sigma)(engine_);
    }
    double lognormal(double mu, double sigma) {
        return std::lognormal_distribution<double>(mu, sigma)(engine_);
    }
    // shape/rate parametrization, mean = shape/rate
    double gamma(double shape, double rate) {
        return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
    }
    double uniform01() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace mg1probe
