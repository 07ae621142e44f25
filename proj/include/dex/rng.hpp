// rng.hpp
//
// Seeded, stream-splittable random number generation. Identical
// (seed, stream_id) pairs reproduce identical draw sequences; distinct
// stream ids give independent streams, which is what the Monte Carlo
// experiments rely on for deterministic parallel execution.

#pragma once

#include <cstdint>
#include <random>

namespace dex {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    // Derives an independent stream for sub-task `id` without disturbing
    // this stream's state.
    RngStream substream(std::uint64_t id) const;

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0,1), safe for quantile inversion.
    double uniform();

    // Standard normal via Box-Muller (one value per call, no caching, so
    // draw sequences stay position-independent).
    double normal();

    // Gamma(shape, 1) by Marsaglia-Tsang; exact for all shape > 0.
    double gamma(double shape);

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

// Reads DISCRETE_EXTREMES_THREADS; 0 or unset means hardware concurrency.
unsigned thread_cap();

}  // namespace dex
