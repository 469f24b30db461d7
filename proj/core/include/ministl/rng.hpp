#pragma once

#include <array>
#include <cstdint>

namespace ministl {

/// Identifies one reproducible random stream. Distinct stream ids on the
/// same master seed give statistically independent streams, so per-sequence
/// and per-component draws can be made order-independent.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    bool operator==(const SeedSpec&) const = default;
};

/// Counter-based generator (Philox4x32-10). The emitted stream is a pure
/// function of the SeedSpec: the master seed is the cipher key and the
/// stream id occupies the high half of the 128-bit counter, so streams
/// never overlap and generation order across streams does not matter.
class Rng {
public:
    Rng() = default;
    explicit Rng(SeedSpec seed) : key_(seed.master_seed), stream_(seed.stream_id) {}
    Rng(std::uint64_t master_seed, std::uint64_t stream_id)
        : Rng(SeedSpec{master_seed, stream_id}) {}

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller; always consumes exactly two draws.
    double normal();
    double normal(double mean, double stddev);
    /// Uniform integer on [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p);

private:
    void refill();

    std::uint64_t key_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

inline Rng derive_rng(const SeedSpec& seed) { return Rng(seed); }

}  // namespace ministl
