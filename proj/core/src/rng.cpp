#include "ministl/rng.hpp"

#include <cmath>

#include "ministl/common.hpp"

namespace ministl {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
}

}  // namespace

void Rng::refill() {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32),
    };
    std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(key_),
        static_cast<std::uint32_t>(key_ >> 32),
    };
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, key);
    }
    buf_ = ctr;
    ++block_;
    pos_ = 0;
}

std::uint32_t Rng::next_u32() {
    if (pos_ >= 4) {
        refill();
    }
    return buf_[pos_++];
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Rng::uniform() {
    return static_cast<double>(next_u32()) * 0x1p-32;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    // (u + 0.5) * 2^-32 is strictly inside (0, 1), so log() is safe.
    const double u1 = (static_cast<double>(next_u32()) + 0.5) * 0x1p-32;
    const double u2 = (static_cast<double>(next_u32()) + 0.5) * 0x1p-32;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * M_PI * u2);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    MINISTL_CHECK(lo <= hi, ConfigError, "uniform_int: empty range [" << lo << ", " << hi << "]");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
}

bool Rng::bernoulli(double p) {
    return uniform() < p;
}

}  // namespace ministl
