#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace sirtail {

// Counter-based PRNG (Philox 4x32-10). A generator is keyed by
// (seed, stream); distinct streams are statistically independent, so
// Monte Carlo replicates can each own a stream and the results do not
// depend on how replicates are scheduled across worker threads.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream)
    {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        stream_[0] = static_cast<std::uint32_t>(stream);
        stream_[1] = static_cast<std::uint32_t>(stream >> 32);
    }

    std::uint32_t next_u32()
    {
        if (idx_ >= 4)
            refill();
        return out_[idx_++];
    }

    std::uint64_t next_u64()
    {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]; safe as a log() argument.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Exponential with unit rate.
    double exponential() { return -std::log(uniform_pos()); }

    // Standard normal via the Marsaglia polar method.
    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
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
        have_spare_ = true;
        return u * m;
    }

    // Gamma(shape, 1) via Marsaglia-Tsang; any shape > 0.
    double gamma(double shape)
    {
        if (shape < 1.0)
            return gamma(shape + 1.0) * std::pow(uniform_pos(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

private:
    static void round(std::uint32_t x[4], std::uint32_t k0, std::uint32_t k1)
    {
        const std::uint64_t p0 = 0xD2511F53ull * x[0];
        const std::uint64_t p1 = 0xCD9E8D57ull * x[2];
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        x[0] = hi1 ^ x[1] ^ k0;
        x[1] = lo1;
        x[2] = hi0 ^ x[3] ^ k1;
        x[3] = lo0;
    }

    void refill()
    {
        std::uint32_t x[4] = {static_cast<std::uint32_t>(block_),
                              static_cast<std::uint32_t>(block_ >> 32), stream_[0], stream_[1]};
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int r = 0; r < 10; ++r) {
            round(x, k0, k1);
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out_[0] = x[0];
        out_[1] = x[1];
        out_[2] = x[2];
        out_[3] = x[3];
        ++block_;
        idx_ = 0;
    }

    std::uint32_t key_[2];
    std::uint32_t stream_[2];
    std::uint64_t block_ = 0;
    std::uint32_t out_[4] = {0, 0, 0, 0};
    int idx_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// FNV-1a of an experiment tag. Mixed into the stream id so that runs
// with the same seed but different parameters draw independent variates.
inline std::uint32_t stream_salt(std::string_view tag)
{
    std::uint32_t h = 2166136261u;
    for (const char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 16777619u;
    }
    return h;
}

// Stream id for replicate `rep` of the experiment identified by `salt`.
inline std::uint64_t replicate_stream(std::uint32_t salt, std::uint64_t rep)
{
    return (static_cast<std::uint64_t>(salt) << 32) | (rep & 0xFFFFFFFFull);
}

} // namespace sirtail
