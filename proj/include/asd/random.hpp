#pragma once
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace asd {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/*
 * Philox4x32-10 counter-based generator (Salmon et al., 2011).
 *
 * The key is derived from the master seed and the high counter words hold
 * the replication index, so the stream for replication i is a pure function
 * of (master_seed, i): replications can run in any order on any number of
 * threads and still see the same numbers.
 *
 * Satisfies UniformRandomBitGenerator with 64-bit output.
 */
class ReplicationStream {
   public:
    using result_type = std::uint64_t;

    ReplicationStream(std::uint64_t master_seed, std::uint64_t replication_index) {
        const std::uint64_t k = splitmix64(master_seed);
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        counter_ = {0u, 0u, static_cast<std::uint32_t>(replication_index),
                    static_cast<std::uint32_t>(replication_index >> 32)};
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (buffered_ == 0) refill();
        const auto i = 2 - buffered_--;
        return (static_cast<std::uint64_t>(block_[2 * i]) << 32) | block_[2 * i + 1];
    }

    /* Uniform on [0, 1) with 53 random bits. */
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /* Standard normal via Box-Muller; the second variate is cached. */
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

   private:
    void refill() {
        std::array<std::uint32_t, 4> c = counter_;
        std::array<std::uint32_t, 2> k = key_;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
                 static_cast<std::uint32_t>(p0)};
        }
        block_ = c;
        buffered_ = 2;
        if (++counter_[0] == 0) ++counter_[1];
    }

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    int buffered_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline ReplicationStream replication_stream(std::uint64_t master_seed,
                                            std::uint64_t replication_index) {
    return ReplicationStream(master_seed, replication_index);
}

/* Sub-master seed for one point of a parameter sweep. */
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed ^ splitmix64(index + 0x5EEDULL));
}

}  // namespace asd
