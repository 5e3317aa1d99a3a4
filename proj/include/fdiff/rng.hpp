#pragma once

#include <boost/random/normal_distribution.hpp>

#include <array>
#include <cstdint>

namespace fdiff {

// Philox4x32-10 counter-based generator (Salmon et al. 2011).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            auto lo0 = static_cast<std::uint32_t>(p0);
            auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

// Random stream of one particle: draw j of the stream is a pure function of (seed, domain, particle, j).
class ParticleStream {
public:
    ParticleStream(std::uint64_t seed, std::uint32_t domain, std::uint64_t particle)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          particle_lo_(static_cast<std::uint32_t>(particle)),
          particle_hi_(static_cast<std::uint32_t>(particle >> 32) ^ (domain << 24)) {}

    // Two uniforms in (0, 1) with 53-bit resolution.
    std::array<double, 2> uniforms(std::uint64_t draw) const {
        auto r = block(draw);
        return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
    }

    // The four raw 32-bit words of draw j.
    Philox4x32::Counter words(std::uint64_t draw) const { return block(draw); }

    // Two independent standard normals for draw index j (Boost ziggurat fed by Philox words).
    std::array<double, 2> normals(std::uint64_t draw) const {
        Words words{this, draw};
        boost::random::normal_distribution<double> unit;
        double first = unit(words);
        return {first, unit(words)};
    }

private:
    // 64-bit words of draw j: Philox blocks at sub-counters 0, 1, ... (rejections rarely need more than one).
    struct Words {
        using result_type = std::uint64_t;
        static constexpr result_type min() { return 0; }
        static constexpr result_type max() { return ~result_type{0}; }

        const ParticleStream* stream;
        std::uint64_t draw;
        std::uint32_t sub = 0;
        int used = 2;
        std::array<std::uint64_t, 2> buffer{};

        result_type operator()() {
            if (used == 2) {
                auto r = stream->block(draw, sub++);
                buffer = {(static_cast<std::uint64_t>(r[0]) << 32) | r[1], (static_cast<std::uint64_t>(r[2]) << 32) | r[3]};
                used = 0;
            }
            return buffer[static_cast<std::size_t>(used++)];
        }
    };

    // The top byte of the last counter word holds the sub-counter, leaving 56 bits for the draw index.
    Philox4x32::Counter block(std::uint64_t draw, std::uint32_t sub = 0) const {
        return Philox4x32::generate({particle_lo_, particle_hi_, static_cast<std::uint32_t>(draw),
                                     static_cast<std::uint32_t>(draw >> 32) ^ (sub << 24)},
                                    key_);
    }

    static double to_unit(std::uint32_t a, std::uint32_t b) {
        std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    Philox4x32::Key key_;
    std::uint32_t particle_lo_;
    std::uint32_t particle_hi_;
};

}  // namespace fdiff
