#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mdlvq {

// Philox4x32-10 (Salmon et al., SC'11). Keyed by the run seed; the counter carries stream tag, block and position.
class Philox4x32 {
public:
    using Ctr = std::array<uint32_t, 4>;
    using Key = std::array<uint32_t, 2>;

    static Ctr block(Ctr c, Key k) {
        for (int r = 0; r < 10; ++r) {
            c = round(c, k);
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        return c;
    }

private:
    static Ctr round(const Ctr& c, const Key& k) {
        const uint64_t p0 = uint64_t{0xD2511F53u} * c[0];
        const uint64_t p1 = uint64_t{0xCD9E8D57u} * c[2];
        return {static_cast<uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<uint32_t>(p1),
                static_cast<uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<uint32_t>(p0)};
    }
};

enum class StreamTag : uint32_t { Source = 1, Binning = 2, Erasure = 3, Oracle = 4 };

// Independent stream for (seed, tag, sub); sub is typically a block number.
class RngStream {
public:
    RngStream(uint64_t seed, StreamTag tag, uint32_t sub)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
          ctr_{0, 0, sub, static_cast<uint32_t>(tag)} {}

    uint32_t next32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    uint64_t next64() {
        const uint64_t hi = next32();
        return (hi << 32) | next32();
    }

    // Uniform on the open interval (0,1), 53-bit resolution.
    double uniform() { return (static_cast<double>(next64() >> 11) + 0.5) * 0x1.0p-53; }

    // Unbiased integer in [0, n).
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do v = next64();
        while (v >= limit);
        return v % n;
    }

    double gaussian() {
        if (haveSpare_) {
            haveSpare_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        haveSpare_ = true;
        return rad * std::cos(ang);
    }

private:
    void refill() {
        buf_ = Philox4x32::block(ctr_, key_);
        if (++ctr_[0] == 0) ++ctr_[1];
        pos_ = 0;
    }

    Philox4x32::Key key_;
    Philox4x32::Ctr ctr_;
    Philox4x32::Ctr buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool haveSpare_ = false;
};

}  // namespace mdlvq
