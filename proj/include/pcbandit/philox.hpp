#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., SC'11), the stream
// behind every randomized component. One stream per replication run, keyed by
// (master_seed, T, rep), so replays are bit-identical under any call order
// within a run and distinct replications are independent.

#include <array>
#include <cmath>
#include <cstdint>

namespace pcb {

namespace detail {
inline void mulhilo64(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}
} // namespace detail

struct Philox4x64 {
    static constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;

    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                              std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            std::uint64_t hi0, lo0, hi1, lo1;
            detail::mulhilo64(M0, ctr[0], hi0, lo0);
            detail::mulhilo64(M1, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

// Sequential draw interface over Philox blocks. The (t_tag, rep_tag) pair
// occupies the two high counter words, the running draw index the low ones.
class RngStream {
  public:
    RngStream() : RngStream(0, 0, 0) {}

    RngStream(std::uint64_t master_seed, std::uint64_t t_tag, std::uint64_t rep_tag)
        : key_{master_seed, 0x7f4a7c15ULL}, prefix_{rep_tag, t_tag} {}

    std::uint64_t next_u64() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    // uniform in [-half_width, half_width]
    double uniform_sym(double half_width) {
        return half_width * (2.0 * uniform01() - 1.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; consumes exactly two uniforms per variate.
    double normal(double sd) {
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        return sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    long long uniform_int(long long lo, long long hi) { // inclusive bounds
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<long long>(next_u64() % span);
    }

  private:
    void refill() {
        buf_ = Philox4x64::block({index_, 0, prefix_[0], prefix_[1]}, key_);
        ++index_;
        pos_ = 0;
    }

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 2> prefix_;
    std::uint64_t index_ = 0;
    std::array<std::uint64_t, 4> buf_{};
    int pos_ = 4;
};

} // namespace pcb
