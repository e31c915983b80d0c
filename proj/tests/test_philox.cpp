#include <catch2/catch_amalgamated.hpp>

#include "pcbandit/philox.hpp"

using namespace pcb;

// Known-answer vectors cross-checked against an independent Philox4x64-10
// implementation (numpy.random.Philox raw output; numpy emits the block of
// counter + 1, so its vectors map to the pre-incremented counters here).
TEST_CASE("philox4x64-10 known answers") {
    auto out = Philox4x64::block({1, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x02f4ba6408e4d89bULL);
    CHECK(out[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(out[2] == 0x1c8667a55d902e79ULL);
    CHECK(out[3] == 0x907d7a052fd5b4dcULL);

    out = Philox4x64::block({2, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x809bf322883987c3ULL);
    CHECK(out[1] == 0x471128b9e807f7ddULL);
    CHECK(out[2] == 0xf250ba0dbec065b7ULL);
    CHECK(out[3] == 0xfc6ed66767a457bcULL);

    const std::uint64_t ff = 0xffffffffffffffffULL;
    out = Philox4x64::block({0, 0, 0, 0}, {ff, ff}); // all-ff counter wraps to zero
    CHECK(out[0] == 0x44b7493d1acfc229ULL);
    CHECK(out[1] == 0x6636af8e997921ddULL);
    CHECK(out[2] == 0x3f73e132b5b3780eULL);
    CHECK(out[3] == 0x605644dde03b01b1ULL);

    out = Philox4x64::block({0x243f6a8885a308d4ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL,
                             0x082efa98ec4e6c89ULL},
                            {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
    CHECK(out[0] == 0x4c8e672094922aa3ULL);
    CHECK(out[1] == 0x527061cd2884102aULL);
    CHECK(out[2] == 0xf4c265b2d783d553ULL);
    CHECK(out[3] == 0x0556e76cb0298c8dULL);
}

TEST_CASE("streams replay bit-identically and differ across tags") {
    RngStream a(123, 1000, 7);
    RngStream b(123, 1000, 7);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    RngStream c(123, 1000, 8);
    RngStream d(124, 1000, 7);
    RngStream e(123, 1001, 7);
    bool all_same_c = true, all_same_d = true, all_same_e = true;
    RngStream ref(123, 1000, 7);
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t r = ref.next_u64();
        all_same_c &= (c.next_u64() == r);
        all_same_d &= (d.next_u64() == r);
        all_same_e &= (e.next_u64() == r);
    }
    CHECK_FALSE(all_same_c);
    CHECK_FALSE(all_same_d);
    CHECK_FALSE(all_same_e);
}

TEST_CASE("uniform and normal moments") {
    RngStream rng(99, 0, 0);
    const int n = 200000;
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        mean += u;
        var += (u - 0.5) * (u - 0.5);
    }
    mean /= n;
    var /= n;
    CHECK(std::abs(mean - 0.5) < 0.005);
    CHECK(std::abs(var - 1.0 / 12.0) < 0.003);

    double nmean = 0.0, nvar = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal(2.0);
        nmean += z;
        nvar += z * z;
    }
    nmean /= n;
    nvar /= n;
    CHECK(std::abs(nmean) < 0.03);
    CHECK(std::abs(nvar - 4.0) < 0.1);
}
