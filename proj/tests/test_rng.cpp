#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ministl/rng.hpp"

using ministl::Rng;
using ministl::SeedSpec;

TEST_CASE("same seed spec gives an identical stream") {
    Rng a(SeedSpec{123, 9});
    Rng b(SeedSpec{123, 9});
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u32() == b.next_u32());
    }
}

TEST_CASE("distinct stream ids diverge") {
    Rng a(7, 0);
    Rng b(7, 1);
    int same = 0;
    for (int i = 0; i < 1000; ++i) {
        if (a.next_u32() == b.next_u32()) ++same;
    }
    CHECK(same < 5);
}

TEST_CASE("distinct master seeds diverge") {
    Rng a(7, 0);
    Rng b(8, 0);
    int same = 0;
    for (int i = 0; i < 1000; ++i) {
        if (a.next_u32() == b.next_u32()) ++same;
    }
    CHECK(same < 5);
}

TEST_CASE("golden first draws for seed (42, 7)") {
    // Frozen once from the counter-based generator; guards the stream
    // layout against accidental change.
    CHECK(Rng(42, 7).next_u32() == 1743679276u);
    CHECK(Rng(42, 7).next_u64() == 16524851402832244524ull);
    CHECK(Rng(42, 7).uniform() == doctest::Approx(0.40598196815699339).epsilon(1e-15));
    Rng r(42, 7);
    double acc = 0;
    for (int i = 0; i < 1000; ++i) acc += r.uniform();
    CHECK(acc == doctest::Approx(514.79336247267202).epsilon(1e-12));
}

TEST_CASE("uniform stays in [0,1) and is roughly uniform") {
    Rng r(1, 2);
    double sum = 0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal moments") {
    Rng r(3, 4);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double v = r.normal();
        sum += v;
        sq += v * v;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("uniform_int covers the closed range") {
    Rng r(5, 6);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 1000; ++i) {
        const auto v = r.uniform_int(2, 5);
        REQUIRE(v >= 2);
        REQUIRE(v <= 5);
        saw_lo = saw_lo || v == 2;
        saw_hi = saw_hi || v == 5;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
}

TEST_CASE("bernoulli frequency tracks p") {
    Rng r(11, 0);
    int hits = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) hits += r.bernoulli(0.2) ? 1 : 0;
    CHECK(static_cast<double>(hits) / n == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("derive_rng is a pure function of the seed spec") {
    auto a = ministl::derive_rng({99, 123456789});
    auto b = ministl::derive_rng({99, 123456789});
    for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
}
