#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "faaslab/rng.hpp"

#include <cmath>
#include <vector>

using namespace faaslab;

TEST_CASE("identical seeds give identical sequences") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("mt19937_64 reference value") {
    // The standard pins the 10000th output for seed 5489.
    std::mt19937_64 engine(5489u);
    engine.discard(9999);
    CHECK(engine() == 9981545732273789042ULL);
}

TEST_CASE("derived streams are independent of each other") {
    Rng a = derive_stream(1, "workload");
    Rng b = derive_stream(1, "fallback");
    Rng a2 = derive_stream(1, "workload");
    bool all_equal = true;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        CHECK(va == a2.next_u64());
    }
    CHECK_FALSE(all_equal);
}

TEST_CASE("indexed streams differ") {
    Rng a = derive_stream(9, "exec", 0);
    Rng b = derive_stream(9, "exec", 1);
    CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("uniform_u64 is unbiased over a small range") {
    Rng rng(3);
    std::vector<int> counts(7, 0);
    const int draws = 70'000;
    for (int i = 0; i < draws; ++i) {
        ++counts[rng.uniform_u64(7)];
    }
    for (int c : counts) {
        CHECK(std::abs(c - draws / 7) < draws / 7 / 10);
    }
}

TEST_CASE("uniform_i64 covers the inclusive range") {
    Rng rng(4);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 10'000; ++i) {
        const std::int64_t v = rng.uniform_i64(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
        saw_lo = saw_lo || v == -3;
        saw_hi = saw_hi || v == 3;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
}

TEST_CASE("uniform01 stays in [0,1)") {
    Rng rng(5);
    for (int i = 0; i < 10'000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal has roughly zero mean and unit variance") {
    Rng rng(6);
    double sum = 0.0, sq = 0.0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("exponential has the requested mean") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) {
        sum += rng.exponential(250.0);
    }
    CHECK(std::abs(sum / n - 250.0) < 5.0);
}

TEST_CASE("lognormal median matches the parameter") {
    Rng rng(8);
    std::vector<double> samples;
    const int n = 50'001;
    for (int i = 0; i < n; ++i) {
        samples.push_back(rng.lognormal(392.0, 0.3));
    }
    std::sort(samples.begin(), samples.end());
    CHECK(samples[n / 2] == doctest::Approx(392.0).epsilon(0.02));
}
