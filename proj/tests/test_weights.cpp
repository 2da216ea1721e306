#include <cmath>
#include <vector>

#include "doctest.h"
#include "garling/errors.hpp"
#include "garling/weights.hpp"

using namespace garling;

namespace {

// Straight compensated sum of w_u+1..w_v through at(); the independent oracle
// for the cached/analytic prefix machinery.
double direct_segment(const Weight& w, BigIndex u, BigIndex v) {
    double sum = 0.0, comp = 0.0;
    for (BigIndex j = u + 1; j <= v; ++j) {
        double x = w.at(j);
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

}  // namespace

TEST_CASE("power family basics") {
    Weight w = Weight::power(0.5);
    CHECK(w.at(1) == 1.0);
    CHECK(w.at(4) == doctest::Approx(0.5).epsilon(1e-15));
    for (BigIndex j = 1; j < 200; ++j) CHECK(w.at(j) >= w.at(j + 1));
    CHECK(w.prefix_sum(0) == 0.0);
    CHECK(w.prefix_sum(1) == 1.0);
    CHECK(w.prefix_sum(3) ==
          doctest::Approx(1.0 + std::pow(2.0, -0.5) + std::pow(3.0, -0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(Weight::power(0.0), PreconditionError);
    CHECK_THROWS_AS(Weight::power(1.5), PreconditionError);
}

TEST_CASE("logarithmic family basics") {
    Weight w = Weight::logarithmic();
    CHECK(w.at(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w.at(3) == doctest::Approx(std::log(2.0) / std::log(4.0)).epsilon(1e-15));
    for (BigIndex j = 1; j < 200; ++j) CHECK(w.at(j) >= w.at(j + 1));
}

TEST_CASE("explicit prefix splices continuously into the tail") {
    Weight w = Weight::explicit_prefix({2.0, 0.2}, 1.0);  // normalized to (1, 0.1)
    CHECK(w.at(1) == 1.0);
    CHECK(w.at(2) == doctest::Approx(0.1).epsilon(1e-15));
    // tail starts at the last prefix value and decays like j^-alpha from there
    CHECK(w.at(3) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(w.at(6) == doctest::Approx(0.1 * 3.0 / 6.0).epsilon(1e-14));
    for (BigIndex j = 1; j < 500; ++j) CHECK(w.at(j) >= w.at(j + 1) - 1e-18);

    CHECK_THROWS_AS(Weight::explicit_prefix({1.0, 2.0}, 0.5), PreconditionError);
    CHECK_THROWS_AS(Weight::explicit_prefix({}, 0.5), PreconditionError);
    CHECK_THROWS_AS(Weight::explicit_prefix({1.0}, 0.0), PreconditionError);
}

TEST_CASE("prefix sums agree with direct summation across the analytic seam") {
    const BigIndex cap = BigIndex{1} << 22;
    for (Weight w : {Weight::power(1.0), Weight::power(0.5), Weight::power(0.37),
                     Weight::logarithmic(), Weight::explicit_prefix({1.0, 0.25}, 0.6)}) {
        // straddle the cached/analytic boundary with a forced analytic chunk
        BigIndex u = cap - 40000, v = cap + 50000;
        double direct = direct_segment(w, u, v);
        CHECK(w.segment_sum(u, v) == doctest::Approx(direct).epsilon(1e-11));
        CHECK(w.prefix_sum(v) - w.prefix_sum(u) == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("long-range analytic prefix sums match a full direct sum") {
    const BigIndex m = 30'000'000;
    for (Weight w : {Weight::power(1.0), Weight::power(0.5), Weight::logarithmic()}) {
        double direct = direct_segment(w, 0, m);
        CHECK(w.prefix_sum(m) == doctest::Approx(direct).epsilon(1e-11));
    }
}

TEST_CASE("segment sums are additive and cancellation-safe") {
    Weight w = Weight::power(0.5);
    BigIndex a = 1000, b = 5'000'000, c = 80'000'000;
    CHECK(w.segment_sum(a, b) + w.segment_sum(b, c) ==
          doctest::Approx(w.segment_sum(a, c)).epsilon(1e-12));
    // far-out short segment: difference of huge prefix sums would lose digits
    BigIndex u = BigIndex{1} << 50;
    double s = w.segment_sum(u, u + 3);
    double expect = w.at(u + 1) + w.at(u + 2) + w.at(u + 3);
    CHECK(s == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("hump ratio grows to one and the index search matches a linear scan") {
    Weight w = Weight::power(0.5);
    BigIndex m = 100;
    double prev = 0.0;
    for (BigIndex k = 1; k <= 2000; k *= 2) {
        double r = w.hump_ratio(m, k);
        CHECK(r >= prev - 1e-12);
        prev = r;
        CHECK(r <= 1.0 + 1e-12);
    }
    double theta = 0.8;
    BigIndex found = w.find_hump_index(m, theta, 1, 1'000'000);
    CHECK(w.hump_ratio(m, found) >= theta);
    if (found > 1) CHECK(w.hump_ratio(m, found - 1) < theta);

    CHECK_THROWS_AS(w.find_hump_index(m, 0.999, 1, 10), CapExceededError);
    CHECK_THROWS_AS(w.find_hump_index(m, 2.0, 1, 1000), PreconditionError);
}

TEST_CASE("conjugate weight and gauge regularity properties") {
    GaugeSequence lin{"m", 1 << 20, [](BigIndex m) { return to_double(m); }};
    CHECK(has_lrp(lin, 2, lin.horizon).holds);
    CHECK_FALSE(has_urp(lin, 3, lin.horizon).holds);
    CHECK_FALSE(has_urp(lin, 64, lin.horizon).holds);

    GaugeSequence root{"sqrt", 1 << 20, [](BigIndex m) { return std::sqrt(to_double(m)); }};
    CHECK(has_lrp(root, 4, root.horizon).holds);
    CHECK(has_urp(root, 4, root.horizon).holds);

    Weight w = Weight::power(0.5);
    GaugeSequence conj = conjugate_weight(w, 1 << 16);
    // 1/(m w_m) for power(0.5) is m^-0.5
    CHECK(conj(16) == doctest::Approx(std::pow(16.0, -0.5)).epsilon(1e-14));
}

TEST_CASE("regularity report separates growing from bounded-looking ratios") {
    RegularityReport harmonic = regularity_report(Weight::power(1.0), 1'000'000);
    // W_m/(m w_m) = H_m for the harmonic weight; sup at the horizon
    double H = 0.0;
    for (BigIndex j = 1; j <= 1'000'000; ++j) H += 1.0 / to_double(j);
    CHECK(harmonic.sup_ratio == doctest::Approx(H).epsilon(1e-9));
    CHECK(harmonic.argmax == 1'000'000);
    CHECK(harmonic.trend == Trend::Growing);

    RegularityReport logrep = regularity_report(Weight::logarithmic(), 1'000'000);
    CHECK(logrep.sup_ratio < 1.6);
    CHECK(logrep.trend == Trend::BoundedLooking);

    RegularityReport flat = regularity_report(Weight::power(0.5), 1'000'000);
    CHECK(flat.trend == Trend::BoundedLooking);
    CHECK(flat.sup_ratio == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("json round trip") {
    for (Weight w : {Weight::power(0.33), Weight::logarithmic(),
                     Weight::explicit_prefix({1.0, 0.5, 0.5}, 0.9)}) {
        Weight back = Weight::from_json(w.to_json());
        CHECK(back.label() == w.label());
        CHECK(back.at(7) == w.at(7));
        CHECK(back == w);
    }
    CHECK_THROWS_AS(Weight::from_json(nlohmann::json{{"family", "nope"}}), ParseError);
}

TEST_CASE("far short segments keep full precision") {
    // A segment far beyond the dense cache whose length is below one ulp of
    // its position must still resolve to ~len * w(position); losing the width
    // here once silently collapsed certified upper bounds at large scales.
    std::vector<Weight> ws = {Weight::power(0.5), Weight::power(1.0),
                              Weight::logarithmic(),
                              Weight::explicit_prefix({1.0, 0.8, 0.6}, 0.7)};
    std::vector<BigIndex> bases;
    for (const char* s : {"1000000000000000000", "1000000000000000000000000",
                          "1000000000000000000000000000000000"})
        bases.push_back(big_index_from_string(s));
    for (const Weight& w : ws) {
        for (BigIndex u : bases) {
            for (BigIndex len : {BigIndex{1}, BigIndex{1000}, BigIndex{1062314}}) {
                const double s = w.segment_sum(u, u + len);
                const double dlen = to_double(len);
                // monotone weights bracket the sum between the edge terms
                CHECK(s >= dlen * w.at(u + len) * (1.0 - 1e-9));
                CHECK(s <= dlen * w.at(u + 1) * (1.0 + 1e-9));
                // and the midpoint estimate is accurate to quadrature order
                CHECK(s == doctest::Approx(dlen * w.at(u + len / 2)).epsilon(1e-6));
            }
        }
    }
}
