#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "garling/conditionality.hpp"
#include "garling/errors.hpp"
#include "garling/report.hpp"
#include "garling/rng.hpp"

using namespace garling;

namespace {

SpaceNorm garling_ambient() { return SpaceNorm::garling(Weight::power(0.5), 2.0); }

std::vector<double> sub(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

}  // namespace

TEST_CASE("summing basis vectors, span prefix, and coordinate map") {
    FiniteBasis s2 = summing_basis(2);
    REQUIRE(s2.dimension() == 2);
    CHECK(s2.vectors[0] == std::vector<double>{1.0, 0.0});
    CHECK(s2.vectors[1] == std::vector<double>{1.0, 1.0});
    CHECK(s2.full_coordinate_span_prefix == 2);
    CHECK(s2.condition_estimate() >= 1.0);

    // e_k = s_k - s_{k-1}: the telescoped coefficients synthesize a unit vector.
    FiniteBasis s6 = summing_basis(6);
    for (int k = 2; k <= 6; ++k) {
        std::vector<double> coeffs(6, 0.0);
        coeffs[k - 1] = 1.0;
        coeffs[k - 2] = -1.0;
        const std::vector<double> coords = basis_coordinates(s6, coeffs);
        for (int j = 1; j <= 6; ++j) CHECK(coords[j - 1] == (j == k ? 1.0 : 0.0));
    }

    // Coordinates of sum a_j s_j are the tail sums c_k = sum_{j >= k} a_j.
    Rng rng(42);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(6);
        for (double& x : a) x = rng.heavy();
        const std::vector<double> coords = basis_coordinates(s6, a);
        for (int k = 1; k <= 6; ++k) {
            double tail = 0.0;
            for (int j = 6; j >= k; --j) tail += a[j - 1];
            CHECK(coords[k - 1] == doctest::Approx(tail).epsilon(1e-12));
        }
    }
}

TEST_CASE("direct sum of summing blocks: shape, ambient, all-ones norm") {
    FiniteBasis b1 = besov_sum_basis(1, 2.0);
    REQUIRE(b1.dimension() == 2);
    CHECK(b1.ambient.kind == SpaceNorm::Kind::Mixed);
    CHECK(b1.ambient.block_sizes == std::vector<BigIndex>{2});
    CHECK(b1.vectors == summing_basis(2).vectors);

    FiniteBasis b3 = besov_sum_basis(3, 1.0);
    CHECK(b3.dimension() == 14);  // 2 + 4 + 8

    FiniteBasis b2 = besov_sum_basis(2, 1.0);
    REQUIRE(b2.dimension() == 6);
    const double ones_norm = basis_norm(b2, std::vector<double>(6, 1.0));
    CHECK(ones_norm == doctest::Approx(6.0).epsilon(1e-12));  // block sups 2 + 4
    CHECK(b2.condition_estimate() >= 1.0);
}

TEST_CASE("coordinate projection keeps A, zeroes the rest, and is a lattice contraction for the unit basis") {
    FiniteBasis ub = unit_vector_basis(8, garling_ambient());
    Rng rng(7);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<double> f(8);
        for (double& x : f) x = rng.heavy();
        std::vector<int> all;
        for (int j = 1; j <= 8; ++j) all.push_back(j);
        CHECK(coordinate_projection(ub, all, f) == f);
        CHECK(coordinate_projection(ub, {}, f) == std::vector<double>(8, 0.0));

        std::vector<int> A;
        for (int j = 1; j <= 8; ++j)
            if (rng.bits() & 1) A.push_back(j);
        const double proj_norm = basis_norm(ub, coordinate_projection(ub, A, f));
        CHECK(proj_norm <= basis_norm(ub, f) + 1e-12);
    }
    CHECK_THROWS_AS(coordinate_projection(ub, {9}, std::vector<double>(8, 1.0)),
                    PreconditionError);
}

TEST_CASE("greedy sets: largest magnitudes, smallest-index ties, padding") {
    CHECK(greedy_set({3.0, -5.0, 2.0}, 1) == std::vector<int>{2});
    CHECK(greedy_set({2.0, 2.0}, 1) == std::vector<int>{1});
    CHECK(greedy_set({0.0, 1.0, 0.0}, 3) == std::vector<int>{1, 2, 3});
    CHECK(greedy_set({4.0, 1.0}, 0).empty());
    CHECK_THROWS_AS(greedy_set({1.0}, 2), PreconditionError);

    // Predicate: every chosen magnitude dominates every excluded one.
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const int d = 2 + static_cast<int>(rng.below(9));
        std::vector<double> a(d);
        for (double& x : a) x = (rng.bits() & 3) ? rng.heavy() : 0.0;
        if (rep % 3 == 0 && d >= 2) a[1] = a[0];  // force ties
        const int m = static_cast<int>(rng.below(static_cast<std::uint64_t>(d + 1)));
        const std::vector<int> G = greedy_set(a, m);
        REQUIRE(static_cast<int>(G.size()) == m);
        std::vector<bool> in(d + 1, false);
        for (int idx : G) in[idx] = true;
        for (int n = 1; n <= d; ++n)
            for (int j = 1; j <= d; ++j)
                if (in[n] && !in[j]) CHECK(std::fabs(a[n - 1]) >= std::fabs(a[j - 1]));
    }
}

TEST_CASE("summing gauges: L_m equals m, pinned small values, monotone, floor bound") {
    FiniteBasis s10 = summing_basis(10);
    double prev = 0.0;
    for (int m = 1; m <= 10; ++m) {
        const GaugeEntry e = L_m(s10, m, GaugeMode::Exact);
        CHECK(e.method == "exact-enumeration");
        CHECK(e.value == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));
        CHECK(e.value >= std::floor(m / 2.0) - 1e-12);
        CHECK(e.value >= prev - 1e-12);
        prev = e.value;
        CHECK(std::fabs(reevaluate_witness(s10, e.witness) - e.witness.ratio) <= 1e-9);
        CHECK(std::fabs(e.witness.ratio - e.value) <= 1e-9);
    }

    // The recorded L_2 witness achieves ratio 2 with a one-point projection.
    const GaugeEntry e2 = L_m(s10, 2, GaugeMode::Exact);
    CHECK(e2.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e2.witness.set.size() == 1);

    // Alternating-sign oracle, independent of the enumeration: coefficients of
    // the sign-alternating coordinate vector with the odd-index projection.
    for (int m = 2; m <= 10; ++m) {
        GaugeWitness w;
        w.coeffs.assign(m, 0.0);
        for (int j = 0; j < m; ++j)
            w.coeffs[j] = (j == m - 1) ? (j % 2 == 0 ? 1.0 : -1.0) : (j % 2 == 0 ? 2.0 : -2.0);
        for (int j = 1; j <= m; j += 2) w.set.push_back(j);
        const double ratio = reevaluate_witness(s10, w);
        CHECK(ratio >= std::floor(m / 2.0) - 1e-12);
        CHECK(ratio == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));
    }
}

TEST_CASE("summing k_m: pinned values, dominates L_m, probe converges at d = 8") {
    FiniteBasis s8 = summing_basis(8);
    const double expected[] = {2.0, 4.0, 6.0, 8.0, 8.0, 8.0, 8.0, 8.0};
    double prev = 0.0;
    for (int m = 1; m <= 8; ++m) {
        const GaugeEntry k = k_m(s8, m, GaugeMode::Exact);
        CHECK(k.value == doctest::Approx(expected[m - 1]).epsilon(1e-12));
        CHECK(k.value >= prev - 1e-12);
        prev = k.value;
        const GaugeEntry l = L_m(s8, m, GaugeMode::Exact);
        CHECK(k.value >= l.value - 1e-12);
        CHECK(std::fabs(reevaluate_witness(s8, k.witness) - k.witness.ratio) <= 1e-9);
    }

    ProbeOptions po;
    po.restarts = 128;
    const GaugeEntry probe = k_m(s8, 2, GaugeMode::Probe, po);
    CHECK(probe.method == "probe-lower-bound");
    CHECK(probe.value == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("probe stays below exact and certifies itself through its witness") {
    FiniteBasis s8 = summing_basis(8);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        for (int m = 1; m <= 6; ++m) {
            ProbeOptions po;
            po.seed = seed;
            po.restarts = 48;
            const GaugeEntry p = L_m(s8, m, GaugeMode::Probe, po);
            const GaugeEntry x = L_m(s8, m, GaugeMode::Exact);
            CHECK(p.value <= x.value + 1e-9);
            CHECK(std::fabs(reevaluate_witness(s8, p.witness) - p.value) <= 1e-9);
        }
    }
}

TEST_CASE("unit-vector bases have unit gauges under every lattice ambient") {
    const std::vector<SpaceNorm> ambients = {
        garling_ambient(), SpaceNorm::lorentz(Weight::logarithmic(), 1.5), SpaceNorm::ellp(2.0),
        SpaceNorm::sup(), SpaceNorm::mixed(2.0, {2, 4})};
    for (const SpaceNorm& amb : ambients) {
        FiniteBasis ub = unit_vector_basis(6, amb);
        for (int m = 1; m <= 6; ++m) {
            CHECK(L_m(ub, m, GaugeMode::Exact).value == 1.0);
            CHECK(k_m(ub, m, GaugeMode::Probe).value == 1.0);
        }
    }
}

TEST_CASE("exact mode refuses unsupported ambients and oversized enumerations") {
    FiniteBasis s16 = summing_basis(16);
    CHECK_THROWS_AS(L_m(s16, 15, GaugeMode::Exact), PreconditionError);
    FiniteBasis s13 = summing_basis(13);
    CHECK_THROWS_AS(k_m(s13, 2, GaugeMode::Exact), PreconditionError);

    // Garling ambient over a non-identity basis: ball extremes are not sign
    // vectors, so exact mode must refuse rather than silently under-report.
    FiniteBasis twisted = summing_basis(4);
    twisted.ambient = garling_ambient();
    CHECK_THROWS_AS(L_m(twisted, 2, GaugeMode::Exact), PreconditionError);
    CHECK_THROWS_WITH_AS(k_m(twisted, 2, GaugeMode::Exact),
                         doctest::Contains("mode-unsupported"), PreconditionError);

    // Probe still works there and certifies a genuine lower bound.
    const GaugeEntry p = L_m(twisted, 2, GaugeMode::Probe);
    CHECK(p.value >= 1.0 - 1e-12);
    CHECK(std::fabs(reevaluate_witness(twisted, p.witness) - p.value) <= 1e-9);
}

TEST_CASE("direct-sum gauges match the block picture") {
    FiniteBasis b2 = besov_sum_basis(2, 1.0);
    const double expected[] = {1.0, 2.0, 2.0, 2.0, 3.0, 4.0};
    for (int m = 1; m <= 6; ++m) {
        const GaugeEntry e = L_m(b2, m, GaugeMode::Exact);
        CHECK(e.value == doctest::Approx(expected[m - 1]).epsilon(1e-12));
        CHECK(std::fabs(reevaluate_witness(b2, e.witness) - e.witness.ratio) <= 1e-9);
    }
    // p = 2 has no enumerable extremes; the probe should still find the
    // within-block witnesses, which are ambient-p independent here.
    FiniteBasis b2p = besov_sum_basis(2, 2.0);
    for (int m = 1; m <= 6; ++m) {
        ProbeOptions po;
        po.restarts = 96;
        const GaugeEntry e = L_m(b2p, m, GaugeMode::Probe, po);
        CHECK(e.value >= expected[m - 1] - 1e-9);
        CHECK(std::fabs(reevaluate_witness(b2p, e.witness) - e.value) <= 1e-9);
    }
}

TEST_CASE("fundamental function: prefix-sum law for the unit basis, m for summing") {
    const Weight w = Weight::power(0.5);
    FiniteBasis ub = unit_vector_basis(10000, SpaceNorm::garling(w, 2.0));
    for (int m : {1, 2, 3, 7, 50, 512, 4096, 10000}) {
        const double phi = fundamental_fn(ub, m);
        CHECK(phi == doctest::Approx(std::pow(w.prefix_sum(m), 0.5)).epsilon(1e-12));
    }
    const Weight wl = Weight::logarithmic();
    FiniteBasis ub1 = unit_vector_basis(64, SpaceNorm::garling(wl, 1.0));
    for (int m : {1, 5, 64})
        CHECK(fundamental_fn(ub1, m) == doctest::Approx(wl.prefix_sum(m)).epsilon(1e-12));

    FiniteBasis s10 = summing_basis(10);
    for (int m = 1; m <= 10; ++m)
        CHECK(fundamental_fn(s10, m) == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));

    // m = 1 on a normalized basis.
    CHECK(fundamental_fn(s10, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fundamental_fn(unit_vector_basis(4, SpaceNorm::ellp(2.0)), 1) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("democracy: unit basis exactly 1, summing pairs agree, signs split them") {
    FiniteBasis ub = unit_vector_basis(12, garling_ambient());
    for (int m = 1; m <= 12; ++m) CHECK(democracy_ratio(ub, m) == 1.0);

    FiniteBasis s8 = summing_basis(8);
    CHECK(democracy_ratio(s8, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(democracy_ratio(s8, 2) == doctest::Approx(1.0).epsilon(1e-12));
    // Signed variant: |s_i - s_j| has sup 1 while |s_i + s_j| has sup 2.
    CHECK(democracy_ratio(s8, 2, true) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(democracy_ratio(s8, 3, true) == doctest::Approx(3.0).epsilon(1e-12));

    CHECK_THROWS_AS(democracy_ratio(s8, 9), PreconditionError);
}

TEST_CASE("almost-greedy estimates: bounded for the unit basis, strictly above 1 for summing") {
    FiniteBasis ub = unit_vector_basis(10, garling_ambient());
    for (std::uint64_t seed : {7ull, 11ull, 1729ull}) {
        const AlmostGreedyEstimate ag = almost_greedy_ratio(ub, 100, seed);
        CHECK(ag.estimate >= 1.0);
        CHECK(ag.estimate <= 2.0);
        // Witness reproduces both sides of the ratio.
        const std::vector<double>& f = ag.witness.coeffs;
        std::vector<int> all;
        for (int j = 1; j <= 10; ++j) all.push_back(j);
        const double num =
            basis_norm(ub, sub(f, coordinate_projection(ub, ag.witness.greedy, f)));
        const double den =
            basis_norm(ub, sub(f, coordinate_projection(ub, ag.witness.competitor, f)));
        CHECK(num == doctest::Approx(ag.witness.numerator).epsilon(1e-9));
        CHECK(den == doctest::Approx(ag.witness.denominator).epsilon(1e-9));
        CHECK(ag.estimate == doctest::Approx(num / den).epsilon(1e-9));
        CHECK(ag.witness.greedy.size() == ag.witness.competitor.size());
    }

    const AlmostGreedyEstimate ags = almost_greedy_ratio(summing_basis(8), 100, 7);
    CHECK(ags.estimate > 1.5);
}

TEST_CASE("growth tables separate constant, linear, and blockwise-linear gauges") {
    FiniteBasis ub = unit_vector_basis(12, garling_ambient());
    const GrowthTable tu = log_conditionality_check(gauge_report(ub, "L", 12, GaugeMode::Exact));
    CHECK(tu.log_tail_bounded);
    CHECK_FALSE(tu.linear_floor);
    REQUIRE(tu.rows.size() == 12);
    CHECK(tu.rows[1].over_log == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-12));
    CHECK(std::isnan(tu.rows[0].over_log));

    const GrowthTable ts =
        log_conditionality_check(gauge_report(summing_basis(12), "L", 12, GaugeMode::Exact));
    CHECK_FALSE(ts.log_tail_bounded);
    CHECK(ts.linear_floor);
    for (const GrowthRow& r : ts.rows) CHECK(r.over_m >= 0.4);

    const GrowthTable tb =
        log_conditionality_check(gauge_report(besov_sum_basis(2, 1.0), "L", 6, GaugeMode::Exact));
    CHECK(tb.linear_floor);
}

TEST_CASE("gauge reports serialize deterministically with reproducible witnesses") {
    FiniteBasis s6 = summing_basis(6);
    ProbeOptions po;
    po.seed = 99;
    po.restarts = 32;
    const GaugeReport a = gauge_report(s6, "L", 4, GaugeMode::Probe, po);
    const GaugeReport b = gauge_report(s6, "L", 4, GaugeMode::Probe, po);
    CHECK(canonical_json(a.to_json()) == canonical_json(b.to_json()));

    const std::string csv = a.to_csv();
    CHECK(csv.rfind("basis,m,gauge_kind,value,method,witness_json\n", 0) == 0);
    CHECK(csv.find("probe-lower-bound") != std::string::npos);

    // The CSV witness_json column round-trips into a witness that still
    // certifies the reported value.
    for (const GaugeEntry& e : a.entries) {
        const GaugeWitness w = GaugeWitness::from_json(e.witness.to_json());
        CHECK(std::fabs(reevaluate_witness(s6, w) - e.value) <= 1e-9);
    }

    const GrowthTable t = log_conditionality_check(a);
    CHECK(t.to_csv().rfind("m,gauge,gauge_over_log_m,gauge_over_m\n", 0) == 0);
    CHECK(t.to_json().at("rows").size() == 4);
}
