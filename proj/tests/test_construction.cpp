#include <cmath>
#include <vector>

#include "doctest.h"
#include "garling/construction.hpp"
#include "garling/errors.hpp"
#include "garling/rng.hpp"

using namespace garling;

TEST_CASE("normalized constant blocks") {
    Weight harmonic = Weight::power(1.0);
    FinSeq one = make_v(1, harmonic, 1.0);
    CHECK(one.coeffs() == std::vector<double>{1.0});

    FinSeq two = make_v(2, harmonic, 1.0);  // W_2 = 3/2
    CHECK(two.at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(two.at(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    for (const Weight& w : {Weight::power(0.5), Weight::power(1.0), Weight::logarithmic()}) {
        for (double p : {1.0, 2.0}) {
            for (BigIndex k : {1, 2, 3, 10, 40, 100}) {
                CHECK(garling_norm(make_v(k, w, p), w, p).value ==
                      doctest::Approx(1.0).epsilon(1e-13));
            }
        }
    }
    CHECK_THROWS_AS(make_v(0, harmonic, 1.0), PreconditionError);
}

TEST_CASE("hump search on empty inputs accepts immediately") {
    Weight w = Weight::power(0.5);
    for (double p : {1.0, 2.0}) {
        auto [h, cert] = hump_block_search(FinSeq(0, {}), FinSeq(0, {}), 2.0, w, p, 1, 1000);
        CHECK(cert.k == 1);
        CHECK(cert.cond_hump);
        CHECK(cert.cond_running_min);
        // with empty f1 the block power-mass equals s exactly
        double hp = std::pow(garling_norm(h, w, p).value, p);
        CHECK(hp == doctest::Approx(cert.s).epsilon(1e-12));
        CHECK(hp >= 1.0);
        CHECK(cert.norm_with_f1 < 2.0);
        CHECK(cert.lower_with_f2_p >= 1.0 - 1e-9);
    }
}

TEST_CASE("hump search output inequalities on random instances") {
    Rng rng(314159);
    const std::vector<Weight> weights = {Weight::power(0.5), Weight::logarithmic()};
    for (int trial = 0; trial < 30; ++trial) {
        const Weight& w = weights[trial % weights.size()];
        double p = (trial % 3 == 0) ? 1.0 : ((trial % 3 == 1) ? 1.5 : 2.0);
        double t = 1.25 + 1.25 * rng.uniform01();

        std::vector<double> c1(6 + rng.below(6)), c2(4 + rng.below(8));
        for (double& x : c1) x = rng.heavy();
        for (double& x : c2) x = rng.heavy();
        FinSeq f1(0, c1), f2(0, c2);
        // rescale f1 strictly under t
        double target = t * (0.3 + 0.65 * rng.uniform01());
        f1 = f1.scaled(target / garling_norm(f1, w, p).value);

        auto [h, cert] = hump_block_search(f1, f2, t, w, p, 1, 200000);
        CHECK(cert.k >= 1);
        // re-derive both inequalities with the witnessed DP as a second opinion
        FinSeq hf1 = concat(h, f1);
        double n1 = garling_norm(hf1, w, p).value;
        CHECK(n1 < t - 1e-12);
        double lhs = std::pow(garling_norm(concat(f2, h), w, p).value, p);
        double rhs = std::pow(garling_norm(f2, w, p).value, p) + 1.0;
        CHECK(lhs >= rhs - 1e-9);
        // certificate alphas: accepted alpha is the running minimum
        for (double vi : cert.v_values) CHECK(vi <= cert.s);
    }
}

TEST_CASE("hump search survives p > 1 where a plain-scale midpoint would stall") {
    Weight w = Weight::power(0.5);
    double p = 2.0, t = 1.5;
    FinSeq f1 = make_v(3, w, p).scaled(1.45);  // ||f1|| = 1.45, ||f1||^p = 2.1025
    // plain-scale midpoint (1.475) sits below ||f1||^p; the power-scale bound must cope
    auto [h, cert] = hump_block_search(f1, make_v(4, w, p), t, w, p, 1, 500000);
    CHECK(cert.alpha_k > 0.0);
    CHECK(garling_norm(concat(h, f1), w, p).value < t);
    CHECK(cert.s > std::pow(1.45, p));
    CHECK(cert.s < std::pow(t, p));
}

TEST_CASE("hump search error paths") {
    Weight w = Weight::power(0.5);
    FinSeq big = make_v(2, w, 1.0).scaled(3.0);
    CHECK_THROWS_AS(hump_block_search(big, FinSeq(0, {}), 1.5, w, 1.0, 1, 1000),
                    PreconditionError);
    // f2 with a large support forces a large k; a tiny cap must fail loudly
    FinSeq wide(0, std::vector<double>(40, 1.0));
    CHECK_THROWS_AS(hump_block_search(FinSeq(0, {}), wide, 1.05, w, 1.0, 1, 3),
                    CapExceededError);
}

TEST_CASE("prepend scan: trivial and verified acceptances") {
    Weight w = Weight::power(0.5);
    CHECK(prepend_block_search(FinSeq(0, {}), 1.5, w, 1.0, 7, 1000) == 7);

    double p = 2.0, t = 1.1;
    FinSeq f = make_v(5, w, p);
    StepCertificate cert;
    BigIndex k = prepend_block_search(f, t, w, p, 1, 10'000'000, {}, {}, &cert);
    CHECK(cert.norm_upper < t);
    // independent exact re-check of the accepted chain
    RunVector cand = {make_v_run(k, w, p), {5, f.at(1)}};
    RunNormOptions ro;
    ro.exact_threshold = k + 5;
    NormEnclosure e = garling_norm_runs(cand, w, p, ro);
    CHECK(e.exact);
    CHECK(e.upper < t);
    // every smaller candidate in the dense range genuinely fails
    for (BigIndex kk = 1; kk < k && kk <= 50; ++kk) {
        RunVector c2 = {make_v_run(kk, w, p), {5, f.at(1)}};
        RunNormOptions r2;
        r2.exact_threshold = kk + 5;
        CHECK(garling_norm_runs(c2, w, p, r2).lower >= t);
    }
}

TEST_CASE("recursive construction stays under t and is deterministic") {
    for (const Weight& w : {Weight::power(0.5), Weight::power(1.0)}) {
        for (double p : {1.0, 2.0}) {
            KappaBuildReport rep = build_kappa(4, 1.1, w, p, 1, {}, BigIndex{1} << 40);
            CHECK(rep.kappa.entries.size() == 4);
            for (BigIndex e : rep.kappa.entries) CHECK(e >= 1);
            // largest block leads
            for (size_t i = 1; i < rep.kappa.entries.size(); ++i) {
                CHECK(rep.kappa.entries[i - 1] >= rep.kappa.entries[i]);
            }
            CHECK(rep.final_norm.upper < 1.1);

            // prefix property: every suffix chain passed its own step
            for (size_t j = 0; j < rep.steps.size(); ++j) {
                CHECK(rep.steps[j].norm_upper < 1.1);
            }

            KappaBuildReport again = build_kappa(4, 1.1, w, p, 1, {}, BigIndex{1} << 40);
            CHECK(again.kappa.entries == rep.kappa.entries);

            // round trip
            Kappa back = Kappa::from_json(rep.kappa.to_json());
            CHECK(back.entries == rep.kappa.entries);
            CHECK(back.t == rep.kappa.t);
        }
    }
}

TEST_CASE("recursive construction honours the extra predicate") {
    Weight w = Weight::power(0.5);
    double p = 2.0, t = 1.21;
    auto extra = [&](BigIndex k) { return w.hump_ratio(100, k) >= 0.5; };
    KappaBuildReport rep = build_kappa(3, t, w, p, 1, extra, BigIndex{1} << 40);
    for (BigIndex e : rep.kappa.entries) CHECK(w.hump_ratio(100, e) >= 0.5);
    CHECK(rep.final_norm.upper < t);
}

TEST_CASE("small recursive outputs agree with the brute-force oracle") {
    Weight w = Weight::power(0.5);
    KappaBuildReport rep = build_kappa(2, 1.5, w, 1.0, 1, {}, 1'000'000);
    Kappa kappa = rep.kappa;
    if (kappa.total_length() <= 20) {
        FinSeq dense = finseq_from_runs(kappa_chain_runs(kappa, w, 1.0));
        double oracle = brute_force_garling(dense, w, 1.0);
        CHECK(oracle <= 1.5);
        CHECK(oracle == doctest::Approx(rep.final_norm.upper).epsilon(1e-10));
    }
}

TEST_CASE("prepend scan is deterministic deep into the count axis") {
    Weight w = Weight::power(0.5);
    const double p = 1.0;
    RunVector chain = {make_v_run(1675149, w, p), make_v_run(4987, w, p),
                       make_v_run(1, w, p)};
    StepCertificate cert;
    const BigIndex q = prepend_block_search(chain, 1.042652636, w, p, 1,
                                            big_index_from_string("1000000000000"), {}, {},
                                            &cert);
    CHECK(q == 261270958);
    CHECK(cert.norm_upper < 1.042652636);
    CHECK(cert.norm_lower <= cert.norm_upper);
    CHECK(cert.norm_upper - cert.norm_lower < 1e-4);

    // an infeasible threshold fails fast through the cap shortcut
    RunVector lchain = {make_v_run(1062314, Weight::logarithmic(), p),
                        make_v_run(1, Weight::logarithmic(), p)};
    CHECK_THROWS_AS(prepend_block_search(lchain, 1.1, Weight::logarithmic(), p, 1,
                                         big_index_from_string(
                                             "1000000000000000000000000000000000000"),
                                         {}, {}, nullptr),
                    CapExceededError);
}
