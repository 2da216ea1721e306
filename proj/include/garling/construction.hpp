#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "garling/big_index.hpp"
#include "garling/finseq.hpp"
#include "garling/norms.hpp"
#include "garling/weights.hpp"

namespace garling {

// Normalized constant block: k entries of W_k^(-1/p); Garling norm exactly 1.
FinSeq make_v(BigIndex k, const Weight& w, double p);        // materialized, guarded
Run make_v_run(BigIndex k, const Weight& w, double p);       // structural form

// ---------------------------------------------------------------------------
// Hump search: prepend a constant block h to f1 so the pair stays under t
// while h alone, appended after any f2-selection, adds a full unit of p-power
// mass.  The scan follows alpha_i = (s - v_i)/W_i with v_i the shift-i
// evaluation of f1 and accepts the first k >= k_min where
//   (i)  alpha_k (W_{m+k} - W_m) >= 1,  m = |supp f2|
//   (ii) alpha_k = min_{1<=i<=k} alpha_i.
//
// The intermediate bound s is placed on the p-power scale,
//   s = (max{1, ||f1||^p} + t^p) / 2,
// which keeps every alpha_i positive for all p >= 1 (a plain-scale midpoint
// can sit below ||f1||^p when p > 1 and the scan would stall).
// ---------------------------------------------------------------------------

struct HumpCertificate {
    BigIndex k = 0;
    double alpha_k = 0.0;
    double s = 0.0;                 // p-power-scale intermediate bound
    std::vector<double> v_values;   // v_1..v_k as scanned
    bool cond_hump = false;         // (i)
    bool cond_running_min = false;  // (ii)
    double norm_with_f1 = 0.0;      // re-checked ||(h, f1)||_g
    double lower_with_f2_p = 0.0;   // re-checked ||(f2, h)||_g^p
    double f2_norm_p = 0.0;         // ||f2||_g^p

    nlohmann::json to_json() const;
};

std::pair<FinSeq, HumpCertificate> hump_block_search(const FinSeq& f1, const FinSeq& f2,
                                                     double t, const Weight& w, double p,
                                                     BigIndex k_min, BigIndex k_cap);

// ---------------------------------------------------------------------------
// Prepend scan: smallest scheduled k with ||(v[k], chain)||_g < t (certified)
// and extra(k) when supplied.  The schedule is every integer up to `dense`,
// then geometric steps of ratio ~`ratio`; candidates are certified through the
// run evaluator (exact below the threshold, two-sided enclosure above, with
// upper < t required to accept).
// ---------------------------------------------------------------------------

struct ScanOptions {
    BigIndex dense = 4096;      // integer scan prefix
    double ratio = 0.02;        // geometric step beyond the prefix
    double grid_ratio = 1e-3;   // enclosure grid during the scan
    double cert_ratio = 3e-4;   // finer grid for the accepted certificate
    BigIndex exact_total = BigIndex{1} << 14;  // exact DP decides straddles below this
};

struct StepCertificate {
    BigIndex k = 0;
    double norm_lower = 0.0;  // certified bracket for the accepted chain norm
    double norm_upper = 0.0;
    bool exact = false;

    nlohmann::json to_json() const;
};

using KPredicate = std::function<bool(BigIndex)>;

BigIndex prepend_block_search(const RunVector& chain, double t, const Weight& w, double p,
                              BigIndex k_min, BigIndex k_cap, const KPredicate& extra = {},
                              const ScanOptions& opts = {},
                              StepCertificate* cert_out = nullptr);

// FinSeq front end for materialized tails.
BigIndex prepend_block_search(const FinSeq& f, double t, const Weight& w, double p,
                              BigIndex k_min, BigIndex k_cap, const KPredicate& extra = {},
                              const ScanOptions& opts = {},
                              StepCertificate* cert_out = nullptr);

// ---------------------------------------------------------------------------
// Recursive block-tuple construction
// ---------------------------------------------------------------------------

struct Kappa {
    std::vector<BigIndex> entries;  // (k_1, ..., k_n), earliest block first
    double t = 0.0;

    BigIndex total_length() const;
    nlohmann::json to_json() const;
    static Kappa from_json(const nlohmann::json& j);
};

// v[kappa]: the concatenation v[k_1], v[k_2], ..., each block normalized.
RunVector kappa_chain_runs(const Kappa& kappa, const Weight& w, double p);

struct KappaBuildReport {
    Kappa kappa;
    std::vector<StepCertificate> steps;  // in acceptance order q_1, q_2, ...
    NormEnclosure final_norm;

    nlohmann::json to_json() const;
};

// q_1 = first accepted prepend onto the empty chain; q_{i+1} prepends onto
// v[q_i, ..., q_1]; returns kappa = (q_n, ..., q_1) so the largest block leads.
KappaBuildReport build_kappa(int n, double t, const Weight& w, double p, BigIndex k_floor,
                             const KPredicate& extra = {},
                             BigIndex k_cap = 1'000'000, const ScanOptions& opts = {});

}  // namespace garling
