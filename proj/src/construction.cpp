#include "garling/construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "garling/detail/kahan.hpp"
#include "garling/errors.hpp"
#include "json.hpp"

namespace garling {
namespace {

using detail::KahanSum;

constexpr BigIndex kMaterializeCap = BigIndex{1} << 22;

void check_t(double t) {
    if (!(t > 1.0) || !std::isfinite(t)) {
        throw PreconditionError("threshold t must satisfy 1 < t < infinity");
    }
}

void check_p(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw PreconditionError("norm exponent p must satisfy 1 <= p < infinity");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Normalized constant blocks
// ---------------------------------------------------------------------------

Run make_v_run(BigIndex k, const Weight& w, double p) {
    check_p(p);
    if (k < 1) throw PreconditionError("constant block length must be >= 1");
    return {k, std::pow(w.prefix_sum(k), -1.0 / p)};
}

FinSeq make_v(BigIndex k, const Weight& w, double p) {
    Run r = make_v_run(k, w, p);
    if (k > kMaterializeCap) {
        throw CapExceededError("constant block too long to materialize; use make_v_run");
    }
    return FinSeq(0, std::vector<double>(static_cast<size_t>(k), r.value));
}

// ---------------------------------------------------------------------------
// Hump search
// ---------------------------------------------------------------------------

nlohmann::json HumpCertificate::to_json() const {
    nlohmann::json j;
    j["k"] = to_string(k);
    j["alpha_k"] = alpha_k;
    j["s_power_scale"] = s;
    j["cond_hump"] = cond_hump;
    j["cond_running_min"] = cond_running_min;
    j["norm_with_f1"] = norm_with_f1;
    j["lower_with_f2_p"] = lower_with_f2_p;
    j["f2_norm_p"] = f2_norm_p;
    j["v_values"] = v_values;
    return j;
}

std::pair<FinSeq, HumpCertificate> hump_block_search(const FinSeq& f1, const FinSeq& f2,
                                                     double t, const Weight& w, double p,
                                                     BigIndex k_min, BigIndex k_cap) {
    check_t(t);
    check_p(p);
    if (k_min < 1 || k_cap < k_min) {
        throw PreconditionError("need 1 <= k_min <= k_cap");
    }
    if (k_cap > kMaterializeCap) {
        throw PreconditionError("hump search cap exceeds the materialization bound");
    }

    const double nf1 = garling_norm(f1, w, p).value;
    if (!(nf1 < t)) {
        throw PreconditionError("hump search requires ||f1||_g < t");
    }
    const double tp = std::pow(t, p);
    const double base = std::max(1.0, std::pow(nf1, p));
    const double s = 0.5 * (base + tp);  // p-power scale; base < tp since ||f1|| < t

    const BigIndex m = f2.support_size();
    HumpCertificate cert;
    cert.s = s;

    KahanSum Wk;       // W_i
    KahanSum Wmk;      // W_{m+i} - W_m
    double runmin = std::numeric_limits<double>::infinity();
    BigIndex accepted = 0;
    double alpha = 0.0;

    for (BigIndex i = 1; i <= k_cap; ++i) {
        Wk.add(w.at(i));
        Wmk.add(w.at(m + i));
        const double vi = shifted_garling(f1, w, p, i);
        cert.v_values.push_back(vi);
        const double ai = (s - vi) / Wk.value();
        const bool is_min = (ai <= runmin);
        runmin = std::min(runmin, ai);
        if (i >= k_min && is_min && ai * Wmk.value() >= 1.0) {
            accepted = i;
            alpha = ai;
            break;
        }
    }
    if (accepted == 0) {
        throw CapExceededError("hump search exhausted k_cap without acceptance");
    }

    cert.k = accepted;
    cert.alpha_k = alpha;
    cert.cond_hump = true;
    cert.cond_running_min = true;

    const double entry = std::pow(alpha, 1.0 / p);

    // Re-verify both output inequalities by independent evaluation.
    RunVector h_then_f1;
    h_then_f1.push_back({accepted, entry});
    for (const Run& r : runs_from_finseq(f1)) h_then_f1.push_back(r);
    const NormEnclosure e1 = garling_norm_runs(h_then_f1, w, p);
    cert.norm_with_f1 = e1.upper;
    if (!(e1.upper < t)) {
        throw VerificationError("hump search: ||(h, f1)||_g failed the < t re-check");
    }

    RunVector f2_then_h = runs_from_finseq(f2);
    f2_then_h.push_back({accepted, entry});
    const NormEnclosure e2 = garling_norm_runs(f2_then_h, w, p);
    cert.lower_with_f2_p = std::pow(e2.lower, p);
    cert.f2_norm_p = std::pow(garling_norm(f2, w, p).value, p);
    if (cert.lower_with_f2_p < cert.f2_norm_p + 1.0 - 1e-9) {
        throw VerificationError("hump search: ||(f2, h)||_g^p failed the +1 re-check");
    }

    return {FinSeq(0, std::vector<double>(static_cast<size_t>(accepted), entry)),
            std::move(cert)};
}

// ---------------------------------------------------------------------------
// Prepend scan
// ---------------------------------------------------------------------------

nlohmann::json StepCertificate::to_json() const {
    nlohmann::json j;
    j["k"] = to_string(k);
    j["norm_lower"] = norm_lower;
    j["norm_upper"] = norm_upper;
    j["exact"] = exact;
    return j;
}

namespace {

struct ScanState {
    std::optional<RunGrid> grid;  // shared across candidates, regrown in epochs
    std::optional<RunGrid> fine;  // certification-resolution twin of `grid`
};

// Certified O(#runs) lower bound: take the first i runs in full, for every i.
// Any explicit increasing selection bounds the supremum from below, so a value
// >= t^p rejects the candidate without running a DP.
double whole_run_lower(const RunVector& cand, const Weight& w, double p) {
    double best = 0.0;
    KahanSum acc;
    BigIndex c = 0;
    for (const Run& r : cand) {
        acc.add(std::pow(r.value, p) * w.segment_sum(c, c + r.len));
        c += r.len;
        best = std::max(best, acc.value());
    }
    return best;
}

// Certified decision for one candidate chain: returns +1 accept (cert filled),
// -1 reject, 0 inconclusive at scan resolution.
int decide_candidate(const RunVector& cand, const Weight& w, double p, double t,
                     BigIndex total, const ScanOptions& opts, BigIndex hard_limit,
                     ScanState& st, StepCertificate* cert) {
    const double quick = whole_run_lower(cand, w, p);
    if (quick >= std::pow(t, p)) {
        if (cert) {
            cert->norm_lower = std::pow(quick, 1.0 / p);
            cert->norm_upper = std::numeric_limits<double>::infinity();
            cert->exact = false;
        }
        return -1;
    }
    if (total <= opts.exact_total) {
        RunNormOptions ro;
        ro.exact_threshold = total;
        const NormEnclosure e = garling_norm_runs(cand, w, p, ro);
        if (cert) {
            cert->norm_lower = e.lower;
            cert->norm_upper = e.upper;
            cert->exact = true;
        }
        return e.upper < t ? +1 : -1;
    }

    if (!st.grid || st.grid->limit < total) {
        BigIndex limit = std::max(total * 16, BigIndex{1} << 22);
        limit = std::min(limit, hard_limit);
        limit = std::max(limit, total);
        st.grid = make_run_grid(w, 0, limit, 1024, opts.grid_ratio);
    }
    const NormEnclosure coarse = garling_norm_runs_on_grid(cand, *st.grid, p);
    if (coarse.lower >= t) {
        if (cert) {
            cert->norm_lower = std::max(coarse.lower, std::pow(quick, 1.0 / p));
            cert->norm_upper = coarse.upper;
            cert->exact = false;
        }
        return -1;
    }

    // Would-accept or straddle: escalate to the tight evaluation. Acceptance and
    // the recorded certificate always come from this resolution, so downstream
    // margin accounting sees real norms rather than coarse-grid slack.
    if (total <= (BigIndex{1} << 21)) {
        RunNormOptions ro;
        ro.exact_threshold = total;
        const NormEnclosure e = garling_norm_runs(cand, w, p, ro);
        if (cert) {
            cert->norm_lower = e.lower;
            cert->norm_upper = e.upper;
            cert->exact = true;
        }
        return e.upper < t ? +1 : -1;
    }
    if (!st.fine || st.fine->limit < total) {
        BigIndex limit = std::max(total * 16, BigIndex{1} << 22);
        limit = std::min(limit, hard_limit);
        limit = std::max(limit, total);
        st.fine = make_run_grid(w, 0, limit, 4096, opts.cert_ratio);
    }
    const NormEnclosure e = garling_norm_runs_on_grid(cand, *st.fine, p);
    if (cert) {
        cert->norm_lower = std::max(e.lower, std::pow(quick, 1.0 / p));
        cert->norm_upper = e.upper;
        cert->exact = false;
    }
    if (e.upper < t) return +1;
    if (e.lower >= t) return -1;
    return 0;  // still straddling: scan moves on (never accepted uncertified)
}

BigIndex advance(BigIndex k, const ScanOptions& opts) {
    if (k < opts.dense) return k + 1;
    const BigIndex denom = static_cast<BigIndex>(std::llround(1.0 / opts.ratio));
    BigIndex step = k / denom;
    if (step < 1) step = 1;
    return k + step;
}

}  // namespace

BigIndex prepend_block_search(const RunVector& chain, double t, const Weight& w, double p,
                              BigIndex k_min, BigIndex k_cap, const KPredicate& extra,
                              const ScanOptions& opts, StepCertificate* cert_out) {
    check_t(t);
    check_p(p);
    if (k_min < 1 || k_cap < k_min) throw PreconditionError("need 1 <= k_min <= k_cap");

    RunVector base;
    BigIndex M = 0;
    for (const Run& r : chain) {
        if (r.len < 0) throw PreconditionError("run lengths must be nonnegative");
        if (r.len == 0 || r.value == 0.0) continue;
        base.push_back(r);
        M += r.len;
    }

    if (M == 0) {
        // ||v[k]||_g = 1 < t for every k: only the extra predicate gates.
        for (BigIndex k = k_min; k <= k_cap; k = advance(k, opts)) {
            if (!extra || extra(k)) {
                if (cert_out) *cert_out = {k, 1.0, 1.0, true};
                return k;
            }
        }
        throw CapExceededError("prepend scan exhausted k_cap (predicate never satisfied)");
    }

    {  // precondition: the existing chain itself sits strictly under t
        ScanState pre;
        StepCertificate dummy;
        const int verdict =
            decide_candidate(base, w, p, t, M, opts, std::max(M, BigIndex{1} << 22), pre,
                             &dummy);
        if (verdict < 0) throw PreconditionError("prepend scan requires ||chain||_g < t");
        if (verdict == 0) {
            throw VerificationError("chain norm straddles t at certificate resolution");
        }
    }

    {  // cap shortcut: every prefix-of-whole-runs take of (v[k], chain) shrinks
        // as k grows (the chain moves to smaller weights), so the k_cap value
        // bounds the whole scan from below. If even that meets t^p, every
        // candidate up to the cap is rejected and the walk can be skipped.
        RunVector cand;
        cand.reserve(base.size() + 1);
        cand.push_back(make_v_run(k_cap, w, p));
        for (const Run& r : base) cand.push_back(r);
        if (whole_run_lower(cand, w, p) >= std::pow(t, p)) {
            throw CapExceededError("prepend scan exhausted k_cap without a certified acceptance");
        }
    }

    ScanState st;
    const BigIndex hard_limit = k_cap + M;
    for (BigIndex k = k_min; k <= k_cap; k = advance(k, opts)) {
        if (extra && !extra(k)) continue;
        RunVector cand;
        cand.reserve(base.size() + 1);
        cand.push_back(make_v_run(k, w, p));
        for (const Run& r : base) cand.push_back(r);
        StepCertificate cert{k, 0.0, 0.0, false};
        const int verdict =
            decide_candidate(cand, w, p, t, k + M, opts, hard_limit, st, &cert);
        if (verdict > 0) {
            if (cert_out) *cert_out = cert;
            return k;
        }
    }
    throw CapExceededError("prepend scan exhausted k_cap without a certified acceptance");
}

BigIndex prepend_block_search(const FinSeq& f, double t, const Weight& w, double p,
                              BigIndex k_min, BigIndex k_cap, const KPredicate& extra,
                              const ScanOptions& opts, StepCertificate* cert_out) {
    return prepend_block_search(runs_from_finseq(f), t, w, p, k_min, k_cap, extra, opts,
                                cert_out);
}

// ---------------------------------------------------------------------------
// Recursive construction
// ---------------------------------------------------------------------------

BigIndex Kappa::total_length() const {
    BigIndex s = 0;
    for (BigIndex e : entries) s += e;
    return s;
}

nlohmann::json Kappa::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (BigIndex e : entries) arr.push_back(to_string(e));
    return nlohmann::json{{"entries", arr}, {"t", t}};
}

Kappa Kappa::from_json(const nlohmann::json& j) {
    Kappa k;
    k.t = j.at("t").get<double>();
    for (const auto& e : j.at("entries")) {
        if (e.is_string()) {
            k.entries.push_back(big_index_from_string(e.get<std::string>()));
        } else {
            k.entries.push_back(static_cast<BigIndex>(e.get<int64_t>()));
        }
    }
    return k;
}

RunVector kappa_chain_runs(const Kappa& kappa, const Weight& w, double p) {
    RunVector runs;
    runs.reserve(kappa.entries.size());
    for (BigIndex k : kappa.entries) runs.push_back(make_v_run(k, w, p));
    return runs;
}

nlohmann::json KappaBuildReport::to_json() const {
    nlohmann::json steps_json = nlohmann::json::array();
    for (const StepCertificate& s : steps) steps_json.push_back(s.to_json());
    return nlohmann::json{{"kappa", kappa.to_json()},
                          {"steps", steps_json},
                          {"norm_lower", final_norm.lower},
                          {"norm_upper", final_norm.upper},
                          {"norm_exact", final_norm.exact}};
}

KappaBuildReport build_kappa(int n, double t, const Weight& w, double p, BigIndex k_floor,
                             const KPredicate& extra, BigIndex k_cap,
                             const ScanOptions& opts) {
    check_t(t);
    check_p(p);
    if (n < 1) throw PreconditionError("need at least one block");
    if (k_floor < 1) throw PreconditionError("k_floor must be >= 1");

    KappaBuildReport report;
    RunVector chain;
    // The chain norm only ever grows (any selection of the old chain is still
    // available after a prepend), so the p-power margin t^p - ||chain||^p is a
    // budget spent across steps.  Accepting at the bare threshold t would
    // leave later steps an exponentially collapsing margin and block lengths
    // beyond any representable bound; instead step i may consume at most a
    // 1/(remaining+1) share of the current margin.
    const double tp = std::pow(t, p);
    double used_p = 1.0;  // certified upper bound for ||chain||^p (block floor)
    for (int i = 0; i < n; ++i) {
        const int remaining = n - 1 - i;
        const double margin = tp - used_p;
        const double tau_p =
            tp - (static_cast<double>(remaining) / (remaining + 1)) * margin;
        const double tau = std::pow(tau_p, 1.0 / p);
        StepCertificate cert;
        const BigIndex q =
            prepend_block_search(chain, tau, w, p, k_floor, k_cap, extra, opts, &cert);
        used_p = std::max(1.0, std::pow(cert.norm_upper, p));
        RunVector next;
        next.reserve(chain.size() + 1);
        next.push_back(make_v_run(q, w, p));
        for (const Run& r : chain) next.push_back(r);
        chain = std::move(next);
        report.steps.push_back(cert);
        report.kappa.entries.insert(report.kappa.entries.begin(), q);
    }
    report.kappa.t = t;
    const StepCertificate& last = report.steps.back();
    report.final_norm = {last.norm_lower, last.norm_upper, last.exact};
    return report;
}

}  // namespace garling
