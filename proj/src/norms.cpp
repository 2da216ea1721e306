#include "garling/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "garling/detail/kahan.hpp"
#include "garling/errors.hpp"
#include "json.hpp"

namespace garling {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr size_t kWitnessSupportCap = 20000;
constexpr double kExactRunWorkCap = 4e9;  // states x runs budget for the exact path

void check_p(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw PreconditionError("norm exponent p must satisfy 1 <= p < infinity");
    }
}

using detail::KahanSum;

}  // namespace

// ---------------------------------------------------------------------------
// SpaceNorm
// ---------------------------------------------------------------------------

SpaceNorm SpaceNorm::garling(Weight w, double p) {
    check_p(p);
    SpaceNorm s;
    s.kind = Kind::Garling;
    s.weight = std::move(w);
    s.p = p;
    return s;
}

SpaceNorm SpaceNorm::lorentz(Weight w, double p) {
    check_p(p);
    SpaceNorm s;
    s.kind = Kind::Lorentz;
    s.weight = std::move(w);
    s.p = p;
    return s;
}

SpaceNorm SpaceNorm::ellp(double p) {
    check_p(p);
    SpaceNorm s;
    s.kind = Kind::Ellp;
    s.p = p;
    return s;
}

SpaceNorm SpaceNorm::sup() {
    SpaceNorm s;
    s.kind = Kind::Sup;
    return s;
}

SpaceNorm SpaceNorm::mixed(double p, std::vector<BigIndex> block_sizes) {
    check_p(p);
    if (block_sizes.empty()) {
        throw PreconditionError("mixed norm needs at least one block");
    }
    for (BigIndex b : block_sizes) {
        if (b <= 0) throw PreconditionError("mixed norm blocks must have positive size");
    }
    SpaceNorm s;
    s.kind = Kind::Mixed;
    s.p = p;
    s.block_sizes = std::move(block_sizes);
    return s;
}

SpaceNorm SpaceNorm::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw ParseError("space descriptor must be an object with a \"kind\" field");
    }
    const std::string kind = j.at("kind").get<std::string>();
    auto get_p = [&]() { return j.contains("p") ? j.at("p").get<double>() : 1.0; };
    if (kind == "garling" || kind == "lorentz") {
        if (!j.contains("weight")) {
            throw ParseError(kind + " space descriptor needs a \"weight\" field");
        }
        Weight w = Weight::from_json(j.at("weight"));
        return kind == "garling" ? garling(std::move(w), get_p())
                                 : lorentz(std::move(w), get_p());
    }
    if (kind == "ellp") return ellp(get_p());
    if (kind == "sup") return sup();
    if (kind == "mixed") {
        if (!j.contains("block_sizes")) {
            throw ParseError("mixed space descriptor needs \"block_sizes\"");
        }
        std::vector<BigIndex> sizes;
        for (const auto& e : j.at("block_sizes")) {
            if (e.is_string()) {
                sizes.push_back(big_index_from_string(e.get<std::string>()));
            } else {
                sizes.push_back(static_cast<BigIndex>(e.get<int64_t>()));
            }
        }
        return mixed(get_p(), std::move(sizes));
    }
    throw ParseError("unknown space kind: " + kind);
}

nlohmann::json SpaceNorm::to_json() const {
    nlohmann::json j;
    switch (kind) {
        case Kind::Garling: j["kind"] = "garling"; break;
        case Kind::Lorentz: j["kind"] = "lorentz"; break;
        case Kind::Ellp: j["kind"] = "ellp"; break;
        case Kind::Sup: j["kind"] = "sup"; break;
        case Kind::Mixed: j["kind"] = "mixed"; break;
    }
    if (kind != Kind::Sup) j["p"] = p;
    if (weight) j["weight"] = weight->to_json();
    if (kind == Kind::Mixed) {
        nlohmann::json arr = nlohmann::json::array();
        for (BigIndex b : block_sizes) arr.push_back(to_string(b));
        j["block_sizes"] = arr;
    }
    return j;
}

std::string SpaceNorm::label() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", p);
    switch (kind) {
        case Kind::Garling: return "garling(" + weight->label() + ",p=" + buf + ")";
        case Kind::Lorentz: return "lorentz(" + weight->label() + ",p=" + buf + ")";
        case Kind::Ellp: return std::string("ellp(p=") + buf + ")";
        case Kind::Sup: return "sup";
        case Kind::Mixed:
            return std::string("mixed(p=") + buf + "," + std::to_string(block_sizes.size()) +
                   " blocks)";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Exact norms
// ---------------------------------------------------------------------------

GarlingResult garling_norm(const FinSeq& f, const Weight& w, double p) {
    check_p(p);
    const std::vector<double> vals = f.support_values();
    const size_t n = vals.size();
    if (n == 0) return {0.0, {}};
    if (n > kWitnessSupportCap) {
        throw PreconditionError("witnessed evaluation supports at most " +
                                std::to_string(kWitnessSupportCap) + " nonzero entries");
    }

    std::vector<double> g(n + 1), wr(n + 1);
    for (size_t i = 1; i <= n; ++i) {
        g[i] = std::pow(std::abs(vals[i - 1]), p);
        wr[i] = w.at(static_cast<BigIndex>(i));
    }

    // 0/1 selection DP over (entry, count).  Decision bits are kept per stage
    // so the maximizing selection can be read back; equal values prefer the
    // skip branch, which makes the witness deterministic.
    const size_t words = (n + 2 + 63) / 64;
    std::vector<uint64_t> take((n + 1) * words, 0);
    std::vector<double> best(n + 1, kNegInf);
    best[0] = 0.0;

    for (size_t i = 1; i <= n; ++i) {
        uint64_t* row = take.data() + i * words;
        for (size_t r = i; r >= 1; --r) {
            if (best[r - 1] == kNegInf) continue;
            const double cand = best[r - 1] + g[i] * wr[r];
            if (cand > best[r]) {
                best[r] = cand;
                row[r / 64] |= (uint64_t{1} << (r % 64));
            }
        }
    }

    size_t best_r = 0;
    double best_v = 0.0;
    for (size_t r = 1; r <= n; ++r) {
        if (best[r] > best_v) {  // strict: ties keep the smaller count
            best_v = best[r];
            best_r = r;
        }
    }

    std::vector<size_t> witness;
    witness.reserve(best_r);
    size_t r = best_r;
    for (size_t i = n; i >= 1 && r > 0; --i) {
        const uint64_t* row = take.data() + i * words;
        if (row[r / 64] & (uint64_t{1} << (r % 64))) {
            witness.push_back(i - 1);
            --r;
        }
    }
    std::reverse(witness.begin(), witness.end());
    return {std::pow(best_v, 1.0 / p), std::move(witness)};
}

double shifted_garling(const FinSeq& f, const Weight& w, double p, BigIndex shift) {
    check_p(p);
    if (shift < 0) throw PreconditionError("weight shift must be nonnegative");
    const std::vector<double> vals = f.support_values();
    const size_t n = vals.size();
    if (n == 0) return 0.0;
    if (n > kWitnessSupportCap) {
        throw PreconditionError("shifted evaluation supports at most " +
                                std::to_string(kWitnessSupportCap) + " nonzero entries");
    }
    std::vector<double> wr(n + 1);
    for (size_t r = 1; r <= n; ++r) wr[r] = w.at(shift + static_cast<BigIndex>(r));

    std::vector<double> best(n + 1, kNegInf);
    best[0] = 0.0;
    for (size_t i = 1; i <= n; ++i) {
        const double gi = std::pow(std::abs(vals[i - 1]), p);
        for (size_t r = i; r >= 1; --r) {
            if (best[r - 1] == kNegInf) continue;
            best[r] = std::max(best[r], best[r - 1] + gi * wr[r]);
        }
    }
    double out = 0.0;
    for (size_t r = 1; r <= n; ++r) out = std::max(out, best[r]);
    return out;  // p-th power by contract
}

double lorentz_norm(const FinSeq& f, const Weight& w, double p) {
    check_p(p);
    std::vector<double> vals = f.support_values();
    if (vals.empty()) return 0.0;
    for (double& v : vals) v = std::abs(v);
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    KahanSum s;
    for (size_t j = 0; j < vals.size(); ++j) {
        s.add(std::pow(vals[j], p) * w.at(static_cast<BigIndex>(j + 1)));
    }
    return std::pow(s.value(), 1.0 / p);
}

double ellp_norm(const FinSeq& f, double p) {
    check_p(p);
    KahanSum s;
    for (double v : f.support_values()) s.add(std::pow(std::abs(v), p));
    return std::pow(s.value(), 1.0 / p);
}

double sup_norm(const FinSeq& f) {
    double m = 0.0;
    for (double v : f.support_values()) m = std::max(m, std::abs(v));
    return m;
}

double eval_norm(const FinSeq& f, const SpaceNorm& norm) {
    switch (norm.kind) {
        case SpaceNorm::Kind::Sup:
            return sup_norm(f);
        case SpaceNorm::Kind::Ellp:
            return ellp_norm(f, norm.p);
        case SpaceNorm::Kind::Lorentz:
            return lorentz_norm(f, *norm.weight, norm.p);
        case SpaceNorm::Kind::Garling: {
            const RunVector runs = runs_from_finseq(f);
            BigIndex states = 0;
            size_t nz_runs = 0;
            for (const Run& r : runs) {
                if (r.value != 0.0) {
                    states += r.len;
                    ++nz_runs;
                }
            }
            if (states <= static_cast<BigIndex>(kWitnessSupportCap)) {
                return garling_norm(f, *norm.weight, norm.p).value;
            }
            if (to_double(states) * static_cast<double>(nz_runs) > kExactRunWorkCap) {
                throw PreconditionError(
                    "garling norm: vector too dense for exact evaluation; use the run "
                    "evaluator");
            }
            RunNormOptions opts;
            opts.exact_threshold = states;  // force the exact run path
            return garling_norm_runs(runs, *norm.weight, norm.p, opts).lower;
        }
        case SpaceNorm::Kind::Mixed: {
            BigIndex total = 0;
            for (BigIndex b : norm.block_sizes) total += b;
            if (total > (BigIndex{1} << 26)) {
                throw ShapeError("mixed norm: block layout too large for dense scan");
            }
            if (f.end_index() > total) {
                throw ShapeError("mixed norm: vector extends past the declared blocks");
            }
            KahanSum s;
            BigIndex pos = 0;
            for (BigIndex b : norm.block_sizes) {
                double blocksup = 0.0;
                for (BigIndex j = 1; j <= b; ++j) {
                    blocksup = std::max(blocksup, std::abs(f.at(pos + j)));
                }
                s.add(std::pow(blocksup, norm.p));
                pos += b;
            }
            return std::pow(s.value(), 1.0 / norm.p);
        }
    }
    throw PreconditionError("unreachable norm kind");
}

double brute_force_garling(const FinSeq& f, const Weight& w, double p) {
    check_p(p);
    const std::vector<double> vals = f.support_values();
    const size_t n = vals.size();
    if (n > 20) {
        throw PreconditionError("brute-force oracle handles at most 20 nonzero entries");
    }
    std::vector<double> g(n);
    for (size_t i = 0; i < n; ++i) g[i] = std::pow(std::abs(vals[i]), p);
    std::vector<double> wr(n + 1);
    for (size_t r = 1; r <= n; ++r) wr[r] = w.at(static_cast<BigIndex>(r));

    double best = 0.0;
    for (uint32_t mask = 1; mask < (uint32_t{1} << n); ++mask) {
        double acc = 0.0;
        size_t rank = 0;
        for (size_t i = 0; i < n; ++i) {
            if (mask & (uint32_t{1} << i)) {
                ++rank;
                acc += g[i] * wr[rank];
            }
        }
        best = std::max(best, acc);
    }
    return std::pow(best, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Run-structured evaluation
// ---------------------------------------------------------------------------

namespace {

// Nonzero runs only; zero entries never improve an increasing selection (they
// contribute nothing and consume a weight rank), so dropping them is exact.
RunVector nonzero_runs(const RunVector& runs) {
    RunVector out;
    out.reserve(runs.size());
    for (const Run& r : runs) {
        if (r.len < 0) throw PreconditionError("run lengths must be nonnegative");
        if (!std::isfinite(r.value)) throw PreconditionError("run values must be finite");
        if (r.len == 0 || r.value == 0.0) continue;
        out.push_back({r.len, std::abs(r.value)});
    }
    return out;
}

// Exact sliding-window maximum DP over selection counts.  State r = number of
// selected entries so far; a run of length L lets the count advance by at most
// L, with the new picks billed consecutive weight ranks.
NormEnclosure exact_run_dp(const RunVector& runs, const Weight& w, double p,
                           BigIndex shift, BigIndex total) {
    const size_t N = static_cast<size_t>(total);
    std::vector<double> W(N + 1, 0.0);
    {
        KahanSum s;
        for (size_t r = 1; r <= N; ++r) {
            s.add(w.at(shift + static_cast<BigIndex>(r)));
            W[r] = s.value();
        }
    }

    std::vector<double> best(N + 1, kNegInf), next(N + 1, kNegInf);
    best[0] = 0.0;
    std::vector<size_t> deque_idx(N + 1);
    size_t cur = 0;

    for (const Run& run : runs) {
        const double g = std::pow(run.value, p);
        const size_t L = static_cast<size_t>(run.len);
        const size_t newcur = std::min(cur + L, N);
        size_t head = 0, tail = 0;  // deque over candidate source states
        auto key = [&](size_t j) { return best[j] - g * W[j]; };
        for (size_t r = 0; r <= newcur; ++r) {
            if (r <= cur) {
                const double k = key(r);
                while (tail > head && key(deque_idx[tail - 1]) <= k) --tail;
                deque_idx[tail++] = r;
            }
            while (head < tail && deque_idx[head] + L < r) ++head;
            next[r] = (head < tail) ? g * W[r] + key(deque_idx[head]) : kNegInf;
        }
        std::swap(best, next);
        cur = newcur;
    }

    double out = 0.0;
    for (size_t r = 0; r <= cur; ++r) out = std::max(out, best[r]);
    const double v = std::pow(out, 1.0 / p);
    return {v, v, true};
}

// Per-cell run capacity: the largest weight mass a run of length L can collect
// starting just above cell i's floor (the L weights right after the floor
// index, since weights decrease). Values are filled on first use and cached on
// the grid keyed by L, so repeated evaluations sharing a grid only pay for the
// cells they actually touch (NaN marks an unfilled slot).
class BestTake {
  public:
    BestTake(const RunGrid& grid, BigIndex L, size_t M) : grid_(grid), L_(L) {
        auto& cache = grid.best_take_cache;
        for (auto it = cache.begin(); it != cache.end(); ++it) {
            if (it->first == L) {
                // LRU: recurring lengths (a scanned chain's fixed runs) must
                // outlive the one-shot lengths a scan burns through.
                std::rotate(it, it + 1, cache.end());
                S_ = &cache.back().second;
                break;
            }
        }
        if (S_ == nullptr) {
            if (cache.size() >= 48) cache.erase(cache.begin());
            cache.emplace_back(L, std::vector<double>{});
            S_ = &cache.back().second;
        }
        if (S_->size() < M) {
            S_->resize(M, std::numeric_limits<double>::quiet_NaN());
        }
    }

    double get(size_t i) const {
        double& v = (*S_)[i];
        if (std::isnan(v)) {
            const std::vector<BigIndex>& P = grid_.points;
            const BigIndex base = (i == 0) ? BigIndex{0} : P[i - 1] + 1;
            v = grid_.w.segment_sum(grid_.shift + base, grid_.shift + base + L_);
        }
        return v;
    }

  private:
    const RunGrid& grid_;
    BigIndex L_;
    std::vector<double>* S_ = nullptr;
};

}  // namespace

RunGrid make_run_grid(const Weight& w, BigIndex shift, BigIndex limit, BigIndex dense,
                      double ratio) {
    if (shift < 0 || limit <= 0) {
        throw PreconditionError("run grid needs shift >= 0 and a positive limit");
    }
    if (!(ratio > 0.0) || ratio > 0.5) {
        throw PreconditionError("run grid ratio must lie in (0, 0.5]");
    }
    RunGrid grid{w, shift, limit, {}, {}};
    std::vector<BigIndex>& P = grid.points;
    const BigIndex d = std::min(dense, limit);
    for (BigIndex x = 0; x <= d; ++x) P.push_back(x);
    // Integer geometric growth: step = x / round(1/ratio) keeps the grid exact
    // for arbitrarily large counts.
    const BigIndex inv = static_cast<BigIndex>(std::llround(1.0 / ratio));
    BigIndex x = P.back();
    while (x < limit) {
        BigIndex step = x / inv;
        if (step < 1) step = 1;
        x += step;
        if (x >= limit) break;
        P.push_back(x);
    }
    if (P.back() != limit) P.push_back(limit);

    grid.omega.resize(P.size());
    grid.omega_floor.resize(P.size());
    KahanSum acc;  // incremental: per-point segment_sum(0, P[i]) would be quadratic
    for (size_t i = 0; i < P.size(); ++i) {
        if (shift == 0) {
            grid.omega[i] = w.prefix_sum(P[i]);
        } else {
            if (i > 0) acc.add(w.segment_sum(shift + P[i - 1], shift + P[i]));
            grid.omega[i] = acc.value();
        }
        // cell i covers counts (P[i-1], P[i]]; its smallest member is P[i-1]+1
        grid.omega_floor[i] =
            (i == 0) ? 0.0 : grid.omega[i - 1] + w.at(shift + P[i - 1] + 1);
    }
    return grid;
}

NormEnclosure garling_norm_runs_on_grid(const RunVector& raw_runs, const RunGrid& grid,
                                        double p) {
    check_p(p);
    const RunVector runs = nonzero_runs(raw_runs);
    BigIndex total = 0;
    for (const Run& r : runs) total += r.len;
    if (total == 0) return {0.0, 0.0, true};
    if (total > grid.limit) {
        throw PreconditionError("run vector exceeds the grid limit");
    }

    const std::vector<BigIndex>& P = grid.points;
    const std::vector<double>& Om = grid.omega;
    // States strictly above the first cell containing `total` are unreachable
    // or redundant; trimming them keeps shared oversized grids cheap.
    size_t M = static_cast<size_t>(
        std::lower_bound(P.begin(), P.end(), total) - P.begin());
    M = std::min(M + 1, P.size());

    // lo[i]: value of an explicit feasible selection of exactly P[i] entries.
    // up[i]: upper bound for every selection whose count lies in (P[i-1], P[i]].
    std::vector<double> lo(M, kNegInf), up(M, kNegInf);
    std::vector<double> nlo(M), nup(M);
    lo[0] = 0.0;
    up[0] = 0.0;
    std::vector<size_t> dq(M), dqa(M), dqc(M);

    for (const Run& run : runs) {
        const double g = std::pow(run.value, p);
        const BigIndex L = run.len;

        {  // lower DP: sources j with P[j] >= P[i] - L
            size_t head = 0, tail = 0;
            auto key = [&](size_t j) { return lo[j] - g * Om[j]; };
            for (size_t i = 0; i < M; ++i) {
                const double k = key(i);
                while (tail > head && key(dq[tail - 1]) <= k) --tail;
                dq[tail++] = i;
                while (head < tail && P[dq[head]] < P[i] - L) ++head;
                nlo[i] = (head < tail) ? g * Om[i] + key(dq[head]) : kNegInf;
            }
        }
        {  // upper DP: sources j with P[j] > P[i-1] - L. Two independent
            // over-estimates of what the run can add from source cell j:
            //   count capacity g*(Om[i] - Fl[j]): all weight mass between the
            //     floor of cell j (its smallest count, sharpened by one weight)
            //     and the top of cell i;
            //   run capacity g*S[j]: the L largest weights above cell j's
            //     floor, regardless of where cell i ends.
            // Each branch is a sliding-window maximum over the same window;
            // min of the two maxima is still an upper bound and stays tight
            // both when cells are smaller than the run (count branch) and
            // when a short run lands inside a huge geometric cell (run
            // branch), where the count branch alone overshoots by orders of
            // magnitude.
            const std::vector<double>& Fl = grid.omega_floor;
            const BestTake S(grid, L, M);
            size_t heada = 0, taila = 0, headc = 0, tailc = 0;
            auto keya = [&](size_t j) { return up[j] - g * Fl[j]; };
            // Unreachable sources never win the max; skipping them also skips
            // their capacity fill, which keeps fresh run lengths cheap.
            auto keyc = [&](size_t j) {
                return up[j] == kNegInf ? kNegInf : up[j] + g * S.get(j);
            };
            for (size_t i = 0; i < M; ++i) {
                const double ka = keya(i);
                while (taila > heada && keya(dqa[taila - 1]) <= ka) --taila;
                dqa[taila++] = i;
                const double kc = keyc(i);
                while (tailc > headc && keyc(dqc[tailc - 1]) <= kc) --tailc;
                dqc[tailc++] = i;
                const BigIndex bound = (i == 0) ? BigIndex{-1} : P[i - 1] - L;
                while (heada < taila && P[dqa[heada]] <= bound) ++heada;
                while (headc < tailc && P[dqc[headc]] <= bound) ++headc;
                nup[i] = std::min(g * Om[i] + keya(dqa[heada]), keyc(dqc[headc]));
            }
        }
        std::swap(lo, nlo);
        std::swap(up, nup);
    }

    // Every count in [0, total] lies in some cell (P[i-1], P[i]] with
    // P[i-1] < total, so scanning those cells covers the whole range even when
    // the grid extends past this vector's total (shared grids do).
    double lmax = 0.0, umax = 0.0;
    for (size_t i = 0; i < M; ++i) {
        if (i > 0 && P[i - 1] >= total) break;
        if (P[i] <= total) lmax = std::max(lmax, lo[i]);
        umax = std::max(umax, up[i]);
    }
    umax = std::max(umax, lmax);
    return {std::pow(lmax, 1.0 / p), std::pow(umax, 1.0 / p), false};
}

NormEnclosure garling_norm_runs(const RunVector& raw_runs, const Weight& w, double p,
                                const RunNormOptions& opts) {
    check_p(p);
    if (opts.shift < 0) throw PreconditionError("weight shift must be nonnegative");
    const RunVector runs = nonzero_runs(raw_runs);
    BigIndex total = 0;
    for (const Run& r : runs) total += r.len;
    if (total == 0) return {0.0, 0.0, true};

    if (total <= opts.exact_threshold) {
        const double work = to_double(total) * static_cast<double>(runs.size());
        if (work <= kExactRunWorkCap) {
            return exact_run_dp(runs, w, p, opts.shift, total);
        }
    }
    RunGrid grid = make_run_grid(w, opts.shift, total, opts.dense, opts.grid_ratio);
    return garling_norm_runs_on_grid(runs, grid, p);
}

RunVector runs_from_finseq(const FinSeq& f) {
    RunVector runs;
    if (f.offset() > 0) runs.push_back({f.offset(), 0.0});
    const std::vector<double>& c = f.coeffs();
    size_t i = 0;
    while (i < c.size()) {
        size_t j = i;
        while (j < c.size() && c[j] == c[i]) ++j;
        runs.push_back({static_cast<BigIndex>(j - i), c[i]});
        i = j;
    }
    return runs;
}

FinSeq finseq_from_runs(const RunVector& runs) {
    BigIndex span = 0;
    for (const Run& r : runs) {
        if (r.len < 0) throw PreconditionError("run lengths must be nonnegative");
        span += r.len;
    }
    if (span > (BigIndex{1} << 26)) {
        throw CapExceededError("run vector too long to materialize");
    }
    std::vector<double> c;
    c.reserve(static_cast<size_t>(span));
    for (const Run& r : runs) {
        for (BigIndex k = 0; k < r.len; ++k) c.push_back(r.value);
    }
    return FinSeq(0, std::move(c)).canonical();
}

}  // namespace garling
