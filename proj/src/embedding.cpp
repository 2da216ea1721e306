#include "garling/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <utility>

#include "garling/errors.hpp"
#include "garling/report.hpp"
#include "garling/rng.hpp"

namespace garling {

namespace {

constexpr double kBiorthogonalityTol = 1e-12;
constexpr double kOperatorTol = 1e-9;
constexpr BigIndex kExactRunTotal = BigIndex{1} << 21;
constexpr BigIndex kMaterializeGuard = BigIndex{1} << 20;

// Per-family sub-seeds so trial streams are independent of scheduling and of
// each other.
constexpr std::uint64_t kSaltPBound = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSaltSBound = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kSaltCompose = 0x94d049bb133111ebULL;
constexpr std::uint64_t kSaltDomination = 0xd6e8feb86659fd93ULL;
constexpr std::uint64_t kSaltPaths = 0xa0761d6478bd642fULL;

void require(bool cond, const char* msg) {
    if (!cond) throw PreconditionError(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// Sparse sequences
// ---------------------------------------------------------------------------

SparseSeq sparse_from_finseq(const FinSeq& f) {
    const std::vector<BigIndex> pos = f.support_positions();
    const std::vector<double> val = f.support_values();
    SparseSeq out;
    out.reserve(pos.size());
    for (size_t i = 0; i < pos.size(); ++i) out.push_back({pos[i], val[i]});
    return out;
}

namespace {

void validate_sparse(const SparseSeq& f) {
    BigIndex prev = 0;
    for (const SparseEntry& e : f) {
        require(e.pos >= 1, "sparse positions must be >= 1");
        require(e.pos > prev, "sparse positions must be strictly increasing");
        require(std::isfinite(e.value), "sparse values must be finite");
        prev = e.pos;
    }
}

}  // namespace

GarlingResult garling_norm_sparse(const SparseSeq& f, const Weight& w, double p) {
    validate_sparse(f);
    std::vector<double> values;
    values.reserve(f.size());
    for (const SparseEntry& e : f) values.push_back(e.value);
    return garling_norm(FinSeq(0, std::move(values)), w, p);
}

// ---------------------------------------------------------------------------
// LevelArray
// ---------------------------------------------------------------------------

LevelArray LevelArray::zeros(int N) {
    require(N >= 0, "level count must be nonnegative");
    LevelArray x;
    x.levels.resize(static_cast<size_t>(N));
    for (int n = 1; n <= N; ++n) x.levels[n - 1].assign(static_cast<size_t>(n), 0.0);
    return x;
}

LevelArray LevelArray::unit(int N, int i, int n) {
    LevelArray x = zeros(N);
    x.at(i, n) = 1.0;
    return x;
}

double& LevelArray::at(int i, int n) {
    require(n >= 1 && n <= depth() && i >= 1 && i <= n, "level-array index out of range");
    return levels[n - 1][i - 1];
}

double LevelArray::at(int i, int n) const {
    require(n >= 1 && n <= depth() && i >= 1 && i <= n, "level-array index out of range");
    return levels[n - 1][i - 1];
}

bool LevelArray::same_shape(const LevelArray& o) const {
    if (levels.size() != o.levels.size()) return false;
    for (size_t n = 0; n < levels.size(); ++n) {
        if (levels[n].size() != o.levels[n].size()) return false;
    }
    return true;
}

double LevelArray::mixed_norm(double p) const {
    double acc = 0.0;
    for (const auto& level : levels) {
        double m = 0.0;
        for (double v : level) m = std::max(m, std::fabs(v));
        acc += std::pow(m, p);
    }
    return std::pow(acc, 1.0 / p);
}

nlohmann::json LevelArray::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& level : levels) arr.push_back(level);
    return nlohmann::json{{"levels", arr}};
}

LevelArray LevelArray::from_json(const nlohmann::json& j) {
    LevelArray x;
    for (const auto& level : j.at("levels")) {
        x.levels.push_back(level.get<std::vector<double>>());
    }
    for (size_t n = 0; n < x.levels.size(); ++n) {
        if (x.levels[n].size() != n + 1) throw ParseError("level-array rows must have sizes 1..N");
    }
    return x;
}

// ---------------------------------------------------------------------------
// Plan layout
// ---------------------------------------------------------------------------

BigIndex default_plan_cap() {
    BigIndex c = 1;
    for (int i = 0; i < 36; ++i) c *= 10;
    return c;
}

BigIndex EmbeddingPlan::total_length() const {
    return boundaries.empty() ? 0 : boundaries.back().back();
}

const EmbeddingPlan::Cell& EmbeddingPlan::cell(int i, int n) const {
    require(n >= 1 && n <= N && i >= 1 && i <= n, "cell index out of range");
    // lexicographic offset of level n is 0 + 1 + ... + (n-1)
    const size_t idx = static_cast<size_t>(n) * (n - 1) / 2 + (i - 1);
    return cells[idx];
}

void recompute_layout(EmbeddingPlan& plan) {
    require(plan.N >= 1, "plan needs at least one level");
    require(plan.epsilon > 0.0, "epsilon must be positive");
    require(plan.p >= 1.0, "p must be >= 1");
    require(static_cast<int>(plan.kappas.size()) == plan.N, "one block tuple per level");
    plan.t = std::sqrt(1.0 + plan.epsilon);

    plan.hump_shifts.clear();
    plan.boundaries.clear();
    plan.cells.clear();

    BigIndex end = 0;
    for (int n = 1; n <= plan.N; ++n) {
        const Kappa& kappa = plan.kappas[n - 1];
        require(static_cast<int>(kappa.entries.size()) == n, "level n holds an n-tuple");
        BigIndex m = 0;
        for (int r = 1; r < n; ++r) {
            m += *std::max_element(plan.kappas[r - 1].entries.begin(),
                                   plan.kappas[r - 1].entries.end());
        }
        plan.hump_shifts.push_back(m);

        std::vector<BigIndex> bounds{end};
        for (int i = 1; i <= n; ++i) {
            const BigIndex k = kappa.entries[i - 1];
            require(k >= 1, "block lengths must be positive");
            if (end > kBigIndexMax - k) throw CapExceededError("plan length overflows the index range");
            EmbeddingPlan::Cell c;
            c.i = i;
            c.n = n;
            c.first = end + 1;
            end += k;
            c.last = end;
            c.k = k;
            c.wk = plan.w.prefix_sum(k);
            c.seg_w = plan.w.segment_sum(c.first - 1, c.last);
            c.unit = make_v_run(k, plan.w, plan.p).value;
            c.scale = std::pow(c.wk, 1.0 / plan.p) / c.seg_w;
            plan.cells.push_back(c);
            bounds.push_back(end);
        }
        plan.boundaries.push_back(std::move(bounds));
    }
}

EmbeddingPlan build_embedding_plan(double epsilon, int N, const Weight& w, double p,
                                   const PlanCaps& caps) {
    require(epsilon > 0.0, "epsilon must be positive");
    require(N >= 1, "need at least one level");
    require(p >= 1.0, "p must be >= 1");

    EmbeddingPlan plan;
    plan.epsilon = epsilon;
    plan.t = std::sqrt(1.0 + epsilon);
    plan.N = N;
    plan.w = w;
    plan.p = p;

    const BigIndex cap = caps.k_cap > 0 ? caps.k_cap : default_plan_cap();
    const double hump_floor = std::pow(plan.t, -p);

    for (int n = 1; n <= N; ++n) {
        BigIndex m = 0;
        for (int r = 1; r < n; ++r) {
            m += *std::max_element(plan.kappas[r - 1].entries.begin(),
                                   plan.kappas[r - 1].entries.end());
        }
        const KPredicate hump = [&w, m, hump_floor](BigIndex k) {
            return w.hump_ratio(m, k) >= hump_floor;
        };
        KappaBuildReport rep = build_kappa(n, plan.t, w, p, 1, hump, cap, caps.scan);
        plan.kappas.push_back(rep.kappa);
        plan.reports.push_back(std::move(rep));
    }
    recompute_layout(plan);
    return plan;
}

nlohmann::json EmbeddingPlan::to_json() const {
    nlohmann::json kappas_json = nlohmann::json::array();
    for (const Kappa& k : kappas) kappas_json.push_back(k.to_json());
    nlohmann::json shifts = nlohmann::json::array();
    for (BigIndex m : hump_shifts) shifts.push_back(to_string(m));
    nlohmann::json intervals = nlohmann::json::array();
    for (const Cell& c : cells) {
        intervals.push_back(nlohmann::json{{"level", c.n},
                                           {"index", c.i},
                                           {"first", to_string(c.first)},
                                           {"last", to_string(c.last)}});
    }
    nlohmann::json reports_json = nlohmann::json::array();
    for (const KappaBuildReport& r : reports) reports_json.push_back(r.to_json());
    return nlohmann::json{{"epsilon", epsilon},
                          {"t", t},
                          {"n_levels", N},
                          {"p", p},
                          {"weight", w.to_json()},
                          {"kappas", kappas_json},
                          {"hump_shifts", shifts},
                          {"intervals", intervals},
                          {"build_reports", reports_json}};
}

EmbeddingPlan EmbeddingPlan::from_json(const nlohmann::json& j) {
    EmbeddingPlan plan;
    plan.epsilon = j.at("epsilon").get<double>();
    plan.N = j.at("n_levels").get<int>();
    plan.p = j.at("p").get<double>();
    plan.w = Weight::from_json(j.at("weight"));
    for (const auto& kj : j.at("kappas")) plan.kappas.push_back(Kappa::from_json(kj));
    // Shifts and intervals are derived from the kappa entries; the serialized
    // copies are for external consumers and are rebuilt, not trusted.
    recompute_layout(plan);
    const double t_file = j.at("t").get<double>();
    if (std::fabs(t_file - plan.t) > 1e-9) {
        throw ParseError("plan t does not match sqrt(1+epsilon)");
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Cell vectors and functionals
// ---------------------------------------------------------------------------

Run y_run(const EmbeddingPlan& plan, int i, int n) {
    const EmbeddingPlan::Cell& c = plan.cell(i, n);
    return Run{c.k, c.unit};
}

FinSeq y_vector(const EmbeddingPlan& plan, int i, int n) {
    const EmbeddingPlan::Cell& c = plan.cell(i, n);
    if (c.k > kMaterializeGuard) {
        throw CapExceededError("interval too long to materialize; use y_run");
    }
    return FinSeq(c.first - 1, std::vector<double>(static_cast<size_t>(c.k), c.unit));
}

YFunctional y_functional(const EmbeddingPlan& plan, int i, int n) {
    const EmbeddingPlan::Cell& c = plan.cell(i, n);
    return YFunctional{c.i, c.n, c.first, c.last, c.scale, plan.w};
}

double YFunctional::coefficient(BigIndex j) const {
    if (j < first || j > last) return 0.0;
    return scale * w.at(j);
}

double YFunctional::apply(const SparseSeq& f) const {
    validate_sparse(f);
    double acc = 0.0;
    for (const SparseEntry& e : f) {
        if (e.pos < first || e.pos > last) continue;
        acc += w.at(e.pos) * e.value;
    }
    return scale * acc;
}

double YFunctional::apply(const FinSeq& f) const { return apply(sparse_from_finseq(f)); }

std::vector<std::pair<BigIndex, double>> YFunctional::table() const {
    if (last - first + 1 > kMaterializeGuard) {
        throw CapExceededError("interval too long to tabulate; use coefficient()");
    }
    std::vector<std::pair<BigIndex, double>> out;
    out.reserve(static_cast<size_t>(last - first + 1));
    for (BigIndex j = first; j <= last; ++j) out.push_back({j, scale * w.at(j)});
    return out;
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

LevelArray apply_P(const EmbeddingPlan& plan, const SparseSeq& f) {
    validate_sparse(f);
    if (!f.empty() && f.back().pos > plan.total_length()) {
        throw PreconditionError("support-out-of-range: f extends past the plan");
    }
    std::vector<double> acc(plan.cells.size(), 0.0);
    size_t ci = 0;
    for (const SparseEntry& e : f) {
        while (plan.cells[ci].last < e.pos) ++ci;
        acc[ci] += plan.w.at(e.pos) * e.value;
    }
    LevelArray out = LevelArray::zeros(plan.N);
    for (size_t c = 0; c < plan.cells.size(); ++c) {
        const EmbeddingPlan::Cell& cell = plan.cells[c];
        out.at(cell.i, cell.n) = cell.scale * acc[c];
    }
    return out;
}

LevelArray apply_P(const EmbeddingPlan& plan, const FinSeq& f) {
    return apply_P(plan, sparse_from_finseq(f));
}

LevelArray apply_P_runs(const EmbeddingPlan& plan, const RunVector& runs) {
    std::vector<double> acc(plan.cells.size(), 0.0);
    size_t ci = 0;
    BigIndex pos = 0;
    for (const Run& r : runs) {
        require(r.len >= 0, "run lengths must be nonnegative");
        if (r.len == 0) continue;
        BigIndex lo = pos + 1;
        const BigIndex hi = pos + r.len;
        pos = hi;
        if (r.value == 0.0) continue;  // positional filler
        while (ci < plan.cells.size() && plan.cells[ci].last < lo) ++ci;
        while (lo <= hi) {
            if (ci >= plan.cells.size()) {
                throw PreconditionError("support-out-of-range: runs extend past the plan");
            }
            const EmbeddingPlan::Cell& cell = plan.cells[ci];
            const BigIndex b = std::min(hi, cell.last);
            acc[ci] += r.value * plan.w.segment_sum(lo - 1, b);
            if (b == cell.last) ++ci;
            lo = b + 1;
        }
    }
    LevelArray out = LevelArray::zeros(plan.N);
    for (size_t c = 0; c < plan.cells.size(); ++c) {
        const EmbeddingPlan::Cell& cell = plan.cells[c];
        out.at(cell.i, cell.n) = cell.scale * acc[c];
    }
    return out;
}

RunVector apply_S(const EmbeddingPlan& plan, const LevelArray& x) {
    if (x.depth() != plan.N) throw ShapeError("level array does not match the plan depth");
    for (int n = 1; n <= plan.N; ++n) {
        if (x.levels[n - 1].size() != static_cast<size_t>(n)) {
            throw ShapeError("level array rows must have sizes 1..N");
        }
    }
    RunVector out;
    out.reserve(plan.cells.size());
    for (const EmbeddingPlan::Cell& c : plan.cells) {
        out.push_back(Run{c.k, x.at(c.i, c.n) * c.unit});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gamma blocks
// ---------------------------------------------------------------------------

nlohmann::json GammaSpec::to_json() const {
    nlohmann::json lens = nlohmann::json::array();
    for (BigIndex k : lengths) lens.push_back(to_string(k));
    nlohmann::json qs = nlohmann::json::array();
    for (BigIndex v : q) qs.push_back(to_string(v));
    return nlohmann::json{{"lengths", lens}, {"q", qs}, {"theta", theta}};
}

GammaSpec GammaSpec::from_json(const nlohmann::json& j) {
    std::vector<BigIndex> lens;
    for (const auto& e : j.at("lengths")) lens.push_back(big_index_from_string(e.get<std::string>()));
    GammaSpec g;
    g.lengths = std::move(lens);
    g.q.push_back(0);
    for (BigIndex k : g.lengths) g.q.push_back(g.q.back() + k);
    g.theta = j.at("theta").get<double>();
    return g;
}

GammaSpec certify_gamma(const std::vector<BigIndex>& lengths, const Weight& w) {
    require(!lengths.empty(), "gamma needs at least one block");
    GammaSpec g;
    g.lengths = lengths;
    g.q.push_back(0);
    double theta = std::numeric_limits<double>::infinity();
    for (BigIndex k : lengths) {
        require(k >= 1, "gamma block lengths must be positive");
        const BigIndex prev = g.q.back();
        if (prev > kBigIndexMax - k) throw CapExceededError("gamma length overflows the index range");
        g.q.push_back(prev + k);
        theta = std::min(theta, w.segment_sum(prev, prev + k) / w.prefix_sum(k));
    }
    g.theta = theta;
    return g;
}

GammaSpec gamma_from_path(const EmbeddingPlan& plan, const std::vector<int>& path) {
    require(!path.empty() && static_cast<int>(path.size()) <= plan.N,
            "path length must be in [1, N]");
    std::vector<BigIndex> lengths;
    for (size_t n = 1; n <= path.size(); ++n) {
        const int i = path[n - 1];
        require(i >= 1 && static_cast<size_t>(i) <= n, "path entry i_n must satisfy 1 <= i_n <= n");
        lengths.push_back(plan.cell(i, static_cast<int>(n)).k);
    }
    return certify_gamma(lengths, plan.w);
}

FinSeq p_gamma(const GammaSpec& gamma, const Weight& w, double p, const FinSeq& f) {
    require(p >= 1.0, "p must be >= 1");
    require(gamma.q.size() == gamma.lengths.size() + 1 && !gamma.lengths.empty(),
            "gamma spec is incomplete");
    const FinSeq g = f.canonical();
    const BigIndex end = g.end_index();
    if (end == 0) return FinSeq();

    size_t blocks = 0;
    while (blocks < gamma.lengths.size() && gamma.q[blocks] < end) ++blocks;
    require(gamma.q[blocks] >= end, "gamma blocks do not cover the support of f");

    std::vector<double> entries(blocks, 0.0);
    for (size_t n = 0; n < blocks; ++n) {
        const BigIndex lo = gamma.q[n];
        const BigIndex hi = gamma.q[n + 1];
        const double seg = w.segment_sum(lo, hi);
        const double ratio = seg / w.prefix_sum(gamma.lengths[n]);
        if (ratio < gamma.theta * (1.0 - 1e-12)) {
            throw PreconditionError("uncertified gamma: block ratio falls below theta");
        }
        double acc = 0.0;
        for (BigIndex j = std::max(lo + 1, g.offset() + 1); j <= std::min(hi, end); ++j) {
            acc += w.at(j) * g.at(j);
        }
        entries[n] = std::pow(w.prefix_sum(gamma.lengths[n]), 1.0 / p) * acc / seg;
    }
    return FinSeq(0, std::move(entries));
}

// ---------------------------------------------------------------------------
// Block domination
// ---------------------------------------------------------------------------

namespace {

double ellp(const std::vector<double>& v, double p) {
    double acc = 0.0;
    for (double x : v) acc += std::pow(std::fabs(x), p);
    return std::pow(acc, 1.0 / p);
}

}  // namespace

DominationVerdict block_domination_check(const std::vector<FinSeq>& blocks, double t,
                                         const std::vector<double>& coeffs, const Weight& w,
                                         double p) {
    require(blocks.size() == coeffs.size(), "one coefficient per block");
    require(t > 0.0, "t must be positive");
    std::vector<double> combined;
    for (const FinSeq& b : blocks) {
        const double norm = garling_norm(b, w, p).value;
        if (norm > t * (1.0 + 1e-12)) {
            throw PreconditionError("block norm exceeds t; domination hypothesis fails");
        }
    }
    for (size_t n = 0; n < blocks.size(); ++n) {
        for (double v : blocks[n].support_values()) combined.push_back(coeffs[n] * v);
    }
    const double lhs = garling_norm(FinSeq(0, std::move(combined)), w, p).value;
    DominationVerdict verdict;
    verdict.lhs_lower = verdict.lhs_upper = lhs;
    verdict.rhs = t * ellp(coeffs, p);
    verdict.slack = lhs - verdict.rhs;
    verdict.holds = verdict.slack <= kOperatorTol;
    return verdict;
}

DominationVerdict block_domination_check(const std::vector<RunVector>& blocks, double t,
                                         const std::vector<double>& coeffs, const Weight& w,
                                         double p, const RunNormOptions& opts) {
    require(blocks.size() == coeffs.size(), "one coefficient per block");
    require(t > 0.0, "t must be positive");
    RunVector combined;
    for (size_t n = 0; n < blocks.size(); ++n) {
        RunVector nz;
        for (const Run& r : blocks[n]) {
            if (r.len > 0 && r.value != 0.0) nz.push_back(r);
        }
        const NormEnclosure e = garling_norm_runs(nz, w, p, opts);
        if (e.upper > t * (1.0 + 1e-12)) {
            throw PreconditionError("block norm exceeds t; domination hypothesis fails");
        }
        for (const Run& r : nz) combined.push_back(Run{r.len, coeffs[n] * r.value});
    }
    const NormEnclosure e = garling_norm_runs(combined, w, p, opts);
    DominationVerdict verdict;
    verdict.lhs_lower = e.lower;
    verdict.lhs_upper = e.upper;
    verdict.rhs = t * ellp(coeffs, p);
    verdict.slack = e.upper - verdict.rhs;
    verdict.holds = verdict.slack <= kOperatorTol;
    return verdict;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

nlohmann::json CheckResult::to_json() const {
    return nlohmann::json{{"check", name},       {"trials", trials}, {"worst_slack", worst_slack},
                          {"tolerance", tolerance}, {"pass", pass},  {"note", note}};
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const CheckResult& c : checks) arr.push_back(c.to_json());
    return nlohmann::json{{"pass", pass},
                          {"seed", seed},
                          {"trials", trials},
                          {"distribution", distribution},
                          {"checks", arr}};
}

std::string VerificationReport::to_csv() const {
    std::string out = "check,trials,worst_slack,tolerance,pass\n";
    for (const CheckResult& c : checks) {
        out += csv_field(c.name) + "," + std::to_string(c.trials) + "," +
               format_double_17(c.worst_slack) + "," + format_double_17(c.tolerance) + "," +
               (c.pass ? "true" : "false") + "\n";
    }
    return out;
}

namespace {

// Shared norm evaluator: exact run DP below the threshold, otherwise a single
// fine count grid reused across every enclosure of the verification pass (the
// per-run-length capacity caches make repeat evaluations cheap).
class RunNormContext {
  public:
    RunNormContext(const Weight& w, double p, BigIndex total) : w_(w), p_(p), total_(total) {}

    NormEnclosure eval(const RunVector& runs) {
        RunVector nz;
        nz.reserve(runs.size());
        for (const Run& r : runs) {
            if (r.len > 0 && r.value != 0.0) nz.push_back(r);
        }
        if (nz.empty()) return NormEnclosure{0.0, 0.0, true};
        if (total_ <= kExactRunTotal) {
            RunNormOptions opts;
            opts.exact_threshold = kExactRunTotal;
            return garling_norm_runs(nz, w_, p_, opts);
        }
        if (!grid_) grid_ = make_run_grid(w_, 0, total_, 4096, 4e-4);
        return garling_norm_runs_on_grid(nz, *grid_, p_);
    }

  private:
    const Weight& w_;
    double p_;
    BigIndex total_;
    std::optional<RunGrid> grid_;
};

struct SlackTracker {
    double worst = -std::numeric_limits<double>::infinity();
    int trials = 0;

    void add(double slack) {
        worst = std::max(worst, slack);
        ++trials;
    }
};

CheckResult finish(const std::string& name, const SlackTracker& s, double tol,
                   std::string note = {}) {
    CheckResult c;
    c.name = name;
    c.trials = s.trials;
    c.worst_slack = s.worst;
    c.tolerance = tol;
    c.pass = s.worst <= tol;
    c.note = std::move(note);
    return c;
}

// All selections of one interval per level, provided the count stays small.
std::vector<std::vector<int>> enumerate_paths(int N, long cap) {
    long count = 1;
    for (int n = 2; n <= N; ++n) {
        count *= n;
        if (count > cap) return {};
    }
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<size_t>(N), 1);
    while (true) {
        out.push_back(cur);
        int n = N - 1;
        while (n >= 0) {
            if (cur[n] < n + 1) {
                ++cur[n];
                break;
            }
            cur[n] = 1;
            --n;
        }
        if (n < 0) break;
    }
    return out;
}

std::vector<int> random_path(int N, Rng& rng) {
    std::vector<int> path(static_cast<size_t>(N));
    for (int n = 1; n <= N; ++n) {
        path[n - 1] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    }
    return path;
}

// Deterministic battery coefficient for level n: alternating sign, magnitude
// cycling the four decades.
double battery_coeff(int n) {
    const int e = ((n * 7) % 5) - 2;
    return (n % 2 == 1 ? 1.0 : -1.0) * std::pow(10.0, e);
}

}  // namespace

VerificationReport verify_embedding(const EmbeddingPlan& plan_in, int trials,
                                    std::uint64_t seed) {
    require(trials >= 1, "trials must be >= 1");
    EmbeddingPlan local;
    const EmbeddingPlan* planp = &plan_in;
    if (plan_in.cells.empty() && plan_in.N > 0) {
        local = plan_in;
        recompute_layout(local);
        planp = &local;
    }
    const EmbeddingPlan& plan = *planp;
    const Weight& w = plan.w;
    const double p = plan.p;
    const double t = plan.t;
    const double hump_floor = std::pow(t, -p);

    VerificationReport report;
    report.seed = seed;
    report.trials = trials;
    report.distribution =
        "coefficients iid symmetric: uniform sign x log-uniform magnitude over 4 decades "
        "[1e-2, 1e2); sparse supports sample up to 6 positions per interval; plus a "
        "structured battery (interval spikes, boundary pairs, aligned blocks, level paths, "
        "unit and constant arrays); per-family sub-seeds derived from the master seed";

    RunNormContext ctx(w, p, plan.total_length());

    // ---- plan invariants -------------------------------------------------
    {
        SlackTracker s;
        std::string note;
        bool structural_ok = true;

        if (std::fabs(plan.t - std::sqrt(1.0 + plan.epsilon)) > 1e-12) structural_ok = false;
        if (static_cast<int>(plan.kappas.size()) != plan.N) structural_ok = false;

        // partition: consecutive intervals, lengths matching the tuples
        BigIndex expect = 0;
        for (const EmbeddingPlan::Cell& c : plan.cells) {
            if (c.first != expect + 1 || c.last - c.first + 1 != c.k) structural_ok = false;
            if (c.k != plan.kappas[c.n - 1].entries[c.i - 1]) structural_ok = false;
            if (c.last <= expect) structural_ok = false;  // strict lexicographic increase
            expect = c.last;
        }
        if (expect != plan.total_length()) structural_ok = false;
        s.add(structural_ok ? 0.0 : 1.0);

        // hump condition at every cell, at the level's shift
        for (const EmbeddingPlan::Cell& c : plan.cells) {
            const double ratio = w.hump_ratio(plan.hump_shifts[c.n - 1], c.k);
            s.add(hump_floor - ratio);
        }

        // block-tuple norms certified under t
        double worst_norm = 0.0;
        for (int n = 1; n <= plan.N; ++n) {
            const NormEnclosure e = ctx.eval(kappa_chain_runs(plan.kappas[n - 1], w, p));
            worst_norm = std::max(worst_norm, e.upper);
            s.add(e.upper - t);
        }

        // the hump shift dominates every per-path consumed length
        std::vector<std::vector<int>> paths = enumerate_paths(plan.N, 5040);
        std::string path_note;
        if (paths.empty()) {
            Rng rng(seed ^ kSaltPaths);
            for (int i = 0; i < 2000; ++i) paths.push_back(random_path(plan.N, rng));
            path_note = "paths=sampled(2000)";
        } else {
            path_note = "paths=exhaustive(" + std::to_string(paths.size()) + ")";
        }
        for (const auto& path : paths) {
            BigIndex q = 0;
            for (int n = 1; n <= plan.N; ++n) {
                if (q > plan.hump_shifts[n - 1]) structural_ok = false;
                q += plan.cell(path[n - 1], n).k;
            }
        }
        if (!structural_ok) s.add(1.0);

        note = path_note + " worst_kappa_norm=" + format_double_17(worst_norm);
        report.checks.push_back(finish("plan-invariants", s, 0.0, note));
    }

    // ---- biorthogonality -------------------------------------------------
    {
        SlackTracker s;
        for (const EmbeddingPlan::Cell& a : plan.cells) {
            for (const EmbeddingPlan::Cell& b : plan.cells) {
                if (a.i == b.i && a.n == b.n) {
                    const double c = a.scale * (a.unit * a.seg_w);
                    s.add(std::fabs(c - 1.0));
                } else {
                    // disjoint integer intervals: the pairing has no terms
                    const bool disjoint = a.last < b.first || b.last < a.first;
                    s.add(disjoint ? 0.0 : 1.0);
                }
            }
        }
        report.checks.push_back(finish("biorthogonality", s, kBiorthogonalityTol));
    }

    // ---- P bound ---------------------------------------------------------
    {
        SlackTracker s;
        Rng rng(seed ^ kSaltPBound);
        for (int trial = 0; trial < trials; ++trial) {
            SparseSeq f;
            for (const EmbeddingPlan::Cell& c : plan.cells) {
                if (c.k <= 6) {
                    for (BigIndex j = c.first; j <= c.last; ++j) f.push_back({j, 0.0});
                } else {
                    std::set<BigIndex> pos;
                    while (pos.size() < 6) pos.insert(c.first - 1 + rng.index_in(c.k));
                    for (BigIndex j : pos) f.push_back({j, 0.0});
                }
            }
            for (SparseEntry& e : f) e.value = rng.heavy();
            const double mixed = apply_P(plan, f).mixed_norm(p);
            const double norm = garling_norm_sparse(f, w, p).value;
            s.add(mixed - t * norm);
        }

        // battery: spikes at interval endpoints and midpoints
        for (const EmbeddingPlan::Cell& c : plan.cells) {
            for (BigIndex j : {c.first, c.first + (c.last - c.first) / 2, c.last}) {
                const SparseSeq f{{j, 1.0}};
                const double mixed = apply_P(plan, f).mixed_norm(p);
                s.add(mixed - t * garling_norm_sparse(f, w, p).value);
            }
        }
        // battery: boundary pairs across consecutive intervals
        for (size_t c = 0; c + 1 < plan.cells.size(); ++c) {
            const SparseSeq f{{plan.cells[c].last, 1.0}, {plan.cells[c + 1].first, -1.0}};
            const double mixed = apply_P(plan, f).mixed_norm(p);
            s.add(mixed - t * garling_norm_sparse(f, w, p).value);
        }
        // battery: aligned constant blocks, one interval at a time
        for (const EmbeddingPlan::Cell& c : plan.cells) {
            RunVector f;
            if (c.first > 1) f.push_back(Run{c.first - 1, 0.0});
            f.push_back(Run{c.k, 1.0});
            const double mixed = apply_P_runs(plan, f).mixed_norm(p);
            const NormEnclosure e = ctx.eval(f);
            s.add(mixed - t * e.lower);
        }
        // battery: one constant interval per level along paths (the extremal
        // family for the analysis bound)
        std::vector<std::vector<int>> paths = enumerate_paths(plan.N, 120);
        if (paths.empty()) {
            paths.push_back(std::vector<int>(static_cast<size_t>(plan.N), 1));
            std::vector<int> diag(static_cast<size_t>(plan.N));
            for (int n = 1; n <= plan.N; ++n) diag[n - 1] = n;
            paths.push_back(diag);
            for (int i = 0; i < 48; ++i) paths.push_back(random_path(plan.N, rng));
        }
        for (const auto& path : paths) {
            RunVector f;
            BigIndex pos = 0;
            for (int n = 1; n <= plan.N; ++n) {
                const EmbeddingPlan::Cell& c = plan.cell(path[n - 1], n);
                if (c.first - 1 > pos) f.push_back(Run{c.first - 1 - pos, 0.0});
                f.push_back(Run{c.k, battery_coeff(n)});
                pos = c.last;
            }
            const double mixed = apply_P_runs(plan, f).mixed_norm(p);
            const NormEnclosure e = ctx.eval(f);
            s.add(mixed - t * e.lower);
        }
        report.checks.push_back(finish("p-bound", s, kOperatorTol));
    }

    // ---- S bound, S lower bound, P o S -----------------------------------
    {
        SlackTracker s_upper, s_lower, s_compose;
        Rng rng(seed ^ kSaltSBound);
        const auto run_case = [&](const LevelArray& x) {
            const RunVector sx = apply_S(plan, x);
            const double mixed = x.mixed_norm(p);
            const NormEnclosure e = ctx.eval(sx);
            s_upper.add(e.upper - t * mixed);
            s_lower.add(mixed / t - e.lower);
            const LevelArray back = apply_P_runs(plan, sx);
            double worst = 0.0;
            for (int n = 1; n <= plan.N; ++n) {
                for (int i = 1; i <= n; ++i) {
                    const double d = std::fabs(back.at(i, n) - x.at(i, n));
                    worst = std::max(worst, d / std::max(1.0, std::fabs(x.at(i, n))));
                }
            }
            s_compose.add(worst);
        };

        for (int trial = 0; trial < trials; ++trial) {
            LevelArray x = LevelArray::zeros(plan.N);
            for (auto& level : x.levels) {
                for (double& v : level) v = rng.heavy();
            }
            run_case(x);
        }
        // battery: unit arrays, the all-ones array, level-constant and
        // alternating-sign arrays
        for (const EmbeddingPlan::Cell& c : plan.cells) {
            run_case(LevelArray::unit(plan.N, c.i, c.n));
        }
        {
            LevelArray ones = LevelArray::zeros(plan.N);
            for (auto& level : ones.levels) std::fill(level.begin(), level.end(), 1.0);
            run_case(ones);
            LevelArray constant = LevelArray::zeros(plan.N);
            LevelArray alternating = LevelArray::zeros(plan.N);
            for (int n = 1; n <= plan.N; ++n) {
                for (int i = 1; i <= n; ++i) {
                    constant.at(i, n) = battery_coeff(n);
                    alternating.at(i, n) = (i % 2 == 1 ? 1.0 : -1.0) * std::fabs(battery_coeff(n));
                }
            }
            run_case(constant);
            run_case(alternating);
        }
        report.checks.push_back(finish("s-bound", s_upper, kOperatorTol));
        report.checks.push_back(finish("s-lower", s_lower, kOperatorTol));
        report.checks.push_back(finish("ps-identity", s_compose, kOperatorTol));
    }

    // ---- block domination (levels y_n against the ell_p basis) -----------
    {
        SlackTracker s;
        Rng rng(seed ^ kSaltDomination);
        const auto run_case = [&](const std::vector<double>& b) {
            LevelArray x = LevelArray::zeros(plan.N);
            for (int n = 1; n <= plan.N; ++n) {
                for (int i = 1; i <= n; ++i) x.at(i, n) = b[static_cast<size_t>(n - 1)];
            }
            const NormEnclosure e = ctx.eval(apply_S(plan, x));
            s.add(e.upper - t * ellp(b, p));
        };
        for (int trial = 0; trial < trials; ++trial) {
            std::vector<double> b(static_cast<size_t>(plan.N));
            for (double& v : b) v = rng.heavy();
            run_case(b);
        }
        for (int n = 1; n <= plan.N; ++n) {
            std::vector<double> b(static_cast<size_t>(plan.N), 0.0);
            b[static_cast<size_t>(n - 1)] = 1.0;
            run_case(b);
        }
        run_case(std::vector<double>(static_cast<size_t>(plan.N), 1.0));
        report.checks.push_back(finish("block-domination", s, kOperatorTol));
    }

    std::sort(report.checks.begin(), report.checks.end(),
              [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
    report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const CheckResult& c) { return c.pass; });
    return report;
}

}  // namespace garling
