#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "garling/big_index.hpp"
#include "garling/construction.hpp"
#include "garling/finseq.hpp"
#include "garling/norms.hpp"
#include "garling/weights.hpp"
#include "json.hpp"

namespace garling {

// ---------------------------------------------------------------------------
// The embedding witness: a triangular family of consecutive index intervals
// J_{i,n} (1 <= i <= n <= N) carrying normalized indicator vectors y_{i,n}
// and averaging functionals y*_{i,n}, together with the analysis operator
//   P(f)   = (y*_{i,n}(f))_{i<=n},
// the synthesis operator
//   S(x)   = sum x_{i,n} y_{i,n},
// and the block-averaging map p_gamma.  P o S is the identity, and both
// operators are bounded by t = sqrt(1 + epsilon); verify_embedding certifies
// all of it numerically on seeded random and structured inputs.
//
// Interval lengths come from the recursive block-tuple construction, with the
// per-level hump condition
//   (W_{m_n + k} - W_{m_n}) / W_k >= t^(-p),   m_n = sum_{r<n} max_i k_{i,r}
// folded into the search as its extra predicate.  The condition guarantees
// that along any choice of one interval per level, the selection weights
// retain at least a t^(-p) share of the full prefix mass, which is exactly
// what the operator bounds consume.
// ---------------------------------------------------------------------------

// Sparse finitely supported sequence: strictly increasing 1-based positions.
// Index positions reach ~1e30 in deep plans, far past any dense layout; norms
// see only the value sequence (spreading invariance), functionals see the
// ambient weights at the stored positions.
struct SparseEntry {
    BigIndex pos;
    double value;
};
using SparseSeq = std::vector<SparseEntry>;

SparseSeq sparse_from_finseq(const FinSeq& f);

// Garling norm of a sparse sequence: equals the norm of the compressed value
// vector (selections only see values in position order).  Exact DP; support
// capped like garling_norm.
GarlingResult garling_norm_sparse(const SparseSeq& f, const Weight& w, double p);

// Triangular coefficient array ((x_{i,n})_{i=1..n})_{n=1..N}.
struct LevelArray {
    std::vector<std::vector<double>> levels;  // levels[n-1] has n entries

    static LevelArray zeros(int N);
    static LevelArray unit(int N, int i, int n);

    int depth() const { return static_cast<int>(levels.size()); }
    double& at(int i, int n);        // 1-based, i <= n
    double at(int i, int n) const;
    bool same_shape(const LevelArray& o) const;

    // (sum_n (max_i |x_{i,n}|)^p)^(1/p)
    double mixed_norm(double p) const;

    nlohmann::json to_json() const;
    static LevelArray from_json(const nlohmann::json& j);
};

struct PlanCaps {
    BigIndex k_cap = 0;   // 0 -> default cap (1e36) per block scan
    ScanOptions scan{};   // schedule/certification options for the searches
};

BigIndex default_plan_cap();  // 1e36

struct EmbeddingPlan {
    double epsilon = 0.0;
    double t = 0.0;  // sqrt(1 + epsilon)
    int N = 0;
    Weight w = Weight::power(1.0);  // placeholder until built or loaded
    double p = 1.0;
    std::vector<Kappa> kappas;          // kappas[n-1].entries = (k_{1,n},...,k_{n,n})
    std::vector<BigIndex> hump_shifts;  // m_n = sum_{r<n} max_i k_{i,r}
    // boundaries[n-1][i] = m_{i,n} for i = 0..n; m_{0,n} continues the previous
    // level, so the intervals tile [1, m_{N,N}] in lexicographic (n, i) order.
    std::vector<std::vector<BigIndex>> boundaries;
    std::vector<KappaBuildReport> reports;  // build certificates (empty after load)

    // Derived per-interval data, rebuilt by recompute_layout.
    struct Cell {
        int i = 0, n = 0;       // 1-based
        BigIndex first = 0;     // 1 + m_{i-1,n}
        BigIndex last = 0;      // m_{i,n}
        BigIndex k = 0;         // interval length k_{i,n}
        double wk = 0.0;        // W_k
        double seg_w = 0.0;     // sum of w_j over the interval
        double unit = 0.0;      // W_k^(-1/p), the indicator normalization
        double scale = 0.0;     // W_k^(1/p) / seg_w, the functional factor
    };
    std::vector<Cell> cells;  // lexicographic (n, i)

    BigIndex total_length() const;  // m_{N,N}
    const Cell& cell(int i, int n) const;

    nlohmann::json to_json() const;
    static EmbeddingPlan from_json(const nlohmann::json& j);
};

// Rebuild boundaries and per-cell coefficients from (w, p, kappas).  The
// kappa entries are the authoritative data; everything else is derived.
void recompute_layout(EmbeddingPlan& plan);

// Level n = 1..N: compute the hump shift m_n from the previous levels, then
// run the recursive block construction with the hump predicate at m_n as the
// extra acceptance gate (the seed included).  Cap overruns propagate.
EmbeddingPlan build_embedding_plan(double epsilon, int N, const Weight& w, double p,
                                   const PlanCaps& caps = {});

// y_{i,n} = W_k^(-1/p) * indicator of J_{i,n}; norm exactly 1.
Run y_run(const EmbeddingPlan& plan, int i, int n);          // structural form
FinSeq y_vector(const EmbeddingPlan& plan, int i, int n);    // materialized, guarded

// y*_{i,n}: f -> W_k^(1/p) (sum_J w_j)^(-1) sum_{j in J} w_j a_j, held as the
// coefficient rule j -> scale * w_j on J (lazily evaluated; a literal table
// is available below a materialization guard).
struct YFunctional {
    int i = 0, n = 0;
    BigIndex first = 0, last = 0;
    double scale = 0.0;
    Weight w = Weight::power(1.0);  // placeholder; factories fill the real weight

    double coefficient(BigIndex j) const;        // 0 outside [first, last]
    double apply(const SparseSeq& f) const;
    double apply(const FinSeq& f) const;
    std::vector<std::pair<BigIndex, double>> table() const;  // guarded length
};
YFunctional y_functional(const EmbeddingPlan& plan, int i, int n);

// Analysis operator.  Support must sit inside [1, total_length].
LevelArray apply_P(const EmbeddingPlan& plan, const SparseSeq& f);
LevelArray apply_P(const EmbeddingPlan& plan, const FinSeq& f);
// Run-structured front end: runs cover positions 1.. consecutively (zero-value
// runs are positional filler).  This is the path P o S takes.
LevelArray apply_P_runs(const EmbeddingPlan& plan, const RunVector& runs);

// Synthesis operator: blockwise-constant output, one run per interval.
RunVector apply_S(const EmbeddingPlan& plan, const LevelArray& x);

// ---------------------------------------------------------------------------
// Block averaging map p_gamma
// ---------------------------------------------------------------------------

// Consecutive blocks of lengths (k_n) with partial sums q_n and the certified
// ratio bound theta <= min_n (W_{q_n} - W_{q_{n-1}}) / W_{k_n}.
struct GammaSpec {
    std::vector<BigIndex> lengths;
    std::vector<BigIndex> q;  // q[0] = 0, q[n] = q[n-1] + lengths[n-1]
    double theta = 0.0;

    nlohmann::json to_json() const;
    static GammaSpec from_json(const nlohmann::json& j);
};

// theta = exact min of the block ratios (they are <= 1 and > 0).
GammaSpec certify_gamma(const std::vector<BigIndex>& lengths, const Weight& w);

// One interval per level along path[n-1] = i_n; the hump condition makes the
// resulting theta >= t^(-p).
GammaSpec gamma_from_path(const EmbeddingPlan& plan, const std::vector<int>& path);

// Entry n: W_{k_n}^(1/p) (sum_{block n} w_j)^(-1) sum_{block n} w_j a_j over
// the blocks meeting the support.  Output lands in ell_p with
// ||p_gamma(f)||_p <= theta^(-1/p) ||f||_g.  Re-checks the ratio invariant on
// the blocks in range and refuses uncertified specs.
FinSeq p_gamma(const GammaSpec& gamma, const Weight& w, double p, const FinSeq& f);

// ---------------------------------------------------------------------------
// Block domination and verification
// ---------------------------------------------------------------------------

struct DominationVerdict {
    double lhs_lower = 0.0;  // enclosure of ||sum b_n block_n||_g
    double lhs_upper = 0.0;
    double rhs = 0.0;        // t * (sum |b_n|^p)^(1/p)
    double slack = 0.0;      // lhs_upper - rhs
    bool holds = false;      // slack <= 1e-9
};

// Blocks are placed on consecutive supports in list order; every block must
// itself have Garling norm <= t (precondition).
DominationVerdict block_domination_check(const std::vector<FinSeq>& blocks, double t,
                                         const std::vector<double>& coeffs,
                                         const Weight& w, double p);
DominationVerdict block_domination_check(const std::vector<RunVector>& blocks, double t,
                                         const std::vector<double>& coeffs,
                                         const Weight& w, double p,
                                         const RunNormOptions& opts = {});

struct CheckResult {
    std::string name;
    int trials = 0;
    double worst_slack = 0.0;  // max over trials of (measured - allowed); <= 0 is margin
    double tolerance = 0.0;
    bool pass = false;
    std::string note;

    nlohmann::json to_json() const;
};

struct VerificationReport {
    bool pass = false;
    std::uint64_t seed = 0;
    int trials = 0;
    std::string distribution;  // trial-coefficient law, recorded for reproducibility
    std::vector<CheckResult> checks;

    nlohmann::json to_json() const;
    std::string to_csv() const;  // columns: check,trials,worst_slack,tolerance,pass
};

// Re-validates the plan invariants (partition, hump condition, block-tuple
// norms, shift monotonicity), then exercises biorthogonality, the P and S
// bounds, P o S = Id, the S lower bound, and block domination on `trials`
// seeded random inputs plus a structured battery.  Sub-streams are derived
// from `seed` per check family, so results do not depend on scheduling.
VerificationReport verify_embedding(const EmbeddingPlan& plan, int trials,
                                    std::uint64_t seed);

}  // namespace garling
