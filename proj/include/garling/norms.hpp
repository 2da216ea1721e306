#pragma once

#include <optional>
#include <vector>

#include "garling/big_index.hpp"
#include "garling/finseq.hpp"
#include "garling/weights.hpp"

namespace garling {

// ---------------------------------------------------------------------------
// Norm descriptors
// ---------------------------------------------------------------------------

struct SpaceNorm {
    enum class Kind { Garling, Lorentz, Ellp, Sup, Mixed };

    Kind kind;
    std::optional<Weight> weight;       // Garling / Lorentz
    double p = 1.0;                     // all but Sup
    std::vector<BigIndex> block_sizes;  // Mixed: ell_p sum of per-block sups

    static SpaceNorm garling(Weight w, double p);
    static SpaceNorm lorentz(Weight w, double p);
    static SpaceNorm ellp(double p);
    static SpaceNorm sup();
    static SpaceNorm mixed(double p, std::vector<BigIndex> block_sizes);

    static SpaceNorm from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    std::string label() const;
};

// ---------------------------------------------------------------------------
// Exact norms on finitely supported sequences
// ---------------------------------------------------------------------------

struct GarlingResult {
    double value;
    // 0-based ordinals into the nonzero support, strictly increasing; the j-th
    // chosen entry is billed weight w_{j+1}.  Ties in the selection DP break
    // toward not selecting, so the witness is deterministic.
    std::vector<size_t> witness;
};

// sup over strictly increasing selections of (sum |a_sel(j)|^p w_j)^(1/p).
// Quadratic DP with backtracking; support capped at 20000 entries.
GarlingResult garling_norm(const FinSeq& f, const Weight& w, double p);

// Same supremum with the weight row shifted: the j-th chosen entry is billed
// w_{j+shift}.  Returns the p-th POWER of the supremum (no root), which is the
// quantity the block searches consume.
double shifted_garling(const FinSeq& f, const Weight& w, double p, BigIndex shift);

// Non-increasing rearrangement paired with w_1, w_2, ...
double lorentz_norm(const FinSeq& f, const Weight& w, double p);

double ellp_norm(const FinSeq& f, double p);
double sup_norm(const FinSeq& f);

// Dispatch on a SpaceNorm descriptor.  Mixed requires the coordinates of f to
// fit the declared block layout.
double eval_norm(const FinSeq& f, const SpaceNorm& norm);

// Independent oracle: enumerate every subset of the support (<= 20 entries).
double brute_force_garling(const FinSeq& f, const Weight& w, double p);

// ---------------------------------------------------------------------------
// Run-structured evaluation
// ---------------------------------------------------------------------------
//
// Block constructions produce concatenations of constant runs whose lengths
// overflow memory (and sometimes 64-bit integers), so the Garling norm is
// evaluated structurally:
//   * below `exact_threshold` total length: run-compressed sliding-window
//     maximum DP, mathematically exact;
//   * above it: a two-sided certified enclosure from a monotone DP on a
//     geometric count grid (lower = value of an explicit feasible selection,
//     upper = a relaxation that dominates every selection).

struct Run {
    BigIndex len;
    double value;
};

using RunVector = std::vector<Run>;

struct NormEnclosure {
    double lower;
    double upper;
    bool exact;  // lower == upper up to roundoff (exact DP path)

    double mid() const { return 0.5 * (lower + upper); }
};

struct RunNormOptions {
    BigIndex shift = 0;                      // bill the j-th pick weight w_{j+shift}
    BigIndex exact_threshold = BigIndex{1} << 21;
    double grid_ratio = 1e-3;                // geometric cell growth above the dense prefix
    BigIndex dense = 1024;                   // exact integer grid prefix
};

// Count-axis grid with cached weight prefix sums, reusable across evaluations
// that share (weight, shift); covers totals up to its `limit`.
struct RunGrid {
    Weight w;
    BigIndex shift = 0;
    BigIndex limit = 0;
    std::vector<BigIndex> points;
    std::vector<double> omega;        // W_{shift + points[i]} - W_shift
    std::vector<double> omega_floor;  // same at the smallest count inside cell i
    // Per-run-length cache: best_take[i] = largest weight mass a run of length
    // L can collect starting just above cell i's floor. Grown lazily by the
    // evaluator; keyed by L. Not synchronized -- grids are per-thread scratch.
    mutable std::vector<std::pair<BigIndex, std::vector<double>>> best_take_cache;
};

RunGrid make_run_grid(const Weight& w, BigIndex shift, BigIndex limit, BigIndex dense,
                      double ratio);

NormEnclosure garling_norm_runs(const RunVector& runs, const Weight& w, double p,
                                const RunNormOptions& opts = {});

// Grid-reusing variant (enclosure path only; total length may not exceed grid.limit).
NormEnclosure garling_norm_runs_on_grid(const RunVector& runs, const RunGrid& grid, double p);

RunVector runs_from_finseq(const FinSeq& f);
FinSeq finseq_from_runs(const RunVector& runs);  // materializes; guarded length

}  // namespace garling
