#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "garling/norms.hpp"
#include "json.hpp"

namespace garling {

// ---------------------------------------------------------------------------
// Finite bases
// ---------------------------------------------------------------------------
//
// A basis of the d-dimensional coordinate space, given by the coordinate
// vectors of its elements, together with the ambient norm in which all gauge
// quantities are measured.  An element f = sum_j a_j x_j is handled through
// its coefficient vector a; `basis_coordinates` synthesizes the coordinate
// vector, and coordinate projections S_A zero the coefficients outside A.

struct FiniteBasis {
    // When `identity` is set the basis vectors are the coordinate unit vectors
    // and `vectors` stays empty, so dimensions up to ~10^4 cost no storage.
    bool identity = false;
    int dim = 0;
    std::vector<std::vector<double>> vectors;  // vectors[j][k]: coordinate k+1 of x_{j+1}
    SpaceNorm ambient = SpaceNorm::sup();
    std::string label;
    // s such that the first m <= s basis vectors span the first m coordinates.
    std::optional<int> full_coordinate_span_prefix;

    int dimension() const { return identity ? dim : static_cast<int>(vectors.size()); }

    // kappa_1 condition estimate of the change-of-basis matrix.  Throws
    // PreconditionError when the matrix (or, when a span prefix is declared,
    // one of its leading blocks) is numerically singular.
    double condition_estimate() const;

    nlohmann::json to_json() const;
};

// Coordinate unit vectors e_1..e_d under the given ambient norm.
FiniteBasis unit_vector_basis(int d, SpaceNorm ambient);

// s_j = e_1 + ... + e_j for j = 1..n under the sup norm; the first m vectors
// span the first m coordinates for every m <= n.
FiniteBasis summing_basis(int n);

// Concatenated summing bases of sizes 2^1, ..., 2^levels under the mixed norm
// with those block sizes: the ell_p sum of per-block sups.
FiniteBasis besov_sum_basis(int levels, double p);

// Coordinates of sum_j coeffs[j-1] x_j (length = dimension).
std::vector<double> basis_coordinates(const FiniteBasis& basis,
                                      const std::vector<double>& coeffs);

// Ambient norm of the element with the given basis coefficients.
double basis_norm(const FiniteBasis& basis, const std::vector<double>& coeffs);

// S_A: zero every coefficient whose 1-based index is outside A.
std::vector<double> coordinate_projection(const FiniteBasis& basis, const std::vector<int>& A,
                                          const std::vector<double>& coeffs);

// ---------------------------------------------------------------------------
// Conditionality gauges
// ---------------------------------------------------------------------------
//
//   k_m = sup { |S_A f| / |f| : |A| <= m, any f != 0 }
//   L_m = sup { |S_A f| / |f| : coefficient support of f inside [1,m] }
//
// Exact mode maximizes over the enumerable extreme points of the relevant
// unit ball (sign vectors for a sup ambient; single-block sign vectors for a
// mixed ambient with p = 1) and over all admissible projection sets; the
// extreme-point reduction is valid because the numerator is a convex function
// of f and the declared span prefix identifies coefficient supports with
// coordinate supports.  Probe mode runs a seeded multi-start ascent and
// returns the best ratio found, a genuine lower bound certified by its
// witness.  Results carry the witness so every reported value can be
// reproduced by re-evaluating two norms.

struct GaugeWitness {
    std::vector<double> coeffs;  // basis coefficients of f
    std::vector<int> set;        // projection set A, ascending 1-based indices
    double ratio = 0.0;          // |S_A f| / |f| at the time of recording

    nlohmann::json to_json() const;
    static GaugeWitness from_json(const nlohmann::json& j);
};

// Recompute |S_A f| / |f| for a stored witness through the generic norm path.
double reevaluate_witness(const FiniteBasis& basis, const GaugeWitness& w);

enum class GaugeMode { Exact, Probe };

struct ProbeOptions {
    std::uint64_t seed = 1729;
    int restarts = 64;
    int iterations = 40;
};

struct GaugeEntry {
    int m = 0;
    double value = 0.0;
    std::string method;  // "exact-enumeration" | "probe-lower-bound"
    GaugeWitness witness;

    nlohmann::json to_json() const;
};

// Exact preconditions: declared span prefix >= m, sup-type ambient on the
// spanned prefix (sup, or mixed with p = 1), and m <= 14.  Violations raise
// PreconditionError("mode-unsupported: ...").  Unit-vector bases short-cut to
// the exact value 1 under every lattice ambient.
GaugeEntry L_m(const FiniteBasis& basis, int m, GaugeMode mode, const ProbeOptions& opts = {});

// Same search over |A| <= m with f free in the whole space; exact mode
// additionally requires dimension <= 12.
GaugeEntry k_m(const FiniteBasis& basis, int m, GaugeMode mode, const ProbeOptions& opts = {});

struct GaugeReport {
    std::string basis_label;
    std::string gauge_kind;  // "L" | "k"
    std::vector<GaugeEntry> entries;

    nlohmann::json to_json() const;
    // Columns: basis, m, gauge_kind, value, method, witness_json.
    std::string to_csv() const;
};

// Entries for m = 1..m_max in order.
GaugeReport gauge_report(const FiniteBasis& basis, const std::string& gauge_kind, int m_max,
                         GaugeMode mode, const ProbeOptions& opts = {});

// ---------------------------------------------------------------------------
// Greedy-approximation quantities
// ---------------------------------------------------------------------------

// phi_m = sup_{|A| <= m} |sum_{j in A} x_j|.  Spreading-invariant unit-vector
// ambients reduce to A = [1,m]; otherwise subsets are enumerated for
// dimension <= 20 and sampled beyond that.
double fundamental_fn(const FiniteBasis& basis, int m);

// The m indices with largest |coefficient|, ties to the smallest index;
// returned ascending.  The result G satisfies |a_n| >= |a_j| for every
// n in G, j outside G.
std::vector<int> greedy_set(const std::vector<double>& coeffs, int m);

struct AlmostGreedyWitness {
    std::vector<double> coeffs;
    std::vector<int> greedy;      // G
    std::vector<int> competitor;  // A with |A| = |G|
    double numerator = 0.0;       // |f - S_G f|
    double denominator = 0.0;     // |f - S_A f|

    nlohmann::json to_json() const;
};

struct AlmostGreedyEstimate {
    double estimate = 0.0;
    AlmostGreedyWitness witness;

    nlohmann::json to_json() const;
};

// Estimates sup |f - S_G f| / |f - S_A f| over `samples` random elements,
// every greedy-set size, and every competitor set of the same size
// (exhaustive for dimension <= 16, sampled beyond).  Denominators below 1e-12
// are skipped.  The estimate is always >= 1 because G competes against
// itself.
AlmostGreedyEstimate almost_greedy_ratio(const FiniteBasis& basis, int samples,
                                         std::uint64_t seed);

// sup_{|A| = m} |sum_A x_j| / inf_{|B| = m} |sum_B x_j| with all signs +1;
// `with_signs` additionally ranges both extrema over sign patterns
// (m <= 14).  Enumeration requires dimension <= 20; spreading-invariant
// unit-vector ambients return exactly 1.
double democracy_ratio(const FiniteBasis& basis, int m, bool with_signs = false);

// ---------------------------------------------------------------------------
// Growth inspection
// ---------------------------------------------------------------------------

struct GrowthRow {
    int m = 0;
    double gauge = 0.0;
    double over_log = 0.0;  // gauge / log m (NaN at m = 1)
    double over_m = 0.0;    // gauge / m
};

// Desk-scale growth heuristics, pinned so the flags are reproducible:
//   log_tail_bounded:  over the rows with m >= 2, the last gauge/log m value
//                      is <= kGrowthTailSlack times the value at the start of
//                      the trailing half-window (a flat or falling tail).
//   linear_floor:      min over all rows of gauge/m >= kGrowthLinearFloor.
inline constexpr double kGrowthTailSlack = 1.05;
inline constexpr double kGrowthLinearFloor = 0.4;

struct GrowthTable {
    std::string label;
    std::vector<GrowthRow> rows;
    bool log_tail_bounded = false;
    bool linear_floor = false;

    nlohmann::json to_json() const;
    // Columns: m, gauge, gauge_over_log_m, gauge_over_m.
    std::string to_csv() const;
};

// Growth table for an already-computed gauge report.
GrowthTable log_conditionality_check(const GaugeReport& report);

}  // namespace garling
