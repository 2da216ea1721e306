#include "garling/conditionality.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>

#include "garling/errors.hpp"
#include "garling/report.hpp"
#include "garling/rng.hpp"

namespace garling {
namespace {

constexpr std::uint64_t kGold = 0x9e3779b97f4a7c15ULL;  // sub-seed stride
constexpr double kDenFloor = 1e-12;
constexpr int kExactSubsetBits = 12;   // inner exact set search up to 2^12 masks
constexpr int kSampledSubsets = 256;   // per-size competitor samples beyond caps
constexpr int kDenseDimCap = 2048;     // dense-vector basis storage cap

// ---------------------------------------------------------------------------
// Dense LU (partial pivoting) for the change-of-basis solves
// ---------------------------------------------------------------------------

double matrix_scale(const std::vector<double>& m) {
    double s = 1.0;
    for (double x : m) s = std::max(s, std::fabs(x));
    return s;
}

struct Lu {
    int n = 0;
    std::vector<double> a;  // row-major, L below the diagonal, U on and above
    std::vector<int> piv;

    bool factor(std::vector<double> mat, int nn) {
        n = nn;
        a = std::move(mat);
        piv.assign(n, 0);
        const double tol = 1e-12 * matrix_scale(a);
        for (int c = 0; c < n; ++c) {
            int p = c;
            for (int r = c + 1; r < n; ++r)
                if (std::fabs(a[r * n + c]) > std::fabs(a[p * n + c])) p = r;
            piv[c] = p;
            if (p != c)
                for (int j = 0; j < n; ++j) std::swap(a[c * n + j], a[p * n + j]);
            const double d = a[c * n + c];
            if (std::fabs(d) <= tol) return false;
            for (int r = c + 1; r < n; ++r) {
                const double f = (a[r * n + c] /= d);
                for (int j = c + 1; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
            }
        }
        return true;
    }

    void solve(const double* b, double* x) const {
        std::copy(b, b + n, x);
        for (int c = 0; c < n; ++c)
            if (piv[c] != c) std::swap(x[c], x[piv[c]]);
        for (int c = 0; c < n; ++c)
            for (int r = c + 1; r < n; ++r) x[r] -= a[r * n + c] * x[c];
        for (int c = n - 1; c >= 0; --c) {
            for (int j = c + 1; j < n; ++j) x[c] -= a[c * n + j] * x[j];
            x[c] /= a[c * n + c];
        }
    }
};

// Row-major n x n leading block; column j holds the first n coordinates of
// basis vector j+1.
std::vector<double> leading_block(const FiniteBasis& b, int n) {
    std::vector<double> m(static_cast<size_t>(n) * n, 0.0);
    for (int c = 0; c < n; ++c) {
        if (b.identity) {
            m[static_cast<size_t>(c) * n + c] = 1.0;
        } else {
            for (int r = 0; r < n; ++r) m[static_cast<size_t>(r) * n + c] = b.vectors[c][r];
        }
    }
    return m;
}

// out += s * x_{j+1} (out spans the full coordinate space).
void axpy_col(const FiniteBasis& b, int j, double s, std::vector<double>& out) {
    if (b.identity) {
        out[j] += s;
    } else {
        const std::vector<double>& col = b.vectors[j];
        for (size_t k = 0; k < col.size(); ++k) out[k] += s * col[k];
    }
}

// Ambient norm of the first n coordinates of v (zeros beyond).  Sup and mixed
// are evaluated in place; the sequence-space kinds go through the generic
// FinSeq path.
double prefix_norm(const SpaceNorm& nrm, const double* v, int n) {
    switch (nrm.kind) {
        case SpaceNorm::Kind::Sup: {
            double mx = 0.0;
            for (int k = 0; k < n; ++k) mx = std::max(mx, std::fabs(v[k]));
            return mx;
        }
        case SpaceNorm::Kind::Mixed: {
            double acc = 0.0;
            int start = 0;
            for (BigIndex bs : nrm.block_sizes) {
                if (start >= n) break;
                const int len = std::min<int>(static_cast<int>(bs), n - start);
                double mx = 0.0;
                for (int k = 0; k < len; ++k) mx = std::max(mx, std::fabs(v[start + k]));
                acc += std::pow(mx, nrm.p);
                start += static_cast<int>(bs);
            }
            if (start < n) {
                BigIndex span = 0;
                for (BigIndex bs : nrm.block_sizes) span += bs;
                if (span < n) throw ShapeError("mixed ambient blocks do not cover the coordinates");
            }
            return std::pow(acc, 1.0 / nrm.p);
        }
        case SpaceNorm::Kind::Ellp: {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += std::pow(std::fabs(v[k]), nrm.p);
            return std::pow(acc, 1.0 / nrm.p);
        }
        default:
            return eval_norm(FinSeq(0, std::vector<double>(v, v + n)), nrm);
    }
}

bool sup_type_ambient(const SpaceNorm& nrm) {
    return nrm.kind == SpaceNorm::Kind::Sup ||
           (nrm.kind == SpaceNorm::Kind::Mixed && nrm.p == 1.0);
}

// Extreme points of the ambient unit ball restricted to the first n
// coordinates, as coordinate vectors with a deterministic rank:
//   sup ambient:       every sign vector;
//   mixed with p = 1:  sign vectors carried by a single (clipped) block.
void for_each_extreme(const SpaceNorm& nrm, int n,
                      const std::function<void(const std::vector<double>&, std::uint64_t)>& fn) {
    if (nrm.kind == SpaceNorm::Kind::Sup) {
        std::vector<double> c(n);
        const std::uint64_t total = std::uint64_t{1} << n;
        for (std::uint64_t r = 0; r < total; ++r) {
            for (int k = 0; k < n; ++k) c[k] = ((r >> k) & 1) ? -1.0 : 1.0;
            fn(c, r);
        }
        return;
    }
    std::uint64_t rank = 0;
    int start = 0;
    for (BigIndex bs : nrm.block_sizes) {
        if (start >= n) break;
        const int len = std::min<int>(static_cast<int>(bs), n - start);
        std::vector<double> c(n, 0.0);
        const std::uint64_t total = std::uint64_t{1} << len;
        for (std::uint64_t r = 0; r < total; ++r) {
            for (int k = 0; k < len; ++k) c[start + k] = ((r >> k) & 1) ? -1.0 : 1.0;
            fn(c, rank++);
        }
        start += static_cast<int>(bs);
    }
    if (start < n) throw ShapeError("mixed ambient blocks do not cover the coordinates");
}

std::vector<int> mask_to_set(std::uint64_t mask) {
    std::vector<int> out;
    for (int j = 0; mask != 0; ++j, mask >>= 1)
        if (mask & 1) out.push_back(j + 1);
    return out;
}

GaugeWitness unit_witness() {
    GaugeWitness w;
    w.coeffs = {1.0};
    w.set = {1};
    w.ratio = 1.0;
    return w;
}

// ---------------------------------------------------------------------------
// Exact gauge enumeration
// ---------------------------------------------------------------------------
//
// Sweeps every extreme point, and for each one walks all projection sets in
// Gray-code order with an incremental projection buffer.  The reduction is a
// deterministic max; exact value ties resolve to the smallest
// (extreme-point rank, set mask) pair regardless of visit order.

GaugeEntry exact_gauge(const FiniteBasis& basis, int m_eff, bool size_capped) {
    const SpaceNorm& amb = basis.ambient;
    const int n = size_capped ? basis.dimension() : m_eff;
    const int cap = size_capped ? m_eff : n;

    Lu lu;
    if (!lu.factor(leading_block(basis, n), n))
        throw PreconditionError("leading change-of-basis block is numerically singular");

    double best_val = -1.0;
    std::uint64_t best_rank = 0;
    std::uint64_t best_mask = 0;
    std::vector<double> best_c;

    std::vector<double> a(n);
    std::vector<double> proj(n);
    for_each_extreme(amb, n, [&](const std::vector<double>& c, std::uint64_t rank) {
        lu.solve(c.data(), a.data());
        std::fill(proj.begin(), proj.end(), 0.0);
        int pc = 0;
        const std::uint64_t total = std::uint64_t{1} << n;
        for (std::uint64_t i = 1; i < total; ++i) {
            const int bit = std::countr_zero(i);
            const std::uint64_t mask = i ^ (i >> 1);
            const bool added = (mask >> bit) & 1;
            pc += added ? 1 : -1;
            const double s = added ? a[bit] : -a[bit];
            if (basis.identity) {
                proj[bit] += s;
            } else {
                const std::vector<double>& col = basis.vectors[bit];
                for (int k = 0; k < n; ++k) proj[k] += s * col[k];
            }
            if (pc > cap) continue;
            const double val = prefix_norm(amb, proj.data(), n);
            const bool take =
                val > best_val ||
                (val == best_val &&
                 (rank < best_rank || (rank == best_rank && mask < best_mask)));
            if (take) {
                best_val = val;
                best_rank = rank;
                best_mask = mask;
                best_c = c;
            }
        }
    });

    GaugeEntry entry;
    entry.value = best_val;
    entry.method = "exact-enumeration";
    lu.solve(best_c.data(), a.data());
    entry.witness.coeffs = a;
    entry.witness.set = mask_to_set(best_mask);
    entry.witness.ratio = reevaluate_witness(basis, entry.witness);
    return entry;
}

// ---------------------------------------------------------------------------
// Probe (seeded multi-start ascent)
// ---------------------------------------------------------------------------

struct ProbeCtx {
    const FiniteBasis& basis;
    int n;         // coefficient support length
    int universe;  // projection sets live inside [1, universe]
    int cap;       // |A| cap
    std::optional<Lu> lu;  // leading n-block for coordinate-space moves
};

double masked_norm(const ProbeCtx& ctx, const std::vector<double>& a, std::uint64_t mask) {
    std::vector<double> masked(a.size(), 0.0);
    for (size_t j = 0; j < a.size(); ++j)
        if ((mask >> j) & 1) masked[j] = a[j];
    return basis_norm(ctx.basis, masked);
}

double probe_ratio(const ProbeCtx& ctx, const std::vector<double>& a, std::uint64_t mask,
                   double den) {
    if (den < kDenFloor) return 0.0;
    return masked_norm(ctx, a, mask) / den;
}

// Best projection set for fixed coefficients: exact Gray sweep when the
// universe is small, greedy growth plus toggle/swap passes otherwise.
std::uint64_t best_set(const ProbeCtx& ctx, const std::vector<double>& a, double den) {
    if (den < kDenFloor) return 1;
    const int u = ctx.universe;
    if (u <= kExactSubsetBits) {
        const int d = ctx.basis.dimension();
        std::vector<double> proj(d, 0.0);
        double bv = -1.0;
        std::uint64_t bm = 0;
        int pc = 0;
        const std::uint64_t total = std::uint64_t{1} << u;
        for (std::uint64_t i = 1; i < total; ++i) {
            const int bit = std::countr_zero(i);
            const std::uint64_t mask = i ^ (i >> 1);
            const bool added = (mask >> bit) & 1;
            pc += added ? 1 : -1;
            axpy_col(ctx.basis, bit, added ? a[bit] : -a[bit], proj);
            if (pc > ctx.cap) continue;
            const double val = prefix_norm(ctx.basis.ambient, proj.data(), d);
            if (val > bv || (val == bv && mask < bm)) {
                bv = val;
                bm = mask;
            }
        }
        return bm;
    }
    std::uint64_t mask = 0;
    int pc = 0;
    double cur = 0.0;
    while (pc < ctx.cap) {
        int bestj = -1;
        double bestv = cur;
        for (int j = 0; j < u; ++j) {
            if ((mask >> j) & 1) continue;
            const double v = masked_norm(ctx, a, mask | (std::uint64_t{1} << j));
            if (v > bestv) {
                bestv = v;
                bestj = j;
            }
        }
        if (bestj < 0) break;
        mask |= std::uint64_t{1} << bestj;
        cur = bestv;
        ++pc;
    }
    for (int pass = 0; pass < 3; ++pass) {
        bool improved = false;
        for (int j = 0; j < u; ++j) {
            const std::uint64_t cand = mask ^ (std::uint64_t{1} << j);
            const int cpc = std::popcount(cand);
            if (cpc > ctx.cap || cpc == 0) continue;
            const double v = masked_norm(ctx, a, cand);
            if (v > cur) {
                cur = v;
                mask = cand;
                improved = true;
            }
        }
        if (!improved) break;
    }
    return mask == 0 ? 1 : mask;
}

GaugeEntry probe_gauge(const FiniteBasis& basis, int m_eff, bool size_capped,
                       const ProbeOptions& opts) {
    const int d = basis.dimension();
    const int support = size_capped ? d : m_eff;
    ProbeCtx ctx{basis, support, support, size_capped ? m_eff : support, std::nullopt};
    if (basis.full_coordinate_span_prefix && *basis.full_coordinate_span_prefix >= ctx.n) {
        Lu lu;
        if (lu.factor(leading_block(basis, ctx.n), ctx.n)) ctx.lu = std::move(lu);
    }

    double gbest = -1.0;
    std::vector<double> best_a;
    std::uint64_t best_mask = 1;

    std::vector<double> a(ctx.n);
    std::vector<double> c(ctx.n);
    for (int r = 0; r < opts.restarts; ++r) {
        Rng rng(opts.seed + kGold * static_cast<std::uint64_t>(r + 1));
        if (ctx.lu && (r & 1)) {
            for (int k = 0; k < ctx.n; ++k) c[k] = rng.sign();
            ctx.lu->solve(c.data(), a.data());
        } else {
            for (int j = 0; j < ctx.n; ++j) a[j] = rng.heavy();
        }
        double den = basis_norm(basis, a);
        std::uint64_t mask = best_set(ctx, a, den);
        double cur = probe_ratio(ctx, a, mask, den);

        for (int it = 0; it < opts.iterations; ++it) {
            bool improved = false;
            double scale = 0.0;
            for (double x : a) scale = std::max(scale, std::fabs(x));
            if (scale < 1e-6) scale = 1.0;
            for (int j = 0; j < ctx.n; ++j) {
                const double orig = a[j];
                const double cands[] = {-orig,
                                        0.0,
                                        1.5 * orig,
                                        0.6 * orig,
                                        orig + 0.4 * scale,
                                        orig - 0.4 * scale};
                for (double v : cands) {
                    if (v == orig) continue;
                    a[j] = v;
                    const double dd = basis_norm(basis, a);
                    const double val = probe_ratio(ctx, a, mask, dd);
                    if (val > cur * (1.0 + 1e-13)) {
                        cur = val;
                        den = dd;
                        improved = true;
                        break;
                    }
                    a[j] = orig;
                }
            }
            if (ctx.lu) {
                std::fill(c.begin(), c.end(), 0.0);
                for (int j = 0; j < ctx.n; ++j)
                    for (int k = 0; k < ctx.n; ++k)
                        c[k] += a[j] * (basis.identity ? (j == k ? 1.0 : 0.0)
                                                       : basis.vectors[j][k]);
                for (int k = 0; k < ctx.n; ++k) {
                    c[k] = -c[k];
                    std::vector<double> a2(ctx.n);
                    ctx.lu->solve(c.data(), a2.data());
                    const double dd = basis_norm(basis, a2);
                    const double val = probe_ratio(ctx, a2, mask, dd);
                    if (val > cur * (1.0 + 1e-13)) {
                        cur = val;
                        den = dd;
                        a = a2;
                        improved = true;
                    } else {
                        c[k] = -c[k];
                    }
                }
            }
            mask = best_set(ctx, a, den);
            const double val = probe_ratio(ctx, a, mask, den);
            if (val > cur * (1.0 + 1e-13)) {
                cur = val;
                improved = true;
            }
            if (!improved) break;
        }
        if (cur > gbest) {
            gbest = cur;
            best_a = a;
            best_mask = mask;
        }
    }

    GaugeEntry entry;
    entry.method = "probe-lower-bound";
    entry.witness.coeffs = best_a;
    entry.witness.set = mask_to_set(best_mask);
    entry.witness.ratio = reevaluate_witness(basis, entry.witness);
    entry.value = entry.witness.ratio;
    return entry;
}

void require_exact_ambient(const FiniteBasis& basis) {
    if (!sup_type_ambient(basis.ambient))
        throw PreconditionError(
            "mode-unsupported: exact enumeration needs a sup ambient or mixed with p = 1, got " +
            basis.ambient.label());
}

}  // namespace

// ---------------------------------------------------------------------------
// FiniteBasis
// ---------------------------------------------------------------------------

double FiniteBasis::condition_estimate() const {
    if (identity) return 1.0;
    const int d = dimension();
    if (d == 0) throw PreconditionError("empty basis");
    for (const std::vector<double>& v : vectors)
        if (static_cast<int>(v.size()) != d)
            throw ShapeError("basis vector length does not match the dimension");

    Lu lu;
    if (!lu.factor(leading_block(*this, d), d))
        throw PreconditionError("basis vectors are numerically dependent");

    double n1 = 0.0;
    for (const std::vector<double>& v : vectors) {
        double col = 0.0;
        for (double x : v) col += std::fabs(x);
        n1 = std::max(n1, col);
    }
    double n1inv = 0.0;
    std::vector<double> e(d, 0.0);
    std::vector<double> x(d, 0.0);
    for (int j = 0; j < d; ++j) {
        e[j] = 1.0;
        lu.solve(e.data(), x.data());
        e[j] = 0.0;
        double col = 0.0;
        for (double v : x) col += std::fabs(v);
        n1inv = std::max(n1inv, col);
    }

    if (full_coordinate_span_prefix) {
        const int s = std::min(*full_coordinate_span_prefix, d);
        std::vector<double> a = leading_block(*this, s);
        const double tol = 1e-12 * matrix_scale(a);
        for (int c = 0; c < s; ++c) {
            const double piv = a[static_cast<size_t>(c) * s + c];
            if (std::fabs(piv) <= tol)
                throw PreconditionError("leading change-of-basis block singular at size " +
                                        std::to_string(c + 1));
            for (int r = c + 1; r < s; ++r) {
                const double f = a[static_cast<size_t>(r) * s + c] / piv;
                for (int j = c; j < s; ++j)
                    a[static_cast<size_t>(r) * s + j] -= f * a[static_cast<size_t>(c) * s + j];
            }
        }
    }
    return n1 * n1inv;
}

nlohmann::json FiniteBasis::to_json() const {
    nlohmann::json j{{"label", label},
                     {"dimension", dimension()},
                     {"identity", identity},
                     {"ambient", ambient.to_json()},
                     {"condition_estimate", condition_estimate()}};
    if (full_coordinate_span_prefix)
        j["full_coordinate_span_prefix"] = *full_coordinate_span_prefix;
    if (!identity) j["vectors"] = vectors;
    return j;
}

FiniteBasis unit_vector_basis(int d, SpaceNorm ambient) {
    if (d < 1) throw PreconditionError("unit_vector_basis needs d >= 1");
    FiniteBasis b;
    b.identity = true;
    b.dim = d;
    b.ambient = std::move(ambient);
    b.full_coordinate_span_prefix = d;
    b.label = "unit(" + std::to_string(d) + ")@" + b.ambient.label();
    return b;
}

FiniteBasis summing_basis(int n) {
    if (n < 1) throw PreconditionError("summing_basis needs n >= 1");
    if (n > kDenseDimCap)
        throw PreconditionError("summing_basis dense storage capped at n <= " +
                                std::to_string(kDenseDimCap));
    FiniteBasis b;
    b.vectors.assign(n, std::vector<double>(n, 0.0));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k <= j; ++k) b.vectors[j][k] = 1.0;
    b.ambient = SpaceNorm::sup();
    b.full_coordinate_span_prefix = n;
    b.label = "summing(" + std::to_string(n) + ")";
    return b;
}

FiniteBasis besov_sum_basis(int levels, double p) {
    if (levels < 1) throw PreconditionError("besov_sum_basis needs levels >= 1");
    if (levels > 10)
        throw PreconditionError("besov_sum_basis dense storage capped at levels <= 10");
    const int d = (1 << (levels + 1)) - 2;
    std::vector<BigIndex> blocks;
    for (int b = 1; b <= levels; ++b) blocks.push_back(BigIndex{1} << b);

    FiniteBasis basis;
    basis.vectors.assign(d, std::vector<double>(d, 0.0));
    int start = 0;
    int j = 0;
    for (int b = 1; b <= levels; ++b) {
        const int len = 1 << b;
        for (int i = 0; i < len; ++i, ++j)
            for (int k = 0; k <= i; ++k) basis.vectors[j][start + k] = 1.0;
        start += len;
    }
    basis.ambient = SpaceNorm::mixed(p, blocks);
    basis.full_coordinate_span_prefix = d;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "besov_sum(levels=%d,p=%g)", levels, p);
    basis.label = buf;
    return basis;
}

std::vector<double> basis_coordinates(const FiniteBasis& basis,
                                      const std::vector<double>& coeffs) {
    const int d = basis.dimension();
    if (static_cast<int>(coeffs.size()) > d)
        throw ShapeError("more coefficients than basis vectors");
    std::vector<double> out(d, 0.0);
    for (size_t j = 0; j < coeffs.size(); ++j)
        if (coeffs[j] != 0.0) axpy_col(basis, static_cast<int>(j), coeffs[j], out);
    return out;
}

double basis_norm(const FiniteBasis& basis, const std::vector<double>& coeffs) {
    return eval_norm(FinSeq(0, basis_coordinates(basis, coeffs)), basis.ambient);
}

std::vector<double> coordinate_projection(const FiniteBasis& basis, const std::vector<int>& A,
                                          const std::vector<double>& coeffs) {
    const int d = basis.dimension();
    if (static_cast<int>(coeffs.size()) > d)
        throw ShapeError("more coefficients than basis vectors");
    std::vector<bool> keep(coeffs.size(), false);
    for (int idx : A) {
        if (idx < 1 || idx > d)
            throw PreconditionError("projection set index outside [1, dimension]");
        if (idx <= static_cast<int>(coeffs.size())) keep[idx - 1] = true;
    }
    std::vector<double> out(coeffs.size(), 0.0);
    for (size_t j = 0; j < coeffs.size(); ++j)
        if (keep[j]) out[j] = coeffs[j];
    return out;
}

// ---------------------------------------------------------------------------
// Gauges
// ---------------------------------------------------------------------------

double reevaluate_witness(const FiniteBasis& basis, const GaugeWitness& w) {
    const double den = basis_norm(basis, w.coeffs);
    if (den < kDenFloor) return 0.0;
    return basis_norm(basis, coordinate_projection(basis, w.set, w.coeffs)) / den;
}

GaugeEntry L_m(const FiniteBasis& basis, int m, GaugeMode mode, const ProbeOptions& opts) {
    const int d = basis.dimension();
    if (m < 1) throw PreconditionError("L_m needs m >= 1");
    const int m_eff = std::min(m, d);
    GaugeEntry entry;
    if (basis.identity) {
        // Every ambient here is a lattice norm, so coordinate projections of
        // the unit-vector basis never increase the norm and the gauge is 1.
        entry = GaugeEntry{m, 1.0, "exact-enumeration", unit_witness()};
        return entry;
    }
    if (d <= 64) basis.condition_estimate();
    if (mode == GaugeMode::Exact) {
        require_exact_ambient(basis);
        if (!basis.full_coordinate_span_prefix || *basis.full_coordinate_span_prefix < m_eff)
            throw PreconditionError(
                "mode-unsupported: exact L_m needs a declared coordinate span prefix >= m");
        if (m_eff > 14)
            throw PreconditionError("mode-unsupported: exact L_m enumeration capped at m <= 14");
        entry = exact_gauge(basis, m_eff, /*size_capped=*/false);
    } else {
        entry = probe_gauge(basis, m_eff, /*size_capped=*/false, opts);
    }
    entry.m = m;
    return entry;
}

GaugeEntry k_m(const FiniteBasis& basis, int m, GaugeMode mode, const ProbeOptions& opts) {
    const int d = basis.dimension();
    if (m < 1) throw PreconditionError("k_m needs m >= 1");
    const int m_eff = std::min(m, d);
    GaugeEntry entry;
    if (basis.identity) {
        entry = GaugeEntry{m, 1.0, "exact-enumeration", unit_witness()};
        return entry;
    }
    if (d <= 64) basis.condition_estimate();
    if (mode == GaugeMode::Exact) {
        require_exact_ambient(basis);
        if (!basis.full_coordinate_span_prefix || *basis.full_coordinate_span_prefix < d)
            throw PreconditionError(
                "mode-unsupported: exact k_m needs a span prefix covering the whole space");
        if (d > 12)
            throw PreconditionError(
                "mode-unsupported: exact k_m enumeration capped at dimension <= 12");
        entry = exact_gauge(basis, m_eff, /*size_capped=*/true);
    } else {
        entry = probe_gauge(basis, m_eff, /*size_capped=*/true, opts);
    }
    entry.m = m;
    return entry;
}

GaugeReport gauge_report(const FiniteBasis& basis, const std::string& gauge_kind, int m_max,
                         GaugeMode mode, const ProbeOptions& opts) {
    if (gauge_kind != "L" && gauge_kind != "k")
        throw PreconditionError("gauge kind must be \"L\" or \"k\"");
    if (m_max < 1) throw PreconditionError("gauge_report needs m_max >= 1");
    GaugeReport rep;
    rep.basis_label = basis.label;
    rep.gauge_kind = gauge_kind;
    for (int m = 1; m <= m_max; ++m)
        rep.entries.push_back(gauge_kind == "L" ? L_m(basis, m, mode, opts)
                                                : k_m(basis, m, mode, opts));
    return rep;
}

// ---------------------------------------------------------------------------
// Greedy-approximation quantities
// ---------------------------------------------------------------------------

double fundamental_fn(const FiniteBasis& basis, int m) {
    const int d = basis.dimension();
    if (m < 1) throw PreconditionError("fundamental_fn needs m >= 1");
    const int m_eff = std::min(m, d);
    const SpaceNorm& amb = basis.ambient;

    if (basis.identity && amb.kind != SpaceNorm::Kind::Mixed) {
        // Spreading-invariant ambients: the sum over A depends only on |A|
        // and grows with it, so A = [1, m] attains the supremum.
        switch (amb.kind) {
            case SpaceNorm::Kind::Sup:
                return 1.0;
            case SpaceNorm::Kind::Ellp:
                return std::pow(static_cast<double>(m_eff), 1.0 / amb.p);
            case SpaceNorm::Kind::Lorentz:
                return lorentz_norm(FinSeq(0, std::vector<double>(m_eff, 1.0)), *amb.weight,
                                    amb.p);
            default: {
                const NormEnclosure e =
                    garling_norm_runs(RunVector{{BigIndex{m_eff}, 1.0}}, *amb.weight, amb.p);
                return e.lower;
            }
        }
    }

    if (d <= 20) {
        std::vector<double> sum(d, 0.0);
        double best = 0.0;
        int pc = 0;
        const std::uint64_t total = std::uint64_t{1} << d;
        for (std::uint64_t i = 1; i < total; ++i) {
            const int bit = std::countr_zero(i);
            const std::uint64_t mask = i ^ (i >> 1);
            const bool added = (mask >> bit) & 1;
            pc += added ? 1 : -1;
            axpy_col(basis, bit, added ? 1.0 : -1.0, sum);
            if (pc > m_eff) continue;
            best = std::max(best, prefix_norm(amb, sum.data(), d));
        }
        return best;
    }

    // Sampled search: random admissible subsets plus toggle passes on the best.
    Rng rng(kGold);
    std::vector<int> pool(d);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<char> in(d, 0);
    std::vector<char> best_in(d, 0);
    double best = 0.0;
    auto eval = [&](const std::vector<char>& ind) {
        std::vector<double> sum(d, 0.0);
        for (int j = 0; j < d; ++j)
            if (ind[j]) axpy_col(basis, j, 1.0, sum);
        return prefix_norm(amb, sum.data(), d);
    };
    for (int s = 0; s < 2048; ++s) {
        std::fill(in.begin(), in.end(), 0);
        const int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(m_eff)));
        for (int t = 0; t < size; ++t) {
            const int pick = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - t)));
            std::swap(pool[t], pool[pick]);
            in[pool[t]] = 1;
        }
        const double v = eval(in);
        if (v > best) {
            best = v;
            best_in = in;
        }
    }
    for (int pass = 0; pass < 3; ++pass) {
        bool improved = false;
        for (int j = 0; j < d; ++j) {
            std::vector<char> cand = best_in;
            cand[j] = !cand[j];
            int size = 0;
            for (char x : cand) size += x;
            if (size < 1 || size > m_eff) continue;
            const double v = eval(cand);
            if (v > best) {
                best = v;
                best_in = cand;
                improved = true;
            }
        }
        if (!improved) break;
    }
    return best;
}

std::vector<int> greedy_set(const std::vector<double>& coeffs, int m) {
    const int d = static_cast<int>(coeffs.size());
    if (m < 0 || m > d) throw PreconditionError("greedy_set needs 0 <= m <= length");
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) {
        const double ai = std::fabs(coeffs[i]);
        const double aj = std::fabs(coeffs[j]);
        if (ai != aj) return ai > aj;
        return i < j;
    });
    std::vector<int> out(idx.begin(), idx.begin() + m);
    std::sort(out.begin(), out.end());
    for (int& v : out) ++v;
    return out;
}

nlohmann::json AlmostGreedyWitness::to_json() const {
    return nlohmann::json{{"coeffs", coeffs},
                          {"greedy", greedy},
                          {"competitor", competitor},
                          {"numerator", numerator},
                          {"denominator", denominator}};
}

nlohmann::json AlmostGreedyEstimate::to_json() const {
    return nlohmann::json{{"estimate", estimate}, {"witness", witness.to_json()}};
}

AlmostGreedyEstimate almost_greedy_ratio(const FiniteBasis& basis, int samples,
                                         std::uint64_t seed) {
    const int d = basis.dimension();
    if (d < 2) throw PreconditionError("almost_greedy_ratio needs dimension >= 2");
    if (samples < 1) throw PreconditionError("almost_greedy_ratio needs samples >= 1");

    AlmostGreedyEstimate out;
    std::vector<double> a(d);
    for (int s = 0; s < samples; ++s) {
        Rng rng(seed + kGold * static_cast<std::uint64_t>(s + 1));
        for (int j = 0; j < d; ++j) a[j] = rng.heavy();
        const std::vector<double> coords = basis_coordinates(basis, a);

        std::vector<double> mins(d, std::numeric_limits<double>::infinity());
        std::vector<std::uint64_t> amin(d, 0);
        auto residual_norm = [&](std::uint64_t mask) {
            std::vector<double> diff = coords;
            for (int j = 0; j < d; ++j)
                if ((mask >> j) & 1) axpy_col(basis, j, -a[j], diff);
            return prefix_norm(basis.ambient, diff.data(), d);
        };
        const bool exhaustive = d <= 16;
        if (exhaustive) {
            std::vector<double> diff = coords;
            int pc = 0;
            const std::uint64_t total = std::uint64_t{1} << d;
            for (std::uint64_t i = 1; i < total; ++i) {
                const int bit = std::countr_zero(i);
                const std::uint64_t mask = i ^ (i >> 1);
                const bool added = (mask >> bit) & 1;
                pc += added ? 1 : -1;
                axpy_col(basis, bit, added ? -a[bit] : a[bit], diff);
                if (pc < 1 || pc > d - 1) continue;
                const double val = prefix_norm(basis.ambient, diff.data(), d);
                if (val < mins[pc] || (val == mins[pc] && mask < amin[pc])) {
                    mins[pc] = val;
                    amin[pc] = mask;
                }
            }
        }
        for (int m = 1; m < d; ++m) {
            const std::vector<int> G = greedy_set(a, m);
            std::uint64_t gmask = 0;
            for (int idx : G) gmask |= std::uint64_t{1} << (idx - 1);
            const double num = residual_norm(gmask);
            double den = num;
            std::uint64_t dmask = gmask;
            if (exhaustive) {
                if (mins[m] < den) {
                    den = mins[m];
                    dmask = amin[m];
                }
            } else {
                std::vector<int> pool(d);
                for (int t = 0; t < kSampledSubsets; ++t) {
                    std::iota(pool.begin(), pool.end(), 0);
                    std::uint64_t mask = 0;
                    for (int q = 0; q < m; ++q) {
                        const int pick =
                            q + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - q)));
                        std::swap(pool[q], pool[pick]);
                        mask |= std::uint64_t{1} << pool[q];
                    }
                    const double val = residual_norm(mask);
                    if (val < den) {
                        den = val;
                        dmask = mask;
                    }
                }
            }
            if (den < kDenFloor) continue;
            const double ratio = num / den;
            if (ratio > out.estimate) {
                out.estimate = ratio;
                out.witness.coeffs = a;
                out.witness.greedy = G;
                out.witness.competitor = mask_to_set(dmask);
                out.witness.numerator = num;
                out.witness.denominator = den;
            }
        }
    }
    return out;
}

double democracy_ratio(const FiniteBasis& basis, int m, bool with_signs) {
    const int d = basis.dimension();
    if (m < 1 || m > d) throw PreconditionError("democracy_ratio needs 1 <= m <= dimension");
    if (basis.identity && basis.ambient.kind != SpaceNorm::Kind::Mixed) {
        // Spreading invariance: every size-m (signed) sum has the same norm.
        return 1.0;
    }
    if (d > 20)
        throw PreconditionError("democracy_ratio enumeration capped at dimension <= 20");
    if (with_signs && m > 14)
        throw PreconditionError("signed democracy_ratio capped at m <= 14");

    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    std::vector<double> sum(d, 0.0);
    std::vector<int> chosen;
    chosen.reserve(m);
    std::vector<double> buf(d);

    auto leaf = [&]() {
        if (!with_signs) {
            const double v = prefix_norm(basis.ambient, sum.data(), d);
            hi = std::max(hi, v);
            lo = std::min(lo, v);
            return;
        }
        buf = sum;
        double v = prefix_norm(basis.ambient, buf.data(), d);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
        std::uint64_t sign_bits = 0;
        const std::uint64_t total = std::uint64_t{1} << m;
        for (std::uint64_t i = 1; i < total; ++i) {
            const int bit = std::countr_zero(i);
            sign_bits ^= std::uint64_t{1} << bit;
            const bool now_minus = (sign_bits >> bit) & 1;
            axpy_col(basis, chosen[bit], now_minus ? -2.0 : 2.0, buf);
            v = prefix_norm(basis.ambient, buf.data(), d);
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
    };
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(chosen.size()) == m) {
            leaf();
            return;
        }
        const int need = m - static_cast<int>(chosen.size());
        for (int j = start; j <= d - need; ++j) {
            axpy_col(basis, j, 1.0, sum);
            chosen.push_back(j);
            rec(j + 1);
            chosen.pop_back();
            axpy_col(basis, j, -1.0, sum);
        }
    };
    rec(0);
    return hi / lo;
}

// ---------------------------------------------------------------------------
// Growth inspection
// ---------------------------------------------------------------------------

GrowthTable log_conditionality_check(const GaugeReport& report) {
    GrowthTable table;
    table.label = report.basis_label + "/" + report.gauge_kind;
    for (const GaugeEntry& e : report.entries) {
        GrowthRow row;
        row.m = e.m;
        row.gauge = e.value;
        row.over_log = e.m >= 2 ? e.value / std::log(static_cast<double>(e.m))
                                : std::numeric_limits<double>::quiet_NaN();
        row.over_m = e.value / static_cast<double>(e.m);
        table.rows.push_back(row);
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const GrowthRow& a, const GrowthRow& b) { return a.m < b.m; });

    std::vector<double> v;
    for (const GrowthRow& r : table.rows)
        if (r.m >= 2) v.push_back(r.over_log);
    table.log_tail_bounded =
        v.size() < 2 || v.back() <= kGrowthTailSlack * v[v.size() / 2];

    if (!table.rows.empty()) {
        double mn = std::numeric_limits<double>::infinity();
        for (const GrowthRow& r : table.rows) mn = std::min(mn, r.over_m);
        table.linear_floor = mn >= kGrowthLinearFloor;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

nlohmann::json GaugeWitness::to_json() const {
    return nlohmann::json{{"coeffs", coeffs}, {"set", set}, {"ratio", ratio}};
}

GaugeWitness GaugeWitness::from_json(const nlohmann::json& j) {
    GaugeWitness w;
    try {
        w.coeffs = j.at("coeffs").get<std::vector<double>>();
        w.set = j.at("set").get<std::vector<int>>();
        w.ratio = j.at("ratio").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad gauge witness: ") + e.what());
    }
    return w;
}

nlohmann::json GaugeEntry::to_json() const {
    return nlohmann::json{
        {"m", m}, {"value", value}, {"method", method}, {"witness", witness.to_json()}};
}

nlohmann::json GaugeReport::to_json() const {
    nlohmann::json entries_json = nlohmann::json::array();
    for (const GaugeEntry& e : entries) entries_json.push_back(e.to_json());
    return nlohmann::json{
        {"basis", basis_label}, {"gauge_kind", gauge_kind}, {"entries", entries_json}};
}

std::string GaugeReport::to_csv() const {
    std::string out = "basis,m,gauge_kind,value,method,witness_json\n";
    for (const GaugeEntry& e : entries) {
        out += csv_field(basis_label);
        out += ',';
        out += std::to_string(e.m);
        out += ',';
        out += csv_field(gauge_kind);
        out += ',';
        out += format_double_17(e.value);
        out += ',';
        out += csv_field(e.method);
        out += ',';
        out += csv_field(canonical_json(e.witness.to_json()));
        out += '\n';
    }
    return out;
}

nlohmann::json GrowthTable::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const GrowthRow& r : rows)
        rows_json.push_back(nlohmann::json{
            {"m", r.m}, {"gauge", r.gauge}, {"over_log", r.over_log}, {"over_m", r.over_m}});
    return nlohmann::json{{"label", label},
                          {"log_tail_bounded", log_tail_bounded},
                          {"linear_floor", linear_floor},
                          {"rows", rows_json}};
}

std::string GrowthTable::to_csv() const {
    std::string out = "m,gauge,gauge_over_log_m,gauge_over_m\n";
    for (const GrowthRow& r : rows) {
        out += std::to_string(r.m);
        out += ',';
        out += format_double_17(r.gauge);
        out += ',';
        out += format_double_17(r.over_log);
        out += ',';
        out += format_double_17(r.over_m);
        out += '\n';
    }
    return out;
}

}  // namespace garling
