#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "garling/big_index.hpp"
#include "json.hpp"

namespace garling {

// Admissible weight sequence: non-increasing, w_1 = 1, vanishing at infinity,
// not summable.  Three families are built in:
//   power(a):    w_j = j^(-a), 0 < a <= 1
//   log:         w_j = log(2)/log(j+1)
//   explicit:    finite non-increasing prefix spliced to a power tail, the
//                tail scaled to continue the prefix so deep probes stay valid
//
// Prefix sums W_m are exact (compensated summation) up to an internal cache
// bound and analytic beyond it (Euler-Maclaurin for power-type tails, panel
// quadrature for the log family).  Block searches evaluate W at indices up to
// ~1e30, far past anything summable term by term.
class Weight {
  public:
    enum class Family { Power, Log, Explicit };

    static Weight power(double alpha);
    static Weight logarithmic();
    static Weight explicit_prefix(std::vector<double> prefix, double tail_alpha);

    static Weight from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    Family family() const;
    std::string label() const;

    double at(BigIndex j) const;                      // w_j, j >= 1
    double prefix_sum(BigIndex m) const;              // W_m = sum_{j<=m} w_j, W_0 = 0
    double segment_sum(BigIndex u, BigIndex v) const; // W_v - W_u, cancellation-safe
    double hump_ratio(BigIndex m, BigIndex k) const;  // (W_{m+k} - W_m) / W_k

    // Smallest k in [k_min, k_cap] with hump_ratio(m, k) >= theta.
    // Linear incremental scan; throws CapExceededError when the cap falls.
    BigIndex find_hump_index(BigIndex m, double theta, BigIndex k_min, BigIndex k_cap) const;

    bool operator==(const Weight& o) const { return label() == o.label(); }

  private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    explicit Weight(std::shared_ptr<Impl> impl);
};

// Positive sequence evaluable up to a horizon (doubling-condition checks and
// conjugate-weight growth envelopes).
struct GaugeSequence {
    std::string label;
    BigIndex horizon;
    std::function<double(BigIndex)> eval;

    double operator()(BigIndex m) const { return eval(m); }
};

// m -> 1 / (m * w_m).
GaugeSequence conjugate_weight(const Weight& w, BigIndex horizon);

struct RegularityVerdict {
    bool holds;
    BigIndex first_violation;  // 0 when holds
};

// Lower regularity: 2*lambda_m <= lambda_{b m} for all m with b*m <= horizon (b >= 2).
RegularityVerdict has_lrp(const GaugeSequence& lambda, BigIndex b, BigIndex horizon);
// Upper regularity: lambda_{b m} <= (b/2)*lambda_m for all m with b*m <= horizon (b >= 3).
RegularityVerdict has_urp(const GaugeSequence& lambda, BigIndex b, BigIndex horizon);

enum class Trend { BoundedLooking, Growing };

struct RegularityReport {
    BigIndex horizon;
    double sup_ratio;       // max_{m<=horizon} W_m / (m w_m)
    BigIndex argmax;
    double half_sup_ratio;  // same max over m <= horizon/2
    Trend trend;
    double trend_epsilon;
};

// Streams m = 1..horizon with compensated running sums; trend is Growing when
// sup over the full horizon exceeds the half-horizon sup by more than the
// relative epsilon.
RegularityReport regularity_report(const Weight& w, BigIndex horizon, double trend_epsilon = 0.05);

}  // namespace garling
