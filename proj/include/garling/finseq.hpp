#pragma once

#include <vector>

#include "garling/big_index.hpp"
#include "json.hpp"

namespace garling {

// Finitely supported sequence: `offset` leading zero coordinates followed by
// the stored coefficient block.  Coordinate j (1-based) holds coeffs[j-1-offset]
// for offset < j <= offset + coeffs.size(), zero elsewhere.
class FinSeq {
  public:
    FinSeq() = default;
    FinSeq(BigIndex offset, std::vector<double> coeffs);
    static FinSeq from_json(const nlohmann::json& j);

    nlohmann::json to_json() const;

    BigIndex offset() const { return offset_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    bool empty() const { return coeffs_.empty(); }

    // Last stored coordinate index (offset for an empty sequence).
    BigIndex end_index() const { return offset_ + static_cast<BigIndex>(coeffs_.size()); }

    double at(BigIndex j) const;  // coordinate value, 1-based

    // Trim trailing zeros and fold leading stored zeros into the offset.
    FinSeq canonical() const;

    // Nonzero coefficients in coordinate order (what subsymmetric norms see),
    // with their 1-based coordinate positions.
    std::vector<double> support_values() const;
    std::vector<BigIndex> support_positions() const;
    size_t support_size() const;

    FinSeq scaled(double c) const;

    bool operator==(const FinSeq& o) const;

  private:
    BigIndex offset_ = 0;
    std::vector<double> coeffs_;
};

// g appended immediately after f's last stored coordinate.
FinSeq concat(const FinSeq& f, const FinSeq& g);

// Same coefficients behind `offset` leading zeros (norm-invariant re-basing).
FinSeq shift(const FinSeq& f, BigIndex offset);

// Re-place the stored coefficients at the given strictly increasing 1-based
// positions (zeros elsewhere).  positions.size() must equal the canonical
// coefficient span of f.
FinSeq spread(const FinSeq& f, const std::vector<BigIndex>& positions);

// Keep coordinates with index in K (sorted, distinct) and close the gaps.
FinSeq restrict_compress(const FinSeq& f, const std::vector<BigIndex>& K);

}  // namespace garling
