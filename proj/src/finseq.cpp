#include "garling/finseq.hpp"

#include <algorithm>

#include "garling/errors.hpp"

namespace garling {

namespace {
constexpr BigIndex kMaxMaterialSpan = BigIndex{1} << 26;  // guard for spread/materialized gaps
}

FinSeq::FinSeq(BigIndex offset, std::vector<double> coeffs)
    : offset_(offset), coeffs_(std::move(coeffs)) {
    if (offset_ < 0) throw PreconditionError("FinSeq offset must be >= 0");
}

FinSeq FinSeq::from_json(const nlohmann::json& j) {
    try {
        BigIndex offset = 0;
        if (j.is_array()) return FinSeq(0, j.get<std::vector<double>>());
        if (j.contains("offset")) {
            const auto& o = j.at("offset");
            offset = o.is_string() ? big_index_from_string(o.get<std::string>())
                                   : static_cast<BigIndex>(o.get<long long>());
        }
        return FinSeq(offset, j.at("coeffs").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad vector spec: ") + e.what());
    }
}

nlohmann::json FinSeq::to_json() const {
    nlohmann::json j;
    j["offset"] = garling::to_string(offset_);
    j["coeffs"] = coeffs_;
    return j;
}

double FinSeq::at(BigIndex j) const {
    if (j < 1) throw PreconditionError("coordinate index must be >= 1");
    if (j <= offset_ || j > end_index()) return 0.0;
    return coeffs_[static_cast<size_t>(j - 1 - offset_)];
}

FinSeq FinSeq::canonical() const {
    size_t lo = 0, hi = coeffs_.size();
    while (hi > lo && coeffs_[hi - 1] == 0.0) --hi;
    while (lo < hi && coeffs_[lo] == 0.0) ++lo;
    return FinSeq(offset_ + static_cast<BigIndex>(lo),
                  std::vector<double>(coeffs_.begin() + static_cast<long>(lo),
                                      coeffs_.begin() + static_cast<long>(hi)));
}

std::vector<double> FinSeq::support_values() const {
    std::vector<double> v;
    v.reserve(coeffs_.size());
    for (double c : coeffs_)
        if (c != 0.0) v.push_back(c);
    return v;
}

std::vector<BigIndex> FinSeq::support_positions() const {
    std::vector<BigIndex> v;
    for (size_t i = 0; i < coeffs_.size(); ++i)
        if (coeffs_[i] != 0.0) v.push_back(offset_ + static_cast<BigIndex>(i) + 1);
    return v;
}

size_t FinSeq::support_size() const {
    size_t n = 0;
    for (double c : coeffs_)
        if (c != 0.0) ++n;
    return n;
}

FinSeq FinSeq::scaled(double c) const {
    std::vector<double> out(coeffs_);
    for (auto& x : out) x *= c;
    return FinSeq(offset_, std::move(out));
}

bool FinSeq::operator==(const FinSeq& o) const {
    FinSeq a = canonical(), b = o.canonical();
    return a.offset_ == b.offset_ && a.coeffs_ == b.coeffs_;
}

FinSeq concat(const FinSeq& f, const FinSeq& g) {
    BigIndex gap = g.offset();
    if (gap > kMaxMaterialSpan) throw PreconditionError("concat: gap too large to materialize");
    std::vector<double> out(f.coeffs());
    out.resize(out.size() + static_cast<size_t>(gap), 0.0);
    out.insert(out.end(), g.coeffs().begin(), g.coeffs().end());
    return FinSeq(f.offset(), std::move(out));
}

FinSeq shift(const FinSeq& f, BigIndex offset) {
    if (offset < 0) throw PreconditionError("shift offset must be >= 0");
    return FinSeq(offset, f.coeffs());
}

FinSeq spread(const FinSeq& f, const std::vector<BigIndex>& positions) {
    FinSeq c = f.canonical();
    if (positions.size() != c.coeffs().size())
        throw ShapeError("spread: positions count must match the coefficient span");
    if (positions.empty()) return FinSeq();
    for (size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] < 1) throw PreconditionError("spread positions must be >= 1");
        if (i > 0 && positions[i] <= positions[i - 1])
            throw PreconditionError("spread positions must be strictly increasing");
    }
    BigIndex lo = positions.front(), hi = positions.back();
    if (hi - lo + 1 > kMaxMaterialSpan) throw PreconditionError("spread: span too large to materialize");
    std::vector<double> out(static_cast<size_t>(hi - lo + 1), 0.0);
    for (size_t i = 0; i < positions.size(); ++i)
        out[static_cast<size_t>(positions[i] - lo)] = c.coeffs()[i];
    return FinSeq(lo - 1, std::move(out));
}

FinSeq restrict_compress(const FinSeq& f, const std::vector<BigIndex>& K) {
    for (size_t i = 0; i < K.size(); ++i) {
        if (K[i] < 1) throw PreconditionError("restrict_compress: indices must be >= 1");
        if (i > 0 && K[i] <= K[i - 1])
            throw PreconditionError("restrict_compress: indices must be strictly increasing");
    }
    std::vector<double> out;
    out.reserve(K.size());
    for (BigIndex j : K) out.push_back(f.at(j));
    return FinSeq(0, std::move(out));
}

}  // namespace garling
