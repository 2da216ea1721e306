#include "garling/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <mutex>

#include "garling/detail/kahan.hpp"
#include "garling/errors.hpp"

namespace garling {
namespace {

using detail::KahanSum;

// 16-point Gauss-Legendre rule on [-1, 1], generated once by Newton iteration
// on the Legendre polynomial (deterministic to the last bit).
struct GaussLegendre {
    std::array<double, 16> node{};
    std::array<double, 16> weight{};

    GaussLegendre() {
        const int n = 16;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                double dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            node[i] = x;
            weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    // Integrate f over [a, b].
    template <class F>
    double integrate(F f, double a, double b) const {
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (int i = 0; i < 16; ++i) acc += weight[i] * f(mid + half * node[i]);
        return acc * half;
    }
};

const GaussLegendre& gauss16() {
    static const GaussLegendre g;
    return g;
}

constexpr BigIndex kCacheCap = BigIndex{1} << 22;  // exact summation bound

double ei_integrand(double s) { return std::exp(s) / s; }

}  // namespace

struct Weight::Impl {
    Family family;
    double alpha = 0.0;                 // power families
    std::vector<double> prefix;         // explicit family, normalized to prefix[0] = 1
    double tail_scale = 1.0;            // explicit family: w_j = tail_scale * j^-alpha past prefix

    mutable std::mutex mu;
    mutable std::vector<double> cum;    // cum[j] = W_j for j <= filled
    mutable KahanSum running;
    mutable BigIndex filled = 0;

    // Log family: cumulative panel integrals of e^s/s starting at s0 = log(1+cacheCap).
    mutable std::vector<double> ei_cum;
    mutable double ei_s0 = 0.0, ei_h = 0.5;

    double at(BigIndex j) const {
        double dj = to_double(j);
        switch (family) {
            case Family::Power:
                return std::pow(dj, -alpha);
            case Family::Log:
                return M_LN2 / std::log(dj + 1.0);
            case Family::Explicit:
                if (j <= static_cast<BigIndex>(prefix.size())) return prefix[static_cast<size_t>(j - 1)];
                return tail_scale * std::pow(dj, -alpha);
        }
        return 0.0;
    }

    void ensure_cached(BigIndex m) const {
        // caller holds mu
        if (cum.empty()) {
            cum.reserve(4096);
            cum.push_back(0.0);
        }
        while (filled < m) {
            ++filled;
            running.add(at(filled));
            cum.push_back(running.value());
        }
    }

    // Euler-Maclaurin for sum_{j=u+1}^{u+len} S*j^-a, valid for large u. The
    // segment length is passed separately: u + len can round back to u in
    // double for short far segments, and the integral must keep the exact
    // width. The endpoint corrections may then evaluate to zero, which is
    // also their true size relative to the integral at that scale.
    static double em_power(double u, double len, double a, double s) {
        const double v = u + len;
        double integral;
        if (a == 1.0)
            integral = s * std::log1p(len / u);
        else
            integral = s * std::pow(u, 1.0 - a) * std::expm1((1.0 - a) * std::log1p(len / u)) / (1.0 - a);
        auto f = [&](double x) { return s * std::pow(x, -a); };
        auto fp = [&](double x) { return -a * s * std::pow(x, -a - 1.0); };
        auto fppp = [&](double x) { return -a * (a + 1.0) * (a + 2.0) * s * std::pow(x, -a - 3.0); };
        return integral + 0.5 * (f(v) - f(u)) + (fp(v) - fp(u)) / 12.0 - (fppp(v) - fppp(u)) / 720.0;
    }

    void ensure_ei_panels() const {
        // caller holds mu
        if (!ei_cum.empty()) return;
        ei_s0 = std::log1p(to_double(kCacheCap));
        // Cover s up to log(1 + BigIndex max) ~ 88.7 with margin.
        int panels = static_cast<int>(std::ceil((92.0 - ei_s0) / ei_h));
        ei_cum.resize(static_cast<size_t>(panels) + 1, 0.0);
        for (int i = 0; i < panels; ++i) {
            double a = ei_s0 + i * ei_h, b = a + ei_h;
            ei_cum[static_cast<size_t>(i) + 1] =
                ei_cum[static_cast<size_t>(i)] + gauss16().integrate(ei_integrand, a, b);
        }
    }

    // Integral of dx/log(1+x) over [u, u+len] through the substitution
    // s = log(1+x), assembled from nonnegative panel pieces (no catastrophic
    // cancellation).
    double log_integral(double u, double len) const {
        // Short relative to position, the substitution collapses below the
        // ulp of s and loses every digit of the width; the integrand is flat
        // across such a segment, so integrate in offset space with the exact
        // width instead.
        if (len <= 1e-3 * (1.0 + u)) {
            return gauss16().integrate(
                [&](double e) { return 1.0 / std::log1p(u + e); }, 0.0, len);
        }
        const double v = u + len;
        double su = std::log1p(u), sv = std::log1p(v);
        const auto& gl = gauss16();
        int iu = static_cast<int>(std::floor((su - ei_s0) / ei_h));
        int iv = static_cast<int>(std::floor((sv - ei_s0) / ei_h));
        iu = std::max(iu, 0);
        iv = std::max(iv, 0);
        if (iu == iv) return gl.integrate(ei_integrand, su, sv);
        double head = gl.integrate(ei_integrand, su, ei_s0 + (iu + 1) * ei_h);
        double tail = gl.integrate(ei_integrand, ei_s0 + iv * ei_h, sv);
        double middle = 0.0;
        if (iv - iu - 1 <= 64) {
            for (int i = iu + 1; i < iv; ++i)
                middle += ei_cum[static_cast<size_t>(i) + 1] - ei_cum[static_cast<size_t>(i)];
        } else {
            middle = ei_cum[static_cast<size_t>(iv)] - ei_cum[static_cast<size_t>(iu) + 1];
        }
        return head + middle + tail;
    }

    double em_log(double u, double len) const {
        auto g = [](double x) { return 1.0 / std::log1p(x); };
        auto gp = [](double x) {
            double t = std::log1p(x);
            return -1.0 / ((1.0 + x) * t * t);
        };
        const double v = u + len;
        double corr = 0.5 * (g(v) - g(u)) + (gp(v) - gp(u)) / 12.0;
        return M_LN2 * (log_integral(u, len) + corr);
    }

    // sum_{j=u+1}^{v} w_j for u >= kCacheCap (analytic region). The width is
    // converted separately: to_double(v) alone would swallow segments shorter
    // than one ulp of the far endpoint.
    double analytic_segment(BigIndex u, BigIndex v) const {
        const double du = to_double(u);
        const double dlen = to_double(v - u);
        switch (family) {
            case Family::Power:
                return em_power(du, dlen, alpha, 1.0);
            case Family::Explicit:
                return em_power(du, dlen, alpha, tail_scale);
            case Family::Log:
                return em_log(du, dlen);
        }
        return 0.0;
    }
};

Weight::Weight(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

Weight Weight::power(double alpha) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw PreconditionError("power weight requires 0 < alpha <= 1");
    auto impl = std::make_shared<Impl>();
    impl->family = Family::Power;
    impl->alpha = alpha;
    return Weight(std::move(impl));
}

Weight Weight::logarithmic() {
    auto impl = std::make_shared<Impl>();
    impl->family = Family::Log;
    return Weight(std::move(impl));
}

Weight Weight::explicit_prefix(std::vector<double> prefix, double tail_alpha) {
    if (prefix.empty()) throw PreconditionError("explicit weight requires a nonempty prefix");
    if (prefix.size() > (1u << 20)) throw PreconditionError("explicit prefix too long");
    if (!(tail_alpha > 0.0) || !(tail_alpha <= 1.0))
        throw PreconditionError("explicit tail requires 0 < alpha <= 1");
    if (!(prefix[0] > 0.0)) throw PreconditionError("explicit prefix entries must be positive");
    // Normalize w_1 = 1.
    double scale = 1.0 / prefix[0];
    for (auto& x : prefix) {
        x *= scale;
        if (!(x > 0.0)) throw PreconditionError("explicit prefix entries must be positive");
    }
    for (size_t i = 1; i < prefix.size(); ++i)
        if (prefix[i] > prefix[i - 1])
            throw PreconditionError("explicit prefix must be non-increasing");
    auto impl = std::make_shared<Impl>();
    impl->family = Family::Explicit;
    impl->alpha = tail_alpha;
    // Scale the tail to continue the prefix: w_{L+1} = prefix.back().
    double L1 = static_cast<double>(prefix.size()) + 1.0;
    impl->tail_scale = prefix.back() * std::pow(L1, tail_alpha);
    impl->prefix = std::move(prefix);
    return Weight(std::move(impl));
}

Weight::Family Weight::family() const { return impl_->family; }

std::string Weight::label() const {
    char buf[128];
    switch (impl_->family) {
        case Family::Power:
            std::snprintf(buf, sizeof buf, "power(%g)", impl_->alpha);
            return buf;
        case Family::Log:
            return "log";
        case Family::Explicit:
            std::snprintf(buf, sizeof buf, "explicit[n=%zu,tail=power(%g)]", impl_->prefix.size(),
                          impl_->alpha);
            return buf;
    }
    return "?";
}

double Weight::at(BigIndex j) const {
    if (j < 1) throw PreconditionError("weight index must be >= 1");
    return impl_->at(j);
}

double Weight::prefix_sum(BigIndex m) const {
    if (m < 0) throw PreconditionError("prefix_sum requires m >= 0");
    if (m == 0) return 0.0;
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (m <= kCacheCap) {
        impl_->ensure_cached(m);
        return impl_->cum[static_cast<size_t>(m)];
    }
    impl_->ensure_cached(kCacheCap);
    if (impl_->family == Family::Log) impl_->ensure_ei_panels();
    return impl_->cum[static_cast<size_t>(kCacheCap)] + impl_->analytic_segment(kCacheCap, m);
}

double Weight::segment_sum(BigIndex u, BigIndex v) const {
    if (u < 0 || v < u) throw PreconditionError("segment_sum requires 0 <= u <= v");
    if (u == v) return 0.0;
    if (u >= kCacheCap) {
        // Far segments of any length go analytic: the term-by-term loop costs
        // one pow per index, which dominates grid evaluations that probe many
        // short far segments.
        std::lock_guard<std::mutex> lock(impl_->mu);
        if (impl_->family == Family::Log) impl_->ensure_ei_panels();
        return impl_->analytic_segment(u, v);
    }
    if (v <= kCacheCap) {
        // Near segments always read the exact prefix cache; the fill is paid
        // once per weight and a term-by-term loop would cost a pow per index
        // on every query.
        std::lock_guard<std::mutex> lock(impl_->mu);
        impl_->ensure_cached(v);
        return impl_->cum[static_cast<size_t>(v)] - impl_->cum[static_cast<size_t>(u)];
    }
    return segment_sum(u, kCacheCap) + segment_sum(kCacheCap, v);
}

double Weight::hump_ratio(BigIndex m, BigIndex k) const {
    if (m < 0 || k < 1) throw PreconditionError("hump_ratio requires m >= 0 and k >= 1");
    return segment_sum(m, m + k) / prefix_sum(k);
}

BigIndex Weight::find_hump_index(BigIndex m, double theta, BigIndex k_min, BigIndex k_cap) const {
    if (!(theta > 0.0) || !(theta <= 1.0))
        throw PreconditionError("find_hump_index requires 0 < theta <= 1");
    if (m < 0 || k_min < 1 || k_cap < k_min)
        throw PreconditionError("find_hump_index requires m >= 0 and 1 <= k_min <= k_cap");
    KahanSum num, den;
    for (BigIndex k = 1; k <= k_cap; ++k) {
        num.add(impl_->at(m + k));
        den.add(impl_->at(k));
        if (k >= k_min && num.value() >= theta * den.value()) return k;
    }
    throw CapExceededError("find_hump_index: no k <= " + garling::to_string(k_cap) +
                           " reaches theta for shift m = " + garling::to_string(m));
}

Weight Weight::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("family"))
        throw ParseError("weight spec must be an object with a 'family' field");
    std::string fam = j.at("family").get<std::string>();
    try {
        if (fam == "power") return Weight::power(j.at("alpha").get<double>());
        if (fam == "log") return Weight::logarithmic();
        if (fam == "explicit") {
            auto prefix = j.at("prefix").get<std::vector<double>>();
            const auto& tail = j.at("tail");
            if (tail.at("family").get<std::string>() != "power")
                throw ParseError("explicit weight tail must have family 'power'");
            return Weight::explicit_prefix(std::move(prefix), tail.at("alpha").get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad weight spec: ") + e.what());
    }
    throw ParseError("unknown weight family '" + fam + "'");
}

nlohmann::json Weight::to_json() const {
    nlohmann::json j;
    switch (impl_->family) {
        case Family::Power:
            j["family"] = "power";
            j["alpha"] = impl_->alpha;
            break;
        case Family::Log:
            j["family"] = "log";
            break;
        case Family::Explicit:
            j["family"] = "explicit";
            j["prefix"] = impl_->prefix;
            j["tail"] = {{"family", "power"}, {"alpha", impl_->alpha}};
            break;
    }
    return j;
}

GaugeSequence conjugate_weight(const Weight& w, BigIndex horizon) {
    return GaugeSequence{
        "conjugate(" + w.label() + ")",
        horizon,
        [w](BigIndex m) {
            if (m < 1) throw PreconditionError("gauge index must be >= 1");
            return 1.0 / (to_double(m) * w.at(m));
        },
    };
}

RegularityVerdict has_lrp(const GaugeSequence& lambda, BigIndex b, BigIndex horizon) {
    if (b < 2) throw PreconditionError("lower regularity requires b >= 2");
    for (BigIndex m = 1; b * m <= horizon; ++m)
        if (2.0 * lambda(m) > lambda(b * m)) return {false, m};
    return {true, 0};
}

RegularityVerdict has_urp(const GaugeSequence& lambda, BigIndex b, BigIndex horizon) {
    if (b < 3) throw PreconditionError("upper regularity requires b >= 3");
    for (BigIndex m = 1; b * m <= horizon; ++m)
        if (lambda(b * m) > 0.5 * to_double(b) * lambda(m)) return {false, m};
    return {true, 0};
}

RegularityReport regularity_report(const Weight& w, BigIndex horizon, double trend_epsilon) {
    if (horizon < 2) throw PreconditionError("regularity_report requires horizon >= 2");
    if (horizon > (BigIndex{1} << 27))
        throw PreconditionError("regularity_report horizon too large for streaming scan");
    KahanSum W;
    double sup = 0.0, half_sup = 0.0;
    BigIndex argmax = 0;
    BigIndex half = horizon / 2;
    for (BigIndex m = 1; m <= horizon; ++m) {
        double wm = w.at(m);
        W.add(wm);
        double ratio = W.value() / (to_double(m) * wm);
        if (ratio > sup) {
            sup = ratio;
            argmax = m;
        }
        if (m == half) half_sup = sup;
    }
    Trend trend = sup > half_sup * (1.0 + trend_epsilon) ? Trend::Growing : Trend::BoundedLooking;
    return RegularityReport{horizon, sup, argmax, half_sup, trend, trend_epsilon};
}

}  // namespace garling
