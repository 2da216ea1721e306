#include "garling/report.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace garling {

std::string format_double_17(double x) {
    if (std::isnan(x)) return "null";
    if (std::isinf(x)) return x > 0 ? "1e999" : "-1e999";  // out-of-band sentinel
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

void emit(const nlohmann::json& j, std::string& out, int indent, int depth) {
    const auto pad = [&](int d) {
        if (indent < 0) return;
        out.push_back('\n');
        out.append(static_cast<size_t>(indent) * d, ' ');
    };
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out.push_back('{');
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out.push_back(',');
                first = false;
                pad(depth + 1);
                out += nlohmann::json(it.key()).dump();
                out.push_back(':');
                if (indent >= 0) out.push_back(' ');
                emit(it.value(), out, indent, depth + 1);
            }
            pad(depth);
            out.push_back('}');
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out.push_back('[');
            bool first = true;
            for (const auto& e : j) {
                if (!first) out.push_back(',');
                first = false;
                pad(depth + 1);
                emit(e, out, indent, depth + 1);
            }
            pad(depth);
            out.push_back(']');
            return;
        }
        case nlohmann::json::value_t::number_float:
            out += format_double_17(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

std::string canonical_json(const nlohmann::json& j, int indent) {
    std::string out;
    emit(j, out, indent, 0);
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace garling
