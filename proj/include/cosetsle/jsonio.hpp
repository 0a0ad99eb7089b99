#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cosetsle {

/// Serializes with every floating-point number at 17 significant digits
/// (bit round-trip); layout otherwise matches nlohmann's 2-space dump.
inline std::string dump_json17(const nlohmann::ordered_json& j, int indent = 2, int depth = 0) {
    using json = nlohmann::ordered_json;
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string closepad(static_cast<std::size_t>(indent) * depth, ' ');
    switch (j.type()) {
        case json::value_t::number_float: {
            char buf[40];
            const double v = j.get<double>();
            if (std::isfinite(v))
                std::snprintf(buf, sizeof buf, "%.17g", v);
            else
                std::snprintf(buf, sizeof buf, "null");
            return buf;
        }
        case json::value_t::object: {
            if (j.empty()) return "{}";
            std::string out = "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + json(it.key()).dump() + ": " + dump_json17(it.value(), indent, depth + 1);
            }
            return out + "\n" + closepad + "}";
        }
        case json::value_t::array: {
            if (j.empty()) return "[]";
            std::string out = "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad + dump_json17(v, indent, depth + 1);
            }
            return out + "\n" + closepad + "]";
        }
        default:
            return j.dump();
    }
}

/// Parses "start:end:step" into an inclusive grid (tolerant endpoint).
inline std::vector<double> parse_grid(const std::string& spec) {
    double a = 0.0, b = 0.0, s = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &s) != 3 || s <= 0.0 || b < a)
        throw std::domain_error("grid must be start:end:step with step > 0, end >= start");
    std::vector<double> xs;
    for (double x = a; x <= b + 0.5 * s; x += s) xs.push_back(x);
    return xs;
}

}  // namespace cosetsle
