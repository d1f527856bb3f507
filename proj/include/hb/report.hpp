#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hb {

using Json = nlohmann::json;

/// One numeric check: pass = (value relation threshold).
struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    /// "<", "<=", ">=", "==" or "finite".
    std::string relation;
    bool pass = false;
};

/// Structured result of a command. Keys serialize in sorted order and
/// doubles in shortest round-trip form, so identical runs give identical bytes.
struct ReportDocument {
    std::string command;
    std::string inputs_digest;
    Json conventions = Json::object();
    std::vector<Check> checks;
    Json data = Json::object();
    /// Only set when timing was requested.
    std::optional<double> wall_time;

    const Check& check_lt(const std::string& name, double value, double threshold);
    const Check& check_le(const std::string& name, double value, double threshold);
    const Check& check_ge(const std::string& name, double value, double threshold);
    const Check& check_true(const std::string& name, bool ok);
    const Check& check_finite(const std::string& name, double value);

    /// Conjunction of all checks.
    bool pass() const;
    /// First failing check, or nullptr.
    const Check* first_failure() const;

    Json to_json() const;
    std::string dump() const;
};

/// JSON value for a double; non-finite values become "inf", "-inf" or "nan".
Json number(double v);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace hb
