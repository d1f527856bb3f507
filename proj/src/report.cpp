#include "hb/report.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "hb/error.hpp"

namespace hb {

namespace {

const Check& push(std::vector<Check>& checks, Check c) {
    checks.push_back(std::move(c));
    return checks.back();
}

}  // namespace

const Check& ReportDocument::check_lt(const std::string& name, double value, double threshold) {
    return push(checks, {name, value, threshold, "<", value < threshold});
}

const Check& ReportDocument::check_le(const std::string& name, double value, double threshold) {
    return push(checks, {name, value, threshold, "<=", value <= threshold});
}

const Check& ReportDocument::check_ge(const std::string& name, double value, double threshold) {
    return push(checks, {name, value, threshold, ">=", value >= threshold});
}

const Check& ReportDocument::check_true(const std::string& name, bool ok) {
    return push(checks, {name, ok ? 1.0 : 0.0, 1.0, "==", ok});
}

const Check& ReportDocument::check_finite(const std::string& name, double value) {
    return push(checks, {name, value, std::numeric_limits<double>::infinity(), "finite", std::isfinite(value)});
}

bool ReportDocument::pass() const { return first_failure() == nullptr; }

const Check* ReportDocument::first_failure() const {
    for (const auto& c : checks) {
        if (!c.pass) return &c;
    }
    return nullptr;
}

Json ReportDocument::to_json() const {
    Json j;
    j["command"] = command;
    j["inputs_digest"] = inputs_digest;
    j["conventions"] = conventions;
    Json arr = Json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name},
                       {"value", number(c.value)},
                       {"threshold", number(c.threshold)},
                       {"relation", c.relation},
                       {"pass", c.pass}});
    }
    j["checks"] = arr;
    j["data"] = data;
    j["pass"] = pass();
    if (wall_time) j["wall_time_s"] = *wall_time;
    return j;
}

std::string ReportDocument::dump() const { return to_json().dump(2) + "\n"; }

Json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

}  // namespace hb
