#pragma once

// JSON, CSV and manifest output for the command-line front end.

#include <fmt/format.h>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "spdestab/scenarios.hpp"

namespace spdestab::io {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

/// JSON has no NaN or infinity; such values become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json named_values(const NamedValues& nv) {
    Json j = Json::object();
    for (const auto& [k, v] : nv) j[k] = number(v);
    return j;
}

inline Json to_json(const CriterionReport& r) {
    Json j;
    j["theorem"] = r.theorem;
    j["params"] = named_values(r.params);
    j["applicable"] = r.applicable();
    j["satisfied"] = r.satisfied();
    Json vs = Json::array();
    for (const auto& v : r.verdicts)
        vs.push_back({{"name", v.name},
                      {"inequality", v.inequality},
                      {"lhs", number(v.lhs)},
                      {"relation", relation_symbol(v.relation)},
                      {"rhs", number(v.rhs)},
                      {"applicable", v.applicable},
                      {"satisfied", v.satisfied}});
    j["verdicts"] = vs;
    j["derived"] = named_values(r.derived);
    j["predicted_index"] = r.predicted_index ? number(*r.predicted_index) : Json(nullptr);
    j["notes"] = r.notes;
    return j;
}

inline Json config_json(const Config& c) {
    // merged and sorted, numbers and text alike
    std::map<std::string, Json> all;
    for (const auto& [k, v] : c.numbers()) all[k] = number(v);
    for (const auto& [k, v] : c.texts()) all[k] = v;
    Json j = Json::object();
    for (auto& [k, v] : all) j[k] = v;
    return j;
}

inline Json to_json(const ScenarioReport& r, const std::vector<std::string>& series_files) {
    Json j;
    j["schema"] = "spdestab.scenario_report";
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = r.scenario;
    j["theorems"] = r.theorems;
    j["verdict"] = outcome_name(r.verdict);
    j["config"] = config_json(r.config);
    Json crit = Json::array();
    for (const auto& c : r.criteria) crit.push_back(to_json(c));
    j["criteria"] = crit;
    Json checks = Json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"description", c.description},
                          {"measured", number(c.measured)},
                          {"relation", relation_symbol(c.relation)},
                          {"threshold", number(c.threshold)},
                          {"passed", c.passed},
                          {"hypothesis_holds", c.hypothesis_holds},
                          {"resolved", c.resolved},
                          {"drives_verdict", c.drives_verdict}});
    j["checks"] = checks;
    j["measurements"] = named_values(r.measurements);
    j["series_files"] = series_files;
    j["notes"] = r.notes;
    return j;
}

inline std::string csv_number(double v) { return fmt::format("{:.17g}", v); }

inline std::string to_csv(const SeriesTable& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string sha256_hex(const std::string& text) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string seed_source = "config";
    std::vector<std::string> scenarios;
    std::vector<std::string> outputs;
    std::string started;
    std::string finished;
    unsigned jobs = 1;
};

inline Json to_json(const RunManifest& m) {
    return Json{{"schema", "spdestab.manifest"},
                {"schema_version", kSchemaVersion},
                {"version", kVersion},
                {"command", m.command},
                {"config_hash", m.config_hash},
                {"seed", m.seed},
                {"seed_source", m.seed_source},
                {"scenarios", m.scenarios},
                {"outputs", m.outputs},
                {"jobs", m.jobs},
                {"started", m.started},
                {"finished", m.finished}};
}

}  // namespace spdestab::io
