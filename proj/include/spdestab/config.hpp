#pragma once

// Flat key=value configuration with section prefixes ("model.sigma = 0.3").
// A "[model]" line prefixes the keys that follow it. Later writes win, so a
// file followed by --set overrides resolves in one pass.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spdestab/errors.hpp"

namespace spdestab {

/// Raw assignments in the order they were read.
using Assignments = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// One "key=value" pair; `where` names the source for diagnostics.
inline std::pair<std::string, std::string> parse_assignment(std::string_view text, const std::string& where) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", where + ": expected key=value, got '" + std::string(text) + "'");
    std::string key(detail::trim(text.substr(0, eq)));
    std::string value(detail::trim(text.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", where + ": empty key");
    for (char c : key)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
            throw ConfigError(key, where + ": invalid character in key");
    return {key, value};
}

inline Assignments parse_config_text(std::string_view text, const std::string& source = "config") {
    Assignments out;
    std::string section;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("", where + ": unterminated section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            continue;
        }
        auto kv = parse_assignment(line, where);
        if (!section.empty() && kv.first.find('.') == std::string::npos) kv.first = section + "." + kv.first;
        out.push_back(std::move(kv));
    }
    return out;
}

inline Assignments read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Schema

enum class Constraint { any, positive, nonnegative, count, odd_integer, unit_interval, text };

struct ParamSpec {
    std::string key;
    double fallback = 0.0;
    Constraint constraint = Constraint::any;
    double min_count = 1.0;  // for Constraint::count
    std::string text_fallback{};
    std::vector<std::string> choices{};  // for Constraint::text; empty = free text
};

using Schema = std::vector<ParamSpec>;

inline double parse_number(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* b = value.data();
    const char* e = b + value.size();
    if (!value.empty() && *b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw ConfigError(key, "not a number: '" + value + "'");
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite, got '" + value + "'");
    return v;
}

/// Validated, fully-defaulted parameter set.
class Config {
public:
    double num(const std::string& key) const {
        const auto it = numbers_.find(key);
        if (it == numbers_.end()) throw InvalidArgument("config: no numeric key '" + key + "'");
        return it->second;
    }
    long count(const std::string& key) const { return static_cast<long>(num(key)); }
    std::uint64_t seed() const { return static_cast<std::uint64_t>(num("run.seed")); }
    const std::string& text(const std::string& key) const {
        const auto it = texts_.find(key);
        if (it == texts_.end()) throw InvalidArgument("config: no text key '" + key + "'");
        return it->second;
    }
    bool has(const std::string& key) const { return numbers_.count(key) > 0 || texts_.count(key) > 0; }

    void set_num(const std::string& key, double v) { numbers_[key] = v; }
    void set_text(const std::string& key, std::string v) { texts_[key] = std::move(v); }

    const std::map<std::string, double>& numbers() const { return numbers_; }
    const std::map<std::string, std::string>& texts() const { return texts_; }

    /// Sorted "key=value" lines, numbers with 17 significant digits; the hash input.
    std::string canonical_text() const {
        std::map<std::string, std::string> all;
        for (const auto& [k, v] : numbers_) {
            char buf[64];
            const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
            (void)ec;
            all[k] = std::string(buf, p);
        }
        for (const auto& [k, v] : texts_) all[k] = v;
        std::string out;
        for (const auto& [k, v] : all) out += k + "=" + v + "\n";
        return out;
    }

private:
    std::map<std::string, double> numbers_;
    std::map<std::string, std::string> texts_;
};

namespace detail {

inline const ParamSpec& resolve_key(const Schema& schema, const std::string& key) {
    for (const auto& p : schema)
        if (p.key == key) return p;
    // A bare key matches the unique schema entry with that last component.
    if (key.find('.') == std::string::npos) {
        const ParamSpec* hit = nullptr;
        for (const auto& p : schema) {
            const auto dot = p.key.rfind('.');
            if (dot != std::string::npos && p.key.compare(dot + 1, std::string::npos, key) == 0) {
                if (hit) throw ConfigError(key, "ambiguous bare key (matches " + hit->key + " and " + p.key + ")");
                hit = &p;
            }
        }
        if (hit) return *hit;
    }
    throw ConfigError(key, "unknown key");
}

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void check_constraint(const ParamSpec& p, double v) {
    switch (p.constraint) {
        case Constraint::positive:
            if (!(v > 0.0)) throw ConfigError(p.key, "must be > 0, got " + fmt_num(v));
            break;
        case Constraint::nonnegative:
            if (!(v >= 0.0)) throw ConfigError(p.key, "must be >= 0, got " + fmt_num(v));
            break;
        case Constraint::count:
            if (v != std::floor(v) || v < p.min_count || v > 9.0e15)
                throw ConfigError(p.key, "must be an integer >= " + fmt_num(p.min_count) + ", got " + fmt_num(v));
            break;
        case Constraint::odd_integer:
            if (v != std::floor(v) || std::fmod(v, 2.0) != 1.0) throw ConfigError(p.key, "must be an odd integer, got " + fmt_num(v));
            break;
        case Constraint::unit_interval:
            if (!(v > 0.0 && v < 1.0)) throw ConfigError(p.key, "must lie in (0, 1), got " + fmt_num(v));
            break;
        case Constraint::any:
        case Constraint::text:
            break;
    }
}

}  // namespace detail

/// Applies `assignments` in order over the schema defaults and validates every field.
inline Config resolve_config(const Schema& schema, const Assignments& assignments) {
    std::map<std::string, std::string> raw;
    for (const auto& [k, v] : assignments) raw[detail::resolve_key(schema, k).key] = v;

    Config c;
    for (const auto& p : schema) {
        const auto it = raw.find(p.key);
        if (p.constraint == Constraint::text) {
            std::string v = it == raw.end() ? p.text_fallback : it->second;
            if (!p.choices.empty()) {
                bool ok = false;
                std::string list;
                for (const auto& ch : p.choices) {
                    ok = ok || ch == v;
                    list += (list.empty() ? "" : "|") + ch;
                }
                if (!ok) throw ConfigError(p.key, "must be one of " + list + ", got '" + v + "'");
            }
            c.set_text(p.key, std::move(v));
            continue;
        }
        const double v = it == raw.end() ? p.fallback : parse_number(p.key, it->second);
        detail::check_constraint(p, v);
        c.set_num(p.key, v);
    }
    return c;
}

}  // namespace spdestab
