#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ndnf/error.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

// Flat key/value settings. A "[train]" header prefixes the keys below it with
// "train."; '#' starts a comment; string values may be double-quoted.
class Config {
public:
    static Config parse(std::string_view text) {
        Config c;
        std::istringstream in{std::string(text)};
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            line = strip_comment(line);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw parse_error("config line " + std::to_string(lineno) + ": bad section");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw parse_error("config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = unquote(trim(line.substr(eq + 1)));
            if (key.empty()) throw parse_error("config line " + std::to_string(lineno) + ": empty key");
            c.values_[section.empty() ? key : section + "." + key] = value;
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read config '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw parse_error("config is missing '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        return has(key) ? parse_double(values_.at(key)) : fallback;
    }

    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const auto& s = values_.at(key);
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw parse_error("config value for '" + key + "' is not a non-negative integer: '" + s + "'");
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& s = values_.at(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw parse_error("config value for '" + key + "' is not a boolean: '" + s + "'");
    }

    // Comma-separated, optionally inside [ ].
    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        if (!has(key)) return out;
        std::string s = values_.at(key);
        if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
        std::string cur;
        std::istringstream in(s);
        while (std::getline(in, cur, ','))
            if (!trim(cur).empty()) out.push_back(unquote(trim(cur)));
        return out;
    }

    // Rejects keys outside the known set, so typos fail loudly.
    void check_known(const std::set<std::string>& known) const {
        for (const auto& [k, v] : values_)
            if (!known.count(k)) throw parse_error("unknown config key '" + k + "'");
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    }
    static std::string strip_comment(const std::string& s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') quoted = !quoted;
            if (s[i] == '#' && !quoted) return s.substr(0, i);
        }
        return s;
    }
    static std::string unquote(const std::string& s) {
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
        return s;
    }

    std::map<std::string, std::string> values_;
};

} // namespace ndnf
