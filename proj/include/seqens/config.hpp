#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqens {

// Flat key-value configuration: one `key = value` per line, `#` comments,
// blank lines ignored. The original text is retained so runs can echo their
// configuration verbatim for provenance.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig parse_string(const std::string& text, const std::string& origin = "<string>") {
        KvConfig cfg;
        cfg.raw_text_ = text;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        std::size_t line_no = 0;
        std::vector<std::string> errors;
        while (std::getline(in, line)) {
            ++line_no;
            std::string s = strip_comment(line);
            if (trim(s).empty()) continue;
            auto eq = s.find('=');
            if (eq == std::string::npos) {
                errors.push_back(origin + ":" + std::to_string(line_no) +
                                 ": expected 'key = value', got '" + trim(s) + "'");
                continue;
            }
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty()) {
                errors.push_back(origin + ":" + std::to_string(line_no) + ": empty key");
                continue;
            }
            cfg.values_[key] = value;
            cfg.order_.push_back(key);
        }
        if (!errors.empty()) throw std::runtime_error(join_errors(errors));
        return cfg;
    }

    static KvConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error(path + ": cannot open config file");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) {
        if (!has(key)) order_.push_back(key);
        values_[key] = value;
    }

    std::string get_str(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw std::runtime_error(origin_ + ": missing key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_double(key, it->second);
    }

    std::size_t get_size(const std::string& key, std::size_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        double v = to_double(key, it->second);
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw std::runtime_error(origin_ + ": key '" + key +
                                     "' must be a non-negative integer, got '" + it->second + "'");
        }
        return static_cast<std::size_t>(v);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw std::runtime_error(origin_ + ": key '" + key + "' must be an integer, got '" +
                                     it->second + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw std::runtime_error(origin_ + ": key '" + key + "' must be true/false, got '" +
                                 it->second + "'");
    }

    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return split_doubles(key, it->second);
    }

    std::vector<std::size_t> get_sizes(const std::string& key,
                                       const std::vector<std::size_t>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::size_t> out;
        for (double v : split_doubles(key, it->second)) out.push_back(static_cast<std::size_t>(v));
        return out;
    }

    // Reports every key not in the allowed set, so typos surface all at once.
    std::vector<std::string> unknown_keys(const std::vector<std::string>& allowed) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) {
            bool ok = false;
            for (const auto& a : allowed)
                if (k == a) ok = true;
            if (!ok) out.push_back(k);
        }
        return out;
    }

    const std::string& raw_text() const { return raw_text_; }
    const std::string& origin() const { return origin_; }

private:
    static std::string strip_comment(const std::string& s) {
        auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static std::string join_errors(const std::vector<std::string>& errors) {
        std::string out = "config errors:";
        for (const auto& e : errors) out += "\n  " + e;
        return out;
    }

    double to_double(const std::string& key, const std::string& value) const {
        try {
            std::size_t used = 0;
            double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error(origin_ + ": key '" + key + "' must be numeric, got '" +
                                     value + "'");
        }
    }

    std::vector<double> split_doubles(const std::string& key, const std::string& value) const {
        std::vector<double> out;
        std::stringstream ss(value);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(to_double(key, trim(cell)));
        return out;
    }

    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
    std::string raw_text_;
    std::string origin_;
};

}  // namespace seqens
