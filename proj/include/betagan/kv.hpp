#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "betagan/errors.hpp"
#include "betagan/numio.hpp"

namespace betagan {

/// Flat `key = value` document with dotted section prefixes. Keys are unique;
/// writes are sorted so files diff cleanly.
class KvMap {
public:
    static KvMap parse(std::istream& in) {
        KvMap kv;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::size_t start = line.find_first_not_of(" \t");
            if (start == std::string::npos) continue;
            if (line[start] == '#') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected 'key = value'", line_no);
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ParseError("empty key", line_no);
            if (kv.entries_.count(key))
                throw ParseError("duplicate key '" + key + "'", line_no);
            kv.entries_[key] = value;
        }
        return kv;
    }

    static KvMap load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read " + path.string());
        return parse(in);
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        for (const auto& [key, value] : entries_) out << key << " = " << value << '\n';
        if (!out) throw IoError("write failed for " + path.string());
    }

    bool contains(const std::string& key) const { return entries_.count(key) != 0; }

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set(const std::string& key, long long value) { set(key, std::to_string(value)); }
    void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }

    const std::string& get(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            throw ConstraintError("missing required key '" + key + "'");
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return parse_double(get(key)); }

    double get_double_or(const std::string& key, double fallback) const {
        return contains(key) ? get_double(key) : fallback;
    }

    long long get_int(const std::string& key) const { return parse_integer(get(key)); }

    long long get_int_or(const std::string& key, long long fallback) const {
        return contains(key) ? get_int(key) : fallback;
    }

    std::size_t get_count(const std::string& key) const {
        const long long v = get_int(key);
        if (v < 0) throw ConstraintError("key '" + key + "' must be nonnegative");
        return static_cast<std::size_t>(v);
    }

    std::size_t get_count_or(const std::string& key, std::size_t fallback) const {
        return contains(key) ? get_count(key) : fallback;
    }

    bool get_bool_or(const std::string& key, bool fallback) const {
        if (!contains(key)) return fallback;
        const std::string& v = get(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConstraintError("key '" + key + "' must be true|false");
    }

    /// Comma-separated doubles, e.g. "0.1,0.2,0.3".
    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        std::istringstream ss(get(key));
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(parse_double(trim(cell)));
        return out;
    }

    std::vector<std::size_t> get_count_list(const std::string& key) const {
        std::vector<std::size_t> out;
        std::istringstream ss(get(key));
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const long long v = parse_integer(trim(cell));
            if (v < 1) throw ConstraintError("key '" + key + "' entries must be >= 1");
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    static std::string trim(const std::string& s) {
        const std::size_t first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos) return "";
        const std::size_t last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    }

    std::map<std::string, std::string> entries_;
};

}  // namespace betagan
