#pragma once

#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace staglf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat sectioned key-value configuration. Canonical serialization is sorted,
// so parse(serialize(cfg)) == cfg and echo files re-run bit-for-bit.
struct RunConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool operator==(const RunConfig& o) const { return sections == o.sections; }

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    static RunConfig parse(const std::string& text) {
        RunConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
                cfg.sections[section];
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value, got '" + line + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": key '" + key + "' outside any [section]");
            cfg.sections[section][key] = value;
        }
        return cfg;
    }

    std::string serialize() const {
        std::string out;
        for (const auto& [name, kv] : sections) {
            out += "[" + name + "]\n";
            for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
            out += "\n";
        }
        return out;
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections.find(section);
        return s != sections.end() && s->second.count(key) > 0;
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections[section][key] = value;
    }

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
        const auto s = sections.find(section);
        if (s == sections.end()) return fallback;
        const auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }

    std::string require_str(const std::string& section, const std::string& key) const {
        if (!has(section, key))
            throw ConfigError("missing required config field [" + section + "] " + key);
        return sections.at(section).at(key);
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        return parse_double(section, key, sections.at(section).at(key));
    }

    long long get_int(const std::string& section, const std::string& key, long long fallback) const {
        if (!has(section, key)) return fallback;
        return parse_int(section, key, sections.at(section).at(key));
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = sections.at(section).at(key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config field [" + section + "] " + key + ": not a boolean: '" + v + "'");
    }

    std::vector<long long> get_int_list(const std::string& section, const std::string& key,
                                        const std::vector<long long>& fallback) const {
        if (!has(section, key)) return fallback;
        std::vector<long long> out;
        std::istringstream in(sections.at(section).at(key));
        std::string item;
        while (std::getline(in, item, ',')) out.push_back(parse_int(section, key, trim(item)));
        return out;
    }

    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
        if (!has(section, key)) return fallback;
        std::vector<double> out;
        std::istringstream in(sections.at(section).at(key));
        std::string item;
        while (std::getline(in, item, ',')) out.push_back(parse_double(section, key, trim(item)));
        return out;
    }

  private:
    static double parse_double(const std::string& section, const std::string& key,
                               const std::string& v) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("config field [" + section + "] " + key + ": not a number: '" + v + "'");
        }
    }

    static long long parse_int(const std::string& section, const std::string& key,
                               const std::string& v) {
        try {
            std::size_t pos = 0;
            const long long i = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return i;
        } catch (const std::exception&) {
            throw ConfigError("config field [" + section + "] " + key + ": not an integer: '" + v + "'");
        }
    }
};

}  // namespace staglf
