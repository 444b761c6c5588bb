#include "io/config.hpp"

#include <fstream>
#include <sstream>

namespace litetok {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            cfg.values_[section];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value, got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
        if (cfg.values_[section].count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        cfg.values_[section][key] = val;
    }
    return cfg;
}

bool Config::has_section(const std::string& section) const { return values_.count(section) > 0; }

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = values_.find(section);
    return it != values_.end() && it->second.count(key) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    auto it = values_.find(section);
    if (it == values_.end()) return fallback;
    auto kit = it->second.find(key);
    return kit == it->second.end() ? fallback : kit->second;
}

int64_t Config::get_int(const std::string& section, const std::string& key, int64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_str(section, key, "");
    try {
        size_t pos = 0;
        int64_t r = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v + "' is not an integer");
    }
}

uint64_t Config::get_u64(const std::string& section, const std::string& key, uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_str(section, key, "");
    try {
        size_t pos = 0;
        uint64_t r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v + "' is not an unsigned integer");
    }
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_str(section, key, "");
    try {
        size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v + "' is not a number");
    }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_str(section, key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v + "' is not a boolean");
}

void Config::require_known_keys(const std::string& section, const std::set<std::string>& known) const {
    auto it = values_.find(section);
    if (it == values_.end()) return;
    for (const auto& [key, val] : it->second)
        if (!known.count(key))
            throw ConfigError(origin_ + ": unknown key '" + key + "' in section [" + section + "]");
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    for (const auto& [name, kv] : values_) out.push_back(name);
    return out;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t b = item.find_first_not_of(" \t");
        size_t e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace litetok
