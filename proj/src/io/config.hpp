#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace litetok {

// Line-based config: "[section]" headers and "key = value" lines, '#' comments.
// No nesting. Parse errors name the offending line.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback) const;
    int64_t get_int(const std::string& section, const std::string& key, int64_t fallback) const;
    uint64_t get_u64(const std::string& section, const std::string& key, uint64_t fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    // every key of the section must appear in `known`
    void require_known_keys(const std::string& section, const std::set<std::string>& known) const;
    std::vector<std::string> sections() const;

  private:
    // section -> key -> value
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::string origin_;
};

std::vector<std::string> split_csv(const std::string& text);

}  // namespace litetok
