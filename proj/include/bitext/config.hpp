#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bitext/unicode.hpp"

namespace bitext {

// Sectioned key = value config, one section per pipeline stage. Lines
// starting with '#' or ';' are comments.
class Config {
  public:
    Config() = default;

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = uni::trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[' && t.back() == ']') {
                section = uni::trim(t.substr(1, t.size() - 2));
                continue;
            }
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected key = value");
            std::string key = uni::trim(t.substr(0, eq));
            std::string value = uni::trim(t.substr(eq + 1));
            // strip optional quotes
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            cfg.values_[section + "." + key] = value;
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) > 0;
    }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = {}) const {
        auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_real(const std::string& section, const std::string& key,
                    double fallback) const {
        auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : std::stod(it->second);
    }

    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const {
        auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : std::stoll(it->second);
    }

    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const {
        auto it = values_.find(section + "." + key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        throw std::runtime_error("config " + section + "." + key +
                                 ": expected boolean, got " + it->second);
    }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace bitext
