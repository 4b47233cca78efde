#include <cctype>
#include <fstream>
#include <sstream>

#include "genoja/harness.hpp"

namespace genoja {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

RawConfig RawConfig::parse_string(const std::string& text,
                                  const std::string& origin) {
    RawConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": empty section name");
            }
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value, got '" + t + "'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key");
        }
        if (!section.empty()) key = section + "." + key;
        cfg.set(key, value);
    }
    return cfg;
}

RawConfig RawConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

std::optional<std::string> RawConfig::get(const std::string& key) const {
    for (const auto& [k, v] : entries) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::string RawConfig::get_or(const std::string& key,
                              const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

void RawConfig::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries.emplace_back(key, value);
}

}  // namespace genoja
