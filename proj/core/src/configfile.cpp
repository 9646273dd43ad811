#include "madapt/configfile.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "madapt/error.hpp"
#include "madapt/textio.hpp"

namespace madapt {

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno += 1;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where + ": unterminated section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            cfg.data_[section];  // a header alone still declares the section
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        if (section.empty())
            throw ConfigError(where + ": key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        auto [it, inserted] = cfg.data_[section].emplace(
            key, Entry{trim(line.substr(eq + 1)), lineno, false});
        if (!inserted)
            throw ConfigError(where + ": duplicate key '" + key + "' in [" + section +
                              "] (first at line " + std::to_string(it->second.line) + ")");
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
    auto s = data_.find(section);
    if (s == data_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
}

const ConfigFile::Entry& ConfigFile::at(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw ConfigError(origin_ + ": missing required key '" + key + "' in [" + section + "]");
    return *e;
}

std::string ConfigFile::where(const Entry& e) const {
    return origin_ + ":" + std::to_string(e.line);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    return at(section, key).value;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    return parse_double<ConfigError>(e->value, where(*e) + " (" + key + ")");
}

std::uint64_t ConfigFile::get_uint(const std::string& section, const std::string& key,
                                   std::uint64_t fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    const long long v = parse_int<ConfigError>(e->value, where(*e) + " (" + key + ")");
    if (v < 0) throw ConfigError(where(*e) + ": " + key + " must be >= 0, got " + e->value);
    return static_cast<std::uint64_t>(v);
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
    const Entry* e = find(section, key);
    std::vector<std::string> out;
    if (!e || trim(e->value).empty()) return out;
    for (const std::string& tok : split_on(e->value, ',')) out.push_back(trim(tok));
    return out;
}

std::vector<std::uint64_t> ConfigFile::get_uint_list(const std::string& section,
                                                     const std::string& key) const {
    std::vector<std::uint64_t> out;
    const Entry* e = find(section, key);
    if (!e) return out;
    for (const std::string& tok : get_list(section, key)) {
        const long long v = parse_int<ConfigError>(tok, where(*e) + " (" + key + ")");
        if (v < 0) throw ConfigError(where(*e) + ": " + key + " entries must be >= 0");
        out.push_back(static_cast<std::uint64_t>(v));
    }
    return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key) const {
    std::vector<double> out;
    const Entry* e = find(section, key);
    if (!e) return out;
    for (const std::string& tok : get_list(section, key))
        out.push_back(parse_double<ConfigError>(tok, where(*e) + " (" + key + ")"));
    return out;
}

void ConfigFile::require_consumed(const std::vector<std::string>& sections) const {
    std::string unknown;
    for (const auto& [section, entries] : data_) {
        if (std::find(sections.begin(), sections.end(), section) == sections.end()) continue;
        for (const auto& [key, entry] : entries) {
            if (entry.used) continue;
            if (!unknown.empty()) unknown += ", ";
            unknown += "[" + section + "] " + key + " (line " + std::to_string(entry.line) + ")";
        }
    }
    if (!unknown.empty())
        throw ConfigError(origin_ + ": unknown config keys: " + unknown);
}

std::vector<std::string> ConfigFile::sections() const {
    std::vector<std::string> out;
    for (const auto& [section, entries] : data_) out.push_back(section);
    return out;
}

}  // namespace madapt
