#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace madapt {

// Line-oriented `key = value` config with [section] headers and # comments.
// Every lookup marks the key consumed; require_consumed() then rejects
// typos instead of silently ignoring them. Errors carry origin:line.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& origin);
    static ConfigFile load(const std::string& path);  // ConfigError when unreadable

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;

    // Comma-separated values, trimmed; an empty value gives an empty list.
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
    std::vector<std::uint64_t> get_uint_list(const std::string& section,
                                             const std::string& key) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key) const;

    // ConfigError naming every unread key in the listed sections (a config
    // may carry sections for other commands; typos inside a section a
    // command does read must still fail loudly).
    void require_consumed(const std::vector<std::string>& sections) const;

    // Sections in file order (for diagnostics).
    std::vector<std::string> sections() const;

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        mutable bool used = false;
    };

    const Entry* find(const std::string& section, const std::string& key) const;
    const Entry& at(const std::string& section, const std::string& key) const;
    std::string where(const Entry& e) const;

    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> data_;
};

}  // namespace madapt
