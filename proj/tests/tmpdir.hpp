#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

// Per-process scratch directory for file round-trip tests.
inline std::string temp_path(const std::string& name) {
    namespace fs = std::filesystem;
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() /
                     ("madapt-tests-" + std::to_string(static_cast<long long>(::getpid())));
        fs::create_directories(p);
        return p;
    }();
    static std::atomic<unsigned> counter{0};
    fs::path dir = root / std::to_string(counter.fetch_add(1));
    fs::create_directories(dir);
    return (dir / name).string();
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
