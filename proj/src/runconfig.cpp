#include "thermogen/runconfig.hpp"

#include <filesystem>
#include <fstream>

#ifndef THERMOGEN_VERSION
#define THERMOGEN_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace thermogen {

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read config file: " + path);
    KeyValueConfig cfg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        cfg.values[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return cfg;
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

int64_t KeyValueConfig::get_int(const std::string& key, int64_t fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : std::stoll(it->second);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : std::stod(it->second);
}

void write_run_manifest(const std::string& out_dir,
                        const std::vector<std::pair<std::string, std::string>>& entries) {
    fs::create_directories(out_dir);
    std::ofstream os(fs::path(out_dir) / "run_manifest.txt");
    if (!os) throw IoError("cannot write run manifest under " + out_dir);
    os << "version=" << tool_version() << "\n";
    for (const auto& [k, v] : entries) os << k << "=" << v << "\n";
    if (!os) throw IoError("run manifest write failed under " + out_dir);
}

std::string tool_version() { return THERMOGEN_VERSION; }

}  // namespace thermogen
