#pragma once

#include <map>
#include <string>
#include <vector>

#include "thermogen/common.hpp"

namespace thermogen {

// Line-oriented key=value configuration; '#' starts a comment.
struct KeyValueConfig {
    std::map<std::string, std::string> values;

    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
};

// Every CLI run records its inputs, seed, and version for reproducibility.
void write_run_manifest(const std::string& out_dir,
                        const std::vector<std::pair<std::string, std::string>>& entries);

std::string tool_version();

}  // namespace thermogen
