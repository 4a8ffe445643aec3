#pragma once

#include <map>
#include <string>
#include <vector>

#include "uavdet/common.hpp"

namespace uavdet::pipeline {

/// Flat key/value text config: one `key = value` per line, `#` comments.
/// Every command writes its resolved configuration back in this format so a
/// run can be replayed from the snapshot alone.
class Config {
public:
    static Config load(const std::string& path);
    void save(const std::string& path) const; // sorted keys, stable bytes

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set(const std::string& key, uint64_t value);

    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated doubles.
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace uavdet::pipeline
