#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cascadeforge {

// Flat `key = value` configuration with `#` comments. Unknown keys are
// rejected at parse time; value semantics are validated by the consuming
// module.
class RunConfig {
public:
    static RunConfig from_file(const std::string& path);
    static RunConfig empty() { return RunConfig{}; }

    // Later sources win; `spec` is "key=value".
    void merge_file(const std::string& path);
    void apply_override(const std::string& spec);
    // CASCADEFORGE_SEED, when set, overrides train.seed.
    void apply_environment();

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    double require_double(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    long require_int(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static void check_known(const std::string& key);
    std::map<std::string, std::string> values_;
};

} // namespace cascadeforge
