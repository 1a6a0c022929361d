#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lvfb/model.hpp"

namespace lvfb {

/// Raised for unreadable or malformed configuration files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration with `#` comments.
///
/// Keys are case-sensitive; a repeated key overrides the earlier value.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig load(const std::filesystem::path& path);
    static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<int> get_int(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    /// Comma- or whitespace-separated list of reals.
    std::optional<std::vector<double>> get_doubles(const std::string& key) const;

    double get_double_or(const std::string& key, double fallback) const;
    int get_int_or(const std::string& key, int fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

struct ConfiguredModel {
    ModelParams model;
    double h0 = 5.0;
    bool from_physical = false;
};

/// Builds the nondimensional model from a config. When any physical key
/// (d1, d2, a1, a2, b1, b2, c1, c2, mu_hat, H0) is present the whole physical
/// block is required and wins over the nondimensional keys.
ConfiguredModel model_from_config(const KeyValueConfig& cfg);

}  // namespace lvfb
