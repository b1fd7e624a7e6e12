#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace randcheck {

/*!
 * \brief Flat dotted-key configuration.
 *
 * Text form: `key = value` lines, `[section]` headers prefixing following
 * keys with `section.`, `#` or `;` comments. Values are read as JSON when
 * they parse as JSON (numbers, booleans, lists) and as bare strings
 * otherwise. A file whose first non-blank character is `{` is read as a
 * JSON object; nested objects are flattened to dotted keys.
 *
 * Every getter records the effective value (explicit or default) so that
 * resolved() returns the full configuration a run actually used.
 */
class Config {
  public:
    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    // "key=value" override; the value is interpreted like a file value.
    void set_override(std::string_view assignment);
    void set(const std::string& key, nlohmann::json value);

    bool has(const std::string& key) const;

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::int64_t require_int(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::optional<double> get_optional_double(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::optional<std::string> get_optional_string(const std::string& key) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
    std::vector<std::int64_t> get_int_list(const std::string& key, const std::vector<std::int64_t>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key, const std::vector<std::string>& fallback) const;
    std::vector<std::pair<int, int>> get_pair_list(const std::string& key,
                                                   const std::vector<std::pair<int, int>>& fallback) const;

    // Keys that were set but never read.
    std::vector<std::string> unused_keys() const;

    // Flat object of every key read so far, sorted by key.
    nlohmann::json resolved() const;

  private:
    const nlohmann::json* lookup(const std::string& key) const;
    void record(const std::string& key, const nlohmann::json& value) const;

    std::map<std::string, nlohmann::json> values_;
    mutable std::map<std::string, nlohmann::json> resolved_;
};

}  // namespace randcheck
