#include "randcheck/config.hpp"

#include <fstream>
#include <sstream>

#include "randcheck/errors.hpp"
#include "randcheck/rng.hpp"

namespace randcheck {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

nlohmann::json interpret(const std::string& raw) {
    if (raw.empty()) return raw;
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
        try {
            return nlohmann::json::parse(raw);
        } catch (const nlohmann::json::exception&) {
            return raw.substr(1, raw.size() - 2);
        }
    }
    try {
        return nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        return raw;
    }
}

void flatten(const nlohmann::json& obj, const std::string& prefix, std::map<std::string, nlohmann::json>& out) {
    for (const auto& [k, v] : obj.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten(v, key, out);
        } else {
            out[key] = v;
        }
    }
}

[[noreturn]] void type_error(const std::string& key, const char* expected) {
    throw ConfigError("config key '" + key + "' must be " + expected);
}

}  // namespace

Config Config::parse(std::string_view text) {
    Config cfg;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("invalid JSON config: ") + e.what());
        }
        flatten(obj, "", cfg.values_);
        return cfg;
    }
    std::istringstream is{std::string(text)};
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#' || t.front() == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.values_[section.empty() ? key : section + "." + key] = interpret(trim(std::string_view(t).substr(eq + 1)));
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

void Config::set_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' lacks '='");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError("override has an empty key");
    values_[key] = interpret(trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, nlohmann::json value) { values_[key] = std::move(value); }

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const nlohmann::json* Config::lookup(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

void Config::record(const std::string& key, const nlohmann::json& value) const { resolved_[key] = value; }

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    const nlohmann::json* v = lookup(key);
    std::int64_t out = fallback;
    if (v != nullptr) {
        if (!v->is_number_integer()) type_error(key, "an integer");
        out = v->get<std::int64_t>();
    }
    record(key, out);
    return out;
}

std::int64_t Config::require_int(const std::string& key) const {
    if (lookup(key) == nullptr) throw ConfigError("missing required config key '" + key + "'");
    return get_int(key, 0);
}

double Config::get_double(const std::string& key, double fallback) const {
    const nlohmann::json* v = lookup(key);
    double out = fallback;
    if (v != nullptr) {
        if (!v->is_number()) type_error(key, "a number");
        out = v->get<double>();
    }
    record(key, out);
    return out;
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
    const nlohmann::json* v = lookup(key);
    if (v == nullptr || v->is_null() || (v->is_string() && (*v == "none" || *v == "off"))) {
        record(key, nullptr);
        return std::nullopt;
    }
    if (!v->is_number()) type_error(key, "a number or 'none'");
    record(key, v->get<double>());
    return v->get<double>();
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const nlohmann::json* v = lookup(key);
    bool out = fallback;
    if (v != nullptr) {
        if (!v->is_boolean()) type_error(key, "true or false");
        out = v->get<bool>();
    }
    record(key, out);
    return out;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const nlohmann::json* v = lookup(key);
    std::string out = fallback;
    if (v != nullptr) {
        if (!v->is_string()) type_error(key, "a string");
        out = v->get<std::string>();
    }
    record(key, out);
    return out;
}

std::optional<std::string> Config::get_optional_string(const std::string& key) const {
    const nlohmann::json* v = lookup(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) type_error(key, "a string");
    record(key, *v);
    return v->get<std::string>();
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
    const nlohmann::json* v = lookup(key);
    std::uint64_t out = fallback;
    if (v != nullptr) {
        if (v->is_number_unsigned()) {
            out = v->get<std::uint64_t>();
        } else if (v->is_string()) {
            out = parse_seed(v->get<std::string>());
        } else {
            type_error(key, "an unsigned 64-bit integer (decimal or 0x hex)");
        }
    }
    record(key, out);
    return out;
}

std::vector<std::int64_t> Config::get_int_list(const std::string& key,
                                               const std::vector<std::int64_t>& fallback) const {
    const nlohmann::json* v = lookup(key);
    std::vector<std::int64_t> out = fallback;
    if (v != nullptr) {
        out.clear();
        if (v->is_number_integer()) {
            out.push_back(v->get<std::int64_t>());
        } else if (v->is_array()) {
            for (const auto& e : *v) {
                if (!e.is_number_integer()) type_error(key, "a list of integers");
                out.push_back(e.get<std::int64_t>());
            }
        } else {
            type_error(key, "an integer or a list of integers");
        }
    }
    record(key, out);
    return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
    const nlohmann::json* v = lookup(key);
    std::vector<std::string> out = fallback;
    if (v != nullptr) {
        out.clear();
        if (v->is_string()) {
            // comma-separated shorthand: methods = grid,pgd1
            std::string s = v->get<std::string>();
            std::istringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (!item.empty()) out.push_back(item);
            }
        } else if (v->is_array()) {
            for (const auto& e : *v) {
                if (!e.is_string()) type_error(key, "a list of strings");
                out.push_back(e.get<std::string>());
            }
        } else {
            type_error(key, "a list of strings");
        }
    }
    record(key, out);
    return out;
}

std::vector<std::pair<int, int>> Config::get_pair_list(const std::string& key,
                                                       const std::vector<std::pair<int, int>>& fallback) const {
    const nlohmann::json* v = lookup(key);
    std::vector<std::pair<int, int>> out = fallback;
    if (v != nullptr) {
        out.clear();
        if (!v->is_array()) type_error(key, "a list of [a, b] pairs");
        for (const auto& e : *v) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
                type_error(key, "a list of [a, b] integer pairs");
            }
            out.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    }
    nlohmann::json rec = nlohmann::json::array();
    for (const auto& [a, b] : out) rec.push_back({a, b});
    record(key, rec);
    return out;
}

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (!resolved_.count(k)) out.push_back(k);
    }
    return out;
}

nlohmann::json Config::resolved() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : resolved_) out[k] = v;
    return out;
}

}  // namespace randcheck
