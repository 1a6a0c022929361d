#include "lvfb/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace lvfb {

namespace {

std::string trim(std::string_view s)
{
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) {
        return {};
    }
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

double parse_real(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
}

constexpr std::array<const char*, 10> kPhysicalKeys = {"d1", "d2", "a1", "a2", "b1",
                                                       "b2", "c1", "c2", "mu_hat", "H0"};

}  // namespace

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin)
{
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        cfg.values_[key] = value;
    }
    return cfg;
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const
{
    auto s = get_string(key);
    if (!s) {
        return std::nullopt;
    }
    return parse_real(key, *s);
}

std::optional<int> KeyValueConfig::get_int(const std::string& key) const
{
    auto s = get_string(key);
    if (!s) {
        return std::nullopt;
    }
    int v = 0;
    auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc{} || ptr != s->data() + s->size()) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + *s + "'");
    }
    return v;
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const
{
    auto s = get_string(key);
    if (!s) {
        return std::nullopt;
    }
    std::string lower = *s;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "1" || lower == "true" || lower == "yes" || lower == "on") {
        return true;
    }
    if (lower == "0" || lower == "false" || lower == "no" || lower == "off") {
        return false;
    }
    throw ConfigError("key '" + key + "': expected a boolean, got '" + *s + "'");
}

std::optional<std::vector<double>> KeyValueConfig::get_doubles(const std::string& key) const
{
    auto s = get_string(key);
    if (!s) {
        return std::nullopt;
    }
    std::string text = *s;
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        out.push_back(parse_real(key, tok));
    }
    return out;
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const
{
    return get_double(key).value_or(fallback);
}

int KeyValueConfig::get_int_or(const std::string& key, int fallback) const
{
    return get_int(key).value_or(fallback);
}

ConfiguredModel model_from_config(const KeyValueConfig& cfg)
{
    ConfiguredModel out;
    const int N = cfg.get_int_or("N", 1);

    bool any_physical = std::any_of(kPhysicalKeys.begin(), kPhysicalKeys.end(),
                                    [&](const char* k) { return cfg.has(k); });
    if (any_physical) {
        PhysicalParams p;
        auto need = [&](const char* k) {
            auto v = cfg.get_double(k);
            if (!v) {
                throw ConfigError(std::string("physical block incomplete: missing '") + k + "'");
            }
            return *v;
        };
        p.d1 = need("d1");
        p.d2 = need("d2");
        p.a1 = need("a1");
        p.a2 = need("a2");
        p.b1 = need("b1");
        p.b2 = need("b2");
        p.c1 = need("c1");
        p.c2 = need("c2");
        p.mu_hat = need("mu_hat");
        p.H0 = need("H0");
        auto nd = nondimensionalize(p, N);
        out.model = nd.model;
        out.h0 = nd.h0;
        out.from_physical = true;
        return out;
    }

    ModelParams m;
    m.d = cfg.get_double_or("d", m.d);
    m.r = cfg.get_double_or("r", m.r);
    m.a = cfg.get_double_or("a", m.a);
    m.b = cfg.get_double_or("b", m.b);
    m.mu = cfg.get_double_or("mu", m.mu);
    m.N = N;
    m.validate();
    out.model = m;
    out.h0 = cfg.get_double_or("h0", out.h0);
    return out;
}

}  // namespace lvfb
