#include "netfolio/key_value.hpp"

#include "netfolio/error.hpp"

#include <charconv>
#include <fstream>

namespace netfolio {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (true) {
        const auto pos = s.find(sep, begin);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(begin));
            break;
        }
        parts.push_back(s.substr(begin, pos - begin));
        begin = pos + 1;
    }
    return parts;
}

KeyValues parse_key_values(std::istream& in)
{
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected `key = value`", line_no);
        }
        auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ParseError("empty key", line_no);
        }
        if (kv.count(key) != 0) {
            throw ParseError("duplicate key `" + key + "`", line_no);
        }
        kv.emplace(std::move(key), trim(line.substr(eq + 1)));
    }
    return kv;
}

KeyValues load_key_values(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    return parse_key_values(in);
}

namespace {

double to_double(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key `" + key + "`: not a number: `" + text + "`");
    }
}

long long to_int(const std::string& key, const std::string& text)
{
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("key `" + key + "`: not an integer: `" + text + "`");
    }
    return v;
}

}  // namespace

double kv_double(const KeyValues& kv, const std::string& key, double fallback)
{
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : to_double(key, it->second);
}

long long kv_int(const KeyValues& kv, const std::string& key, long long fallback)
{
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : to_int(key, it->second);
}

std::string kv_string(const KeyValues& kv, const std::string& key, const std::string& fallback)
{
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::vector<double> kv_double_list(const KeyValues& kv, const std::string& key,
                                   const std::vector<double>& fallback)
{
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    std::vector<double> out;
    for (const auto& item : split(it->second, ',')) {
        const auto t = trim(item);
        if (!t.empty()) {
            out.push_back(to_double(key, t));
        }
    }
    return out;
}

std::vector<int> kv_int_list(const KeyValues& kv, const std::string& key,
                             const std::vector<int>& fallback)
{
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    std::vector<int> out;
    for (const auto& item : split(it->second, ',')) {
        const auto t = trim(item);
        if (!t.empty()) {
            out.push_back(static_cast<int>(to_int(key, t)));
        }
    }
    return out;
}

}  // namespace netfolio
