#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace netfolio {

/// Flat `key = value` document. Blank lines and `#` comments are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::filesystem::path& path);

// Typed accessors. Each throws ConfigError naming the key on a bad value.
double kv_double(const KeyValues& kv, const std::string& key, double fallback);
long long kv_int(const KeyValues& kv, const std::string& key, long long fallback);
std::string kv_string(const KeyValues& kv, const std::string& key, const std::string& fallback);
std::vector<double> kv_double_list(const KeyValues& kv, const std::string& key,
                                   const std::vector<double>& fallback);
std::vector<int> kv_int_list(const KeyValues& kv, const std::string& key,
                             const std::vector<int>& fallback);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

}  // namespace netfolio
