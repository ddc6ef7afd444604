#include "kshift/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kshift {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  bool prev_dot = false;
  for (char c : key) {
    if (c == '.') {
      if (prev_dot) return false;
      prev_dot = true;
      continue;
    }
    prev_dot = false;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

}  // namespace

bool KvDocument::has(const std::string& key) const { return find(key) != nullptr; }

const KvDocument::Entry* KvDocument::find(const std::string& key) const {
  for (const Entry& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

KvDocument KvDocument::parse_text(const std::string& text, const std::string& origin) {
  KvDocument doc;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected `key = value`, got \"" + line + "\"");
    Entry e;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = line_no;
    if (!valid_key(e.key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": invalid key \"" +
                        e.key + "\"");
    if (doc.has(e.key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key \"" +
                        e.key + "\"");
    doc.entries.push_back(std::move(e));
  }
  return doc;
}

KvDocument KvDocument::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

double kv_to_double(const KvDocument::Entry& e) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(e.value.c_str(), &end);
  if (end == e.value.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError("key \"" + e.key + "\": expected a number, got \"" + e.value + "\"");
  return v;
}

long long kv_to_int(const KvDocument::Entry& e) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(e.value.c_str(), &end, 10);
  if (end == e.value.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError("key \"" + e.key + "\": expected an integer, got \"" + e.value +
                      "\"");
  return v;
}

bool kv_to_bool(const KvDocument::Entry& e) {
  std::string v = e.value;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError("key \"" + e.key + "\": expected a boolean, got \"" + e.value + "\"");
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) parts.push_back(item);
  return parts;
}

}  // namespace

std::vector<double> kv_to_double_list(const KvDocument::Entry& e) {
  std::vector<double> out;
  int idx = 0;
  for (const std::string& part : split_list(e.value)) {
    KvDocument::Entry item{e.key + "[" + std::to_string(idx++) + "]", part, e.line};
    item.value.erase(0, item.value.find_first_not_of(" \t"));
    if (!item.value.empty())
      item.value.erase(item.value.find_last_not_of(" \t") + 1);
    out.push_back(kv_to_double(item));
  }
  if (out.empty()) throw ConfigError("key \"" + e.key + "\": empty list");
  return out;
}

std::vector<long long> kv_to_int_list(const KvDocument::Entry& e) {
  std::vector<long long> out;
  int idx = 0;
  for (const std::string& part : split_list(e.value)) {
    KvDocument::Entry item{e.key + "[" + std::to_string(idx++) + "]", part, e.line};
    item.value.erase(0, item.value.find_first_not_of(" \t"));
    if (!item.value.empty())
      item.value.erase(item.value.find_last_not_of(" \t") + 1);
    out.push_back(kv_to_int(item));
  }
  if (out.empty()) throw ConfigError("key \"" + e.key + "\": empty list");
  return out;
}

}  // namespace kshift
