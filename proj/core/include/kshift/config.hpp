#pragma once

#include <string>
#include <vector>

#include "kshift/errors.hpp"

namespace kshift {

/// Flat key-value configuration document. One `key = value` pair per line,
/// dotted keys (`kernel.profile = polynomial`), `#` comments, blank lines
/// ignored. Keys must match [A-Za-z0-9_.]+ and may not repeat.
struct KvDocument {
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };

  std::vector<Entry> entries;

  bool has(const std::string& key) const;
  const Entry* find(const std::string& key) const;

  static KvDocument parse_text(const std::string& text, const std::string& origin = "<text>");
  static KvDocument parse_file(const std::string& path);
};

/// Helpers shared by consumers of KvDocument; all throw ConfigError naming
/// the key on malformed input.
double kv_to_double(const KvDocument::Entry& e);
long long kv_to_int(const KvDocument::Entry& e);
bool kv_to_bool(const KvDocument::Entry& e);
std::vector<double> kv_to_double_list(const KvDocument::Entry& e);
std::vector<long long> kv_to_int_list(const KvDocument::Entry& e);

}  // namespace kshift
