#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rnntlid {

// Plain-text key-value format:
//
//   # comment
//   [section]
//   key = value
//
// Keys are addressed as "section.key". Order of first appearance is kept so
// rendering is stable.
class KvDocument {
 public:
  static KvDocument parse(std::string_view text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return index_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string render() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Shortest text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);

std::vector<std::string> split_words(std::string_view text);
std::string join_words(const std::vector<std::string>& words);
std::string trim(std::string_view text);

}  // namespace rnntlid
