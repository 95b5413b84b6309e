#include "rnntlid/config/kv_format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace rnntlid {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::string format_double(double value) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    throw std::invalid_argument(what + ": expected a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw std::invalid_argument(what + ": expected an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw std::invalid_argument(what + ": expected true/false, got '" + text + "'");
}

KvDocument KvDocument::parse(std::string_view text) {
  KvDocument doc;
  std::string section;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("line " + std::to_string(line_no) + ": bad section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
    doc.set(section.empty() ? key : section + "." + key, trim(std::string_view(line).substr(eq + 1)));
  }
  return doc;
}

void KvDocument::set(const std::string& key, const std::string& value) {
  const auto it = index_.find(key);
  if (it != index_.end()) {
    entries_[it->second].second = value;
    return;
  }
  index_.emplace(key, entries_.size());
  entries_.emplace_back(key, value);
}

const std::string& KvDocument::get(const std::string& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) throw std::invalid_argument("missing key '" + key + "'");
  return entries_[it->second].second;
}

std::string KvDocument::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

int KvDocument::get_int(const std::string& key) const { return static_cast<int>(parse_int(get(key), key)); }
double KvDocument::get_double(const std::string& key) const { return parse_double(get(key), key); }
bool KvDocument::get_bool(const std::string& key) const { return parse_bool(get(key), key); }

std::string KvDocument::render() const {
  std::string out;
  std::string current;
  bool first = true;
  for (const auto& [key, value] : entries_) {
    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (first || section != current) {
      if (!first) out += '\n';
      if (!section.empty()) out += "[" + section + "]\n";
      current = section;
      first = false;
    }
    out += name + " = " + value + "\n";
  }
  return out;
}

}  // namespace rnntlid
