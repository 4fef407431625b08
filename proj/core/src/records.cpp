#include "beldec/records.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace beldec {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ConfigError("cannot format double");
  return std::string(buf, end);
}

namespace {

std::string_view trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("bad number: '" + std::string(s) + "'");
  return v;
}

long parse_long(std::string_view s) {
  s = trim(s);
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("bad integer: '" + std::string(s) + "'");
  return v;
}

bool Record::has(std::string_view key) const {
  for (const auto& [k, v] : items)
    if (k == key) return true;
  return false;
}

const std::string& Record::get(std::string_view key) const {
  for (const auto& [k, v] : items)
    if (k == key) return v;
  throw ConfigError("missing key: '" + std::string(key) + "'");
}

std::string Record::get_or(std::string_view key, std::string fallback) const {
  for (const auto& [k, v] : items)
    if (k == key) return v;
  return fallback;
}

double Record::get_double(std::string_view key) const { return parse_double(get(key)); }

double Record::get_double_or(std::string_view key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Record::get_long(std::string_view key) const { return parse_long(get(key)); }

long Record::get_long_or(std::string_view key, long fallback) const {
  return has(key) ? get_long(key) : fallback;
}

std::vector<double> Record::get_doubles(std::string_view key) const {
  std::string_view s = get(key);
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    std::string_view tok = comma == std::string_view::npos ? s.substr(pos) : s.substr(pos, comma - pos);
    if (!trim(tok).empty()) out.push_back(parse_double(tok));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("empty list for key '" + std::string(key) + "'");
  return out;
}

void Record::set(std::string_view key, std::string_view value) {
  for (auto& [k, v] : items) {
    if (k == key) {
      v = std::string(value);
      return;
    }
  }
  items.emplace_back(std::string(key), std::string(value));
}

void Record::set_double(std::string_view key, double value) { set(key, format_double(value)); }
void Record::set_long(std::string_view key, long value) { set(key, std::to_string(value)); }

void Record::set_doubles(std::string_view key, const std::vector<double>& values) {
  std::string joined;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) joined += ',';
    joined += format_double(values[i]);
  }
  set(key, joined);
}

Document Document::parse(std::string_view text) {
  Document doc;
  Record* current = &doc.top;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view raw = nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    ++line_no;
    std::string_view line = raw;
    if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3)
          throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
        current = &doc.add(trim(line.substr(1, line.size() - 2)));
      } else {
        size_t eq = line.find('=');
        if (eq == std::string_view::npos)
          throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string_view key = trim(line.substr(0, eq));
        std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        current->items.emplace_back(std::string(key), std::string(value));
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return doc;
}

Document Document::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Document::to_text() const {
  std::string out;
  auto emit = [&out](const Record& rec) {
    for (const auto& [k, v] : rec.items) {
      out += k;
      out += " = ";
      out += v;
      out += '\n';
    }
  };
  emit(top);
  for (const auto& [name, rec] : sections) {
    if (!out.empty()) out += '\n';
    out += '[';
    out += name;
    out += "]\n";
    emit(rec);
  }
  return out;
}

const Record* Document::find(std::string_view name) const {
  for (const auto& [n, rec] : sections)
    if (n == name) return &rec;
  return nullptr;
}

const Record& Document::require(std::string_view name) const {
  const Record* rec = find(name);
  if (!rec) throw ConfigError("missing section: [" + std::string(name) + "]");
  return *rec;
}

std::vector<const Record*> Document::find_all(std::string_view name) const {
  std::vector<const Record*> out;
  for (const auto& [n, rec] : sections)
    if (n == name) out.push_back(&rec);
  return out;
}

Record& Document::add(std::string_view name) {
  sections.emplace_back(std::string(name), Record{});
  return sections.back().second;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace beldec
