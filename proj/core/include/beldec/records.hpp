#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace beldec {

// Raised on malformed documents, missing keys, or unparsable numbers.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Locale-independent numeric <-> string conversion used for every file we
// read or write. Round-trips doubles exactly.
std::string format_double(double v);
double parse_double(std::string_view s);
long parse_long(std::string_view s);

// One section of a document: ordered key/value pairs, string-typed.
struct Record {
  std::vector<std::pair<std::string, std::string>> items;

  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;  // throws ConfigError
  std::string get_or(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key) const;
  double get_double_or(std::string_view key, double fallback) const;
  long get_long(std::string_view key) const;
  long get_long_or(std::string_view key, long fallback) const;
  // Comma-separated list of doubles.
  std::vector<double> get_doubles(std::string_view key) const;

  void set(std::string_view key, std::string_view value);
  void set_double(std::string_view key, double value);
  void set_long(std::string_view key, long value);
  void set_doubles(std::string_view key, const std::vector<double>& values);
};

// A structured text document: top-level key = value lines followed by any
// number of [section] blocks. '#' starts a comment, blank lines are ignored,
// section names may repeat.
struct Document {
  Record top;
  std::vector<std::pair<std::string, Record>> sections;

  static Document parse(std::string_view text);  // throws ConfigError
  static Document load(const std::string& path);
  std::string to_text() const;

  const Record* find(std::string_view name) const;                // first match or nullptr
  const Record& require(std::string_view name) const;             // throws ConfigError
  std::vector<const Record*> find_all(std::string_view name) const;
  Record& add(std::string_view name);
};

// Minimal CSV emission: fields joined with ',', no quoting (callers only
// write numbers and bare identifiers).
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace beldec
