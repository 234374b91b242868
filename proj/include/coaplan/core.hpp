#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace coaplan {

// All plan times are integer minutes relative to H-hour.
using Minutes = std::int64_t;

// Sentinel for an unbounded offset or window edge. Kept well below the int64
// range so that sums of two bounded values never overflow.
inline constexpr Minutes kUnbounded = std::numeric_limits<Minutes>::max() / 8;

inline bool is_unbounded(Minutes m) { return m >= kUnbounded || m <= -kUnbounded; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text could not be parsed at all. `line`/`column` are 1-based when known;
// `offset` is the byte offset for JSON input.
class ParseError : public Error {
 public:
  ParseError(std::string source, int line, int column, std::size_t offset, const std::string& what)
      : Error(what), source_(std::move(source)), line_(line), column_(column), offset_(offset) {}
  const std::string& source() const { return source_; }
  int line() const { return line_; }
  int column() const { return column_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string source_;
  int line_;
  int column_;
  std::size_t offset_;
};

// Parsed, but a field is missing, mistyped or out of range. `path` is a JSON
// pointer into the document.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Severity { info, warning, error };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string path;  // JSON pointer into the source document
  std::string code;  // stable machine-readable tag
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

std::string to_string(Severity s);
bool has_errors(const std::vector<Diagnostic>& diags);
std::string format_diagnostics(const std::vector<Diagnostic>& diags);

// Document failed validation; carries every diagnostic that was found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

}  // namespace coaplan
