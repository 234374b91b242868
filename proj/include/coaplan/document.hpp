#pragma once

// Structured-text documents. Every input file (scenario, KB segment, config,
// coefficient table, plan) is parsed into a nlohmann::json tree, whether it
// was written as YAML (the human-editable form) or JSON (the canonical form).

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coaplan/core.hpp"

namespace coaplan {

using Json = nlohmann::json;

enum class TextFormat { yaml, json };

// Parses YAML or JSON; JSON is detected by a leading '{' or '['.
Json parse_document(std::string_view text, const std::string& source = "<memory>");
Json load_document(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

std::string emit_yaml(const Json& doc);
// Canonical JSON: sorted keys, two-space indent, trailing newline.
std::string emit_canonical(const Json& doc);
std::string emit(const Json& doc, TextFormat format);

std::string json_pointer_append(const std::string& base, std::string_view key);
std::string json_pointer_append(const std::string& base, std::size_t index);

// Thin typed accessor that remembers where it is in the document so schema
// errors can name the offending field.
class Node {
 public:
  Node(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const Json& json() const { return *j_; }
  const std::string& path() const { return path_; }

  bool has(std::string_view key) const;
  Node at(std::string_view key) const;
  std::optional<Node> find(std::string_view key) const;
  std::vector<Node> items() const;  // array elements; missing/null -> empty

  std::string str() const;
  double number() const;
  Minutes minutes() const;
  std::int64_t integer() const;
  bool boolean() const;
  std::vector<std::string> strings() const;

  std::string str(std::string_view key) const { return at(key).str(); }
  std::string str_or(std::string_view key, std::string fallback) const;
  double number(std::string_view key) const { return at(key).number(); }
  double number_or(std::string_view key, double fallback) const;
  std::int64_t integer(std::string_view key) const { return at(key).integer(); }
  std::int64_t integer_or(std::string_view key, std::int64_t fallback) const;
  bool boolean_or(std::string_view key, bool fallback) const;
  std::vector<std::string> strings_or_empty(std::string_view key) const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  const Json* j_;
  std::string path_;
};

// Minutes field that may be absent/null (unbounded) or the string "inf".
Minutes read_bound(const Json& j, Minutes unbounded_value);
Json write_bound(Minutes m);

}  // namespace coaplan
