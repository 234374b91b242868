#include "coaplan/document.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace coaplan {

std::string to_string(Severity s) {
  switch (s) {
    case Severity::info: return "info";
    case Severity::warning: return "warning";
    case Severity::error: return "error";
  }
  return "error";
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::error) return true;
  return false;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream out;
  for (const auto& d : diags)
    out << to_string(d.severity) << " [" << d.code << "] " << (d.path.empty() ? "/" : d.path) << ": "
        << d.message << "\n";
  return out.str();
}

namespace {

std::string first_error_message(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::error) return d.path + ": " + d.message;
  return diags.empty() ? "validation failed" : diags.front().message;
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diags)
    : Error(first_error_message(diags)), diags_(std::move(diags)) {}

namespace {

const std::regex& int_pattern() {
  static const std::regex re(R"([-+]?[0-9]+)");
  return re;
}

const std::regex& float_pattern() {
  static const std::regex re(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
  return re;
}

bool is_yaml_null(const std::string& s) { return s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL"; }

Json resolve_plain_scalar(const std::string& s) {
  if (is_yaml_null(s)) return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (std::regex_match(s, int_pattern())) {
    try {
      return std::stoll(s);
    } catch (const std::out_of_range&) {
      return std::stod(s);
    }
  }
  if (std::regex_match(s, float_pattern())) return std::stod(s);
  if (s == ".inf" || s == ".Inf" || s == "+.inf") return "inf";
  if (s == "-.inf" || s == "-.Inf") return "-inf";
  return s;
}

Json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Scalar:
      if (node.Tag() == "!") return node.Scalar();  // quoted
      return resolve_plain_scalar(node.Scalar());
    case YAML::NodeType::Sequence: {
      Json arr = Json::array();
      for (const auto& child : node) arr.push_back(yaml_to_json(child));
      return arr;
    }
    case YAML::NodeType::Map: {
      Json obj = Json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

std::pair<int, int> line_col_at(std::string_view text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

bool looks_like_json(std::string_view text) {
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    return c == '{' || c == '[';
  }
  return false;
}

void emit_yaml_node(YAML::Emitter& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: out << YAML::Null; break;
    case Json::value_t::boolean: out << (j.get<bool>() ? "true" : "false"); break;
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
    case Json::value_t::number_float: out << j.dump(); break;
    case Json::value_t::string: {
      const auto& s = j.get_ref<const std::string&>();
      Json resolved = resolve_plain_scalar(s);
      bool needs_quotes = s.empty() || !resolved.is_string() || resolved.get<std::string>() != s ||
                          s.find_first_of(":#{}[],&*!|>'\"%@`?") != std::string::npos || s.front() == ' ' ||
                          s.back() == ' ' || s.front() == '-';
      if (needs_quotes)
        out << YAML::DoubleQuoted << s;
      else
        out << s;
      break;
    }
    case Json::value_t::array: {
      bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      out << (flat ? YAML::Flow : YAML::Block) << YAML::BeginSeq;
      for (const auto& e : j) emit_yaml_node(out, e);
      out << YAML::EndSeq;
      break;
    }
    case Json::value_t::object: {
      out << YAML::Block << YAML::BeginMap;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out << YAML::Key << it.key() << YAML::Value;
        emit_yaml_node(out, it.value());
      }
      out << YAML::EndMap;
      break;
    }
    default: out << YAML::Null; break;
  }
}

}  // namespace

Json parse_document(std::string_view text, const std::string& source) {
  if (looks_like_json(text)) {
    try {
      return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
      auto [line, col] = line_col_at(text, e.byte == 0 ? 0 : e.byte - 1);
      throw ParseError(source, line, col, e.byte,
                       source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error at offset " +
                           std::to_string(e.byte) + ": " + e.what());
    }
  }
  try {
    YAML::Node root = YAML::Load(std::string(text));
    return yaml_to_json(root);
  } catch (const YAML::ParserException& e) {
    int line = e.mark.line + 1, col = e.mark.column + 1;
    throw ParseError(source, line, col, static_cast<std::size_t>(std::max(0, e.mark.pos)),
                     source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error: " + e.msg);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json load_document(const std::filesystem::path& path) { return parse_document(read_file(path), path.string()); }

std::string emit_yaml(const Json& doc) {
  YAML::Emitter out;
  out.SetIndent(2);
  emit_yaml_node(out, doc);
  std::string s = out.c_str();
  s.push_back('\n');
  return s;
}

std::string emit_canonical(const Json& doc) { return doc.dump(2) + "\n"; }

std::string emit(const Json& doc, TextFormat format) {
  return format == TextFormat::yaml ? emit_yaml(doc) : emit_canonical(doc);
}

std::string json_pointer_append(const std::string& base, std::string_view key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~')
      escaped += "~0";
    else if (c == '/')
      escaped += "~1";
    else
      escaped += c;
  }
  return base + "/" + escaped;
}

std::string json_pointer_append(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

bool Node::has(std::string_view key) const {
  return j_->is_object() && j_->contains(key) && !(*j_)[std::string(key)].is_null();
}

Node Node::at(std::string_view key) const {
  if (!j_->is_object()) fail("expected an object");
  auto it = j_->find(key);
  if (it == j_->end() || it->is_null()) throw SchemaError(json_pointer_append(path_, key), "missing required field");
  return Node(*it, json_pointer_append(path_, key));
}

std::optional<Node> Node::find(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return at(key);
}

std::vector<Node> Node::items() const {
  std::vector<Node> out;
  if (j_->is_null()) return out;
  if (!j_->is_array()) fail("expected a list");
  for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], json_pointer_append(path_, i));
  return out;
}

std::string Node::str() const {
  if (j_->is_string()) return j_->get<std::string>();
  if (j_->is_number_integer()) return std::to_string(j_->get<std::int64_t>());
  if (j_->is_number()) return j_->dump();
  if (j_->is_boolean()) return j_->get<bool>() ? "true" : "false";
  fail("expected a string");
}

double Node::number() const {
  if (j_->is_number()) return j_->get<double>();
  if (j_->is_string()) {
    const auto& s = j_->get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail("expected a number");
}

std::int64_t Node::integer() const {
  if (j_->is_number_integer()) return j_->get<std::int64_t>();
  if (j_->is_number_float()) {
    double d = j_->get<double>();
    if (std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  fail("expected an integer");
}

Minutes Node::minutes() const { return integer(); }

bool Node::boolean() const {
  if (j_->is_boolean()) return j_->get<bool>();
  fail("expected true or false");
}

std::vector<std::string> Node::strings() const {
  std::vector<std::string> out;
  if (j_->is_string()) {
    out.push_back(j_->get<std::string>());
    return out;
  }
  for (const auto& n : items()) out.push_back(n.str());
  return out;
}

std::string Node::str_or(std::string_view key, std::string fallback) const {
  return has(key) ? at(key).str() : std::move(fallback);
}

double Node::number_or(std::string_view key, double fallback) const { return has(key) ? at(key).number() : fallback; }

std::int64_t Node::integer_or(std::string_view key, std::int64_t fallback) const {
  return has(key) ? at(key).integer() : fallback;
}

bool Node::boolean_or(std::string_view key, bool fallback) const { return has(key) ? at(key).boolean() : fallback; }

std::vector<std::string> Node::strings_or_empty(std::string_view key) const {
  return has(key) ? at(key).strings() : std::vector<std::string>{};
}

void Node::fail(const std::string& message) const { throw SchemaError(path_.empty() ? "/" : path_, message); }

Minutes read_bound(const Json& j, Minutes unbounded_value) {
  if (j.is_null()) return unbounded_value;
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf" || s == "+inf") return kUnbounded;
    if (s == "-inf") return -kUnbounded;
  }
  if (j.is_number_integer()) return j.get<Minutes>();
  if (j.is_number_float()) {
    double d = j.get<double>();
    if (std::isinf(d)) return d > 0 ? kUnbounded : -kUnbounded;
    return static_cast<Minutes>(d);
  }
  throw SchemaError("/", "expected a minute bound");
}

Json write_bound(Minutes m) {
  if (m >= kUnbounded) return "inf";
  if (m <= -kUnbounded) return "-inf";
  return m;
}

}  // namespace coaplan
