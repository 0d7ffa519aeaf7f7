#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace aml::cli {

// Insertion-ordered JSON document builder. Doubles are printed with 17
// significant digits so every value survives a parse round trip; non-finite
// doubles become null because JSON cannot represent them.
class JsonValue {
 public:
  static JsonValue null();
  static JsonValue boolean(bool v);
  static JsonValue integer(long long v);
  static JsonValue uinteger(unsigned long long v);
  static JsonValue number(double v);
  static JsonValue string(std::string v);
  static JsonValue array();
  static JsonValue object();

  // Object members keep insertion order; keys are emitted verbatim.
  JsonValue& add(const std::string& key, JsonValue v);
  JsonValue& push(JsonValue v);

  // Pretty-printed document without a trailing newline. Arrays of scalars
  // render on one line; everything else nests with `indent` spaces.
  std::string dump(int indent = 2) const;

 private:
  enum class Type { kNull, kBool, kInt, kUInt, kDouble, kString, kArray, kObject };

  Type type_ = Type::kNull;
  bool bool_ = false;
  long long int_ = 0;
  unsigned long long uint_ = 0;
  double double_ = 0.0;
  std::string string_;
  std::vector<JsonValue> items_;
  std::vector<std::pair<std::string, JsonValue>> members_;

  bool scalar() const { return type_ != Type::kArray && type_ != Type::kObject; }
  void write(std::string& out, int indent, int depth) const;
  static void write_escaped(std::string& out, const std::string& s);
};

// %.17g rendering shared by the JSON and CSV writers.
std::string format_double(double v);

}  // namespace aml::cli
