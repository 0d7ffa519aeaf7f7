#include "json_writer.hpp"

#include <cmath>
#include <cstdio>

namespace aml::cli {

JsonValue JsonValue::null() { return JsonValue{}; }

JsonValue JsonValue::boolean(bool v) {
  JsonValue j;
  j.type_ = Type::kBool;
  j.bool_ = v;
  return j;
}

JsonValue JsonValue::integer(long long v) {
  JsonValue j;
  j.type_ = Type::kInt;
  j.int_ = v;
  return j;
}

JsonValue JsonValue::uinteger(unsigned long long v) {
  JsonValue j;
  j.type_ = Type::kUInt;
  j.uint_ = v;
  return j;
}

JsonValue JsonValue::number(double v) {
  JsonValue j;
  j.type_ = Type::kDouble;
  j.double_ = v;
  return j;
}

JsonValue JsonValue::string(std::string v) {
  JsonValue j;
  j.type_ = Type::kString;
  j.string_ = std::move(v);
  return j;
}

JsonValue JsonValue::array() {
  JsonValue j;
  j.type_ = Type::kArray;
  return j;
}

JsonValue JsonValue::object() {
  JsonValue j;
  j.type_ = Type::kObject;
  return j;
}

JsonValue& JsonValue::add(const std::string& key, JsonValue v) {
  members_.emplace_back(key, std::move(v));
  return *this;
}

JsonValue& JsonValue::push(JsonValue v) {
  items_.push_back(std::move(v));
  return *this;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  return out;
}

void JsonValue::write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (const char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

void JsonValue::write(std::string& out, int indent, int depth) const {
  switch (type_) {
    case Type::kNull:
      out += "null";
      return;
    case Type::kBool:
      out += bool_ ? "true" : "false";
      return;
    case Type::kInt:
      out += std::to_string(int_);
      return;
    case Type::kUInt:
      out += std::to_string(uint_);
      return;
    case Type::kDouble:
      if (std::isfinite(double_))
        out += format_double(double_);
      else
        out += "null";
      return;
    case Type::kString:
      write_escaped(out, string_);
      return;
    case Type::kArray: {
      if (items_.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const JsonValue& v : items_) flat = flat && v.scalar();
      if (flat) {
        out += '[';
        for (std::size_t i = 0; i < items_.size(); ++i) {
          if (i > 0) out += ", ";
          items_[i].write(out, indent, depth + 1);
        }
        out += ']';
        return;
      }
      out += "[\n";
      const std::string pad((depth + 1) * indent, ' ');
      for (std::size_t i = 0; i < items_.size(); ++i) {
        out += pad;
        items_[i].write(out, indent, depth + 1);
        if (i + 1 < items_.size()) out += ',';
        out += '\n';
      }
      out += std::string(depth * indent, ' ');
      out += ']';
      return;
    }
    case Type::kObject: {
      if (members_.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      const std::string pad((depth + 1) * indent, ' ');
      for (std::size_t i = 0; i < members_.size(); ++i) {
        out += pad;
        write_escaped(out, members_[i].first);
        out += ": ";
        members_[i].second.write(out, indent, depth + 1);
        if (i + 1 < members_.size()) out += ',';
        out += '\n';
      }
      out += std::string(depth * indent, ' ');
      out += '}';
      return;
    }
  }
}

}  // namespace aml::cli
