#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace ddac {

enum class ValueKind { Boolean, Integer, Real, Text };

inline constexpr std::string_view to_token(ValueKind kind) {
  switch (kind) {
    case ValueKind::Boolean: return "boolean";
    case ValueKind::Integer: return "integer";
    case ValueKind::Real: return "real";
    case ValueKind::Text: return "text";
  }
  return "?";
}

class NonFiniteValue : public std::invalid_argument {
 public:
  NonFiniteValue() : std::invalid_argument("real value must be finite") {}
};

// Dynamically typed value read from the blackboard, compared by conditions and
// emitted by rules. Reals are always finite.
class Scalar {
 public:
  using Storage = std::variant<bool, std::int64_t, double, std::string>;

  Scalar() : value_(false) {}
  Scalar(bool v) : value_(v) {}
  Scalar(int v) : value_(static_cast<std::int64_t>(v)) {}
  Scalar(std::int64_t v) : value_(v) {}
  Scalar(double v) : value_(v) {
    if (!std::isfinite(v)) throw NonFiniteValue();
  }
  Scalar(std::string v) : value_(std::move(v)) {}
  Scalar(const char* v) : value_(std::string(v)) {}

  ValueKind kind() const { return static_cast<ValueKind>(value_.index()); }

  bool is_bool() const { return kind() == ValueKind::Boolean; }
  bool is_int() const { return kind() == ValueKind::Integer; }
  bool is_real() const { return kind() == ValueKind::Real; }
  bool is_text() const { return kind() == ValueKind::Text; }
  bool is_numeric() const { return is_int() || is_real(); }

  bool as_bool() const { return std::get<bool>(value_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(value_); }
  double as_real() const { return std::get<double>(value_); }
  const std::string& as_text() const { return std::get<std::string>(value_); }

  const Storage& storage() const { return value_; }

  // Literal-style rendering for reports: text is quoted, reals keep a
  // fractional part so they never read as integers.
  std::string to_display() const;

  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  Storage value_;
};

inline std::string Scalar::to_display() const {
  switch (kind()) {
    case ValueKind::Boolean:
      return as_bool() ? "true" : "false";
    case ValueKind::Integer:
      return std::to_string(as_int());
    case ValueKind::Real: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", as_real());
      std::string s = buf;
      // shortest representation that still round-trips
      for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, as_real());
        if (std::strtod(buf, nullptr) == as_real()) {
          s = buf;
          break;
        }
      }
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    case ValueKind::Text: {
      std::string out = "\"";
      for (char c : as_text()) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + "\"";
    }
  }
  return {};
}

}  // namespace ddac
