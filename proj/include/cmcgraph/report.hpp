#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cmc {

/// Formats a double with 17 significant digits (round-trip exact).
inline std::string format_g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Minimal JSON document with insertion-ordered object keys and %.17g
/// float formatting, so report files are byte-identical across runs.
/// Non-finite numbers are emitted as the strings "inf"/"-inf"/"nan".
class Json {
 public:
  using Array = std::vector<Json>;
  using Object = std::vector<std::pair<std::string, Json>>;

  Json() : v_(nullptr) {}
  Json(std::nullptr_t) : v_(nullptr) {}
  Json(bool b) : v_(b) {}
  Json(int i) : v_(static_cast<std::int64_t>(i)) {}
  Json(std::int64_t i) : v_(i) {}
  Json(std::size_t i) : v_(static_cast<std::int64_t>(i)) {}
  Json(double d) : v_(d) {}
  Json(const char* s) : v_(std::string(s)) {}
  Json(std::string s) : v_(std::move(s)) {}

  static Json object() {
    Json j;
    j.v_ = Object{};
    return j;
  }
  static Json array() {
    Json j;
    j.v_ = Array{};
    return j;
  }

  /// Object access; inserts the key (preserving order) if absent.
  Json& operator[](const std::string& key) {
    if (!std::holds_alternative<Object>(v_)) v_ = Object{};
    auto& obj = std::get<Object>(v_);
    for (auto& kv : obj)
      if (kv.first == key) return kv.second;
    obj.emplace_back(key, Json());
    return obj.back().second;
  }

  void push_back(Json j) {
    if (!std::holds_alternative<Array>(v_)) v_ = Array{};
    std::get<Array>(v_).push_back(std::move(j));
  }

  std::string dump(int indent = 2) const {
    std::string out;
    write(out, indent, 0);
    if (indent >= 0) out.push_back('\n');
    return out;
  }

 private:
  std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array,
               Object>
      v_;

  static void escape(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
          } else {
            out.push_back(c);
          }
      }
    }
    out.push_back('"');
  }

  void write(std::string& out, int indent, int depth) const {
    const std::string pad =
        indent >= 0 ? std::string(static_cast<std::size_t>(indent) * (depth + 1), ' ') : "";
    const std::string close_pad =
        indent >= 0 ? std::string(static_cast<std::size_t>(indent) * depth, ' ') : "";
    const char* nl = indent >= 0 ? "\n" : "";
    if (std::holds_alternative<std::nullptr_t>(v_)) {
      out += "null";
    } else if (std::holds_alternative<bool>(v_)) {
      out += std::get<bool>(v_) ? "true" : "false";
    } else if (std::holds_alternative<std::int64_t>(v_)) {
      out += std::to_string(std::get<std::int64_t>(v_));
    } else if (std::holds_alternative<double>(v_)) {
      double d = std::get<double>(v_);
      if (std::isfinite(d)) {
        out += format_g17(d);
      } else {
        escape(out, format_g17(d));
      }
    } else if (std::holds_alternative<std::string>(v_)) {
      escape(out, std::get<std::string>(v_));
    } else if (std::holds_alternative<Array>(v_)) {
      const auto& a = std::get<Array>(v_);
      if (a.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < a.size(); ++i) {
        out += pad;
        a[i].write(out, indent, depth + 1);
        if (i + 1 < a.size()) out += ",";
        out += nl;
      }
      out += close_pad;
      out += "]";
    } else {
      const auto& o = std::get<Object>(v_);
      if (o.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      for (std::size_t i = 0; i < o.size(); ++i) {
        out += pad;
        escape(out, o[i].first);
        out += indent >= 0 ? ": " : ":";
        o[i].second.write(out, indent, depth + 1);
        if (i + 1 < o.size()) out += ",";
        out += nl;
      }
      out += close_pad;
      out += "}";
    }
  }
};

}  // namespace cmc
