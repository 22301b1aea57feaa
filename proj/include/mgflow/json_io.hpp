// Deterministic JSON and CSV output: insertion-ordered keys, floats with 17
// significant digits, non-finite floats as null.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace mgflow {

using ojson = nlohmann::ordered_json;

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_json(std::ostringstream& os, const ojson& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << ojson(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write_json(os, j[i], indent, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json(os, j[i], indent, depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case ojson::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? format_double(v) : "null");
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

inline std::string dump_json(const ojson& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json(os, j, indent, 0);
  os << "\n";
  return os.str();
}

/// Writes via a temporary file renamed into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mgflow
