#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "eulerlab/field.hpp"
#include "json.hpp"

namespace eulerlab {

// Field dump: one line of JSON (grid, name, free-form metadata) followed by
// n*n little-endian float64 values, x index outermost.
inline constexpr const char* field_format_name = "eulerlab-field";

struct FieldDump {
  std::string name;
  nlohmann::json meta;
  ScalarField field;
};

namespace detail {

inline std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
  return r;
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const ScalarField& f, const std::string& name,
                        const nlohmann::json& meta = nlohmann::json::object()) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const nlohmann::json header{{"format", field_format_name}, {"version", 1},          {"name", name},
                              {"n", f.grid().n},           {"length", f.grid().length}, {"dtype", "float64-le"},
                              {"meta", meta}};
  os << header.dump() << '\n';
  for (double v : f.physical_values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bits = detail::to_little(bits);
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

inline FieldDump read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != field_format_name) throw std::runtime_error(path.string() + " is not a field dump");
  const auto g = make_grid(header.at("n").get<int>(), header.at("length").get<double>());
  std::vector<double> v(g.size());
  for (auto& x : v) {
    std::uint64_t bits;
    is.read(reinterpret_cast<char*>(&bits), sizeof bits);
    bits = detail::to_little(bits);
    std::memcpy(&x, &bits, sizeof x);
  }
  if (!is) throw std::runtime_error(path.string() + " is truncated");
  return {header.at("name").get<std::string>(), header.value("meta", nlohmann::json::object()),
          ScalarField::from_values(g, std::move(v))};
}

}  // namespace eulerlab
