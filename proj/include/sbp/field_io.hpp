#pragma once

// On-disk field format: a JSON header file describing the domain and node
// set, plus a separate raw little-endian float64 data file in node-index
// order. Round trips are bit-exact.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbp/grid.hpp"

namespace sbp {

struct FieldFileHeader {
  std::string name;
  int dim = 0;
  std::vector<int> n_per_axis;
  std::vector<double> lengths;
  NodeSet node_set = NodeSet::interior;
  std::string data_file;
  index_t count = 0;
};

namespace detail {

inline std::string node_set_name(NodeSet s) {
  switch (s) {
    case NodeSet::interior: return "interior";
    case NodeSet::full: return "full";
    case NodeSet::boundary: return "boundary";
  }
  return "interior";
}

inline NodeSet node_set_from_name(const std::string& s) {
  if (s == "interior") return NodeSet::interior;
  if (s == "full") return NodeSet::full;
  if (s == "boundary") return NodeSet::boundary;
  throw std::runtime_error("field header: unknown node_set '" + s + "'");
}

inline void write_doubles_le(const std::filesystem::path& path, const std::vector<double>& v) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  std::vector<unsigned char> buf(v.size() * 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &v[i], 8);
    for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("short write: " + path.string());
}

inline std::vector<double> read_doubles_le(const std::filesystem::path& path, index_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open field data: " + path.string());
  std::vector<unsigned char> buf(static_cast<std::size_t>(expected) * 8);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw std::runtime_error("field data truncated: " + path.string());
  char extra;
  if (in.read(&extra, 1))
    throw std::runtime_error("field data longer than header count: " + path.string());
  std::vector<double> v(static_cast<std::size_t>(expected));
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t(buf[i * 8 + b]) << (8 * b);
    std::memcpy(&v[i], &bits, 8);
  }
  return v;
}

}  // namespace detail

// Writes `<stem>.json` and `<stem>.f64` in `dir`; returns the header path.
inline std::filesystem::path write_field(const std::filesystem::path& dir, const std::string& stem,
                                         const ScalarField& f, const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const GridDomain& g = f.grid();
  nlohmann::json j;
  j["format"] = "sbp-field";
  j["version"] = 1;
  j["name"] = name;
  j["dim"] = g.dim();
  std::vector<int> n(g.dim());
  std::vector<double> len(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    n[a] = g.n(a);
    len[a] = g.length(a);
  }
  j["n_per_axis"] = n;
  j["lengths"] = len;
  j["node_set"] = detail::node_set_name(f.node_set());
  j["data_file"] = stem + ".f64";
  j["count"] = f.size();

  const fs::path data_tmp = dir / (stem + ".f64.tmp");
  const fs::path data_path = dir / (stem + ".f64");
  detail::write_doubles_le(data_tmp, f.values());
  fs::rename(data_tmp, data_path);

  const fs::path hdr_tmp = dir / (stem + ".json.tmp");
  const fs::path hdr_path = dir / (stem + ".json");
  {
    std::ofstream out(hdr_tmp, std::ios::trunc);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write field header: " + hdr_path.string());
  }
  fs::rename(hdr_tmp, hdr_path);
  return hdr_path;
}

struct LoadedField {
  ScalarField field;
  std::string name;
};

inline LoadedField read_field(const std::filesystem::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw std::runtime_error("cannot open field header: " + header_path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "sbp-field")
    throw std::runtime_error("not a field header: " + header_path.string());
  const int dim = j.at("dim").get<int>();
  const auto n = j.at("n_per_axis").get<std::vector<int>>();
  const auto len = j.at("lengths").get<std::vector<double>>();
  GridDomain g = build_grid(dim, n, len);
  const NodeSet set = detail::node_set_from_name(j.at("node_set").get<std::string>());
  const index_t count = j.at("count").get<index_t>();
  if (count != ScalarField::count_for(g, set))
    throw std::runtime_error("field header count inconsistent with domain: " +
                             header_path.string());
  const auto data_path = header_path.parent_path() / j.at("data_file").get<std::string>();
  std::vector<double> v = detail::read_doubles_le(data_path, count);
  return {ScalarField(std::move(g), set, std::move(v)), j.value("name", "")};
}

}  // namespace sbp
