#include "cubepersist/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cubepersist {

static_assert(std::endian::native == std::endian::little,
              "field format is little-endian; big-endian hosts are unsupported");

namespace {

constexpr char kMagic[4] = {'C', 'P', 'F', '1'};

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& f) {
  std::uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

void write_binary(const std::string& path, int dim, int n,
                  const std::vector<double>& values) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(kMagic, 4);
  write_u32(f, static_cast<std::uint32_t>(dim));
  write_u32(f, static_cast<std::uint32_t>(n));
  write_u32(f, 0);
  f.write(reinterpret_cast<const char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!f) throw std::runtime_error("write failed: " + path);
}

void write_sidecar(const std::string& path, const nlohmann::json& extra) {
  std::ofstream f(path + ".json");
  if (!f) throw std::runtime_error("cannot open for writing: " + path + ".json");
  f << extra.dump(2) << '\n';
}

}  // namespace

void write_field(const ScalarField& field, const std::string& path) {
  write_binary(path, field.grid().dim, field.grid().points_per_axis, field.values());
  write_sidecar(path, {{"magic", "CPF1"},
                       {"d", field.grid().dim},
                       {"N", field.grid().points_per_axis}});
}

ScalarField read_field(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a CPF1 field: " + path);
  int dim = static_cast<int>(read_u32(f));
  int n = static_cast<int>(read_u32(f));
  read_u32(f);  // reserved
  GridSpec grid(dim, n);
  std::vector<double> values(grid.sample_count());
  f.read(reinterpret_cast<char*>(values.data()),
         static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!f) throw std::runtime_error("truncated CPF1 field: " + path);
  return ScalarField(grid, std::move(values));
}

void write_block_field(const BlockField& est, const std::string& path) {
  write_binary(path, est.dim(), est.blocks_per_axis(), est.values());
  write_sidecar(path, {{"magic", "CPF1"},
                       {"d", est.dim()},
                       {"N", est.blocks_per_axis()},
                       {"block", est.bandwidth().block},
                       {"source_N", est.source_grid().points_per_axis}});
}

}  // namespace cubepersist
