#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "cubepersist/diagram.hpp"
#include "cubepersist/field_io.hpp"
#include "cubepersist/rng.hpp"

using namespace cubepersist;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("field binary round trip preserves every bit") {
  Rng rng(88);
  GridSpec g(2, 9);
  std::vector<double> values(g.sample_count());
  for (double& v : values) v = rng.normal() * 1e3;
  ScalarField field(g, values);
  auto path = temp_file("cubepersist_test_field.cpf");
  write_field(field, path.string());
  ScalarField back = read_field(path.string());
  CHECK(back.grid() == field.grid());
  CHECK(back.values() == field.values());

  // sidecar carries the metadata
  std::ifstream sidecar(path.string() + ".json");
  REQUIRE(sidecar.good());
  std::string text((std::istreambuf_iterator<char>(sidecar)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("\"CPF1\"") != std::string::npos);

  // header magic is the first four bytes
  std::ifstream raw(path, std::ios::binary);
  char magic[4];
  raw.read(magic, 4);
  CHECK(std::string(magic, 4) == "CPF1");

  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

TEST_CASE("reading garbage fails loudly") {
  auto path = temp_file("cubepersist_not_a_field.cpf");
  std::ofstream f(path, std::ios::binary);
  f << "BOGUS data";
  f.close();
  CHECK_THROWS(read_field(path.string()));
  std::filesystem::remove(path);
}

TEST_CASE("diagram csv round trips including infinite deaths") {
  Rng rng(17);
  PersistenceDiagram dgm;
  for (int i = 0; i < 20; ++i) {
    double b = rng.normal();
    dgm.add({i % 3, b, b + rng.uniform01() + 1e-6});
  }
  dgm.add({0, -0.25, kInfiniteDeath});
  dgm.sort();
  PersistenceDiagram back = PersistenceDiagram::from_csv_text(dgm.to_csv());
  CHECK(back.points() == dgm.points());

  std::string csv = dgm.to_csv();
  CHECK(csv.rfind("degree,birth,death\n", 0) == 0);
  CHECK(csv.find("inf") != std::string::npos);

  CHECK_THROWS(PersistenceDiagram::from_csv_text("wrong,header\n1,2,3\n"));
}
