#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "topicscore/io.hpp"

using namespace topicscore;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/topicscore_io_") + name;
}

}  // namespace

TEST_CASE("format_double round-trips arbitrary doubles") {
  const double values[] = {0.0,       1.0,      -1.0,        1.0 / 3.0,
                           1e-300,    1e300,    0.1,         -2.5e-7,
                           3.14159265358979312, 1e17 + 1.0, -0.0};
  for (const double v : values) {
    const std::string s = format_double(v);
    REQUIRE(std::stod(s) == v);
  }
}

TEST_CASE("matrix CSV write/read round-trip is exact") {
  Matrix m(3, 4);
  m << 0.1, -2.0, 3e-12, 4.0,
      1.0 / 3.0, 0.0, -1e100, 7.125,
      -0.0, 9.0, 2.0 / 7.0, 1e-308;
  const std::string path = temp_path("roundtrip.csv");
  write_matrix_csv(path, m);
  const Matrix back = read_matrix_csv(path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 4; ++j) REQUIRE(back(i, j) == m(i, j));
  }
  std::remove(path.c_str());
}

TEST_CASE("read_matrix_csv rejects malformed input") {
  const std::string path = temp_path("bad.csv");
  {
    std::ofstream out(path);
    out << "1,2,3\n4,oops,6\n";
  }
  REQUIRE_THROWS_AS(read_matrix_csv(path), ConfigError);
  {
    std::ofstream out(path);
    out << "1,2,3\n4,5\n";
  }
  REQUIRE_THROWS_AS(read_matrix_csv(path), ConfigError);
  std::remove(path.c_str());
  REQUIRE_THROWS_AS(read_matrix_csv(path), ConfigError);
}

TEST_CASE("read_word_list skips blanks and trims line endings") {
  const std::string path = temp_path("words.txt");
  {
    std::ofstream out(path);
    out << "alpha\r\n\nbeta  \ngamma\n";
  }
  const auto words = read_word_list(path);
  REQUIRE(words.size() == 3);
  REQUIRE(words[0] == "alpha");
  REQUIRE(words[1] == "beta");
  REQUIRE(words[2] == "gamma");
  std::remove(path.c_str());
}
