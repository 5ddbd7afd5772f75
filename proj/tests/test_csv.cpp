#include "gpaml/csv.hpp"

#include <cstdlib>
#include <string>

#include "doctest.h"
#include "gpaml/error.hpp"
#include "test_util.hpp"

using namespace gpaml;
using test_util::TempDir;
using test_util::read_lines;
using test_util::write_file;

TEST_CASE("format_double round-trips and stays shortest") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(100.0) == "100");
  CHECK(format_double(-3.0) == "-3");

  const double values[] = {1.0 / 3.0,          0.8646647167633873,
                           1e-17,              -2.5e300,
                           3.141592653589793,  1234567890123.25,
                           -0.0001220703125};
  for (const double v : values) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("csv reader handles headers, names and defaults") {
  TempDir dir("csv");

  write_file(dir / "a.csv", "x, y ,label\n1,2,0\n3,4,1\n");
  const CsvTable t = read_csv_table(dir / "a.csv", true);
  REQUIRE(t.ncol() == 3);
  CHECK(t.columns[1] == "y");
  REQUIRE(t.nrow() == 2);
  CHECK(t.rows[1][0] == "3");
  CHECK(t.find_column("label").value() == 2);
  CHECK(!t.find_column("missing").has_value());

  write_file(dir / "b.csv", "1,2\n3,4\n");
  const CsvTable named = read_csv_table(dir / "b.csv", false, {"u", "v"});
  CHECK(named.columns[0] == "u");
  CHECK(named.nrow() == 2);

  const CsvTable anon = read_csv_table(dir / "b.csv", false);
  CHECK(anon.columns[0] == "c0");
  CHECK(anon.columns[1] == "c1");

  // Blank lines are skipped, carriage returns stripped.
  write_file(dir / "c.csv", "x,y\r\n\r\n1,2\r\n");
  const CsvTable crlf = read_csv_table(dir / "c.csv", true);
  CHECK(crlf.nrow() == 1);
  CHECK(crlf.rows[0][1] == "2");
}

TEST_CASE("csv reader reports structural problems with positions") {
  TempDir dir("csv-err");

  write_file(dir / "ragged.csv", "x,y\n1,2\n3\n");
  CHECK_THROWS_WITH_AS(read_csv_table(dir / "ragged.csv", true),
                       doctest::Contains(":3:"), DataError);

  write_file(dir / "two.csv", "1,2\n");
  CHECK_THROWS_AS(read_csv_table(dir / "two.csv", false, {"only"}), DataError);

  CHECK_THROWS_AS(read_csv_table(dir / "no-such-file.csv", true), DataError);
}

TEST_CASE("cell parsers are strict about positions and content") {
  CHECK(parse_double_cell("0.25", 1, 1) == 0.25);
  CHECK(parse_int_cell("-7", 1, 1) == -7);
  CHECK_THROWS_WITH_AS(parse_double_cell("abc", 4, 2),
                       doctest::Contains("row 4"), DataError);
  CHECK_THROWS_WITH_AS(parse_int_cell("1.5", 2, 3),
                       doctest::Contains("column 3"), DataError);
  CHECK_THROWS_AS(parse_double_cell("", 1, 1), DataError);
  CHECK_THROWS_AS(parse_double_cell("1x", 1, 1), DataError);
}

TEST_CASE("writer emits exactly the cells it was given") {
  TempDir dir("csv-w");
  CsvWriter w(dir / "out.csv");
  w.row({"a", "b"});
  w.row({"1", ""});
  w.close();
  const auto lines = read_lines(dir / "out.csv");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "a,b");
  CHECK(lines[1] == "1,");
}

TEST_CASE("file digest tracks content") {
  TempDir dir("digest");
  write_file(dir / "one.txt", "hello\n");
  write_file(dir / "two.txt", "hello\n");
  write_file(dir / "three.txt", "hellp\n");
  CHECK(file_digest_hex(dir / "one.txt") == file_digest_hex(dir / "two.txt"));
  CHECK(file_digest_hex(dir / "one.txt") != file_digest_hex(dir / "three.txt"));
  CHECK(file_digest_hex(dir / "one.txt").size() == 16);
  CHECK_THROWS_AS(file_digest_hex(dir / "absent.txt"), Error);
}
