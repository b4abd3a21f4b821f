#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tproj/csv.hpp"
#include "tproj/scalar_demo.hpp"
#include "tproj/walking_model.hpp"

using namespace tproj;

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456789.125, 1.0 / 3.0}) {
    std::string s = format_number(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(csv_row({1.0, 0.5}) == "1,0.5\n");
}

TEST_CASE("comment blocks") {
  CHECK(comment_block("a = 1\nb = 2\n") == "# a = 1\n# b = 2\n");
}

TEST_CASE("file output and parameter loading") {
  auto dir = std::filesystem::temp_directory_path() / "tproj_cli_io_test";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "robot.params").string();
  write_text_file(path, "total_mass_kg = 60\nleg_length_m = 0.7\ncom_height_m = 0.68\n");
  RobotParams p = load_robot_params(path);
  CHECK(p.total_mass == 60.0);
  CHECK(p.leg_length == 0.7);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(write_text_file("/nonexistent_dir/x/y.csv", "x"), Error);
}

TEST_CASE("error code names") {
  CHECK(std::string(error_code_name(ErrorCode::invalid_argument)) == "invalid_argument");
  CHECK(std::string(error_code_name(ErrorCode::synthesis)) == "synthesis");
}

TEST_CASE("scalar demo export") {
  ScalarComparison c = scalar_comparison(1.0, 1.0, 1.0, ScalarPulse{}, 3, 100);
  std::string csv = scalar_csv(c, "# run\n");
  CHECK(csv.rfind("# run\n", 0) == 0);
  CHECK(csv.find("\nt,continuous,dlqr,time_projection,open_loop\n") != std::string::npos);
  CHECK(c.t.size() == c.dlqr.size());
  CHECK_THROWS_AS(scalar_comparison(1.0, 0.0, 1.0), Error);
}
