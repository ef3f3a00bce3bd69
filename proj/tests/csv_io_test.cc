// Copyright 2026 The mfgrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "mfgrl/csv_io.h"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mfgrl/exact_solver.h"
#include "test_util.h"

namespace mfgrl {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string FirstLine(const std::string& text) { return Lines(text).at(0); }

PolicyAtlas RandomAtlas(int n_types, int resolution, int horizon, uint64_t seed) {
  std::mt19937_64 rng(seed);
  PolicyAtlas atlas(BuildGrid(n_types, resolution), horizon, 3);
  for (int t = 1; t <= horizon; ++t) {
    for (size_t g = 0; g < atlas.grid().size(); ++g) {
      atlas.Set(t, g, testing::RandomPrescription(n_types, 3, rng));
    }
  }
  return atlas;
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mfgrl_csv_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST_CASE("real formatting") {
  CHECK(FormatReal(0.1) == "0.10000000000000001");
  CHECK(FormatReal(-0.0) == "0");
  CHECK(FormatReal(1.0) == "1");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng);
    CHECK(std::stod(FormatReal(v)) == v);
  }
}

TEST_CASE("atlas round trip is exact") {
  for (int n_types : {2, 3}) {
    const PolicyAtlas atlas = RandomAtlas(n_types, 4, 3, n_types);
    std::stringstream buf;
    WriteAtlasCsv(buf, atlas);
    const std::string text = buf.str();
    CHECK(FirstLine(text) ==
          (n_types == 2 ? "t,z_index,z_0,z_1,x,a,prob" : "t,z_index,z_0,z_1,z_2,x,a,prob"));
    CHECK(Lines(text).size() == 1 + 3 * atlas.grid().size() * n_types * 3);
    std::istringstream in(text);
    const PolicyAtlas back = ReadAtlasCsv(in);
    CHECK(back.Horizon() == 3);
    CHECK(back.NumActions() == 3);
    CHECK(back.grid().size() == atlas.grid().size());
    for (int t = 1; t <= 3; ++t) {
      for (size_t g = 0; g < atlas.grid().size(); ++g) CHECK(back.At(t, g) == atlas.At(t, g));
    }
  }
}

TEST_CASE("values round trip is exact") {
  const EnvModel env = testing::Malware(4);
  const auto grid = BuildGrid(2, 8);
  const Solution sol = BackwardSolve(env, grid, {});
  std::stringstream buf;
  WriteValuesCsv(buf, sol.tables);
  CHECK(FirstLine(buf.str()) == "t,z_index,x,v");
  const auto back = ReadValuesCsv(buf, 2);
  REQUIRE(back.size() == 4);
  for (int t = 0; t < 4; ++t) {
    for (size_t g = 0; g < grid->size(); ++g) {
      for (int x = 0; x < 2; ++x) CHECK(back[t].v(g, x) == sol.tables[t].v(g, x));
    }
  }
}

TEST_CASE("malformed atlas input names the line") {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      ReadAtlasCsv(in);
    } catch (const CsvError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string header = "t,z_index,z_0,z_1,x,a,prob\n";
  const std::string row = "1,0,1,0,0,0,1\n";
  CHECK(error_of("") == "empty CSV input");
  CHECK(error_of("t,z,prob\n").find("header") != std::string::npos);
  CHECK(error_of(header + row + "1,0,1,0,0,1\n").find("line 3") == 0);
  CHECK(error_of(header + row + "1,0,1,0,0,1,abc\n") == "line 3: bad number 'abc'");
  CHECK(error_of(header + "x,0,1,0,0,0,1\n") == "line 2: bad integer 'x'");
  CHECK(error_of(header + row + row) == "line 3: duplicate entry");
  CHECK(error_of(header + "0,0,1,0,0,0,1\n") == "line 2: index out of range");
  CHECK(error_of(header).find("no rows") != std::string::npos);
  CHECK(error_of(header + row).find("missing") != std::string::npos);
  // A full single-point table whose z columns are off the grid.
  std::string off = header;
  for (int g = 0; g < 2; ++g) {
    for (int x = 0; x < 2; ++x) {
      for (int a = 0; a < 2; ++a) {
        off += "1," + std::to_string(g) + ",0.5,0.5," + std::to_string(x) + "," +
               std::to_string(a) + ",0.5\n";
      }
    }
  }
  CHECK(error_of(off).find("do not match the grid") != std::string::npos);
}

TEST_CASE("malformed values input") {
  std::istringstream bad_header("t,x,v\n");
  CHECK_THROWS_AS(ReadValuesCsv(bad_header, 2), CsvError);
  std::istringstream gap("t,z_index,x,v\n1,0,0,0\n1,1,1,0\n");
  CHECK_THROWS_AS(ReadValuesCsv(gap, 2), CsvError);
  std::istringstream crlf("t,z_index,x,v\r\n1,0,0,-1.5\r\n\r\n");
  CHECK(ReadValuesCsv(crlf, 2)[0].v(0, 0) == -1.5);
}

TEST_CASE("report writers") {
  SUBCASE("diagnostics") {
    SolveDiagnostics d;
    d.records = {{2, 0, true, 3, 1e-9, 0.0}, {2, 1, false, 500, 0.25, 0.125}};
    d.non_unique = {{2, 1}};
    std::stringstream buf;
    WriteDiagnosticsCsv(buf, d);
    CHECK(Lines(buf.str()) ==
          std::vector<std::string>{
              "t,z_index,converged,iterations,policy_change,fixed_point_residual,non_unique",
              "2,0,1,3,1.0000000000000001e-09,0,0", "2,1,0,500,0.25,0.125,1"});
  }
  SUBCASE("exploitability") {
    ExploitabilityReport r;
    r.gaps = {{1, 0, 0, 0.0}, {1, 0, 1, 0.5}};
    std::stringstream buf;
    WriteExploitabilityCsv(buf, r);
    CHECK(Lines(buf.str()) == std::vector<std::string>{"t,z_index,x,gap", "1,0,0,0", "1,0,1,0.5"});
  }
  SUBCASE("trajectory") {
    std::stringstream buf;
    WriteTrajectoryCsv(buf, {MeanFieldState({0.5, 0.5}), MeanFieldState({1.0, 0.0})},
                       {MeanFieldState({0.25, 0.75})});
    CHECK(Lines(buf.str()) == std::vector<std::string>{"t,kind,z_0,z_1", "1,stat,0.5,0.5",
                                                       "2,stat,1,0", "1,emp,0.25,0.75"});
    std::stringstream empty;
    WriteTrajectoryCsv(empty, {}, {});
    CHECK(empty.str() == "t,kind\n");
  }
  SUBCASE("grid") {
    std::stringstream buf;
    WriteGridCsv(buf, *BuildGrid(2, 2));
    CHECK(Lines(buf.str()) ==
          std::vector<std::string>{"z_index,z_0,z_1", "0,1,0", "1,0.5,0.5", "2,0,1"});
  }
  SUBCASE("compare") {
    std::stringstream buf;
    WriteCompareCsv(buf, {{1, 0.25, 0.5}});
    CHECK(Lines(buf.str()) ==
          std::vector<std::string>{"t,atlas_distance,max_value_diff", "1,0.25,0.5"});
  }
}

TEST_CASE("atomic file writes") {
  const fs::path dir = TempDir("atomic");
  const fs::path file = dir / "nested" / "out.csv";
  WriteFileAtomic(file, [](std::ostream& out) { out << "a,b\n1,2\n"; });
  std::ifstream in(file);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == "a,b\n1,2\n");
  CHECK_FALSE(fs::exists(file.string() + ".tmp"));
  // A regular file where a directory should be.
  const fs::path blocked = dir / "nested" / "out.csv" / "child.csv";
  CHECK_THROWS_AS(WriteFileAtomic(blocked, [](std::ostream&) {}), OutputError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace mfgrl
