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

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>
#include <tuple>

namespace mfgrl {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  std::vector<std::string> Header() {
    std::string line;
    if (!std::getline(in_, line)) throw CsvError("empty CSV input");
    line_no_ = 1;
    return SplitLine(StripCr(line));
  }

  // False at end of input; blank lines are skipped.
  bool Next(std::vector<std::string>& cells, size_t expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      line = StripCr(line);
      if (line.empty()) continue;
      cells = SplitLine(line);
      if (cells.size() != expected) {
        Fail("expected " + std::to_string(expected) + " fields, found " +
             std::to_string(cells.size()));
      }
      return true;
    }
    return false;
  }

  double Real(const std::string& cell) const {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (cell.empty() || end != begin + cell.size() || errno == ERANGE ||
        !std::isfinite(v)) {
      Fail("bad number '" + cell + "'");
    }
    return v;
  }

  long Integer(const std::string& cell) const {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(begin, &end, 10);
    if (cell.empty() || end != begin + cell.size() || errno == ERANGE) {
      Fail("bad integer '" + cell + "'");
    }
    return v;
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw CsvError("line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

void WriteZColumns(std::ostream& out, int n_types) {
  for (int x = 0; x < n_types; ++x) out << ",z_" << x;
}

void WriteZ(std::ostream& out, const MeanFieldState& z) {
  for (double p : z.probs()) out << ',' << FormatReal(p);
}

}  // namespace

std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

void WriteAtlasCsv(std::ostream& out, const PolicyAtlas& atlas) {
  const SimplexGrid& grid = atlas.grid();
  out << "t,z_index";
  WriteZColumns(out, grid.NumTypes());
  out << ",x,a,prob\n";
  for (int t = 1; t <= atlas.Horizon(); ++t) {
    for (size_t g = 0; g < grid.size(); ++g) {
      const Prescription& gamma = atlas.At(t, g);
      for (int x = 0; x < atlas.NumTypes(); ++x) {
        for (int a = 0; a < atlas.NumActions(); ++a) {
          out << t << ',' << g;
          WriteZ(out, grid.Point(g));
          out << ',' << x << ',' << a << ',' << FormatReal(gamma(x, a)) << '\n';
        }
      }
    }
  }
}

PolicyAtlas ReadAtlasCsv(std::istream& in) {
  CsvReader reader(in);
  const auto header = reader.Header();
  int n_types = 0;
  while (2 + n_types < static_cast<int>(header.size()) &&
         header[2 + n_types] == "z_" + std::to_string(n_types)) {
    ++n_types;
  }
  std::vector<std::string> expected{"t", "z_index"};
  for (int x = 0; x < n_types; ++x) expected.push_back("z_" + std::to_string(x));
  for (const char* name : {"x", "a", "prob"}) expected.emplace_back(name);
  if (n_types < 2 || header != expected) {
    throw CsvError("atlas header must be t,z_index,z_0..z_{Nx-1},x,a,prob");
  }

  struct Row {
    std::vector<double> z;
    double prob;
  };
  std::map<std::tuple<long, long, long, long>, Row> rows;
  long horizon = 0, n_grid = 0, n_actions = 0;
  std::vector<std::string> cells;
  while (reader.Next(cells, expected.size())) {
    const long t = reader.Integer(cells[0]);
    const long g = reader.Integer(cells[1]);
    const long x = reader.Integer(cells[2 + n_types]);
    const long a = reader.Integer(cells[3 + n_types]);
    if (t < 1 || g < 0 || x < 0 || x >= n_types || a < 0) {
      reader.Fail("index out of range");
    }
    Row row{{}, reader.Real(cells[4 + n_types])};
    for (int k = 0; k < n_types; ++k) row.z.push_back(reader.Real(cells[2 + k]));
    if (!rows.emplace(std::make_tuple(t, g, x, a), std::move(row)).second) {
      reader.Fail("duplicate entry");
    }
    horizon = std::max(horizon, t);
    n_grid = std::max(n_grid, g + 1);
    n_actions = std::max(n_actions, a + 1);
  }
  if (rows.empty()) throw CsvError("atlas has no rows");
  if (static_cast<long>(rows.size()) != horizon * n_grid * n_types * n_actions) {
    throw CsvError("atlas is missing (t, z_index, x, a) entries");
  }
  int resolution = 1;
  while (GridSize(n_types, resolution) < static_cast<size_t>(n_grid)) {
    ++resolution;
  }
  if (GridSize(n_types, resolution) != static_cast<size_t>(n_grid)) {
    throw CsvError("atlas has " + std::to_string(n_grid) +
                   " grid points, which is not a simplex lattice size");
  }
  auto grid = BuildGrid(n_types, resolution);
  PolicyAtlas atlas(grid, static_cast<int>(horizon),
                    static_cast<int>(n_actions));
  for (long t = 1; t <= horizon; ++t) {
    for (long g = 0; g < n_grid; ++g) {
      std::vector<double> probs;
      for (long x = 0; x < n_types; ++x) {
        for (long a = 0; a < n_actions; ++a) {
          const Row& row = rows.at(std::make_tuple(t, g, x, a));
          if (SupNorm(row.z, grid->Point(g).probs()) > kSimplexTolerance) {
            throw CsvError("z columns of z_index " + std::to_string(g) +
                           " do not match the grid");
          }
          probs.push_back(row.prob);
        }
      }
      atlas.Set(static_cast<int>(t), g,
                Prescription(n_types, static_cast<int>(n_actions),
                             std::move(probs)));
    }
  }
  return atlas;
}

void WriteValuesCsv(std::ostream& out, const std::vector<StageTables>& tables) {
  out << "t,z_index,x,v\n";
  for (size_t s = 0; s < tables.size(); ++s) {
    const StageTables& stage = tables[s];
    for (size_t g = 0; g < stage.NumGrid(); ++g) {
      for (int x = 0; x < stage.NumTypes(); ++x) {
        out << s + 1 << ',' << g << ',' << x << ','
            << FormatReal(stage.v(g, x)) << '\n';
      }
    }
  }
}

std::vector<StageTables> ReadValuesCsv(std::istream& in, int n_actions) {
  CsvReader reader(in);
  if (reader.Header() != std::vector<std::string>{"t", "z_index", "x", "v"}) {
    throw CsvError("values header must be t,z_index,x,v");
  }
  std::map<std::tuple<long, long, long>, double> rows;
  long horizon = 0, n_grid = 0, n_types = 0;
  std::vector<std::string> cells;
  while (reader.Next(cells, 4)) {
    const long t = reader.Integer(cells[0]);
    const long g = reader.Integer(cells[1]);
    const long x = reader.Integer(cells[2]);
    if (t < 1 || g < 0 || x < 0) reader.Fail("index out of range");
    if (!rows.emplace(std::make_tuple(t, g, x), reader.Real(cells[3])).second) {
      reader.Fail("duplicate entry");
    }
    horizon = std::max(horizon, t);
    n_grid = std::max(n_grid, g + 1);
    n_types = std::max(n_types, x + 1);
  }
  if (static_cast<long>(rows.size()) != horizon * n_grid * n_types ||
      rows.empty()) {
    throw CsvError("values table is empty or missing (t, z_index, x) entries");
  }
  std::vector<StageTables> tables(
      horizon, StageTables(n_grid, static_cast<int>(n_types), n_actions));
  for (const auto& [key, v] : rows) {
    const auto [t, g, x] = key;
    tables[t - 1].v(g, static_cast<int>(x)) = v;
  }
  return tables;
}

void WriteDiagnosticsCsv(std::ostream& out, const SolveDiagnostics& diag) {
  out << "t,z_index,converged,iterations,policy_change,fixed_point_residual,"
         "non_unique\n";
  std::map<std::pair<int, size_t>, bool> flagged;
  for (const auto& key : diag.non_unique) flagged[key] = true;
  for (const StageRecord& r : diag.records) {
    out << r.t << ',' << r.z_index << ',' << (r.converged ? 1 : 0) << ','
        << r.iterations << ',' << FormatReal(r.policy_change) << ','
        << FormatReal(r.residual) << ','
        << (flagged.count({r.t, r.z_index}) ? 1 : 0) << '\n';
  }
}

void WriteExploitabilityCsv(std::ostream& out,
                            const ExploitabilityReport& report) {
  out << "t,z_index,x,gap\n";
  for (const ExploitabilityEntry& e : report.gaps) {
    out << e.t << ',' << e.z_index << ',' << e.x << ',' << FormatReal(e.gap)
        << '\n';
  }
}

void WriteTrajectoryCsv(std::ostream& out,
                        const std::vector<MeanFieldState>& statistical,
                        const std::vector<MeanFieldState>& empirical) {
  const int n_types = !statistical.empty()  ? statistical.front().NumTypes()
                      : !empirical.empty() ? empirical.front().NumTypes()
                                           : 0;
  out << "t,kind";
  WriteZColumns(out, n_types);
  out << '\n';
  for (const auto& [kind, flow] :
       {std::pair{"stat", &statistical}, std::pair{"emp", &empirical}}) {
    for (size_t t = 0; t < flow->size(); ++t) {
      out << t + 1 << ',' << kind;
      WriteZ(out, (*flow)[t]);
      out << '\n';
    }
  }
}

void WriteGridCsv(std::ostream& out, const SimplexGrid& grid) {
  out << "z_index";
  WriteZColumns(out, grid.NumTypes());
  out << '\n';
  for (size_t g = 0; g < grid.size(); ++g) {
    out << g;
    WriteZ(out, grid.Point(g));
    out << '\n';
  }
}

void WriteCompareCsv(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "t,atlas_distance,max_value_diff\n";
  for (const CompareRow& r : rows) {
    out << r.t << ',' << FormatReal(r.atlas_distance) << ','
        << FormatReal(r.max_value_diff) << '\n';
  }
}

void WriteFileAtomic(const std::filesystem::path& path,
                     const std::function<void(std::ostream&)>& write) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw OutputError("cannot create " + path.parent_path().string() + ": " +
                        ec.message());
    }
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + path.string());
    write(out);
    out.flush();
    if (!out) throw OutputError("write to " + path.string() + " failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError("cannot write " + path.string());
  }
}

}  // namespace mfgrl
