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


// Flat CSV artifacts. Reals are written with 17 significant digits, so
// reading a file back reproduces the doubles exactly.
//
//   atlas.csv           t,z_index,z_0..z_{Nx-1},x,a,prob
//   values.csv          t,z_index,x,v
//   diagnostics.csv     t,z_index,converged,iterations,policy_change,
//                       fixed_point_residual,non_unique
//   exploitability.csv  t,z_index,x,gap
//   trajectory.csv      t,kind,z_0..z_{Nx-1}     (kind is stat or emp)
//   grid.csv            z_index,z_0..z_{Nx-1}
//   compare.csv         t,atlas_distance,max_value_diff

#ifndef MFGRL_CSV_IO_H_
#define MFGRL_CSV_IO_H_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfgrl/evaluation.h"
#include "mfgrl/policy.h"

namespace mfgrl {

// Malformed input; the message names the line.
class CsvError : public MfgError {
 public:
  using MfgError::MfgError;
};

// A file or directory that cannot be created or written.
class OutputError : public MfgError {
 public:
  using MfgError::MfgError;
};

std::string FormatReal(double v);

void WriteAtlasCsv(std::ostream& out, const PolicyAtlas& atlas);
// Rebuilds the grid from the number of points and checks every z column
// against it. Every (t, z_index, x, a) must appear exactly once.
PolicyAtlas ReadAtlasCsv(std::istream& in);

// tables[t - 1] is stage t.
void WriteValuesCsv(std::ostream& out, const std::vector<StageTables>& tables);
// Only v is stored; q of the returned tables is zero.
std::vector<StageTables> ReadValuesCsv(std::istream& in, int n_actions);

void WriteDiagnosticsCsv(std::ostream& out, const SolveDiagnostics& diag);
void WriteExploitabilityCsv(std::ostream& out,
                            const ExploitabilityReport& report);
// Either sequence may be empty.
void WriteTrajectoryCsv(std::ostream& out,
                        const std::vector<MeanFieldState>& statistical,
                        const std::vector<MeanFieldState>& empirical);
void WriteGridCsv(std::ostream& out, const SimplexGrid& grid);

struct CompareRow {
  int t = 0;
  double atlas_distance = 0.0;
  double max_value_diff = 0.0;
};
void WriteCompareCsv(std::ostream& out, const std::vector<CompareRow>& rows);

// Writes through a temporary file that is renamed into place. Throws
// OutputError if the file cannot be written.
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::function<void(std::ostream&)>& write);

}  // namespace mfgrl

#endif  // MFGRL_CSV_IO_H_
