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

#ifndef MFGRL_SIMPLEX_GRID_H_
#define MFGRL_SIMPLEX_GRID_H_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "mfgrl/mean_field.h"

namespace mfgrl {

// The lattice {c / M : c in N^{N_x}, sum(c) = M} of the type simplex.
//
// Points are stored in descending lexicographic order of their integer
// counts c, so for N_x = 2 and M = 2 the order is (1,0), (0.5,0.5), (0,1).
class SimplexGrid {
 public:
  // Throws MfgError if n_types < 2 or resolution < 1.
  SimplexGrid(int n_types, int resolution);

  int NumTypes() const { return n_types_; }
  int Resolution() const { return resolution_; }
  size_t size() const { return points_.size(); }

  const MeanFieldState& Point(size_t index) const { return points_[index]; }
  const std::vector<MeanFieldState>& Points() const { return points_; }
  std::span<const int> Counts(size_t index) const {
    return std::span<const int>(counts_).subspan(index * n_types_, n_types_);
  }

  // Position of the lattice point with the given counts. Throws if the
  // counts do not form a composition of M into N_x parts.
  size_t IndexOf(std::span<const int> counts) const;

 private:
  int n_types_;
  int resolution_;
  std::vector<MeanFieldState> points_;
  std::vector<int> counts_;
  // binom_[n][k] for the composition counts used by IndexOf.
  std::vector<std::vector<size_t>> binom_;
};

// Number of lattice points, C(M + N_x - 1, N_x - 1).
size_t GridSize(int n_types, int resolution);

std::shared_ptr<const SimplexGrid> BuildGrid(int n_types, int resolution);

struct GridWeight {
  size_t index;
  double weight;
};

// Barycentric weights of z on the Freudenthal (Kuhn) subdivision of the
// lattice. At most N_x entries, all strictly positive and summing to one;
// sum_g w_g * point_g reproduces z. For N_x = 2 this is linear
// interpolation between the two bracketing grid points.
std::vector<GridWeight> InterpolationWeights(const MeanFieldState& z,
                                             const SimplexGrid& grid);

}  // namespace mfgrl

#endif  // MFGRL_SIMPLEX_GRID_H_
