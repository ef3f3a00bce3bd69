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

#include "mfgrl/simplex_grid.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mfgrl {
namespace {

constexpr size_t kMaxGridPoints = size_t{1} << 26;

std::vector<std::vector<size_t>> BinomialTable(int max_n) {
  std::vector<std::vector<size_t>> c(max_n + 1);
  for (int n = 0; n <= max_n; ++n) {
    c[n].assign(n + 1, 1);
    for (int k = 1; k < n; ++k) {
      const size_t sum = c[n - 1][k - 1] + c[n - 1][k];
      c[n][k] = sum < c[n - 1][k] ? std::numeric_limits<size_t>::max() : sum;
    }
  }
  return c;
}

// Appends every composition of `remaining` into counts[pos..] in descending
// lexicographic order.
void Enumerate(int pos, int remaining, std::vector<int>& counts,
               std::vector<int>& out) {
  const int n = static_cast<int>(counts.size());
  if (pos == n - 1) {
    counts[pos] = remaining;
    out.insert(out.end(), counts.begin(), counts.end());
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    counts[pos] = v;
    Enumerate(pos + 1, remaining - v, counts, out);
  }
}

}  // namespace

size_t GridSize(int n_types, int resolution) {
  if (n_types < 2) throw MfgError("SimplexGrid: n_types must be >= 2");
  if (resolution < 1) throw MfgError("SimplexGrid: resolution must be >= 1");
  const auto binom = BinomialTable(resolution + n_types - 1);
  return binom[resolution + n_types - 1][n_types - 1];
}

SimplexGrid::SimplexGrid(int n_types, int resolution)
    : n_types_(n_types), resolution_(resolution) {
  const size_t n_points = GridSize(n_types, resolution);
  if (n_points > kMaxGridPoints) {
    throw MfgError("SimplexGrid: too many lattice points");
  }
  binom_ = BinomialTable(resolution + n_types);
  counts_.reserve(n_points * n_types);
  std::vector<int> scratch(n_types, 0);
  Enumerate(0, resolution, scratch, counts_);
  points_.reserve(n_points);
  const double m = resolution;
  for (size_t i = 0; i < n_points; ++i) {
    std::vector<double> p(n_types);
    for (int x = 0; x < n_types; ++x) p[x] = counts_[i * n_types + x] / m;
    points_.emplace_back(std::move(p));
  }
}

size_t SimplexGrid::IndexOf(std::span<const int> counts) const {
  if (static_cast<int>(counts.size()) != n_types_) {
    throw MfgError("SimplexGrid::IndexOf: wrong number of parts");
  }
  size_t index = 0;
  int remaining = resolution_;
  for (int i = 0; i + 1 < n_types_; ++i) {
    const int c = counts[i];
    if (c < 0 || c > remaining) {
      throw MfgError("SimplexGrid::IndexOf: not a composition of M");
    }
    // Compositions that put more than c at position i come first; by the
    // hockey-stick identity there are C(remaining - c - 1 + p, p) of them,
    // p being the number of parts after i.
    const int parts_after = n_types_ - 1 - i;
    const int gap = remaining - c - 1;
    if (gap >= 0) index += binom_[gap + parts_after][parts_after];
    remaining -= c;
  }
  if (counts[n_types_ - 1] != remaining) {
    throw MfgError("SimplexGrid::IndexOf: not a composition of M");
  }
  return index;
}

std::shared_ptr<const SimplexGrid> BuildGrid(int n_types, int resolution) {
  return std::make_shared<const SimplexGrid>(n_types, resolution);
}

std::vector<GridWeight> InterpolationWeights(const MeanFieldState& z,
                                             const SimplexGrid& grid) {
  const int n = grid.NumTypes();
  if (z.NumTypes() != n) {
    throw MfgError("InterpolationWeights: dimension mismatch");
  }
  const int dim = n - 1;
  const double m = grid.Resolution();

  // Cumulative coordinates u_k = M * (z_0 + .. + z_k) live in the ordered
  // region 0 <= u_0 <= .. <= u_{N-2} <= M, which is a union of Kuhn
  // simplices of the integer lattice.
  std::vector<double> u(dim);
  double cumulative = 0.0;
  for (int k = 0; k < dim; ++k) {
    cumulative += z[k];
    double v = std::clamp(cumulative * m, 0.0, m);
    const double nearest = std::round(v);
    if (std::abs(v - nearest) <= 64 * std::numeric_limits<double>::epsilon() * m) {
      v = nearest;
    }
    u[k] = v;
  }

  std::vector<int> base(dim);
  std::vector<double> frac(dim);
  for (int k = 0; k < dim; ++k) {
    base[k] = static_cast<int>(std::floor(u[k]));
    if (base[k] >= grid.Resolution()) base[k] = grid.Resolution();
    frac[k] = u[k] - base[k];
  }
  // Increment order: descending fractional part; ties go to the higher
  // coordinate first so every vertex stays inside the ordered region.
  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a > b;
  });

  std::vector<GridWeight> weights;
  weights.reserve(n);
  std::vector<int> vertex = base;
  std::vector<int> counts(n);
  auto emit = [&](double w) {
    if (!(w > 0.0)) return;
    counts[0] = vertex[0];
    for (int k = 1; k < dim; ++k) counts[k] = vertex[k] - vertex[k - 1];
    counts[n - 1] = grid.Resolution() - vertex[dim - 1];
    weights.push_back({grid.IndexOf(counts), w});
  };
  emit(1.0 - (dim > 0 ? frac[order[0]] : 0.0));
  for (int j = 0; j < dim; ++j) {
    vertex[order[j]] += 1;
    const double next = j + 1 < dim ? frac[order[j + 1]] : 0.0;
    emit(frac[order[j]] - next);
  }
  return weights;
}

}  // namespace mfgrl
