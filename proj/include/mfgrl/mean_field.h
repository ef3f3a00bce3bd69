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

#ifndef MFGRL_MEAN_FIELD_H_
#define MFGRL_MEAN_FIELD_H_

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfgrl {

// Tolerance used for every "sums to one" check on stored distributions.
inline constexpr double kSimplexTolerance = 1e-12;
// Kernel rows handed to the propagation routine may be a little looser.
inline constexpr double kKernelRowTolerance = 1e-9;

class MfgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Distribution of the population over the private types {0, .., N_x - 1}.
class MeanFieldState {
 public:
  MeanFieldState() = default;
  // Throws MfgError unless the entries are nonnegative and sum to one.
  explicit MeanFieldState(std::vector<double> probs);

  static MeanFieldState Vertex(int n_types, int x);
  static MeanFieldState Uniform(int n_types);

  int NumTypes() const { return static_cast<int>(probs_.size()); }
  double operator[](int x) const { return probs_[x]; }
  std::span<const double> probs() const { return probs_; }

  bool operator==(const MeanFieldState&) const = default;

 private:
  std::vector<double> probs_;
};

// Row-stochastic map from private type to a distribution over actions.
class Prescription {
 public:
  Prescription() = default;
  // `probs` is row-major (type, action). Throws unless every row lies in
  // the action simplex.
  Prescription(int n_types, int n_actions, std::vector<double> probs);

  static Prescription Uniform(int n_types, int n_actions);
  // Puts all mass of row x on actions[x].
  static Prescription Deterministic(const std::vector<int>& actions,
                                    int n_actions);
  // Rows are clamped at zero and rescaled to sum to one. For combining
  // prescriptions where rounding may leave rows slightly off the simplex.
  static Prescription Normalized(int n_types, int n_actions,
                                 std::vector<double> probs);

  int NumTypes() const { return n_types_; }
  int NumActions() const { return n_actions_; }
  double operator()(int x, int a) const { return probs_[x * n_actions_ + a]; }
  std::span<const double> Row(int x) const {
    return std::span<const double>(probs_).subspan(x * n_actions_, n_actions_);
  }
  std::span<const double> data() const { return probs_; }

  bool operator==(const Prescription&) const = default;

 private:
  int n_types_ = 0;
  int n_actions_ = 0;
  std::vector<double> probs_;
};

// Dense (type, action) table of action values for one mean-field state.
struct QSlice {
  QSlice() = default;
  QSlice(int n_types, int n_actions, double fill = 0.0)
      : n_types(n_types),
        n_actions(n_actions),
        values(static_cast<size_t>(n_types) * n_actions, fill) {}

  double& operator()(int x, int a) { return values[x * n_actions + a]; }
  double operator()(int x, int a) const { return values[x * n_actions + a]; }
  std::span<const double> Row(int x) const {
    return std::span<const double>(values).subspan(x * n_actions, n_actions);
  }

  int n_types = 0;
  int n_actions = 0;
  std::vector<double> values;
};

// tau(. | x, a, z): writes the next-type distribution into `next`, which has
// one slot per type.
using TransitionKernel = std::function<void(
    int x, int a, const MeanFieldState& z, std::span<double> next)>;

// One step of the discrete McKean-Vlasov recursion:
//   z'(y) = sum_x sum_a z(x) gamma(a|x) tau(y | x, a, z).
// Throws if a kernel row does not sum to one within kKernelRowTolerance.
// Negative round-off below kSimplexTolerance is clamped and the result
// renormalized; anything larger is an error.
MeanFieldState PropagateMeanField(const MeanFieldState& z,
                                  const Prescription& gamma,
                                  const TransitionKernel& kernel);

// Same sum, but the kernel is queried at `kernel_z` instead of `z`.
MeanFieldState PropagateMeanField(const MeanFieldState& z,
                                  const Prescription& gamma,
                                  const TransitionKernel& kernel,
                                  const MeanFieldState& kernel_z);

// Row-wise softmax of a row-major (type, action) logit table.
Prescription SoftmaxPrescription(int n_types, int n_actions,
                                 std::span<const double> logits);

// Largest absolute entrywise difference.
double SupNorm(std::span<const double> a, std::span<const double> b);

}  // namespace mfgrl

#endif  // MFGRL_MEAN_FIELD_H_
