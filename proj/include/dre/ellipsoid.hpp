// Copyright 2026 The DRE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRE_ELLIPSOID_HPP_
#define DRE_ELLIPSOID_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dre {

inline constexpr double kDiagFloor = 1e-6;
// Below this quadratic form the point sits at the center and 1/sqrt(q)
// is unbounded.
inline constexpr double kQuadFloor = 1e-12;
// Points this close to the surface are skipped by SGD: the distance has a
// kink there.
inline constexpr double kSurfaceBand = 1e-9;

// Hyper-ellipsoid {x : (x-a)^T L L^T (x-a) = 1} with L lower-triangular and
// a strictly positive diagonal, so M = L L^T is symmetric positive definite.
class Ellipsoid {
 public:
  Ellipsoid() = default;
  // `factor` is k*k row-major; entries above the diagonal must be zero.
  // Throws DimensionError / ConfigError on a shape or invariant violation.
  Ellipsoid(std::vector<double> center, std::vector<double> factor);

  static Ellipsoid sphere(std::vector<double> center, double radius);
  static Ellipsoid from_packed(std::vector<double> center, std::span<const double> lower);

  std::size_t dim() const { return center_.size(); }
  std::span<const double> center() const { return center_; }
  std::span<const double> factor() const { return factor_; }
  double factor(std::size_t i, std::size_t j) const { return factor_[i * dim() + j]; }
  // Row-major lower triangle, k(k+1)/2 values.
  std::vector<double> packed_factor() const;
  double min_diagonal() const;

  // a -= lr * grad_center; L -= lr * grad_factor on the lower triangle, then
  // clamp diag(L) >= diag_floor.
  void descend(std::span<const double> grad_center, std::span<const double> grad_factor,
               double lr, double diag_floor);

  friend bool operator==(const Ellipsoid&, const Ellipsoid&) = default;

 private:
  std::vector<double> center_;
  std::vector<double> factor_;
};

// (e-a)^T L L^T (e-a), evaluated as ||L^T (e-a)||^2.
double quad_form(const Ellipsoid& ell, std::span<const double> e);

// Radial distance |1 - 1/sqrt(q)| * ||e - a||: length of the segment
// between e and the surface point on the ray from the center through e.
// nullopt when q < kQuadFloor.
std::optional<double> distance(const Ellipsoid& ell, std::span<const double> e);

// Fitting score; same as distance (interior points count too).
std::optional<double> score_train(const Ellipsoid& ell, std::span<const double> e);

// Membership penalty: 0 strictly inside, distance on or outside.
double score_test(const Ellipsoid& ell, std::span<const double> e);

struct EllipsoidGradient {
  std::vector<double> center;  // dD/da, k
  std::vector<double> factor;  // dD/dL, k*k row-major, zero above the diagonal
};

// Analytic gradient of distance. nullopt at the center (q < kQuadFloor) and
// within kSurfaceBand of the surface.
std::optional<EllipsoidGradient> gradient(const Ellipsoid& ell, std::span<const double> e);

// Dense set of equally sized points.
class PointSet {
 public:
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  void add(std::span<const double> p);
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }
  std::span<const double> operator[](std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
  }

 private:
  std::size_t dim_;
  std::vector<double> data_;
};

struct FitConfig {
  double learning_rate = 1e-5;
  std::size_t batch_size = 120;
  int epochs = 500;
  std::uint64_t seed = 1;
  double diag_floor = kDiagFloor;

  void validate() const;
};

// Center at the sample mean, L = diag(1 / (sigma_i * sqrt(k) + eps)).
Ellipsoid initial_ellipsoid(const PointSet& points);

// Mean score_train over the points, degenerate points counted as 0.
double mean_train_score(const Ellipsoid& ell, const PointSet& points);

// One SGD update on a single point. Returns false when the point was
// skipped (no gradient).
bool sgd_step(Ellipsoid& ell, std::span<const double> point, double lr, double diag_floor);

struct FitResult {
  Ellipsoid ellipsoid;
  double initial_mean_score = 0.0;
  double final_mean_score = 0.0;
  int best_epoch = 0;  // 0 = the initialization was never improved on
};

// SGD over shuffled mini-batches with per-sample updates. Returns the
// epoch-end ellipsoid with the lowest mean score, so the result never
// scores worse than the initialization.
FitResult fit_ellipsoid(const PointSet& points, const FitConfig& config);
inline Ellipsoid fit(const PointSet& points, const FitConfig& config) {
  return fit_ellipsoid(points, config).ellipsoid;
}

}  // namespace dre

#endif  // DRE_ELLIPSOID_HPP_
