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

#include "dre/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dre/errors.hpp"

namespace dre {

Ellipsoid::Ellipsoid(std::vector<double> center, std::vector<double> factor)
    : center_(std::move(center)), factor_(std::move(factor)) {
  const std::size_t k = center_.size();
  if (k == 0) throw DimensionError("ellipsoid dimension must be >= 1");
  if (factor_.size() != k * k) throw DimensionError("factor must be k x k");
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(center_[i])) throw ConfigError("non-finite ellipsoid center");
    for (std::size_t j = 0; j < k; ++j) {
      const double x = factor_[i * k + j];
      if (!std::isfinite(x)) throw ConfigError("non-finite ellipsoid factor");
      if (j > i && x != 0.0) throw ConfigError("factor must be lower-triangular");
    }
    if (!(factor_[i * k + i] > 0.0)) throw ConfigError("factor diagonal must be positive");
  }
}

Ellipsoid Ellipsoid::sphere(std::vector<double> center, double radius) {
  const std::size_t k = center.size();
  std::vector<double> l(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) l[i * k + i] = 1.0 / radius;
  return Ellipsoid(std::move(center), std::move(l));
}

Ellipsoid Ellipsoid::from_packed(std::vector<double> center, std::span<const double> lower) {
  const std::size_t k = center.size();
  if (lower.size() != k * (k + 1) / 2) throw DimensionError("packed factor size");
  std::vector<double> l(k * k, 0.0);
  std::size_t p = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) l[i * k + j] = lower[p++];
  }
  return Ellipsoid(std::move(center), std::move(l));
}

std::vector<double> Ellipsoid::packed_factor() const {
  const std::size_t k = dim();
  std::vector<double> out;
  out.reserve(k * (k + 1) / 2);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) out.push_back(factor_[i * k + j]);
  }
  return out;
}

double Ellipsoid::min_diagonal() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dim(); ++i) m = std::min(m, factor_[i * dim() + i]);
  return m;
}

void Ellipsoid::descend(std::span<const double> grad_center, std::span<const double> grad_factor,
                        double lr, double diag_floor) {
  const std::size_t k = dim();
  for (std::size_t i = 0; i < k; ++i) center_[i] -= lr * grad_center[i];
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) factor_[i * k + j] -= lr * grad_factor[i * k + j];
    double& diag = factor_[i * k + i];
    diag = std::max(diag, diag_floor);
  }
}

namespace {

void check_dim(const Ellipsoid& ell, std::span<const double> e) {
  if (e.size() != ell.dim()) throw DimensionError("point and ellipsoid dimensions differ");
}

// w = L^T v, returns q = ||w||^2.
double transform(const Ellipsoid& ell, std::span<const double> v, std::span<double> w) {
  const std::size_t k = ell.dim();
  const auto l = ell.factor();
  double q = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = j; i < k; ++i) s += l[i * k + j] * v[i];
    w[j] = s;
    q += s * s;
  }
  return q;
}

}  // namespace

double quad_form(const Ellipsoid& ell, std::span<const double> e) {
  check_dim(ell, e);
  const std::size_t k = ell.dim();
  std::vector<double> v(k), w(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = e[i] - ell.center()[i];
  return transform(ell, v, w);
}

std::optional<double> distance(const Ellipsoid& ell, std::span<const double> e) {
  const double q = quad_form(ell, e);
  if (q < kQuadFloor) return std::nullopt;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < ell.dim(); ++i) {
    const double x = e[i] - ell.center()[i];
    norm2 += x * x;
  }
  return std::fabs(1.0 - 1.0 / std::sqrt(q)) * std::sqrt(norm2);
}

std::optional<double> score_train(const Ellipsoid& ell, std::span<const double> e) {
  return distance(ell, e);
}

double score_test(const Ellipsoid& ell, std::span<const double> e) {
  if (quad_form(ell, e) < 1.0) return 0.0;
  return distance(ell, e).value_or(0.0);
}

std::optional<EllipsoidGradient> gradient(const Ellipsoid& ell, std::span<const double> e) {
  check_dim(ell, e);
  const std::size_t k = ell.dim();
  const auto a = ell.center();
  const auto l = ell.factor();
  std::vector<double> v(k), w(k);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    v[i] = e[i] - a[i];
    norm2 += v[i] * v[i];
  }
  const double q = transform(ell, v, w);
  if (q < kQuadFloor || std::fabs(q - 1.0) < kSurfaceBand) return std::nullopt;

  // D = s * n * (1 - q^-1/2) with s = sign(q - 1)
  const double n = std::sqrt(norm2);
  const double s = q > 1.0 ? 1.0 : -1.0;
  const double inv_sqrt_q = 1.0 / std::sqrt(q);
  const double radial = s * (1.0 - inv_sqrt_q) / n;     // coefficient of v
  const double shape = s * n * inv_sqrt_q / q;          // s * n * q^-3/2

  EllipsoidGradient g;
  g.center.assign(k, 0.0);
  g.factor.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    // (L w)_i
    double lw = 0.0;
    for (std::size_t j = 0; j <= i; ++j) lw += l[i * k + j] * w[j];
    g.center[i] = -(radial * v[i] + shape * lw);
    for (std::size_t j = 0; j <= i; ++j) g.factor[i * k + j] = shape * v[i] * w[j];
  }
  return g;
}

void PointSet::add(std::span<const double> p) {
  if (p.size() != dim_) throw DimensionError("point dimension differs from the set");
  data_.insert(data_.end(), p.begin(), p.end());
}

void FitConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("fit learning rate must be > 0");
  if (batch_size < 1) throw ConfigError("fit batch size must be >= 1");
  if (epochs < 1) throw ConfigError("fit epochs must be >= 1");
  if (!(diag_floor > 0)) throw ConfigError("diag_floor must be > 0");
}

Ellipsoid initial_ellipsoid(const PointSet& points) {
  if (points.empty()) throw ConfigError("cannot fit an ellipsoid to no points");
  constexpr double kEps = 1e-6;
  const std::size_t k = points.dim();
  const double n = static_cast<double>(points.size());
  std::vector<double> mean(k, 0.0), var(k, 0.0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t i = 0; i < k; ++i) mean[i] += points[p][i];
  }
  for (double& m : mean) m /= n;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t i = 0; i < k; ++i) {
      const double x = points[p][i] - mean[i];
      var[i] += x * x;
    }
  }
  std::vector<double> l(k * k, 0.0);
  const double root_k = std::sqrt(static_cast<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    l[i * k + i] = 1.0 / (std::sqrt(var[i] / n) * root_k + kEps);
  }
  return Ellipsoid(std::move(mean), std::move(l));
}

double mean_train_score(const Ellipsoid& ell, const PointSet& points) {
  if (points.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p) sum += score_train(ell, points[p]).value_or(0.0);
  return sum / static_cast<double>(points.size());
}

bool sgd_step(Ellipsoid& ell, std::span<const double> point, double lr, double diag_floor) {
  const auto g = gradient(ell, point);
  if (!g) return false;
  ell.descend(g->center, g->factor, lr, diag_floor);
  return true;
}

FitResult fit_ellipsoid(const PointSet& points, const FitConfig& config) {
  config.validate();
  Ellipsoid ell = initial_ellipsoid(points);

  FitResult result;
  result.initial_mean_score = mean_train_score(ell, points);
  result.final_mean_score = result.initial_mean_score;
  result.ellipsoid = ell;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (std::size_t i = start; i < end; ++i) {
        sgd_step(ell, points[order[i]], config.learning_rate, config.diag_floor);
      }
    }
    const double score = mean_train_score(ell, points);
    if (score < result.final_mean_score) {
      result.final_mean_score = score;
      result.ellipsoid = ell;
      result.best_epoch = epoch;
    }
  }
  return result;
}

}  // namespace dre
