// Copyright 2026 The LAIS Authors
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

#ifndef LAIS_COMPRESSION_HPP
#define LAIS_COMPRESSION_HPP

#include <lais/eval_ledger.hpp>
#include <lais/gaussian.hpp>
#include <lais/log_sum_exp.hpp>
#include <lais/rng.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

/**
 * \file
 * \brief Compression of a proposal bank into a small mixture.
 *
 * The `R` location parameters produced by the upper layer are clustered into `B` groups.
 * Each group becomes one mixture component centered at a summary point, weighted by the
 * group's share of locations, and all components share a covariance that adds the
 * within-group spread back onto the kernel covariance `sigma_p^2 I`.
 */

namespace lais {

/// Cluster labels (0-based) of `R` points.
struct ClusterAssignment {
  std::vector<std::size_t> labels;
  std::size_t clusters = 0;  ///< B.
  std::size_t iterations = 0;

  [[nodiscard]] std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(clusters);
    for (std::size_t j = 0; j < labels.size(); ++j) {
      out[labels[j]].push_back(j);
    }
    return out;
  }

  [[nodiscard]] std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out(clusters, 0);
    for (const auto label : labels) {
      ++out[label];
    }
    return out;
  }
};

namespace detail {

inline void assign_nearest(
    const Matrix& points,
    const Matrix& centers,
    std::vector<std::size_t>& labels,
    Eigen::VectorXd& sq_dist) {
  const auto R = points.cols();
  for (Eigen::Index j = 0; j < R; ++j) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_m = 0;
    for (Eigen::Index m = 0; m < centers.cols(); ++m) {
      const double d = (points.col(j) - centers.col(m)).squaredNorm();
      if (d < best) {
        best = d;
        best_m = static_cast<std::size_t>(m);
      }
    }
    labels[static_cast<std::size_t>(j)] = best_m;
    sq_dist[j] = best;
  }
}

/// Moves the point farthest from its centroid (among clusters of size >= 2) into each empty cluster.
inline void repair_empty_clusters(
    const Matrix& points,
    Matrix& centers,
    std::vector<std::size_t>& labels,
    Eigen::VectorXd& sq_dist) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(centers.cols()), 0);
  for (const auto label : labels) {
    ++sizes[label];
  }
  for (std::size_t m = 0; m < sizes.size(); ++m) {
    if (sizes[m] != 0) {
      continue;
    }
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (sizes[labels[static_cast<std::size_t>(j)]] >= 2 && sq_dist[j] > far_d) {
        far_d = sq_dist[j];
        far = j;
      }
    }
    --sizes[labels[static_cast<std::size_t>(far)]];
    labels[static_cast<std::size_t>(far)] = m;
    sizes[m] = 1;
    sq_dist[far] = 0.0;
    centers.col(static_cast<Eigen::Index>(m)) = points.col(far);
  }
}

[[nodiscard]] inline Matrix cluster_means(const Matrix& points, const std::vector<std::size_t>& labels, std::size_t B) {
  Matrix sums = Matrix::Zero(points.rows(), static_cast<Eigen::Index>(B));
  std::vector<double> counts(B, 0.0);
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const auto m = labels[static_cast<std::size_t>(j)];
    sums.col(static_cast<Eigen::Index>(m)) += points.col(j);
    counts[m] += 1.0;
  }
  for (std::size_t m = 0; m < B; ++m) {
    sums.col(static_cast<Eigen::Index>(m)) /= counts[m];
  }
  return sums;
}

}  // namespace detail

/// k-means on the columns of `points` (D x R) with seeded k-means++ initialization.
/**
 * At most 100 Lloyd iterations, stopping early once the inertia changes by less than 1e-8
 * relatively. Empty clusters are refilled with the point farthest from its centroid.
 * `B == R` returns the identity labelling (singleton clusters) and `B == 1` a single cluster.
 */
[[nodiscard]] inline ClusterAssignment cluster_locations(const Matrix& points, std::size_t B, std::uint64_t seed) {
  const auto R = static_cast<std::size_t>(points.cols());
  if (B < 1 || B > R) {
    throw ArgumentError(
        "cluster_locations: need 1 <= B <= R (B = " + std::to_string(B) + ", R = " + std::to_string(R) + ")");
  }
  ClusterAssignment out;
  out.clusters = B;
  out.labels.assign(R, 0);
  if (B == R) {
    std::iota(out.labels.begin(), out.labels.end(), std::size_t{0});
    return out;
  }
  if (B == 1) {
    return out;
  }

  auto rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kCompression)});
  Matrix centers(points.rows(), static_cast<Eigen::Index>(B));
  Eigen::VectorXd sq_dist = Eigen::VectorXd::Constant(points.cols(), std::numeric_limits<double>::infinity());
  centers.col(0) = points.col(static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>{0, R - 1}(rng)));
  for (std::size_t m = 1; m < B; ++m) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      sq_dist[j] = std::min(sq_dist[j], (points.col(j) - centers.col(static_cast<Eigen::Index>(m - 1))).squaredNorm());
    }
    std::size_t pick = 0;
    if (sq_dist.sum() > 0.0) {
      std::discrete_distribution<std::size_t> draw(sq_dist.data(), sq_dist.data() + sq_dist.size());
      pick = draw(rng);
    } else {
      pick = std::uniform_int_distribution<std::size_t>{0, R - 1}(rng);
    }
    centers.col(static_cast<Eigen::Index>(m)) = points.col(static_cast<Eigen::Index>(pick));
  }

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= 100; ++it) {
    detail::assign_nearest(points, centers, out.labels, sq_dist);
    detail::repair_empty_clusters(points, centers, out.labels, sq_dist);
    out.iterations = it;
    const double inertia = sq_dist.sum();
    if (std::abs(previous - inertia) <= 1e-8 * std::abs(previous) || inertia == 0.0) {
      break;
    }
    previous = inertia;
    centers = detail::cluster_means(points, out.labels, B);
  }
  return out;
}

/// How a cluster's summary point is chosen.
enum class SummaryRule { kClusterMean, kRandomMember };

/// Summary points `s_m` (D x B) and weights `a_m = |J_m| / R`.
struct ClusterSummary {
  Matrix points;
  Vector weights;
  SummaryRule rule = SummaryRule::kClusterMean;
};

[[nodiscard]] inline ClusterSummary summarize(
    const Matrix& locations,
    const ClusterAssignment& assignment,
    SummaryRule rule = SummaryRule::kClusterMean,
    std::uint64_t seed = 0) {
  if (static_cast<std::size_t>(locations.cols()) != assignment.labels.size()) {
    throw ArgumentError("summarize: assignment does not match the locations");
  }
  const auto B = assignment.clusters;
  const auto R = static_cast<double>(locations.cols());
  ClusterSummary out;
  out.rule = rule;
  out.weights.resize(static_cast<Eigen::Index>(B));
  const auto sizes = assignment.sizes();
  for (std::size_t m = 0; m < B; ++m) {
    if (sizes[m] == 0) {
      throw ArgumentError("summarize: empty cluster");
    }
    out.weights[static_cast<Eigen::Index>(m)] = static_cast<double>(sizes[m]) / R;
  }
  if (rule == SummaryRule::kClusterMean) {
    out.points = detail::cluster_means(locations, assignment.labels, B);
    return out;
  }
  auto rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kCompression), 1});
  const auto members = assignment.members();
  out.points.resize(locations.rows(), static_cast<Eigen::Index>(B));
  for (std::size_t m = 0; m < B; ++m) {
    const auto pick = std::uniform_int_distribution<std::size_t>{0, members[m].size() - 1}(rng);
    out.points.col(static_cast<Eigen::Index>(m)) = locations.col(static_cast<Eigen::Index>(members[m][pick]));
  }
  return out;
}

/// `Q_mu`: covariance of the columns of `locations` about their mean (1/R normalization).
[[nodiscard]] inline Matrix location_covariance(const Matrix& locations) {
  const Vector mean = locations.rowwise().mean();
  const Matrix centered = locations.colwise() - mean;
  const Matrix q = centered * centered.transpose() / static_cast<double>(locations.cols());
  return 0.5 * (q + q.transpose());
}

/// `Q_C`: the `a`-weighted covariance of the summary points about `m_C = sum_m a_m s_m`.
[[nodiscard]] inline Matrix summary_covariance(const ClusterSummary& summary) {
  const Vector mean = summary.points * summary.weights;
  const Matrix centered = summary.points.colwise() - mean;
  const Matrix q = centered * summary.weights.asDiagonal() * centered.transpose();
  return 0.5 * (q + q.transpose());
}

/// Shared component covariance `Sigma = Q_mu - Q_C + sigma_p^2 I`.
/**
 * With cluster-mean summaries `Q_mu - Q_C` is the weighted average of within-cluster
 * covariances and is computed in that form: positive semi-definite by construction and
 * exactly zero for singleton clusters. Other summaries use the difference directly, with
 * negative eigenvalues clipped to zero and a 1e-12 diagonal jitter.
 */
[[nodiscard]] inline Matrix compressed_covariance(
    const Matrix& locations,
    const ClusterAssignment& assignment,
    const ClusterSummary& summary,
    double kernel_variance) {
  if (!(kernel_variance > 0.0)) {
    throw ArgumentError("compressed_covariance: sigma_p^2 must be positive");
  }
  Matrix sigma;
  if (summary.rule == SummaryRule::kClusterMean) {
    Matrix residual = locations;
    for (Eigen::Index j = 0; j < locations.cols(); ++j) {
      residual.col(j) -= summary.points.col(static_cast<Eigen::Index>(assignment.labels[static_cast<std::size_t>(j)]));
    }
    const Matrix within = residual * residual.transpose() / static_cast<double>(locations.cols());
    sigma = 0.5 * (within + within.transpose());
  } else {
    const Matrix diff = location_covariance(locations) - summary_covariance(summary);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(diff);
    sigma = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
    sigma = 0.5 * (sigma + sigma.transpose());
    sigma.diagonal().array() += 1e-12;
  }
  sigma.diagonal().array() += kernel_variance;
  if (!sigma.allFinite()) {
    throw NumericalError("compressed_covariance: non-finite entries");
  }
  return sigma;
}

/// `q_B(x) = sum_m a_m N(x | s_m, Sigma)`.
class CompressedMixture {
 public:
  CompressedMixture() = default;

  CompressedMixture(Matrix points, Vector weights, Matrix sigma)
      : points_{std::move(points)}, weights_{std::move(weights)}, kernel_{std::move(sigma)} {
    if (points_.cols() != weights_.size() || points_.cols() == 0 || points_.rows() != kernel_.dimension()) {
      throw ArgumentError("CompressedMixture: inconsistent shapes");
    }
    if (!(weights_.array() >= 0.0).all() || std::abs(weights_.sum() - 1.0) > 1e-12) {
      throw ArgumentError("CompressedMixture: weights must form a probability vector");
    }
    log_weights_ = weights_.array().log();
    whitened_ = kernel_.whiten_columns(points_);
  }

  [[nodiscard]] std::size_t components() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  [[nodiscard]] Eigen::Index dimension() const noexcept { return points_.rows(); }
  [[nodiscard]] const Matrix& points() const noexcept { return points_; }
  [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
  [[nodiscard]] const Matrix& sigma() const noexcept { return kernel_.covariance(); }
  [[nodiscard]] const GaussianKernel& kernel() const noexcept { return kernel_; }

  /// Row-major whitened summary points, one contiguous row per coordinate.
  [[nodiscard]] const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& whitened() const noexcept {
    return whitened_;
  }
  [[nodiscard]] const Eigen::ArrayXd& log_weights() const noexcept { return log_weights_; }

  /// Mean `m_C` and covariance `Sigma + Q_C` of the whole mixture.
  [[nodiscard]] Vector mean() const { return points_ * weights_; }
  [[nodiscard]] Matrix covariance() const {
    const Vector m = mean();
    const Matrix centered = points_.colwise() - m;
    return sigma() + centered * weights_.asDiagonal() * centered.transpose();
  }

 private:
  Matrix points_;
  Vector weights_;
  GaussianKernel kernel_;
  Eigen::ArrayXd log_weights_;
  Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> whitened_;
};

/// Clusters `locations` (D x R) into `B` components with shared covariance.
[[nodiscard]] inline CompressedMixture compress_locations(
    const Matrix& locations,
    std::size_t B,
    double kernel_variance,
    std::uint64_t seed,
    SummaryRule rule = SummaryRule::kClusterMean) {
  const auto assignment = cluster_locations(locations, B, seed);
  auto summary = summarize(locations, assignment, rule, seed);
  Matrix sigma = compressed_covariance(locations, assignment, summary, kernel_variance);
  return CompressedMixture{std::move(summary.points), std::move(summary.weights), std::move(sigma)};
}

/// `log q_B(x)`; charges `B` proposal evaluations.
[[nodiscard]] inline double compressed_log_mixture(const CompressedMixture& mix, const Vector& x, EvalLedger& ledger) {
  const Vector y = mix.kernel().whiten(x);
  Eigen::ArrayXd terms = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(mix.components()));
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    terms += (mix.whitened().row(j).transpose() - y[j]).square();
  }
  terms = mix.log_weights() + (mix.kernel().log_normalizer() - 0.5 * terms);
  ledger.proposal_evals += mix.components();
  return log_sum_exp(terms);
}

/// Ancestral sampling: component `m ~ Categorical(a)`, then `x ~ N(s_m, Sigma)`. Returns D x count.
[[nodiscard]] inline Matrix draw_from_compressed(
    const CompressedMixture& mix,
    std::size_t count,
    Rng& rng,
    std::vector<std::size_t>* components = nullptr) {
  if (count < 1) {
    throw ArgumentError("draw_from_compressed: count must be positive");
  }
  std::discrete_distribution<std::size_t> pick(mix.weights().data(), mix.weights().data() + mix.weights().size());
  Matrix out(mix.dimension(), static_cast<Eigen::Index>(count));
  if (components != nullptr) {
    components->resize(count);
  }
  for (std::size_t s = 0; s < count; ++s) {
    const auto m = pick(rng);
    out.col(static_cast<Eigen::Index>(s)) = mix.kernel().sample(mix.points().col(static_cast<Eigen::Index>(m)), rng);
    if (components != nullptr) {
      (*components)[s] = m;
    }
  }
  return out;
}

}  // namespace lais

#endif
