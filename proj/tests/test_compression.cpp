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

#include <gtest/gtest.h>

#include <lais/compression.hpp>
#include <lais/lower_layer.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>

namespace {

using lais::Matrix;
using lais::Vector;

Matrix random_points(Eigen::Index dim, Eigen::Index count, std::uint64_t seed, double scale = 3.0) {
  auto rng = lais::make_rng(seed, {});
  Matrix out(dim, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    out.col(j) = scale * lais::standard_normal(rng, dim);
  }
  return out;
}

// Q_mu - Q_C by explicit double loops over points and summaries.
Matrix direct_difference(const Matrix& locations, const Matrix& summaries, const Vector& weights) {
  const auto dim = locations.rows();
  const auto R = static_cast<double>(locations.cols());
  Vector m = Vector::Zero(dim);
  for (Eigen::Index j = 0; j < locations.cols(); ++j) {
    m += locations.col(j) / R;
  }
  Matrix q_mu = Matrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < locations.cols(); ++j) {
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) {
        q_mu(a, b) += (locations(a, j) - m[a]) * (locations(b, j) - m[b]) / R;
      }
    }
  }
  Vector mc = Vector::Zero(dim);
  for (Eigen::Index k = 0; k < summaries.cols(); ++k) {
    mc += weights[k] * summaries.col(k);
  }
  Matrix q_c = Matrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < summaries.cols(); ++k) {
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) {
        q_c(a, b) += weights[k] * (summaries(a, k) - mc[a]) * (summaries(b, k) - mc[b]);
      }
    }
  }
  return q_mu - q_c;
}

TEST(Clustering, SingletonsWhenBEqualsR) {
  const Matrix points = random_points(2, 12, 1);
  const auto a = lais::cluster_locations(points, 12, 3);
  std::set<std::size_t> labels(a.labels.begin(), a.labels.end());
  EXPECT_EQ(labels.size(), 12U);
}

TEST(Clustering, OneClusterWhenBIsOne) {
  const auto a = lais::cluster_locations(random_points(2, 12, 2), 1, 3);
  for (const auto label : a.labels) {
    EXPECT_EQ(label, 0U);
  }
}

TEST(Clustering, SeparatesTwoBlobs) {
  auto rng = lais::make_rng(4, {});
  Matrix points(2, 60);
  for (Eigen::Index j = 0; j < 60; ++j) {
    const double sign = j % 2 == 0 ? 1.0 : -1.0;
    points.col(j) = Vector::Constant(2, 10.0 * sign) + lais::standard_normal(rng, 2);
  }
  const auto a = lais::cluster_locations(points, 2, 5);
  // Nearest-centroid oracle: with blobs this far apart, the blob is the sign of x_1.
  for (Eigen::Index j = 2; j < 60; ++j) {
    const bool same_blob = (points(0, j) > 0) == (points(0, 0) > 0);
    EXPECT_EQ(a.labels[static_cast<std::size_t>(j)] == a.labels[0], same_blob);
  }
}

TEST(Clustering, NoEmptyClustersWithDuplicates) {
  Matrix points(1, 10);
  points << 0, 0, 0, 0, 0, 0, 1, 1, 1, 5;
  const auto a = lais::cluster_locations(points, 4, 6);
  for (const auto size : a.sizes()) {
    EXPECT_GT(size, 0U);
  }
}

TEST(Clustering, SeededDeterminism) {
  const Matrix points = random_points(3, 200, 7);
  EXPECT_EQ(lais::cluster_locations(points, 9, 11).labels, lais::cluster_locations(points, 9, 11).labels);
}

TEST(Clustering, TooManyClustersThrows) {
  EXPECT_THROW((void)lais::cluster_locations(random_points(2, 5, 8), 6, 1), lais::ArgumentError);
}

TEST(Summary, Endpoints) {
  const Matrix points = random_points(2, 10, 9);
  const auto singletons = lais::summarize(points, lais::cluster_locations(points, 10, 1));
  EXPECT_EQ(singletons.points, points);
  EXPECT_LT((singletons.weights.array() - 0.1).abs().maxCoeff(), 1e-15);
  const auto one = lais::summarize(points, lais::cluster_locations(points, 1, 1));
  EXPECT_LT((one.points.col(0) - points.rowwise().mean()).norm(), 1e-14);
  EXPECT_EQ(one.weights[0], 1.0);
}

TEST(Summary, TwoPointMean) {
  Matrix points(2, 3);
  points << 0, 2, 9, 0, 2, 9;
  lais::ClusterAssignment a;
  a.clusters = 2;
  a.labels = {0, 0, 1};
  const auto s = lais::summarize(points, a);
  EXPECT_EQ(s.points(0, 0), 1.0);
  EXPECT_EQ(s.points(1, 0), 1.0);
  EXPECT_NEAR(s.weights[0], 2.0 / 3.0, 1e-15);
}

TEST(Covariance, NoCompressionIsKernelOnly) {
  const Matrix points = random_points(2, 30, 10);
  const auto a = lais::cluster_locations(points, 30, 1);
  const auto s = lais::summarize(points, a);
  const Matrix sigma = lais::compressed_covariance(points, a, s, 0.7);
  EXPECT_LT((sigma - 0.7 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, MaximumCompressionAddsLocationSpread) {
  const Matrix points = random_points(3, 40, 11);
  const auto a = lais::cluster_locations(points, 1, 1);
  const auto s = lais::summarize(points, a);
  const Matrix sigma = lais::compressed_covariance(points, a, s, 0.5);
  const Matrix expected = direct_difference(points, s.points, s.weights) + 0.5 * Matrix::Identity(3, 3);
  EXPECT_LT((sigma - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, WithinClusterIdentity) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix points = random_points(2, 50, 100 + seed);
    const auto a = lais::cluster_locations(points, 7, seed);
    const auto s = lais::summarize(points, a);
    const Matrix sigma = lais::compressed_covariance(points, a, s, 1.0);
    const Matrix expected = direct_difference(points, s.points, s.weights) + Matrix::Identity(2, 2);
    EXPECT_LT((sigma - expected).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    EXPECT_GE(eig.eigenvalues().minCoeff(), 0.5);
  }
}

TEST(Covariance, RandomMemberSummaryIsPositiveDefinite) {
  const Matrix points = random_points(2, 80, 12);
  const auto a = lais::cluster_locations(points, 5, 2);
  const auto s = lais::summarize(points, a, lais::SummaryRule::kRandomMember, 3);
  const Matrix sigma = lais::compressed_covariance(points, a, s, 0.2);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  EXPECT_GE(eig.eigenvalues().minCoeff(), 0.1);
  EXPECT_LT((sigma - sigma.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Covariance, NonPositiveKernelVarianceThrows) {
  const Matrix points = random_points(2, 5, 13);
  const auto a = lais::cluster_locations(points, 2, 1);
  EXPECT_THROW((void)lais::compressed_covariance(points, a, lais::summarize(points, a), 0.0), lais::ArgumentError);
}

TEST(Mixture, SingleComponentIsGaussian) {
  Matrix cov(2, 2);
  cov << 2.0, 0.3, 0.3, 1.0;
  const lais::CompressedMixture mix{Matrix::Constant(2, 1, 0.5), Vector::Ones(1), cov};
  lais::EvalLedger ledger;
  const Vector x = Vector::Constant(2, -1.0);
  EXPECT_NEAR(lais::compressed_log_mixture(mix, x, ledger), lais::gaussian_log_pdf(x, Vector::Constant(2, 0.5), cov), 1e-13);
  EXPECT_EQ(ledger.proposal_evals, 1U);
}

TEST(Mixture, UncompressedEqualsCompleteDenominator) {
  const Matrix locations = random_points(2, 24, 14);
  const lais::ProposalBank bank{locations, 4, {lais::GaussianKernel::isotropic(2, 2.0)}};
  const lais::CompressedMixture mix{locations, Vector::Constant(24, 1.0 / 24.0), 2.0 * Matrix::Identity(2, 2)};
  auto rng = lais::make_rng(15, {});
  for (int i = 0; i < 20; ++i) {
    const Vector x = 3.0 * lais::standard_normal(rng, 2);
    lais::EvalLedger ledger;
    const double complete = lais::eval_denominator(lais::DenominatorScheme::complete(), bank, x, 0, 0, ledger);
    const double compressed = lais::compressed_log_mixture(mix, x, ledger);
    EXPECT_NEAR(std::exp(compressed), std::exp(complete), 1e-12 * std::exp(complete));
  }
}

TEST(Mixture, SamplingFrequenciesAndCovariance) {
  Matrix points(2, 3);
  points << -4, 0, 5, 1, -2, 3;
  Vector weights(3);
  weights << 0.2, 0.5, 0.3;
  Matrix sigma(2, 2);
  sigma << 1.0, 0.2, 0.2, 0.6;
  const lais::CompressedMixture mix{points, weights, sigma};
  auto rng = lais::make_rng(16, {});
  const std::size_t n = 100000;
  std::vector<std::size_t> components;
  const Matrix draws = lais::draw_from_compressed(mix, n, rng, &components);
  std::vector<double> freq(3, 0.0);
  for (const auto c : components) {
    freq[c] += 1.0 / n;
  }
  for (int m = 0; m < 3; ++m) {
    EXPECT_LT(std::abs(freq[static_cast<std::size_t>(m)] - weights[m]), 3.0 * std::sqrt(weights[m] * (1 - weights[m]) / n));
  }
  const Vector mean = draws.rowwise().mean();
  const Matrix centered = draws.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(n - 1);
  const Vector mc = points * weights;
  Matrix expected = sigma;
  for (int m = 0; m < 3; ++m) {
    expected += weights[m] * (points.col(m) - mc) * (points.col(m) - mc).transpose();
  }
  EXPECT_LT(((cov - expected).array().abs() / expected.array().abs()).maxCoeff(), 0.05);
  EXPECT_LT((mix.covariance() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mixture, CompressedSchemeCostsB) {
  const Matrix locations = random_points(2, 40, 17);
  auto mix = std::make_shared<lais::CompressedMixture>(lais::compress_locations(locations, 5, 1.0, 3));
  const lais::LowerSamples samples{random_points(2, 10, 18), std::vector<lais::SampleOrigin>(10)};
  lais::EvalLedger ledger;
  (void)lais::eval_denominators(lais::DenominatorScheme::compressed(mix), nullptr, samples.points, samples.origins, ledger);
  EXPECT_EQ(ledger.proposal_evals, 50U);
  EXPECT_EQ(ledger.full_posterior_evals, 0U);
}

}  // namespace
