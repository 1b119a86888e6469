#include <gtest/gtest.h>

#include "ccl/kmeans.hpp"
#include "ccl/metrics.hpp"
#include "oracles.hpp"

namespace ccl {
namespace {

MatrixD blobs(int per, int k, int d, double sigma, Labels* gt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  MatrixD x(per * k, d);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < per; ++i) {
      for (int j = 0; j < d; ++j) x(c * per + i, j) = (j == c ? 1.0 : 0.0) + sigma * g(rng);
      if (gt) gt->push_back(c);
    }
  return x;
}

TEST(MiniBatchKMeans, SeparatedGaussians) {
  Labels gt;
  const MatrixD x = blobs(200, 3, 16, 0.05, &gt, 1);
  KMeansConfig cfg;
  cfg.k = 3;
  cfg.batch_size = 64;
  cfg.seed = 2;
  const KMeansResult r = minibatch_kmeans(x, cfg);
  EXPECT_GE(wcp(r.labels, gt).acc, 0.95);
  EXPECT_EQ(r.effective_k, 3);
  EXPECT_EQ(r.centers.rows(), 3);
}

TEST(MiniBatchKMeans, KEqualsOneAndKEqualsN) {
  const MatrixD x = blobs(5, 2, 4, 0.3, nullptr, 3);
  KMeansConfig cfg;
  cfg.k = 1;
  const KMeansResult one = minibatch_kmeans(x, cfg);
  EXPECT_EQ(count_clusters(one.labels), 1);
  cfg.k = 10;
  const KMeansResult all = minibatch_kmeans(x, cfg);
  EXPECT_EQ(count_clusters(all.labels), 10);
  EXPECT_NEAR(all.cost, 0.0, 1e-9);
  cfg.k = 11;
  EXPECT_THROW(minibatch_kmeans(x, cfg), ConfigError);
}

TEST(MiniBatchKMeans, SeededDeterminism) {
  const MatrixD x = blobs(100, 4, 8, 0.2, nullptr, 4);
  KMeansConfig cfg;
  cfg.k = 6;
  cfg.batch_size = 32;
  cfg.seed = 9;
  const KMeansResult a = minibatch_kmeans(x, cfg), b = minibatch_kmeans(x, cfg);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.centers, b.centers);
  cfg.seed = 10;
  EXPECT_NE(minibatch_kmeans(x, cfg).centers, a.centers);
}

TEST(MiniBatchKMeans, CostTraceFallsOverall) {
  const MatrixD x = blobs(150, 4, 8, 0.3, nullptr, 5);
  KMeansConfig cfg;
  cfg.k = 4;
  cfg.batch_size = 50;
  cfg.max_iters = 60;
  const KMeansResult r = minibatch_kmeans(x, cfg, true);
  ASSERT_EQ(r.cost_trace.size(), 60u);
  EXPECT_LE(r.cost_trace.back(), r.cost_trace.front());
  for (double c : r.cost_trace) EXPECT_TRUE(std::isfinite(c));
}

TEST(MiniBatchKMeans, LabelsAreContiguous) {
  const MatrixD x = blobs(30, 2, 4, 0.01, nullptr, 6);
  KMeansConfig cfg;
  cfg.k = 7;
  const KMeansResult r = minibatch_kmeans(x, cfg);
  const int m = *std::max_element(r.labels.begin(), r.labels.end()) + 1;
  EXPECT_EQ(m, count_clusters(r.labels));
  EXPECT_EQ(m, r.effective_k);
  EXPECT_EQ(r.requested_k, 7);
}

TEST(MiniBatchKMeans, RejectsNonFinite) {
  MatrixD x = MatrixD::Ones(4, 2);
  x(1, 1) = std::numeric_limits<double>::infinity();
  KMeansConfig cfg;
  cfg.k = 2;
  EXPECT_THROW(minibatch_kmeans(x, cfg), Error);
}

}  // namespace
}  // namespace ccl
