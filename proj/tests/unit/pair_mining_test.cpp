#include <gtest/gtest.h>

#include <set>

#include "ccl/finch.hpp"
#include "ccl/pair_mining.hpp"
#include "oracles.hpp"

namespace ccl {
namespace {

// 40 clusters of 12 points around random unit centers, plus a handful of
// same-frame pairs across clusters.
struct World {
  MatrixD x;
  Labels labels;
  CooccurrenceSet cooc;
};

World make_world(int clusters = 40, int per = 12, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  World w;
  const int d = 10;
  const MatrixD centers = oracle::gaussian(clusters, d, rng);
  w.x.resize(clusters * per, d);
  for (int c = 0; c < clusters; ++c)
    for (int i = 0; i < per; ++i) {
      for (int j = 0; j < d; ++j) w.x(c * per + i, j) = centers(c, j) + 0.05 * g(rng);
      w.labels.push_back(c);
    }
  for (int c = 0; c + 1 < clusters; c += 2) w.cooc.pairs.emplace_back(c * per, (c + 1) * per + 1);
  std::sort(w.cooc.pairs.begin(), w.cooc.pairs.end());
  return w;
}

TEST(RankClusters, MatchesSortOracle) {
  std::mt19937_64 rng(2);
  const MatrixD means = oracle::gaussian(30, 5, rng);
  const ClusterRanking r = rank_clusters(means, 4, 6);
  for (int c = 0; c < 30; ++c) {
    std::vector<std::pair<double, int>> d;
    for (int o = 0; o < 30; ++o)
      if (o != c) d.emplace_back((means.row(c).normalized() - means.row(o).normalized()).norm(), o);
    std::sort(d.begin(), d.end());
    for (int k = 0; k < 4; ++k) EXPECT_EQ(r.nearest[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)], d[static_cast<std::size_t>(k)].second);
    for (int k = 0; k < 6; ++k)
      EXPECT_EQ(r.farthest[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)], d[d.size() - 1 - static_cast<std::size_t>(k)].second);
  }
}

TEST(RankClusters, ListsCapAtAvailableClusters) {
  const ClusterRanking r = rank_clusters(MatrixD::Identity(3, 3), 25, 25);
  EXPECT_EQ(r.nearest[0].size(), 2u);
  EXPECT_EQ(r.farthest[2].size(), 2u);
}

TEST(VideoCorrection, HandCase) {
  // one cluster {0,1,2,3}; frame pairs (0,3) and (1,3); 3 is the outlier
  MatrixD x(5, 2);
  x << 1, 0, 0.9, 0.1, 1, 0.05, 0, 1, -1, 0;
  CooccurrenceSet cooc;
  cooc.pairs = {{0, 3}, {1, 3}};
  const Labels out = apply_video_correction({0, 0, 0, 0, 1}, cooc, x);
  EXPECT_EQ(out, (Labels{0, 0, 0, 2, 1}));
}

TEST(VideoCorrection, RejectedFacesAreCheckedAgain) {
  // Everyone co-occurs with everyone. The first pass keeps 1 (nearest the
  // mean) and rejects 0 and 2, which then share a frame inside the new
  // cluster and must be split again.
  MatrixD x(3, 2);
  x << 1, 0, 0.5, 0.5, 0.4, 0.6;
  CooccurrenceSet cooc;
  cooc.pairs = {{0, 1}, {0, 2}, {1, 2}};
  const Labels out = apply_video_correction({0, 0, 0}, cooc, x);
  EXPECT_EQ(count_clusters(out), 3);
}

TEST(VideoCorrection, NoClusterKeepsACooccurringPair) {
  const World w = make_world();
  Labels merged = w.labels;
  for (auto& l : merged) l /= 2;  // pairs of clusters, so every frame pair violates
  const Labels out = apply_video_correction(merged, w.cooc, w.x);
  for (const auto& [a, b] : w.cooc.pairs) EXPECT_NE(out[static_cast<std::size_t>(a)], out[static_cast<std::size_t>(b)]);
  for (std::size_t i = 0; i < merged.size(); ++i)  // existing ids are preserved
    if (out[i] < 20) EXPECT_EQ(out[i], merged[i]);
}

TEST(TriangularPair, EnumeratesAllPairsInOrder) {
  for (std::uint64_t n : {2u, 3u, 7u, 50u}) {
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j, ++u) EXPECT_EQ(detail::triangular_pair(u, n), std::make_pair(i, j));
  }
}

TEST(Subsample, WithoutReplacementWhenEnough) {
  Rng rng(3);
  for (std::uint64_t total : {25u, 60u, 1000u, 100000u}) {
    const auto s = detail::subsample_indices(total, 25, rng);
    EXPECT_EQ(s.size(), 25u);
    EXPECT_EQ(std::set<std::uint64_t>(s.begin(), s.end()).size(), 25u);
    for (auto u : s) EXPECT_LT(u, total);
  }
  const auto short_pool = detail::subsample_indices(3, 25, rng);
  EXPECT_EQ(short_pool.size(), 25u);
  EXPECT_EQ(std::set<std::uint64_t>(short_pool.begin(), short_pool.end()).size(), 3u);
}

class MinerTest : public ::testing::Test {
 protected:
  World w = make_world();
  MiningConfig cfg;
  PairMiner miner() const {
    return mine_batches(w.labels, rank_clusters(cluster_means(w.x, w.labels), cfg.z_near, cfg.z_far), w.cooc, cfg);
  }
};

TEST_F(MinerTest, BatchShapeAtDefaults) {
  PairMiner m = miner();
  EXPECT_EQ(m.batches_per_epoch(), 8u);
  for (int epoch = 0; epoch < 3; ++epoch)
    for (const auto& b : m.next_epoch()) {
      EXPECT_EQ(b.pairs.size(), 250u);
      EXPECT_EQ(b.positives(), 125u);
      EXPECT_EQ(b.clusters.size(), 5u);
    }
}

TEST_F(MinerTest, LastBatchIsToppedUp) {
  w = make_world(13);
  PairMiner m = miner();
  const auto epoch = m.next_epoch();
  ASSERT_EQ(epoch.size(), 3u);
  EXPECT_EQ(epoch.back().pairs.size(), 250u);
  std::set<int> seen;
  for (const auto& b : epoch) seen.insert(b.clusters.begin(), b.clusters.end());
  EXPECT_EQ(seen.size(), 13u);
}

TEST_F(MinerTest, PairAudit) {
  PairMiner m = miner();
  const ClusterRanking ranks = rank_clusters(cluster_means(w.x, w.labels), cfg.z_near, cfg.z_far);
  for (const auto& b : m.next_epoch())
    for (const auto& p : b.pairs) {
      const int ca = w.labels[static_cast<std::size_t>(p.a)], cb = w.labels[static_cast<std::size_t>(p.b)];
      EXPECT_NE(p.a, p.b);
      switch (p.source) {
        case PairSource::PosC:
          EXPECT_EQ(p.y, 0);
          EXPECT_EQ(ca, cb);
          break;
        case PairSource::PosCNear:
          ADD_FAILURE() << "no small clusters here";
          break;
        case PairSource::NegC: {
          EXPECT_EQ(p.y, 1);
          const auto& far = ranks.farthest[static_cast<std::size_t>(ca)];
          EXPECT_NE(std::find(far.begin(), far.end(), cb), far.end());
          break;
        }
        case PairSource::NVid:
          EXPECT_EQ(p.y, 1);
          EXPECT_TRUE(w.cooc.contains(p.a, p.b));
          break;
      }
    }
}

TEST_F(MinerTest, SmallClustersGetNearPositives) {
  w = make_world(20, 4);
  PairMiner m = miner();
  const ClusterRanking ranks = rank_clusters(cluster_means(w.x, w.labels), cfg.z_near, cfg.z_far);
  int near = 0;
  for (const auto& b : m.next_epoch())
    for (const auto& p : b.pairs)
      if (p.source == PairSource::PosCNear) {
        ++near;
        const auto& nn = ranks.nearest[static_cast<std::size_t>(w.labels[static_cast<std::size_t>(p.a)])];
        EXPECT_NE(std::find(nn.begin(), nn.end(), w.labels[static_cast<std::size_t>(p.b)]), nn.end());
        EXPECT_FALSE(w.cooc.contains(p.a, p.b));
      }
  EXPECT_GT(near, 0);
}

TEST_F(MinerTest, SingletonClustersStillFillTheirShare) {
  w.labels.push_back(40);
  w.x.conservativeResize(w.x.rows() + 1, Eigen::NoChange);
  w.x.row(w.x.rows() - 1) = w.x.row(0) * -1.0;
  PairMiner m = miner();
  for (const auto& b : m.next_epoch()) {
    EXPECT_EQ(b.pairs.size(), 250u);
    EXPECT_EQ(b.positives(), 125u);
  }
}

TEST_F(MinerTest, SeededDeterminism) {
  PairMiner a = miner(), b = miner();
  for (int e = 0; e < 2; ++e) {
    const auto ea = a.next_epoch(), eb = b.next_epoch();
    ASSERT_EQ(ea.size(), eb.size());
    for (std::size_t i = 0; i < ea.size(); ++i) EXPECT_EQ(ea[i].pairs, eb[i].pairs);
  }
  cfg.seed = 1;
  EXPECT_NE(miner().next_epoch()[0].pairs, a.next_epoch()[0].pairs);
}

TEST_F(MinerTest, DisabledSourcesAreAbsent) {
  cfg.use_negc = false;
  PairMiner m = miner();
  for (const auto& b : m.next_epoch())
    for (const auto& p : b.pairs) EXPECT_NE(p.source, PairSource::NegC);
}

TEST_F(MinerTest, SingleClusterIsAnError) {
  w.labels.assign(w.labels.size(), 0);
  EXPECT_THROW(mine_batches(w.labels, rank_clusters(MatrixD::Identity(2, 2), 1, 1), w.cooc, cfg), Error);
}

TEST(PairSourceNames, RoundTrip) {
  for (auto s : {PairSource::PosC, PairSource::PosCNear, PairSource::NegC, PairSource::NVid})
    EXPECT_EQ(parse_pair_source(to_string(s)), s);
  EXPECT_EQ(to_string(PairSource::PosCNear), "PosC-near");
}

}  // namespace
}  // namespace ccl
