#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "ccl/data_model.hpp"

namespace ccl {
namespace {

FeatureSet small_set() {
  FeatureSet fs;
  fs.features.resize(4, 3);
  fs.features << 1.5f, -2.0f, 0.25f,  //
      3.0f, 4.0f, 0.0f,                //
      -1e-3f, 7.0f, 2.0f,              //
      0.1f, 0.2f, 0.3f;
  fs.frame_id = {0, 0, 1, -1};
  fs.track_id = {10, 10, 11, 12};
  fs.label = {0, 0, 1, -1};
  return fs;
}

std::string serialize(const FeatureSet& fs) {
  std::ostringstream out(std::ios::binary);
  write_features(out, fs);
  return out.str();
}

FeatureSet deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return load_features(in);
}

TEST(FeatureFile, RoundTripIsBitExact) {
  const FeatureSet fs = small_set();
  const FeatureSet back = deserialize(serialize(fs));
  ASSERT_EQ(back.features.rows(), 4);
  ASSERT_EQ(back.features.cols(), 3);
  EXPECT_EQ(std::memcmp(back.features.data(), fs.features.data(), sizeof(float) * 12), 0);
  EXPECT_EQ(back.frame_id, fs.frame_id);
  EXPECT_EQ(back.track_id, fs.track_id);
  EXPECT_EQ(back.label, fs.label);
  EXPECT_EQ(serialize(back), serialize(fs));
}

TEST(FeatureFile, AbsentArraysStayAbsent) {
  FeatureSet fs = small_set();
  fs.frame_id.clear();
  fs.label.clear();
  const FeatureSet back = deserialize(serialize(fs));
  EXPECT_FALSE(back.has_frames());
  EXPECT_TRUE(back.has_tracks());
  EXPECT_FALSE(back.has_labels());
}

TEST(FeatureFile, TruncationIsRejectedAtEveryLength) {
  const std::string bytes = serialize(small_set());
  for (std::size_t len = 0; len < bytes.size(); ++len)
    EXPECT_THROW(deserialize(bytes.substr(0, len)), FormatError) << "length " << len;
}

TEST(FeatureFile, RejectsBadMagicAndTrailingBytes) {
  std::string bytes = serialize(small_set());
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize(bad), FormatError);
  EXPECT_THROW(deserialize(bytes + "z"), FormatError);
}

TEST(FeatureFile, RejectsZeroRowAndNonFinite) {
  FeatureSet fs = small_set();
  fs.features.row(2).setZero();
  EXPECT_THROW(deserialize(serialize(fs)), FormatError);
  fs = small_set();
  fs.features(1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(deserialize(serialize(fs)), FormatError);
}

TEST(FeatureFile, HeaderIsLittleEndian) {
  const std::string bytes = serialize(small_set());
  ASSERT_GE(bytes.size(), 24u);
  EXPECT_EQ(bytes.substr(0, 4), "CCLF");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);   // version
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 4);   // N
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 3);  // D
}

TEST(CsvImport, ReadsHeaderAndColumns) {
  std::istringstream in(
      "frame_id,track_id,label,f0,f1\n"
      "0,5,1,0.5,1.5\n"
      "-1,6,-1,2,3\n");
  const FeatureSet fs = import_csv(in);
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_EQ(fs.dim(), 2u);
  EXPECT_FLOAT_EQ(fs.features(1, 1), 3.0f);
  EXPECT_EQ(fs.track_id[1], 6);
  EXPECT_EQ(fs.label[1], -1);
}

TEST(Normalize, ThreeFourFive) {
  FeatureSet fs;
  fs.features.resize(1, 2);
  fs.features << 3.0f, 4.0f;
  const FeatureSet u = l2_normalize(fs);
  EXPECT_NEAR(u.features(0, 0), 0.6f, 1e-7);
  EXPECT_NEAR(u.features(0, 1), 0.8f, 1e-7);
}

TEST(Normalize, UnitNormsAndZeroRowError) {
  const FeatureSet u = l2_normalize(small_set());
  for (Eigen::Index r = 0; r < u.features.rows(); ++r) EXPECT_NEAR(u.features.row(r).cast<double>().norm(), 1.0, 1e-6);
  FeatureSet z = small_set();
  z.features.row(0).setZero();
  EXPECT_THROW(l2_normalize(z), Error);
}

TEST(Tracks, MeanPoolMatchesGroupByOracle) {
  Rng rng(3);
  FeatureSet fs;
  const int n = 60;
  fs.features.resize(n, 5);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 5; ++d) fs.features(i, d) = static_cast<float>(standard_normal(rng));
    fs.track_id.push_back(static_cast<std::int64_t>(uniform_index(rng, 7)) * 3);  // sparse ids
  }
  const TrackFeatureSet t = aggregate_tracks(fs);
  ASSERT_TRUE(std::is_sorted(t.track_id.begin(), t.track_id.end()));
  for (std::size_t k = 0; k < t.track_id.size(); ++k) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(5);
    for (int i = 0; i < n; ++i)
      if (fs.track_id[static_cast<std::size_t>(i)] == t.track_id[k]) sum += fs.features.row(i).cast<double>();
    sum.normalize();
    for (int d = 0; d < 5; ++d) EXPECT_NEAR(t.features(static_cast<Eigen::Index>(k), d), sum(d), 1e-6);
  }
}

TEST(Tracks, MixedLabelsAndMissingIdsAreErrors) {
  FeatureSet fs = small_set();
  fs.label = {0, 1, 1, 1};
  EXPECT_THROW(aggregate_tracks(fs), Error);
  fs = small_set();
  fs.track_id[3] = -1;
  EXPECT_THROW(aggregate_tracks(fs), Error);
}

TEST(Cooccurrence, FrameOfKFacesGivesKChoose2Pairs) {
  FeatureSet fs;
  fs.features = MatrixF::Ones(9, 2);
  fs.frame_id = {4, 4, 4, 4, 7, 7, -1, -1, 9};
  const CooccurrenceSet c = build_cooccurrence(fs);
  EXPECT_EQ(c.size(), 6u + 1u);
  EXPECT_TRUE(c.contains(3, 0));
  EXPECT_TRUE(c.contains(4, 5));
  EXPECT_FALSE(c.contains(6, 7));  // unknown frames never pair up
  for (const auto& [a, b] : c.pairs) EXPECT_LT(a, b);
}

TEST(Cooccurrence, NoFramesMeansEmpty) {
  FeatureSet fs = small_set();
  fs.frame_id.clear();
  EXPECT_TRUE(build_cooccurrence(fs).empty());
}

}  // namespace
}  // namespace ccl
