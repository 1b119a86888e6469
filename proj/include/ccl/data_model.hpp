// Copyright 2026 The CCL Authors. All Rights Reserved.
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

#pragma once

// Face-embedding datasets: the binary feature file, CSV import, row
// normalization, track pooling and same-frame co-occurrence.

#include "ccl/common.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <utility>

namespace ccl {

/// N x D embeddings plus optional per-row index arrays. An index array is
/// either empty (absent) or has exactly N entries; -1 marks an unknown
/// value within a present array.
struct FeatureSet {
  MatrixF features;
  std::vector<std::int64_t> frame_id;
  std::vector<std::int64_t> track_id;
  std::vector<std::int64_t> label;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  bool has_frames() const { return !frame_id.empty(); }
  bool has_tracks() const { return !track_id.empty(); }
  bool has_labels() const { return !label.empty(); }

  /// max(label) + 1, or 0 without labels.
  int num_classes() const {
    std::int64_t c = 0;
    for (auto l : label) c = std::max(c, l + 1);
    return static_cast<int>(c);
  }

  /// Ground-truth labels as a Labels vector (-1 kept for unknown).
  Labels gt_labels() const {
    if (!has_labels()) throw Error("feature set carries no ground-truth labels");
    return Labels(label.begin(), label.end());
  }

  void validate() const {
    const auto n = size();
    if (n == 0 || dim() == 0) throw FormatError("feature set must have N >= 1 and D >= 1");
    auto check = [n](const std::vector<std::int64_t>& v, const char* name) {
      if (!v.empty() && v.size() != n)
        throw FormatError(std::string(name) + " array has " + std::to_string(v.size()) + " entries, expected " +
                          std::to_string(n));
    };
    check(frame_id, "frame_id");
    check(track_id, "track_id");
    check(label, "label");
    for (std::size_t i = 0; i < label.size(); ++i)
      if (label[i] < -1) throw FormatError("row " + std::to_string(i) + ": label " + std::to_string(label[i]) + " < -1");
  }
};

/// One row per track, ascending track id.
struct TrackFeatureSet {
  MatrixF features;
  std::vector<std::int64_t> track_id;
  std::vector<std::int64_t> label;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  Labels gt_labels() const { return Labels(label.begin(), label.end()); }
};

/// Unordered row pairs (i < j) whose frame ids are equal, sorted.
struct CooccurrenceSet {
  std::vector<std::pair<int, int>> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }

  bool contains(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(a, b));
  }
};

// ---------------------------------------------------------------------------
// Binary feature file
//
//   "CCLF" | u32 version=1 | u64 N | u64 D | u8 has_frame | u8 has_track |
//   u8 has_label | N*D f32 row-major | [N i64 frame] [N i64 track] [N i64 label]
//
// All little-endian.

inline constexpr char kFeatureMagic[4] = {'C', 'C', 'L', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;

namespace detail {

inline void check_rows(const MatrixF& m, bool require_nonzero) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double sq = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const float v = m(r, c);
      if (!std::isfinite(v)) throw FormatError("row " + std::to_string(r) + ": non-finite value in column " + std::to_string(c));
      sq += static_cast<double>(v) * v;
    }
    if (require_nonzero && sq == 0.0) throw FormatError("row " + std::to_string(r) + ": zero-norm feature vector");
  }
}

}  // namespace detail

inline void write_features(std::ostream& out, const FeatureSet& fs) {
  fs.validate();
  out.write(kFeatureMagic, 4);
  detail::write_le<std::uint32_t>(out, kFeatureVersion);
  detail::write_le<std::uint64_t>(out, fs.size());
  detail::write_le<std::uint64_t>(out, fs.dim());
  detail::write_le<std::uint8_t>(out, fs.has_frames() ? 1 : 0);
  detail::write_le<std::uint8_t>(out, fs.has_tracks() ? 1 : 0);
  detail::write_le<std::uint8_t>(out, fs.has_labels() ? 1 : 0);
  detail::write_le_array(out, fs.features.data(), fs.size() * fs.dim());
  for (const auto* arr : {&fs.frame_id, &fs.track_id, &fs.label})
    if (!arr->empty()) detail::write_le_array(out, arr->data(), arr->size());
  if (!out) throw Error("failed writing feature stream");
}

inline void write_features(const std::string& path, const FeatureSet& fs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_features(out, fs);
}

/// Reads a feature stream in file order, without normalization. Rejects
/// bad headers, truncated payloads, non-finite values and zero rows.
inline FeatureSet load_features(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kFeatureMagic, 4) != 0) throw FormatError("bad magic: not a CCLF feature file");
  std::uint32_t version = 0;
  std::uint64_t n = 0, d = 0;
  std::uint8_t flags[3] = {};
  if (!detail::read_le(in, version)) throw FormatError("truncated header");
  if (version != kFeatureVersion) throw FormatError("unsupported feature file version " + std::to_string(version));
  if (!detail::read_le(in, n) || !detail::read_le(in, d)) throw FormatError("truncated header");
  for (auto& f : flags) {
    if (!detail::read_le(in, f)) throw FormatError("truncated header");
    if (f > 1) throw FormatError("invalid presence flag " + std::to_string(f));
  }
  if (n == 0 || d == 0) throw FormatError("header declares N=" + std::to_string(n) + ", D=" + std::to_string(d));
  constexpr std::uint64_t kMaxElems = std::uint64_t{1} << 36;
  if (n > kMaxElems / d) throw FormatError("header dimensions too large");

  FeatureSet fs;
  fs.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint64_t r = 0; r < n; ++r) {
    if (!detail::read_le_array(in, fs.features.data() + r * d, d))
      throw FormatError("truncated payload at row " + std::to_string(r) + " of " + std::to_string(n));
  }
  std::vector<std::int64_t>* arrays[3] = {&fs.frame_id, &fs.track_id, &fs.label};
  const char* names[3] = {"frame_id", "track_id", "label"};
  for (int a = 0; a < 3; ++a) {
    if (!flags[a]) continue;
    arrays[a]->resize(n);
    if (!detail::read_le_array(in, arrays[a]->data(), n)) throw FormatError(std::string("truncated ") + names[a] + " array");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after feature payload");
  detail::check_rows(fs.features, true);
  fs.validate();
  return fs;
}

inline FeatureSet load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature file '" + path + "'");
  try {
    return load_features(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

/// CSV import. Header: frame_id,track_id,label,f0,...,f{D-1}.
inline FeatureSet import_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 4 || header[0] != "frame_id" || header[1] != "track_id" || header[2] != "label")
    throw FormatError("CSV header must start with frame_id,track_id,label followed by feature columns");
  const std::size_t d = header.size() - 3;
  for (std::size_t c = 0; c < d; ++c)
    if (header[3 + c] != "f" + std::to_string(c)) throw FormatError("unexpected CSV column '" + header[3 + c] + "'");

  std::vector<float> values;
  FeatureSet fs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        if (col < 3) {
          const auto v = std::stoll(cell, &used);
          (col == 0 ? fs.frame_id : col == 1 ? fs.track_id : fs.label).push_back(v);
        } else {
          values.push_back(std::stof(cell, &used));
        }
      } catch (const std::exception&) {
        throw FormatError("CSV row " + std::to_string(row) + ": cannot parse '" + cell + "'");
      }
      ++col;
    }
    if (col != d + 3) throw FormatError("CSV row " + std::to_string(row) + ": expected " + std::to_string(d + 3) + " columns");
    ++row;
  }
  if (row == 0) throw FormatError("CSV has no data rows");
  fs.features = Eigen::Map<MatrixF>(values.data(), static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d));
  detail::check_rows(fs.features, true);
  fs.validate();
  return fs;
}

inline FeatureSet import_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open CSV '" + path + "'");
  return import_csv(in);
}

// ---------------------------------------------------------------------------
// Transforms

/// Divides each row by its Euclidean norm (accumulated in double).
inline FeatureSet l2_normalize(FeatureSet fs) {
  for (Eigen::Index r = 0; r < fs.features.rows(); ++r) {
    const double norm = fs.features.row(r).cast<double>().norm();
    if (!(norm > 0.0)) throw Error("l2_normalize: row " + std::to_string(r) + " has zero norm");
    fs.features.row(r) = (fs.features.row(r).cast<double>() / norm).cast<float>();
  }
  return fs;
}

/// Mean-pools the rows of each track, then l2-normalizes the pooled vector.
/// Tracks come out in ascending track id. Every row must carry a track id
/// and all rows of a track must agree on the label.
inline TrackFeatureSet aggregate_tracks(const FeatureSet& fs) {
  if (!fs.has_tracks()) throw Error("aggregate_tracks: feature set has no track_id array");
  std::map<std::int64_t, std::vector<Eigen::Index>> tracks;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (fs.track_id[i] < 0) throw Error("aggregate_tracks: row " + std::to_string(i) + " has no track id");
    tracks[fs.track_id[i]].push_back(static_cast<Eigen::Index>(i));
  }
  TrackFeatureSet out;
  out.features.resize(static_cast<Eigen::Index>(tracks.size()), fs.features.cols());
  Eigen::Index t = 0;
  for (const auto& [tid, rows] : tracks) {
    RowVectorX<double> mean = RowVectorX<double>::Zero(fs.features.cols());
    std::int64_t track_label = fs.has_labels() ? fs.label[static_cast<std::size_t>(rows.front())] : -1;
    for (auto r : rows) {
      mean += fs.features.row(r).cast<double>();
      if (fs.has_labels() && fs.label[static_cast<std::size_t>(r)] != track_label)
        throw Error("aggregate_tracks: track " + std::to_string(tid) + " mixes labels " + std::to_string(track_label) +
                    " and " + std::to_string(fs.label[static_cast<std::size_t>(r)]) + " (row " + std::to_string(r) + ")");
    }
    mean /= static_cast<double>(rows.size());
    const double norm = mean.norm();
    if (!(norm > 0.0)) throw Error("aggregate_tracks: track " + std::to_string(tid) + " has a zero mean vector");
    out.features.row(t) = (mean / norm).cast<float>();
    out.track_id.push_back(tid);
    out.label.push_back(track_label);
    ++t;
  }
  return out;
}

/// Track-level view as a FeatureSet (frame ids dropped), for code paths that
/// take either level.
inline FeatureSet as_feature_set(const TrackFeatureSet& tracks) {
  FeatureSet fs;
  fs.features = tracks.features;
  fs.track_id = tracks.track_id;
  fs.label = tracks.label;
  return fs;
}

/// All unordered pairs of distinct rows that share a frame id. Rows with a
/// negative frame id never co-occur.
inline CooccurrenceSet build_cooccurrence(const FeatureSet& fs) {
  CooccurrenceSet cooc;
  if (!fs.has_frames()) return cooc;
  std::map<std::int64_t, std::vector<int>> frames;
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs.frame_id[i] >= 0) frames[fs.frame_id[i]].push_back(static_cast<int>(i));
  for (const auto& [frame, rows] : frames)
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = a + 1; b < rows.size(); ++b) cooc.pairs.emplace_back(rows[a], rows[b]);
  std::sort(cooc.pairs.begin(), cooc.pairs.end());
  return cooc;
}

}  // namespace ccl
