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

// Small text formats shared by the CLI stages: label CSVs, the FINCH
// partition CSV with its JSON sidecar, and co-occurrence pair CSVs.

#include "ccl/common.hpp"
#include "ccl/data_model.hpp"
#include "ccl/finch.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace ccl {

enum class EvalLevel { Frame, Track };

inline std::string to_string(EvalLevel level) { return level == EvalLevel::Frame ? "frame" : "track"; }

inline EvalLevel parse_level(const std::string& s) {
  if (s == "frame") return EvalLevel::Frame;
  if (s == "track") return EvalLevel::Track;
  throw ConfigError("level must be 'frame' or 'track', got '" + s + "'");
}

/// Cluster assignment written by `cluster`: ids are sample indices at frame
/// level and track ids at track level.
struct LabelFile {
  EvalLevel level = EvalLevel::Frame;
  std::vector<std::int64_t> ids;
  Labels labels;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  return cells;
}

inline long long parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(where + ": cannot parse integer '" + s + "'");
  }
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace detail

inline void write_labels(std::ostream& out, const LabelFile& lf) {
  out << (lf.level == EvalLevel::Frame ? "sample_index" : "track_id") << ",label\n";
  for (std::size_t i = 0; i < lf.labels.size(); ++i) out << lf.ids[i] << ',' << lf.labels[i] << '\n';
}

inline void write_labels(const std::string& path, const LabelFile& lf) {
  auto out = detail::open_out(path);
  write_labels(out, lf);
}

inline LabelFile read_labels(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty label file");
  const auto header = detail::split_csv_line(line);
  LabelFile lf;
  if (header.size() != 2 || header[1] != "label") throw FormatError("label CSV header must be sample_index,label or track_id,label");
  if (header[0] == "sample_index") lf.level = EvalLevel::Frame;
  else if (header[0] == "track_id") lf.level = EvalLevel::Track;
  else throw FormatError("label CSV header must be sample_index,label or track_id,label");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = "label CSV row " + std::to_string(row);
    if (cells.size() != 2) throw FormatError(where + ": expected 2 columns");
    lf.ids.push_back(detail::parse_int(cells[0], where));
    lf.labels.push_back(static_cast<int>(detail::parse_int(cells[1], where)));
    ++row;
  }
  return lf;
}

inline LabelFile read_labels(const std::string& path) {
  auto in = detail::open_in(path);
  return read_labels(in);
}

/// Sidecar path for a partition CSV: same stem, .json extension.
inline std::string partition_sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json").string();
}

/// Partition CSV (sample_index,p1,...,pL) and sidecar
/// {"num_samples": N, "cluster_counts": [...]}.
inline void write_partitions(const std::string& csv_path, const PartitionHierarchy& h) {
  {
    auto out = detail::open_out(csv_path);
    out << "sample_index";
    for (std::size_t l = 1; l <= h.num_partitions(); ++l) out << ",p" << l;
    out << '\n';
    const std::size_t n = h.partitions.empty() ? 0 : h.partitions.front().size();
    for (std::size_t i = 0; i < n; ++i) {
      out << i;
      for (const auto& p : h.partitions) out << ',' << p[i];
      out << '\n';
    }
  }
  nlohmann::json sidecar;
  sidecar["num_samples"] = h.partitions.empty() ? 0 : h.partitions.front().size();
  sidecar["cluster_counts"] = h.cluster_counts;
  auto out = detail::open_out(partition_sidecar_path(csv_path));
  out << sidecar.dump(2) << '\n';
}

/// Reads the label vectors of a partition CSV (means are not stored).
inline std::vector<Labels> read_partitions(const std::string& csv_path) {
  auto in = detail::open_in(csv_path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(csv_path + ": empty partition file");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "sample_index") throw FormatError(csv_path + ": header must be sample_index,p1,...");
  for (std::size_t l = 1; l < header.size(); ++l)
    if (header[l] != "p" + std::to_string(l)) throw FormatError(csv_path + ": unexpected column '" + header[l] + "'");
  std::vector<Labels> parts(header.size() - 1);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = csv_path + " row " + std::to_string(row);
    if (cells.size() != header.size()) throw FormatError(where + ": wrong column count");
    if (detail::parse_int(cells[0], where) != static_cast<long long>(row)) throw FormatError(where + ": sample_index out of order");
    for (std::size_t l = 0; l < parts.size(); ++l) parts[l].push_back(static_cast<int>(detail::parse_int(cells[l + 1], where)));
    ++row;
  }
  return parts;
}

inline void write_cooccurrence(const std::string& path, const CooccurrenceSet& cooc) {
  auto out = detail::open_out(path);
  out << "a,b\n";
  for (const auto& [a, b] : cooc.pairs) out << a << ',' << b << '\n';
}

inline CooccurrenceSet read_cooccurrence(const std::string& path) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line) != std::vector<std::string>{"a", "b"})
    throw FormatError(path + ": header must be a,b");
  CooccurrenceSet cooc;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = path + " row " + std::to_string(row++);
    if (cells.size() != 2) throw FormatError(where + ": expected 2 columns");
    int a = static_cast<int>(detail::parse_int(cells[0], where));
    int b = static_cast<int>(detail::parse_int(cells[1], where));
    if (a == b) throw FormatError(where + ": self pair");
    if (a > b) std::swap(a, b);
    cooc.pairs.emplace_back(a, b);
  }
  std::sort(cooc.pairs.begin(), cooc.pairs.end());
  cooc.pairs.erase(std::unique(cooc.pairs.begin(), cooc.pairs.end()), cooc.pairs.end());
  return cooc;
}

}  // namespace ccl
