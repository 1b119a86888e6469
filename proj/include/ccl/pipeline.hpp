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

// End-to-end refinement run:
//
//   load -> normalize -> FINCH (or K-means at FINCH's counts) -> select
//   partition -> co-occurrence correction -> mine pairs -> train -> embed
//   -> (track pooling) -> Ward HAC at C clusters -> metrics
//
// plus the unrefined baseline and the pair-source ablation.

#include "ccl/common.hpp"
#include "ccl/data_model.hpp"
#include "ccl/finch.hpp"
#include "ccl/hac.hpp"
#include "ccl/io.hpp"
#include "ccl/kmeans.hpp"
#include "ccl/metrics.hpp"
#include "ccl/pair_mining.hpp"
#include "ccl/siamese.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace ccl {

enum class ClusteringBackend { Finch, KMeans };

struct PipelineConfig {
  std::string features_path;
  std::string output_dir;
  int partition_index = 2;
  int num_clusters = 0;  // 0: number of ground-truth classes
  EvalLevel level = EvalLevel::Track;
  ClusteringBackend backend = ClusteringBackend::Finch;
  bool video_correction = true;
  std::uint64_t seed = 0;
  MiningConfig mining;
  TrainConfig train;
  int kmeans_batch_size = 1024;
  int kmeans_max_iters = 100;
  /// Lets the ablation runner train on positive pairs alone.
  bool allow_no_negatives = false;

  void validate() const {
    if (partition_index < 1) throw ConfigError("partition_index must be >= 1");
    if (num_clusters < 0) throw ConfigError("num_clusters must be >= 1 (or 0 for the ground-truth class count)");
    if (!allow_no_negatives && !mining.use_negc && !mining.use_nvid)
      throw ConfigError("at least one negative pair source (negc, nvid) must be enabled for training");
    mining.validate();
    train.validate();
  }
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream ss(v);
  T out{};
  ss >> out;
  if (ss.fail() || !ss.eof()) throw ConfigError(key + ": cannot parse '" + v + "'");
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace detail

/// Sets one `key = value` entry. Keys are flat, with section prefixes
/// (mining., train., kmeans., sources.).
inline void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_number;
  auto& m = cfg.mining;
  auto& t = cfg.train;
  if (key == "features") cfg.features_path = value;
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "partition_index") cfg.partition_index = parse_number<int>(key, value);
  else if (key == "num_clusters") cfg.num_clusters = parse_number<int>(key, value);
  else if (key == "level") cfg.level = parse_level(value);
  else if (key == "backend") {
    if (value == "finch") cfg.backend = ClusteringBackend::Finch;
    else if (value == "kmeans") cfg.backend = ClusteringBackend::KMeans;
    else throw ConfigError("backend must be 'finch' or 'kmeans', got '" + value + "'");
  } else if (key == "video_correction") cfg.video_correction = parse_bool(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "mining.z_near") m.z_near = parse_number<int>(key, value);
  else if (key == "mining.z_far") m.z_far = parse_number<int>(key, value);
  else if (key == "mining.small_cluster_threshold") m.small_cluster_threshold = parse_number<int>(key, value);
  else if (key == "mining.clusters_per_batch") m.clusters_per_batch = parse_number<int>(key, value);
  else if (key == "mining.pos_per_cluster") m.pos_per_cluster = parse_number<int>(key, value);
  else if (key == "mining.neg_per_cluster") m.neg_per_cluster = parse_number<int>(key, value);
  else if (key == "mining.near_positives_for_all") m.near_positives_for_all = parse_bool(key, value);
  else if (key == "sources.posc") m.use_posc = parse_bool(key, value);
  else if (key == "sources.negc") m.use_negc = parse_bool(key, value);
  else if (key == "sources.nvid") m.use_nvid = parse_bool(key, value);
  else if (key == "train.epochs") t.epochs = parse_number<int>(key, value);
  else if (key == "train.lr") t.lr = parse_number<double>(key, value);
  else if (key == "train.lr_drop_epoch") t.lr_drop_epoch = parse_number<int>(key, value);
  else if (key == "train.lr_drop_factor") t.lr_drop_factor = parse_number<double>(key, value);
  else if (key == "train.adam_beta1") t.adam_beta1 = parse_number<double>(key, value);
  else if (key == "train.adam_beta2") t.adam_beta2 = parse_number<double>(key, value);
  else if (key == "train.adam_eps") t.adam_eps = parse_number<double>(key, value);
  else if (key == "train.hidden_dim") t.hidden_dim = parse_number<int>(key, value);
  else if (key == "train.output_dim") t.output_dim = parse_number<int>(key, value);
  else if (key == "train.margin") t.margin = parse_number<double>(key, value);
  else if (key == "train.batchnorm") t.use_batchnorm = parse_bool(key, value);
  else if (key == "train.distance") {
    if (value == "euclidean") t.distance = DistanceMode::Euclidean;
    else if (value == "squared") t.distance = DistanceMode::Squared;
    else throw ConfigError("train.distance must be 'euclidean' or 'squared'");
  } else if (key == "kmeans.batch_size") cfg.kmeans_batch_size = parse_number<int>(key, value);
  else if (key == "kmeans.max_iters") cfg.kmeans_max_iters = parse_number<int>(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

/// Parses `key = value` lines; '#' starts a comment.
inline void apply_config_text(PipelineConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
}

inline PipelineConfig load_config(const std::string& path, PipelineConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_config_text(base, in);
  return base;
}

/// Resolved configuration as key/value strings, in config-file syntax.
inline std::map<std::string, std::string> config_entries(const PipelineConfig& cfg) {
  const auto& m = cfg.mining;
  const auto& t = cfg.train;
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  auto d = detail::format_double;
  return {
      {"features", cfg.features_path},
      {"output_dir", cfg.output_dir},
      {"partition_index", std::to_string(cfg.partition_index)},
      {"num_clusters", std::to_string(cfg.num_clusters)},
      {"level", to_string(cfg.level)},
      {"backend", cfg.backend == ClusteringBackend::Finch ? "finch" : "kmeans"},
      {"video_correction", b(cfg.video_correction)},
      {"seed", std::to_string(cfg.seed)},
      {"mining.z_near", std::to_string(m.z_near)},
      {"mining.z_far", std::to_string(m.z_far)},
      {"mining.small_cluster_threshold", std::to_string(m.small_cluster_threshold)},
      {"mining.clusters_per_batch", std::to_string(m.clusters_per_batch)},
      {"mining.pos_per_cluster", std::to_string(m.pos_per_cluster)},
      {"mining.neg_per_cluster", std::to_string(m.neg_per_cluster)},
      {"mining.near_positives_for_all", b(m.near_positives_for_all)},
      {"sources.posc", b(m.use_posc)},
      {"sources.negc", b(m.use_negc)},
      {"sources.nvid", b(m.use_nvid)},
      {"train.epochs", std::to_string(t.epochs)},
      {"train.lr", d(t.lr)},
      {"train.lr_drop_epoch", std::to_string(t.lr_drop_epoch)},
      {"train.lr_drop_factor", d(t.lr_drop_factor)},
      {"train.adam_beta1", d(t.adam_beta1)},
      {"train.adam_beta2", d(t.adam_beta2)},
      {"train.adam_eps", d(t.adam_eps)},
      {"train.hidden_dim", std::to_string(t.hidden_dim)},
      {"train.output_dim", std::to_string(t.output_dim)},
      {"train.margin", d(t.margin)},
      {"train.batchnorm", b(t.use_batchnorm)},
      {"train.distance", t.distance == DistanceMode::Euclidean ? "euclidean" : "squared"},
      {"kmeans.batch_size", std::to_string(cfg.kmeans_batch_size)},
      {"kmeans.max_iters", std::to_string(cfg.kmeans_max_iters)},
  };
}

// ---------------------------------------------------------------------------

struct PartitionStats {
  int level = 0;
  int clusters = 0;
  int largest = 0;
  int smallest = 0;
  double acc = -1.0;  // purity; -1 without ground truth
  long long correct = 0;
  long long wrong = 0;
};

inline PartitionStats partition_stats(int level, const Labels& labels, const FeatureSet& fs) {
  PartitionStats s;
  s.level = level;
  const auto members = cluster_members(labels);
  s.clusters = static_cast<int>(members.size());
  s.smallest = std::numeric_limits<int>::max();
  for (const auto& m : members) {
    s.largest = std::max(s.largest, static_cast<int>(m.size()));
    s.smallest = std::min(s.smallest, static_cast<int>(m.size()));
  }
  if (fs.has_labels() && std::none_of(fs.label.begin(), fs.label.end(), [](auto l) { return l < 0; })) {
    const auto r = wcp(labels, fs.gt_labels());
    s.acc = r.acc;
    s.correct = r.correct;
    s.wrong = r.wrong;
  }
  return s;
}

/// Wall-clock seconds per stage, in execution order.
using StageTimings = std::vector<std::pair<std::string, double>>;

namespace detail {

template <typename Fn>
auto run_stage(const std::string& name, StageTimings& timings, std::ostream* log, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    timings.emplace_back(name, secs);
    if (log) *log << "[ccl] " << name << ": " << std::fixed << std::setprecision(3) << secs << " s\n" << std::defaultfloat;
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish();
    } else {
      auto out = fn();
      finish();
      return out;
    }
  } catch (const std::exception& e) {
    throw Error("stage '" + name + "' failed: " + e.what());
  }
}

}  // namespace detail

/// Clusters features (or embeddings) at the requested level with Ward HAC.
/// Rows are normalized first; at track level they are mean-pooled per track.
struct LevelClustering {
  LabelFile assignment;
  Labels gt;  // empty without ground truth
};

inline LevelClustering cluster_at_level(const FeatureSet& rows, int num_clusters, EvalLevel level) {
  LevelClustering out;
  out.assignment.level = level;
  const FeatureSet unit = l2_normalize(rows);
  if (level == EvalLevel::Frame) {
    out.assignment.labels = ward_hac(unit.features, num_clusters).labels;
    out.assignment.ids.resize(unit.size());
    std::iota(out.assignment.ids.begin(), out.assignment.ids.end(), std::int64_t{0});
    if (unit.has_labels()) out.gt = unit.gt_labels();
  } else {
    const TrackFeatureSet tracks = aggregate_tracks(unit);
    out.assignment.labels = ward_hac(tracks.features, num_clusters).labels;
    out.assignment.ids = tracks.track_id;
    if (unit.has_labels()) out.gt = tracks.gt_labels();
  }
  return out;
}

inline int resolve_num_clusters(int requested, const FeatureSet& fs) {
  if (requested > 0) return requested;
  if (!fs.has_labels() || fs.num_classes() < 1)
    throw ConfigError("num_clusters not set and the feature file has no ground-truth labels to infer it from");
  return fs.num_classes();
}

inline bool has_complete_gt(const Labels& gt) {
  return !gt.empty() && std::none_of(gt.begin(), gt.end(), [](int l) { return l < 0; });
}

/// HAC on the unrefined, normalized features.
inline ClusteringReport run_baseline(const FeatureSet& fs, int num_clusters, EvalLevel level) {
  const LevelClustering lc = cluster_at_level(fs, resolve_num_clusters(num_clusters, fs), level);
  if (!has_complete_gt(lc.gt)) throw Error("run_baseline: ground-truth labels are required for a report");
  return evaluate(lc.assignment.labels, lc.gt);
}

/// Everything up to (not including) training; shared by the ablation rows.
struct PreparedRun {
  FeatureSet features;  // normalized
  CooccurrenceSet cooc;
  PartitionHierarchy hierarchy;
  std::vector<PartitionStats> finch_stats;
  std::vector<PartitionStats> kmeans_stats;  // backend = kmeans only
  Labels selected;                           // chosen partition, before correction
  Labels corrected;
  ClusterRanking ranks;
  int num_clusters = 0;
};

inline PreparedRun prepare_run(const FeatureSet& raw, const PipelineConfig& cfg, StageTimings& timings, std::ostream* log) {
  cfg.validate();
  PreparedRun run;
  run.features = detail::run_stage("normalize", timings, log, [&] { return l2_normalize(raw); });
  run.num_clusters = resolve_num_clusters(cfg.num_clusters, run.features);
  run.cooc = detail::run_stage("cooccurrence", timings, log, [&] { return build_cooccurrence(run.features); });
  run.hierarchy = detail::run_stage("finch", timings, log, [&] { return finch_hierarchy(run.features.features); });
  for (std::size_t l = 0; l < run.hierarchy.num_partitions(); ++l)
    run.finch_stats.push_back(partition_stats(static_cast<int>(l + 1), run.hierarchy.partitions[l], run.features));

  run.selected = detail::run_stage("select_partition", timings, log, [&]() -> Labels {
    const Labels& finch_labels = run.hierarchy.partition(static_cast<std::size_t>(cfg.partition_index));
    if (cfg.backend == ClusteringBackend::Finch) return finch_labels;
    KMeansConfig kc;
    kc.k = count_clusters(finch_labels);
    kc.batch_size = cfg.kmeans_batch_size;
    kc.max_iters = cfg.kmeans_max_iters;
    kc.seed = cfg.seed;
    return minibatch_kmeans(run.features.features, kc).labels;
  });
  if (cfg.backend == ClusteringBackend::KMeans)
    run.kmeans_stats.push_back(partition_stats(cfg.partition_index, run.selected, run.features));

  run.corrected = detail::run_stage("video_correction", timings, log, [&] {
    return cfg.video_correction ? apply_video_correction(run.selected, run.cooc, run.features.features) : run.selected;
  });
  run.ranks = detail::run_stage("rank_clusters", timings, log, [&] {
    return rank_clusters(cluster_means(run.features.features, run.corrected), cfg.mining.z_near, cfg.mining.z_far);
  });
  return run;
}

struct PipelineResult {
  ClusteringReport report;    // refined embeddings
  ClusteringReport baseline;  // unrefined features
  bool has_gt = false;
  LabelFile labels;
  TrainResult training;
  std::size_t batches_per_epoch = 0;
  std::vector<PairBatch> audit_epoch;  // first epoch, for the pair audit file
  PreparedRun prepared;
  StageTimings timings;
  nlohmann::json json;
};

namespace detail {

inline nlohmann::json report_json(const ClusteringReport& r) {
  return {{"acc", r.acc},
          {"bcubed_p", r.bcubed_p},
          {"bcubed_r", r.bcubed_r},
          {"bcubed_f", r.bcubed_f},
          {"num_clusters", r.num_clusters},
          {"correct", r.correct},
          {"wrong", r.wrong},
          {"cluster_sizes", r.cluster_sizes},
          {"purities", r.purities}};
}

inline nlohmann::json stats_json(const std::vector<PartitionStats>& stats) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stats) {
    nlohmann::json j = {{"partition", s.level}, {"clusters", s.clusters}, {"largest", s.largest}, {"smallest", s.smallest}};
    if (s.acc >= 0.0) {
      j["acc"] = s.acc;
      j["correct"] = s.correct;
      j["wrong"] = s.wrong;
    }
    arr.push_back(j);
  }
  return arr;
}

}  // namespace detail

// Mining and initialization draw from separate streams derived from the run seed.
inline MiningConfig mining_config_for(const PipelineConfig& cfg) {
  MiningConfig m = cfg.mining;
  m.seed = cfg.seed;
  return m;
}

inline TrainConfig train_config_for(const PipelineConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
  return t;
}

/// Training through evaluation on a prepared run.
inline PipelineResult train_and_evaluate(const PreparedRun& prep, const PipelineConfig& cfg, StageTimings timings,
                                         std::ostream* log) {
  PipelineResult res;
  const MiningConfig mcfg = mining_config_for(cfg);
  const TrainConfig tcfg = train_config_for(cfg);

  PairMiner miner = detail::run_stage("mine_setup", timings, log, [&] { return mine_batches(prep.corrected, prep.ranks, prep.cooc, mcfg); });
  res.batches_per_epoch = miner.batches_per_epoch();
  res.training = detail::run_stage("train", timings, log, [&] {
    return train(prep.features, [&](int epoch) {
      auto batches = miner.next_epoch();
      if (epoch == 0) res.audit_epoch = batches;
      return batches;
    }, tcfg);
  });
  const FeatureSet embedded = detail::run_stage("embed", timings, log, [&] { return embed(res.training.model, prep.features); });
  const LevelClustering refined =
      detail::run_stage("hac", timings, log, [&] { return cluster_at_level(embedded, prep.num_clusters, cfg.level); });
  res.labels = refined.assignment;
  res.has_gt = has_complete_gt(refined.gt);
  if (res.has_gt) {
    res.report = detail::run_stage("metrics", timings, log, [&] { return evaluate(refined.assignment.labels, refined.gt); });
    res.baseline = detail::run_stage("baseline", timings, log, [&] { return run_baseline(prep.features, prep.num_clusters, cfg.level); });
  }
  res.timings = std::move(timings);
  return res;
}

inline nlohmann::json build_report_json(const PipelineResult& res, const PipelineConfig& cfg) {
  nlohmann::json j;
  if (res.has_gt) {
    j["metrics"] = detail::report_json(res.report);
    j["baseline"] = detail::report_json(res.baseline);
  }
  nlohmann::json config;
  for (const auto& [k, v] : config_entries(cfg)) config[k] = v;
  j["config"] = config;
  j["num_clusters"] = res.prepared.num_clusters;
  j["level"] = to_string(cfg.level);
  j["num_samples"] = res.prepared.features.size();
  j["cooccurring_pairs"] = res.prepared.cooc.size();
  j["finch_partitions"] = detail::stats_json(res.prepared.finch_stats);
  if (!res.prepared.kmeans_stats.empty()) j["kmeans_partition"] = detail::stats_json(res.prepared.kmeans_stats);
  j["selected_partition"] = {
      {"index", cfg.partition_index},
      {"clusters_before_correction", count_clusters(res.prepared.selected)},
      {"clusters_after_correction", count_clusters(res.prepared.corrected)},
  };
  j["mining"] = {{"batches_per_epoch", res.batches_per_epoch},
                 {"pairs_first_epoch",
                  std::accumulate(res.audit_epoch.begin(), res.audit_epoch.end(), std::size_t{0},
                                  [](std::size_t s, const PairBatch& b) { return s + b.pairs.size(); })}};
  j["training"] = {{"epoch_loss", res.training.epoch_loss}, {"steps", res.training.steps}};
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& [stage, secs] : res.timings) timings[stage] = secs;
  j["timings_sec"] = timings;
  return j;
}

/// Writes partitions.csv (+ .json), pairs.csv, model.ccl, labels.csv and
/// report.json into dir.
inline void write_run_artifacts(const std::string& dir, const PipelineResult& res) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_partitions((base / "partitions.csv").string(), res.prepared.hierarchy);
  {
    auto out = detail::open_out((base / "pairs.csv").string());
    write_pairs_csv(out, res.audit_epoch);
  }
  save_model((base / "model.ccl").string(), res.training.model);
  write_labels((base / "labels.csv").string(), res.labels);
  auto out = detail::open_out((base / "report.json").string());
  out << res.json.dump(2) << '\n';
}

/// Runs the whole refinement on an in-memory feature set.
inline PipelineResult run_pipeline(const FeatureSet& raw, const PipelineConfig& cfg, std::ostream* log = nullptr) {
  StageTimings timings;
  PreparedRun prep = prepare_run(raw, cfg, timings, log);
  PipelineResult res = train_and_evaluate(prep, cfg, std::move(timings), log);
  res.prepared = std::move(prep);
  res.json = build_report_json(res, cfg);
  if (!cfg.output_dir.empty()) write_run_artifacts(cfg.output_dir, res);
  return res;
}

/// Loads cfg.features_path and runs the whole refinement.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  if (cfg.features_path.empty()) throw ConfigError("no feature file given");
  StageTimings load_time;
  const FeatureSet raw = detail::run_stage("load", load_time, log, [&] { return load_features(cfg.features_path); });
  PipelineResult res = run_pipeline(raw, cfg, log);
  res.timings.insert(res.timings.begin(), load_time.front());
  res.json["timings_sec"]["load"] = load_time.front().second;
  if (!cfg.output_dir.empty()) {
    auto out = detail::open_out((std::filesystem::path(cfg.output_dir) / "report.json").string());
    out << res.json.dump(2) << '\n';
  }
  return res;
}

// ---------------------------------------------------------------------------
// Pair-source ablation

struct SourceToggles {
  bool posc = false;
  bool negc = false;
  bool nvid = false;

  std::string name() const {
    std::string s;
    auto add = [&s](bool on, const char* n) {
      if (!on) return;
      if (!s.empty()) s += '+';
      s += n;
    };
    add(posc, "PosC");
    add(negc, "NegC");
    add(nvid, "NVid");
    return s.empty() ? "Base" : s;
  }
};

/// The six source combinations, PosC alone first and all three last.
inline std::vector<SourceToggles> ablation_rows() {
  return {{true, false, false}, {false, true, false}, {true, false, true},
          {true, true, false},  {false, true, true},  {true, true, true}};
}

struct AblationRow {
  SourceToggles sources;
  ClusteringReport report;
};

struct AblationResult {
  ClusteringReport baseline;
  std::vector<AblationRow> rows;
  nlohmann::json json;
};

/// Runs the baseline and every source combination on one prepared run.
inline AblationResult run_ablation(const FeatureSet& raw, const PipelineConfig& cfg, std::ostream* log = nullptr) {
  StageTimings timings;
  PipelineConfig base = cfg;
  base.allow_no_negatives = true;
  base.mining.use_posc = base.mining.use_negc = base.mining.use_nvid = true;
  const PreparedRun prep = prepare_run(raw, base, timings, log);
  AblationResult out;
  out.baseline = run_baseline(prep.features, prep.num_clusters, cfg.level);
  out.json["baseline"] = detail::report_json(out.baseline);
  out.json["rows"] = nlohmann::json::array();
  for (const auto& toggles : ablation_rows()) {
    PipelineConfig row_cfg = base;
    row_cfg.mining.use_posc = toggles.posc;
    row_cfg.mining.use_negc = toggles.negc;
    row_cfg.mining.use_nvid = toggles.nvid;
    if (log) *log << "[ccl] ablation row " << toggles.name() << '\n';
    const PipelineResult res = train_and_evaluate(prep, row_cfg, {}, log);
    if (!res.has_gt) throw Error("ablation requires ground-truth labels");
    out.rows.push_back({toggles, res.report});
    out.json["rows"].push_back({{"sources", toggles.name()},
                                {"posc", toggles.posc},
                                {"negc", toggles.negc},
                                {"nvid", toggles.nvid},
                                {"metrics", detail::report_json(res.report)}});
  }
  nlohmann::json config;
  for (const auto& [k, v] : config_entries(cfg)) config[k] = v;
  out.json["config"] = config;
  return out;
}

}  // namespace ccl
