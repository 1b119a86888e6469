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

// Command line front end: one subcommand per pipeline stage, plus `run`
// (end to end) and `ablate` (all pair-source combinations).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ccl.hpp"

namespace {

using namespace ccl;

struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key = value config file");
  cmd->add_option("--set", flags.overrides, "override a config key, as key=value (repeatable)");
}

PipelineConfig resolve_config(const ConfigFlags& flags) {
  PipelineConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config(flags.config_path);
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
  }
  return cfg;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

// Weak labels for `mine` and `train`: a stored FINCH level, corrected
// against co-occurrence, with its cluster ranking.
struct WeakLabels {
  FeatureSet features;
  CooccurrenceSet cooc;
  Labels corrected;
  ClusterRanking ranks;
};

WeakLabels load_weak_labels(const std::string& features_path, const std::string& partition_path, int partition_index,
                            const std::string& cooc_path, const PipelineConfig& cfg) {
  WeakLabels w;
  w.features = l2_normalize(load_features(features_path));
  const std::vector<Labels> parts = read_partitions(partition_path);
  if (partition_index < 1 || static_cast<std::size_t>(partition_index) > parts.size())
    throw ConfigError("partition index " + std::to_string(partition_index) + " out of range: the partition file holds L=" +
                      std::to_string(parts.size()) + " partitions");
  const Labels& chosen = parts[static_cast<std::size_t>(partition_index - 1)];
  if (chosen.size() != w.features.size())
    throw FormatError("partition file has " + std::to_string(chosen.size()) + " rows but the feature file has " +
                      std::to_string(w.features.size()));
  w.cooc = cooc_path.empty() ? build_cooccurrence(w.features) : read_cooccurrence(cooc_path);
  for (const auto& [a, b] : w.cooc.pairs)
    if (static_cast<std::size_t>(b) >= w.features.size()) throw FormatError("co-occurrence index out of range");
  w.corrected = cfg.video_correction ? apply_video_correction(chosen, w.cooc, w.features.features) : chosen;
  w.ranks = rank_clusters(cluster_means(w.features.features, w.corrected), cfg.mining.z_near, cfg.mining.z_far);
  return w;
}

Labels gt_for(const LabelFile& pred, const FeatureSet& gt_fs) {
  if (!gt_fs.has_labels()) throw FormatError("ground-truth file carries no labels");
  if (pred.level == EvalLevel::Frame) {
    const Labels all = gt_fs.gt_labels();
    Labels out;
    out.reserve(pred.ids.size());
    for (std::int64_t id : pred.ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= all.size())
        throw FormatError("sample index " + std::to_string(id) + " not in the ground-truth file");
      out.push_back(all[static_cast<std::size_t>(id)]);
    }
    return out;
  }
  const TrackFeatureSet tracks = aggregate_tracks(gt_fs);
  const Labels track_gt = tracks.gt_labels();
  std::map<std::int64_t, int> by_id;
  for (std::size_t t = 0; t < tracks.track_id.size(); ++t) by_id[tracks.track_id[t]] = track_gt[t];
  Labels out;
  out.reserve(pred.ids.size());
  for (std::int64_t id : pred.ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw FormatError("track id " + std::to_string(id) + " not in the ground-truth file");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering-based contrastive refinement of face embeddings"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress stage logging");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic feature file");
  SynthConfig sc;
  std::string synth_out;
  std::string synth_cooc_out;
  synth->add_option("--classes", sc.num_classes)->capture_default_str();
  synth->add_option("--per-class", sc.per_class)->capture_default_str();
  synth->add_option("--dim", sc.dim)->capture_default_str();
  synth->add_option("--noise", sc.noise, "per-coordinate noise sigma")->capture_default_str();
  synth->add_option("--frames-per-track", sc.frames_per_track)->capture_default_str();
  synth->add_option("--cooc-rate", sc.cooc_rate)->capture_default_str();
  synth->add_option("--seed", sc.seed)->capture_default_str();
  synth->add_option("--min-angle", sc.min_center_angle_deg, "minimum angle between class centers, degrees")->capture_default_str();
  synth->add_option("--track-noise", sc.track_noise)->capture_default_str();
  synth->add_option("--nuisance-dims", sc.nuisance_dims)->capture_default_str();
  synth->add_option("--nuisance-strength", sc.nuisance_strength)->capture_default_str();
  synth->add_flag("--orthogonal", sc.orthogonal_layout, "orthonormal centers and nuisance directions");
  synth->add_option("--out", synth_out, "feature file")->required();
  synth->add_option("--cooc-out", synth_cooc_out, "also write the co-occurring pairs as CSV");

  // finch
  auto* finch = app.add_subcommand("finch", "FINCH partition hierarchy");
  std::string finch_features, finch_out;
  finch->add_option("--features", finch_features)->required();
  finch->add_option("--out", finch_out, "partition CSV (a JSON sidecar is written next to it)")->required();

  // kmeans
  auto* kmeans = app.add_subcommand("kmeans", "MiniBatch K-means labels");
  std::string km_features, km_out;
  KMeansConfig kc;
  kmeans->add_option("--features", km_features)->required();
  kmeans->add_option("--k", kc.k)->required();
  kmeans->add_option("--seed", kc.seed)->capture_default_str();
  kmeans->add_option("--batch-size", kc.batch_size)->capture_default_str();
  kmeans->add_option("--max-iters", kc.max_iters)->capture_default_str();
  kmeans->add_option("--out", km_out)->required();

  // mine / train share their inputs
  std::string w_features, w_partition, w_cooc, w_out;
  int w_index = 0;
  std::uint64_t w_seed = 0;
  bool w_seed_set = false;
  ConfigFlags w_flags;
  auto weak_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--features", w_features)->required();
    cmd->add_option("--partition", w_partition, "partition CSV written by `finch`")->required();
    cmd->add_option("--partition-index", w_index, "1-based partition level (default: config partition_index)");
    cmd->add_option("--cooc", w_cooc, "co-occurring pairs CSV (default: derived from frame ids)");
    cmd->add_option("--seed", w_seed)->each([&](const std::string&) { w_seed_set = true; });
    cmd->add_option("--out", w_out)->required();
    add_config_flags(cmd, w_flags);
  };
  auto* mine = app.add_subcommand("mine", "write one epoch of mined pairs as CSV");
  weak_inputs(mine);
  auto* trn = app.add_subcommand("train", "train the Siamese network on mined pairs");
  weak_inputs(trn);

  // embed
  auto* emb = app.add_subcommand("embed", "embed features with a trained model");
  std::string emb_model, emb_features, emb_out;
  emb->add_option("--model", emb_model)->required();
  emb->add_option("--features", emb_features)->required();
  emb->add_option("--out", emb_out)->required();

  // cluster
  auto* clu = app.add_subcommand("cluster", "Ward HAC at a fixed cluster count");
  std::string clu_in, clu_out, clu_level = "frame";
  int clu_c = 0;
  auto* clu_f = clu->add_option("--features", clu_in, "raw feature file");
  auto* clu_e = clu->add_option("--embeddings", clu_in, "embedding file written by `embed`");
  clu_f->excludes(clu_e);
  clu->add_option("--num-clusters", clu_c, "target count (default: number of ground-truth classes)");
  clu->add_option("--level", clu_level)->check(CLI::IsMember({"frame", "track"}))->capture_default_str();
  clu->add_option("--out", clu_out)->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a label file against ground truth");
  std::string ev_pred, ev_gt, ev_out, ev_metrics = "wcp,bcubed";
  ev->add_option("--pred", ev_pred)->required();
  ev->add_option("--gt", ev_gt, "feature file carrying labels")->required();
  ev->add_option("--metrics", ev_metrics)->capture_default_str();
  ev->add_option("--out", ev_out, "report JSON (default: stdout)");

  // run / ablate
  ConfigFlags r_flags;
  std::string r_features, r_out;
  std::uint64_t r_seed = 0;
  bool r_seed_set = false;
  auto run_inputs = [&](CLI::App* cmd, const char* out_help) {
    add_config_flags(cmd, r_flags);
    cmd->add_option("--features", r_features, "overrides config key features");
    cmd->add_option("--out", r_out, out_help);
    cmd->add_option("--seed", r_seed)->each([&](const std::string&) { r_seed_set = true; });
  };
  auto* run = app.add_subcommand("run", "full pipeline: FINCH, mining, training, HAC, metrics");
  run_inputs(run, "output directory (overrides config key output_dir)");
  auto* abl = app.add_subcommand("ablate", "train once per pair-source combination");
  run_inputs(abl, "report JSON (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  std::ostream* log = quiet ? nullptr : &std::cerr;

  try {
    if (*synth) {
      const FeatureSet fs = synth_generate(sc);
      write_features(synth_out, fs);
      if (!synth_cooc_out.empty()) write_cooccurrence(synth_cooc_out, build_cooccurrence(fs));
      if (log) *log << "[ccl] wrote " << fs.size() << " x " << fs.dim() << " to " << synth_out << '\n';
    } else if (*finch) {
      const FeatureSet fs = l2_normalize(load_features(finch_features));
      const PartitionHierarchy h = finch_hierarchy(fs.features);
      write_partitions(finch_out, h);
      if (log) {
        *log << "[ccl] partitions:";
        for (int c : h.cluster_counts) *log << ' ' << c;
        *log << '\n';
      }
    } else if (*kmeans) {
      const FeatureSet fs = l2_normalize(load_features(km_features));
      const KMeansResult r = minibatch_kmeans(fs.features, kc);
      LabelFile lf;
      lf.labels = r.labels;
      lf.ids.resize(r.labels.size());
      std::iota(lf.ids.begin(), lf.ids.end(), std::int64_t{0});
      write_labels(km_out, lf);
      if (log) *log << "[ccl] k=" << r.requested_k << " effective " << r.effective_k << " cost " << r.cost << '\n';
    } else if (*mine || *trn) {
      PipelineConfig cfg = resolve_config(w_flags);
      if (w_seed_set) cfg.seed = w_seed;
      if (w_index > 0) cfg.partition_index = w_index;
      cfg.validate();
      const WeakLabels w = load_weak_labels(w_features, w_partition, cfg.partition_index, w_cooc, cfg);
      PairMiner miner = mine_batches(w.corrected, w.ranks, w.cooc, mining_config_for(cfg));
      if (*mine) {
        const auto batches = miner.next_epoch();
        auto out = detail::open_out(w_out);
        write_pairs_csv(out, batches);
        if (log) *log << "[ccl] " << batches.size() << " batches\n";
      } else {
        const TrainResult r = train(w.features, [&](int) { return miner.next_epoch(); }, train_config_for(cfg),
                                    [&](int epoch, double loss) {
                                      if (log) *log << "[ccl] epoch " << epoch << " loss " << loss << '\n';
                                    });
        save_model(w_out, r.model);
      }
    } else if (*emb) {
      const SiameseModel<float> model = load_model(emb_model);
      write_features(emb_out, embed(model, l2_normalize(load_features(emb_features))));
    } else if (*clu) {
      const FeatureSet fs = load_features(clu_in);
      const int c = resolve_num_clusters(clu_c, fs);
      write_labels(clu_out, cluster_at_level(fs, c, parse_level(clu_level)).assignment);
    } else if (*ev) {
      const LabelFile pred = read_labels(ev_pred);
      const Labels gt = gt_for(pred, load_features(ev_gt));
      const ClusteringReport r = evaluate(pred.labels, gt);
      nlohmann::json j = {{"level", to_string(pred.level)}, {"num_items", pred.labels.size()}, {"num_clusters", r.num_clusters}};
      std::stringstream ss(ev_metrics);
      for (std::string m; std::getline(ss, m, ',');) {
        m = detail::trim(m);
        if (m == "wcp") {
          j["acc"] = r.acc;
          j["correct"] = r.correct;
          j["wrong"] = r.wrong;
        } else if (m == "bcubed") {
          j["bcubed_p"] = r.bcubed_p;
          j["bcubed_r"] = r.bcubed_r;
          j["bcubed_f"] = r.bcubed_f;
        } else {
          throw ConfigError("unknown metric '" + m + "' (expected wcp, bcubed)");
        }
      }
      write_json(ev_out, j);
    } else if (*run || *abl) {
      PipelineConfig cfg = resolve_config(r_flags);
      if (!r_features.empty()) cfg.features_path = r_features;
      if (r_seed_set) cfg.seed = r_seed;
      if (*run) {
        if (!r_out.empty()) cfg.output_dir = r_out;
        const PipelineResult res = run_pipeline(cfg, log);
        if (res.has_gt)
          std::cout << "base acc " << res.baseline.acc << "  ccl acc " << res.report.acc << "  ccl bcubed_f " << res.report.bcubed_f
                    << '\n';
        if (cfg.output_dir.empty()) std::cout << res.json.dump(2) << '\n';
      } else {
        if (cfg.features_path.empty()) throw ConfigError("no feature file given");
        const AblationResult res = run_ablation(load_features(cfg.features_path), cfg, log);
        if (log) {
          *log << "[ccl] base acc " << res.baseline.acc << '\n';
          for (const auto& row : res.rows) *log << "[ccl] " << row.sources.name() << " acc " << row.report.acc << '\n';
        }
        write_json(r_out, res.json);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "ccl: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
