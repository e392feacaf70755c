// Copyright 2026 The egotarget Authors.
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

#include "egotarget/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "egotarget/checkpoint.hpp"
#include "egotarget/config_json.hpp"
#include "egotarget/data.hpp"
#include "egotarget/error.hpp"
#include "egotarget/evaluation.hpp"
#include "egotarget/hri_sim.hpp"
#include "egotarget/io_util.hpp"
#include "egotarget/streaming.hpp"
#include "egotarget/training.hpp"

namespace egotarget {

namespace fs = std::filesystem;

namespace {

constexpr Split kAllSplits[] = {Split::kTrain, Split::kVal, Split::kTestSeen,
                                Split::kTestUnseen};

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  const std::string& field = "") {
  nlohmann::json j{{"error", kind}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  err << j.dump() << '\n';
}

std::vector<Clip> load_split(const fs::path& data, Split split) {
  const fs::path dir = data / std::string(to_string(split));
  if (!fs::is_directory(dir)) return {};
  return load_dataset(dir);
}

// Checkpoint files under `path`: the file itself, or <path>/<run>/checkpoint.bin
// for every run directory in name order.
std::vector<fs::path> find_checkpoints(const fs::path& path) {
  if (fs::is_regular_file(path)) return {path};
  std::vector<fs::path> out;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      const fs::path ckpt = entry.path() / "checkpoint.bin";
      if (entry.is_directory() && fs::is_regular_file(ckpt)) out.push_back(ckpt);
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw CheckpointError("no checkpoints found under " + path.string());
  return out;
}

struct GenerateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> clips;
};

int run_generate(const GenerateArgs& a, std::ostream& out) {
  GenerateConfig cfg =
      a.config.empty() ? GenerateConfig{} : generate_config_from_json(read_json_file(a.config));
  if (a.seed) cfg.world.seed = *a.seed;
  if (a.clips) cfg.num_clips = *a.clips;
  const DatasetSplits splits = generate_dataset(cfg);
  const fs::path root(a.out);
  const std::vector<Clip>* parts[] = {&splits.train, &splits.val, &splits.test_seen,
                                      &splits.test_unseen};
  for (int i = 0; i < 4; ++i) {
    save_dataset(*parts[i], root / std::string(to_string(kAllSplits[i])));
    out << to_string(kAllSplits[i]) << ": " << parts[i]->size() << " clips\n";
  }
  write_text_file(root / "generate.json", to_json(cfg).dump(2) + "\n");
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig cfg =
      a.config.empty() ? TrainConfig{} : train_config_from_json(read_json_file(a.config));
  if (a.seed) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) cfg.seeds[i] = *a.seed + i;
  }
  if (a.epochs) cfg.epochs = *a.epochs;
  const std::vector<Clip> train_clips = load_split(a.data, Split::kTrain);
  const std::vector<Clip> val_clips = load_split(a.data, Split::kVal);
  if (train_clips.empty()) throw DomainError("no training clips under " + a.data);
  const auto runs = train(train_clips, val_clips, cfg, [&err](std::uint64_t seed, const LogRow& r) {
    err << "seed " << seed << " epoch " << r.epoch << ' ' << r.split
        << " loss " << r.total << '\n';
  });
  save_runs(runs, cfg, a.out);
  for (const SeedRun& r : runs) {
    out << "seed " << r.seed << ": best epoch " << r.best_epoch << ", val error "
        << r.best_val_error_cm << " cm\n";
  }
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoints;
  std::string data;
  std::string split = "test_seen";
  std::string out;
  std::string name = "model";
  bool no_post = false;
  bool baseline = false;
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const Split split = parse_split(a.split);
  const std::vector<Clip> clips = load_split(a.data, split);
  if (clips.empty()) throw DomainError("no clips for split " + a.split);
  std::vector<Model> models;
  for (const fs::path& p : find_checkpoints(a.checkpoints)) models.push_back(load_checkpoint(p));
  EvalOptions opts;
  opts.post_process = !a.no_post;
  StageReport report = evaluate(models, clips, opts);
  report.model = a.name;
  report.modality = models.front().config().use_hand_features ? "RGB+Hand" : "RGB";
  std::vector<StageReport> rows{report};
  if (a.baseline) {
    const std::vector<Clip> train_clips = load_split(a.data, Split::kTrain);
    rows.insert(rows.begin(), random_baseline(collect_labels(train_clips), clips, a.seed));
  }
  write_report_csv(rows, a.out);
  out << report_csv(rows);
  return kExitOk;
}

struct StreamArgs {
  std::string checkpoint;
  std::string input;
  std::string out;
};

int run_stream(const StreamArgs& a, std::ostream& out) {
  StreamSession session = StreamSession::open(a.checkpoint);
  const Clip clip = load_clip(a.input);
  std::ostringstream lines;
  for (const FramePrediction& p : stream_clip(session, clip)) lines << to_json_line(p) << '\n';
  write_text_file(a.out, lines.str());
  const TimingStats& t = session.timing();
  out << "frames " << session.frame_count() << ", timed " << t.frames << ", fps "
      << t.fps() << '\n';
  return kExitOk;
}

struct SimulateArgs {
  std::string mode = "avoid";
  double radius = 0.15;
  double speed = 0.2;
  std::string checkpoint;
  std::string clip;
  std::string out;
  bool oracle = false;
  std::vector<double> start;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const Clip clip = load_clip(a.clip);
  std::vector<Eigen::Vector3d> truth;
  for (const Frame& f : clip.frames) truth.push_back(f.target_gt);
  std::vector<Eigen::Vector3d> predictions;
  if (a.oracle) {
    predictions = truth;
  } else {
    if (a.checkpoint.empty()) throw ConfigError("checkpoint", "required unless --oracle");
    StreamSession session = StreamSession::open(a.checkpoint);
    for (const FramePrediction& p : stream_clip(session, clip)) {
      predictions.push_back(p.final_point_m);
    }
  }
  WorkspaceSim sim;
  sim.mode = parse_sim_mode(a.mode);
  sim.radius = a.radius;
  sim.max_speed = a.speed;
  if (!a.start.empty()) {
    sim.end_effector = Eigen::Vector3d(a.start[0], a.start[1], a.start[2]);
  } else if (sim.mode == SimMode::kAvoid) {
    sim.end_effector = truth.back() + Eigen::Vector3d(0.0, 0.0, 0.05);
  } else {
    sim.end_effector = Eigen::Vector3d(0.0, -0.3, 0.3);
  }
  try {
    sim.validate();
  } catch (const DomainError& e) {
    throw ConfigError(a.radius > 0.0 ? "speed" : "radius", e.what());
  }
  const Episode ep = run_episode(sim, predictions, truth);
  write_episode_jsonl(ep, a.out);
  out << "violations " << ep.summary.violations << ", min clearance "
      << ep.summary.min_clearance << " m, path " << ep.summary.path_length << " m\n";
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"Online 3D action-target prediction toolkit", "egotarget"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Synthesize a split benchmark of clips");
  g->add_option("--config", gen.config, "Generation config (JSON)")->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Dataset seed");
  g->add_option("--count,--clips", gen.clips, "Number of clips");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train one model per seed");
  t->add_option("--data", tr.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  t->add_option("--config", tr.config, "Training config (JSON)")->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "Run directory")->required();
  t->add_option("--seed", tr.seed, "Base seed; runs use seed, seed+1, ...");
  t->add_option("--epochs", tr.epochs, "Override the epoch count");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Ten-stage evaluation report");
  e->add_option("--checkpoints", ev.checkpoints, "Run directory or checkpoint file")->required();
  e->add_option("--data", ev.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  e->add_option("--split", ev.split, "train|val|test_seen|test_unseen");
  e->add_option("--out", ev.out, "Report CSV")->required();
  e->add_option("--name", ev.name, "Model name in the report");
  e->add_flag("--no-post", ev.no_post, "Disable the hand prior");
  e->add_flag("--baseline", ev.baseline, "Add a random-baseline row");
  e->add_option("--seed", ev.seed, "Random-baseline seed");

  StreamArgs st;
  std::uint64_t unused_seed = 0;
  auto* s = app.add_subcommand("stream", "Online inference over one clip");
  s->add_option("--checkpoint", st.checkpoint, "Checkpoint file")->required();
  s->add_option("--input", st.input, "Clip directory")->required();
  s->add_option("--out", st.out, "Prediction JSON lines")->required();
  s->add_option("--seed", unused_seed, "Accepted for uniformity; inference is deterministic");

  SimulateArgs sm;
  auto* m = app.add_subcommand("simulate", "Drive the workspace simulator");
  m->add_option("--mode", sm.mode, "avoid|reach")->check(CLI::IsMember({"avoid", "reach"}));
  m->add_option("--radius", sm.radius, "Avoid radius (m)");
  m->add_option("--speed", sm.speed, "Max effector step (m)");
  m->add_option("--checkpoint", sm.checkpoint, "Checkpoint file");
  m->add_option("--clip", sm.clip, "Clip directory")->required();
  m->add_option("--out", sm.out, "Episode JSON lines")->required();
  m->add_flag("--oracle", sm.oracle, "Use ground-truth targets as predictions");
  m->add_option("--start", sm.start, "Initial effector x y z (m)")->expected(3);
  m->add_option("--seed", unused_seed, "Accepted for uniformity; the simulator is deterministic");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    report_error(err, "UsageError", ex.what());
    return kExitUsage;
  }

  try {
    if (g->parsed()) return run_generate(gen, out);
    if (t->parsed()) return run_train(tr, out, err);
    if (e->parsed()) return run_eval(ev, out);
    if (s->parsed()) return run_stream(st, out);
    if (m->parsed()) return run_simulate(sm, out);
  } catch (const ConfigError& ex) {
    report_error(err, "ConfigError", ex.what(), ex.field());
    return kExitUsage;
  } catch (const FormatError& ex) {
    report_error(err, "FormatError", ex.what(), ex.field());
    return kExitRuntimeError;
  } catch (const TrainingDiverged& ex) {
    report_error(err, "TrainingDiverged", ex.what());
    return kExitRuntimeError;
  } catch (const CheckpointError& ex) {
    report_error(err, "CheckpointError", ex.what());
    return kExitRuntimeError;
  } catch (const Error& ex) {
    report_error(err, "Error", ex.what());
    return kExitRuntimeError;
  } catch (const std::exception& ex) {
    report_error(err, "InternalError", ex.what());
    return kExitRuntimeError;
  }
  return kExitUsage;
}

}  // namespace egotarget
