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

#include "egotarget/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "egotarget/error.hpp"
#include "egotarget/io_util.hpp"
#include "egotarget/postprocess.hpp"

namespace egotarget {

StageSplit stage_split(int length) {
  if (length < 1) throw DomainError("stage_split: T must be >= 1");
  StageSplit s;
  const int base = length / kNumStages;
  const int extra = length % kNumStages;
  for (int i = 0; i < kNumStages; ++i) {
    s.sizes[i] = base + (i < extra ? 1 : 0);
    s.stage_of_frame.insert(s.stage_of_frame.end(), s.sizes[i], i);
  }
  return s;
}

double frame_error_cm(const Eigen::Vector3d& pred, const Eigen::Vector3d& gt) {
  return 100.0 * (pred - gt).norm();
}

StageReport evaluate_predictor(const std::vector<Clip>& clips,
                               const ClipPredictor& predictor) {
  if (clips.empty()) throw DomainError("evaluate: no clips");
  // Aggregate in clip-id order so the result does not depend on input order.
  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&clips](std::size_t a, std::size_t b) {
    return clips[a].id < clips[b].id;
  });

  std::array<double, kNumStages> stage_sum{};
  std::array<int, kNumStages> stage_count{};
  double frame_sum = 0.0;
  long frames = 0;
  for (std::size_t idx : order) {
    const Clip& clip = clips[idx];
    const std::vector<Eigen::Vector3d> pred = predictor(clip);
    if (static_cast<int>(pred.size()) != clip.length()) {
      throw DomainError("evaluate: predictor returned " + std::to_string(pred.size()) +
                        " frames for clip " + clip.id);
    }
    const StageSplit split = stage_split(clip.length());
    std::array<double, kNumStages> clip_sum{};
    for (int t = 0; t < clip.length(); ++t) {
      const double e = frame_error_cm(pred[t], clip.frames[t].target_gt);
      clip_sum[split.stage_of_frame[t]] += e;
      frame_sum += e;
      ++frames;
    }
    for (int s = 0; s < kNumStages; ++s) {
      if (split.sizes[s] == 0) continue;
      stage_sum[s] += clip_sum[s] / split.sizes[s];
      ++stage_count[s];
    }
  }
  StageReport r;
  r.num_clips = static_cast<int>(clips.size());
  r.split = std::string(to_string(clips.front().split));
  r.overall = frame_sum / static_cast<double>(frames);
  for (int s = 0; s < kNumStages; ++s) {
    r.stages[s] = stage_count[s] ? stage_sum[s] / stage_count[s]
                                 : std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

StageReport average_reports(const std::vector<StageReport>& reports) {
  if (reports.empty()) throw DomainError("average_reports: no reports");
  StageReport out = reports.front();
  const double n = static_cast<double>(reports.size());
  out.num_seeds = static_cast<int>(reports.size());
  out.overall = 0.0;
  out.stages.fill(0.0);
  for (const StageReport& r : reports) {
    out.overall += r.overall;
    for (int s = 0; s < kNumStages; ++s) out.stages[s] += r.stages[s];
  }
  out.overall /= n;
  for (double& v : out.stages) v /= n;
  return out;
}

std::vector<Eigen::Vector3d> predict_clip(const Model& model, const Clip& clip,
                                          const EvalOptions& options) {
  const std::vector<FrameOutput> outputs = forward_clip(model, clip);
  const WorkspaceBox& ws = model.config().workspace;
  std::vector<Eigen::Vector3d> pred;
  pred.reserve(outputs.size());
  PostProcessState state;
  for (int t = 0; t < clip.length(); ++t) {
    const Eigen::Vector3d raw = ws.to_meters(outputs[t].raw_point);
    if (!options.post_process) {
      pred.push_back(raw);
      continue;
    }
    PostProcessState next;
    pred.push_back(post_step(raw, clip.frames[t].landmarks, clip.intrinsics, state,
                             next, options.fingertip_index)
                       .point);
    state = next;
  }
  return pred;
}

StageReport evaluate(const std::vector<Model>& seed_models,
                     const std::vector<Clip>& clips, const EvalOptions& options) {
  if (seed_models.empty()) throw DomainError("evaluate: no checkpoints");
  std::vector<StageReport> reports;
  for (const Model& m : seed_models) {
    reports.push_back(evaluate_predictor(
        clips, [&](const Clip& c) { return predict_clip(m, c, options); }));
  }
  return average_reports(reports);
}

std::vector<Eigen::Vector3d> collect_labels(const std::vector<Clip>& clips) {
  std::vector<Eigen::Vector3d> out;
  for (const Clip& c : clips) {
    for (const Frame& f : c.frames) out.push_back(f.target_gt);
  }
  return out;
}

namespace {

std::uint32_t fnv1a32(const std::string& s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

}  // namespace

StageReport random_baseline(const std::vector<Eigen::Vector3d>& train_labels,
                            const std::vector<Clip>& clips, std::uint64_t rng_seed) {
  if (train_labels.empty()) throw DomainError("random_baseline: no training labels");
  Eigen::Vector3d lo = train_labels.front();
  Eigen::Vector3d hi = lo;
  for (const auto& p : train_labels) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // One stream per clip, keyed by id, keeps the report order-invariant.
  auto predictor = [&](const Clip& clip) {
    std::seed_seq seq{static_cast<std::uint32_t>(rng_seed),
                      static_cast<std::uint32_t>(rng_seed >> 32),
                      fnv1a32(clip.id)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Eigen::Vector3d> out;
    for (int t = 0; t < clip.length(); ++t) {
      Eigen::Vector3d p;
      for (int a = 0; a < 3; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * unit(rng);
      out.push_back(p);
    }
    return out;
  };
  StageReport r = evaluate_predictor(clips, predictor);
  r.model = "random";
  r.modality = "-";
  return r;
}

std::string report_csv(const std::vector<StageReport>& reports) {
  std::ostringstream ss;
  for (const StageReport& r : reports) {
    ss << "# meta," << r.model << ',' << r.split << ',' << r.num_clips << ','
       << r.num_seeds << '\n';
  }
  ss << "model,modality,overall";
  for (int s = 1; s <= kNumStages; ++s) ss << ",s" << s * 10;
  ss << '\n';
  for (const StageReport& r : reports) {
    ss << r.model << ',' << r.modality << ',' << format_double(r.overall);
    for (double v : r.stages) ss << ',' << format_double(v);
    ss << '\n';
  }
  return ss.str();
}

void write_report_csv(const std::vector<StageReport>& reports,
                      const std::filesystem::path& path) {
  write_text_file(path, report_csv(reports));
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& text, const std::string& field) {
  const double v = parse_double(text, field);
  if (v != std::floor(v)) throw FormatError(field, "expected an integer");
  return static_cast<int>(v);
}

}  // namespace

std::vector<StageReport> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<StageReport> metas;
  std::vector<StageReport> rows;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto cells = split_commas(line);
      if (cells.size() == 5 && cells[0] == "# meta") {
        StageReport m;
        m.model = cells[1];
        m.split = cells[2];
        m.num_clips = parse_int(cells[3], "report:clips");
        m.num_seeds = parse_int(cells[4], "report:seeds");
        metas.push_back(m);
      }
      continue;
    }
    const auto cells = split_commas(line);
    if (cells.size() != 3 + kNumStages) {
      throw FormatError("report", "expected 13 columns, got " +
                                      std::to_string(cells.size()));
    }
    if (!header) {
      if (cells[0] != "model" || cells[2] != "overall") {
        throw FormatError("report", "missing header row");
      }
      header = true;
      continue;
    }
    StageReport r;
    r.model = cells[0];
    r.modality = cells[1];
    r.overall = parse_double(cells[2], "report:overall");
    for (int s = 0; s < kNumStages; ++s) {
      r.stages[s] = parse_double(cells[3 + s], "report:s" + std::to_string(10 * (s + 1)));
    }
    rows.push_back(r);
  }
  if (!header) throw FormatError("report", "missing header row");
  for (std::size_t i = 0; i < rows.size() && i < metas.size(); ++i) {
    if (metas[i].model == rows[i].model) {
      rows[i].split = metas[i].split;
      rows[i].num_clips = metas[i].num_clips;
      rows[i].num_seeds = metas[i].num_seeds;
    }
  }
  return rows;
}

std::vector<StageReport> read_report_csv(const std::filesystem::path& path) {
  return parse_report_csv(read_text_file(path, "report"));
}

}  // namespace egotarget
