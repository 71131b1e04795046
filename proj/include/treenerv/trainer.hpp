// Copyright 2026 The TreeNeRV Authors
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

// Warm-up then tree-growing training: per-GOP error accounting, Top-K
// selection, midpoint insertion and a cosine learning-rate schedule.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "treenerv/decoder.hpp"
#include "treenerv/optimizer.hpp"
#include "treenerv/tree_grid.hpp"
#include "treenerv/video.hpp"

namespace treenerv {

enum class FrameSplit {
  kAll,   // train on every frame
  kEven,  // train on even frames, hold out odd ones
};

std::vector<bool> training_mask(FrameSplit split, std::size_t length);

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t warmup_epochs = 40;
  std::size_t growth_interval = 10;
  std::size_t growth_stages = 4;
  std::size_t topk = 10;
  double init_ratio = 0.1;
  // Overrides init_ratio when set.
  std::optional<std::size_t> init_nodes;
  double lr0 = 1e-2;
  AdamConfig adam;
  std::uint64_t seed = 0;
  FrameSplit split = FrameSplit::kAll;

  // max(2, round(init_ratio * L)) unless init_nodes is set.
  std::size_t initial_nodes(std::size_t length) const;

  // Completed-epoch counts after which a growth stage runs:
  // warmup, warmup + interval, ...
  std::vector<std::size_t> growth_epochs() const;

  void validate() const;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

double cosine_lr(std::size_t epoch, const TrainConfig& config);

struct Gop {
  double lower_key = 0.0;
  double upper_key = 0.0;
  std::vector<std::size_t> frames;
  double loss_sum = 0.0;
  std::size_t evaluated = 0;

  // Mean per-frame error over the frames evaluated since the last reset.
  double mean_loss() const {
    return evaluated == 0 ? 0.0 : loss_sum / double(evaluated);
  }
};

struct GopStats {
  std::vector<Gop> gops;

  // Index of the GOP containing time t, or npos outside [min key, max key].
  std::size_t locate(double t) const;
  void accumulate(double t, double loss);
  void reset_losses();
  std::size_t frame_count() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// GOP_j = [k_j, k_{j+1}) over consecutive sorted keys; the last GOP also
// holds the final key.
GopStats partition_gops(const TreeGrid& grid, std::span<const std::size_t> frames);

// GOP indices of the k largest mean losses, ties to the earlier interval.
std::vector<std::size_t> select_topk(const GopStats& stats, std::size_t k);

// Midpoint-inserts into min(k, GOP count) worst GOPs, recomputes `stats`
// for the new keys and returns the inserted keys in ascending order.
std::vector<double> grow(TreeGrid& grid, GopStats& stats, std::size_t k);

// The representation of one video: feature tree plus decoder.
struct Model {
  TreeGrid grid;
  Decoder decoder;
  std::size_t video_length = 0;
  std::size_t init_nodes = 0;
  FrameSplit split = FrameSplit::kAll;

  Tensor render(double t, Tape* tape = nullptr) const {
    return decoder.forward(grid.time_embedding(t), tape);
  }

  Model clone() const {
    return Model{grid.clone(), decoder.clone(), video_length, init_nodes, split};
  }
};

struct FrameScore {
  std::size_t frame = 0;
  double mse = 0.0;
  double psnr = 0.0;
};

// Renders every frame with `mask[i]` set (all frames when the mask is empty)
// and scores it against the video.
std::vector<FrameScore> evaluate(const Model& model, const VideoSequence& video,
                                 const std::vector<bool>& mask = {});
// PSNR of the pixel-wise MSE pooled over the scored frames.
double pooled_psnr(std::span<const FrameScore> scores);

struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double psnr = 0.0;
  std::size_t nodes = 0;
};

struct GrowthEvent {
  std::size_t epoch = 0;  // completed epochs when the stage ran
  std::size_t stage = 0;  // 1-based
  std::vector<double> keys;
};

struct FitObserver {
  std::function<void(const EpochMetrics&)> on_epoch;
  std::function<void(const GrowthEvent&, const TreeGrid&)> on_growth;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Trainer {
 public:
  // Frames outside `mask` are never read. An empty mask follows config.split.
  Trainer(const VideoSequence& video, const DecoderConfig& decoder_config,
          const TrainConfig& config, std::vector<bool> mask = {});

  // One shuffled pass over the training frames at the current epoch's rate.
  EpochMetrics train_epoch();
  // One growth stage on the GOP losses of the last epoch.
  GrowthEvent grow_stage();

  const Model& model() const { return model_; }
  Model& model() { return model_; }
  const GopStats& gop_stats() const { return stats_; }
  const std::vector<std::size_t>& training_frames() const { return frames_; }
  std::size_t epoch() const { return epoch_; }
  std::size_t stages_done() const { return stages_done_; }

 private:
  const VideoSequence& video_;
  TrainConfig config_;
  Model model_;
  Adam optimizer_;
  std::vector<std::size_t> frames_;
  GopStats stats_;
  std::mt19937_64 rng_;
  std::size_t epoch_ = 0;
  std::size_t stages_done_ = 0;
};

struct FitResult {
  Model model;
  std::vector<EpochMetrics> epochs;
  std::vector<GrowthEvent> growth;
  // Post-training evaluation over the training frames.
  double train_psnr = 0.0;
};

FitResult fit(const VideoSequence& video, const DecoderConfig& decoder_config,
              const TrainConfig& config, const FitObserver& observer = {},
              std::vector<bool> mask = {});

// CSV `epoch,lr,loss,psnr,nodes` preceded by a `#` optimizer line, with
// `# grow epoch=E keys=[...]` lines after the epoch that triggered growth.
void write_training_log(std::ostream& out, const FitResult& result,
                        const TrainConfig& config);

}  // namespace treenerv
