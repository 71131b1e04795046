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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "treenerv/json_fields.hpp"
#include "treenerv/kernels/kernels.hpp"
#include "treenerv/metrics.hpp"
#include "treenerv/trainer.hpp"

namespace treenerv {

std::vector<bool> training_mask(FrameSplit split, std::size_t length) {
  std::vector<bool> mask(length, true);
  if (split == FrameSplit::kEven) {
    for (std::size_t i = 1; i < length; i += 2) mask[i] = false;
  }
  return mask;
}

std::size_t TrainConfig::initial_nodes(std::size_t length) const {
  if (init_nodes) return *init_nodes;
  const auto n = static_cast<std::size_t>(std::llround(init_ratio * double(length)));
  return std::max<std::size_t>(2, n);
}

std::vector<std::size_t> TrainConfig::growth_epochs() const {
  std::vector<std::size_t> at;
  for (std::size_t s = 0; s < growth_stages; ++s) {
    at.push_back(warmup_epochs + s * growth_interval);
  }
  return at;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs must be >= 1");
  if (topk == 0) throw ConfigError("train.topk must be >= 1");
  if (growth_stages > 0 && growth_interval == 0) {
    throw ConfigError("train.growth_interval must be >= 1");
  }
  if (warmup_epochs + growth_stages * growth_interval > epochs) {
    throw ConfigError("train: warmup_epochs + growth_stages * growth_interval (" +
                      std::to_string(warmup_epochs + growth_stages * growth_interval) +
                      ") exceeds epochs (" + std::to_string(epochs) + ")");
  }
  if (!(init_ratio > 0.0 && init_ratio <= 1.0)) {
    throw ConfigError("train.init_ratio must be in (0, 1]");
  }
  if (init_nodes && *init_nodes < 2) throw ConfigError("train.init_nodes must be >= 2");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw ConfigError("train.lr0 must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.eps > 0.0)) {
    throw ConfigError("train.adam: betas must be in [0, 1) and eps > 0");
  }
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {
      {"epochs", epochs},
      {"warmup_epochs", warmup_epochs},
      {"growth_interval", growth_interval},
      {"growth_stages", growth_stages},
      {"topk", topk},
      {"init_ratio", init_ratio},
      {"lr0", lr0},
      {"adam", {{"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}}},
      {"seed", seed},
      {"split", split == FrameSplit::kEven ? "even" : "all"},
  };
  j["init_nodes"] = init_nodes ? nlohmann::json(*init_nodes) : nlohmann::json(nullptr);
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  constexpr std::string_view ctx = "train";
  require_known_keys(j,
                     {"epochs", "warmup_epochs", "growth_interval", "growth_stages",
                      "topk", "init_ratio", "init_nodes", "lr0", "adam", "seed",
                      "split"},
                     ctx);
  TrainConfig c;
  read_optional(j, "epochs", c.epochs, ctx);
  read_optional(j, "warmup_epochs", c.warmup_epochs, ctx);
  read_optional(j, "growth_interval", c.growth_interval, ctx);
  read_optional(j, "growth_stages", c.growth_stages, ctx);
  read_optional(j, "topk", c.topk, ctx);
  read_optional(j, "init_ratio", c.init_ratio, ctx);
  read_optional(j, "lr0", c.lr0, ctx);
  read_optional(j, "seed", c.seed, ctx);
  if (auto it = j.find("init_nodes"); it != j.end() && !it->is_null()) {
    std::size_t n = 0;
    read_optional(j, "init_nodes", n, ctx);
    c.init_nodes = n;
  }
  if (auto it = j.find("adam"); it != j.end()) {
    require_known_keys(*it, {"beta1", "beta2", "eps"}, "train.adam");
    read_optional(*it, "beta1", c.adam.beta1, "train.adam");
    read_optional(*it, "beta2", c.adam.beta2, "train.adam");
    read_optional(*it, "eps", c.adam.eps, "train.adam");
  }
  std::string split = "all";
  read_optional(j, "split", split, ctx);
  if (split == "all") {
    c.split = FrameSplit::kAll;
  } else if (split == "even") {
    c.split = FrameSplit::kEven;
  } else {
    throw ConfigError("train.split must be \"all\" or \"even\", got \"" + split + "\"");
  }
  c.validate();
  return c;
}

double cosine_lr(std::size_t epoch, const TrainConfig& config) {
  if (epoch > config.epochs) {
    throw std::out_of_range("cosine_lr: epoch " + std::to_string(epoch) +
                            " beyond " + std::to_string(config.epochs));
  }
  return config.lr0 * 0.5 *
         (1.0 + std::cos(std::numbers::pi * double(epoch) / double(config.epochs)));
}

std::size_t GopStats::locate(double t) const {
  if (gops.empty() || t < gops.front().lower_key || t > gops.back().upper_key) {
    return npos;
  }
  auto it = std::upper_bound(gops.begin(), gops.end(), t,
                             [](double v, const Gop& g) { return v < g.lower_key; });
  return std::size_t(it - gops.begin()) - 1;
}

void GopStats::accumulate(double t, double loss) {
  const std::size_t g = locate(t);
  if (g == npos) throw std::logic_error("GopStats: time outside every GOP");
  gops[g].loss_sum += loss;
  ++gops[g].evaluated;
}

void GopStats::reset_losses() {
  for (Gop& g : gops) {
    g.loss_sum = 0.0;
    g.evaluated = 0;
  }
}

std::size_t GopStats::frame_count() const {
  std::size_t n = 0;
  for (const Gop& g : gops) n += g.frames.size();
  return n;
}

GopStats partition_gops(const TreeGrid& grid, std::span<const std::size_t> frames) {
  const std::vector<double> keys = grid.in_order_keys();
  if (keys.size() < 2) throw std::invalid_argument("partition_gops: need >= 2 keys");
  GopStats stats;
  stats.gops.resize(keys.size() - 1);
  for (std::size_t j = 0; j + 1 < keys.size(); ++j) {
    stats.gops[j].lower_key = keys[j];
    stats.gops[j].upper_key = keys[j + 1];
  }
  for (std::size_t f : frames) {
    const std::size_t g = stats.locate(double(f));
    if (g == GopStats::npos) {
      throw std::logic_error("partition_gops: frame " + std::to_string(f) +
                             " lies outside the key range");
    }
    stats.gops[g].frames.push_back(f);
  }
  return stats;
}

std::vector<std::size_t> select_topk(const GopStats& stats, std::size_t k) {
  if (k > stats.gops.size()) {
    throw std::invalid_argument("select_topk: k = " + std::to_string(k) +
                                " exceeds " + std::to_string(stats.gops.size()) +
                                " GOPs");
  }
  std::vector<std::size_t> order(stats.gops.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // GOPs are sorted by key, so a stable sort on loss keeps earlier intervals
  // first among ties.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return stats.gops[a].mean_loss() > stats.gops[b].mean_loss();
  });
  order.resize(k);
  return order;
}

std::vector<double> grow(TreeGrid& grid, GopStats& stats, std::size_t k) {
  const std::size_t count = std::min(k, stats.gops.size());
  std::vector<double> inserted;
  for (std::size_t g : select_topk(stats, count)) {
    inserted.push_back(grid.midpoint_insert(stats.gops[g].lower_key,
                                            stats.gops[g].upper_key));
  }
  std::sort(inserted.begin(), inserted.end());
  std::vector<std::size_t> frames;
  for (const Gop& g : stats.gops) frames.insert(frames.end(), g.frames.begin(), g.frames.end());
  std::sort(frames.begin(), frames.end());
  stats = partition_gops(grid, frames);
  return inserted;
}

std::vector<FrameScore> evaluate(const Model& model, const VideoSequence& video,
                                 const std::vector<bool>& mask) {
  std::vector<FrameScore> scores;
  const auto& kern = kernels::active();
  for (std::size_t i = 0; i < video.length(); ++i) {
    if (!mask.empty() && !mask.at(i)) continue;
    const Tensor pred = model.render(double(i));
    const Tensor& target = video.frame(i);
    if (pred.shape() != target.shape()) {
      throw ShapeError("evaluate: model renders " + shape_string(pred.shape()) +
                       ", video frames are " + shape_string(target.shape()));
    }
    const double mse = kern.squared_distance(pred.numel(), pred.data().data(),
                                             target.data().data()) /
                       double(pred.numel());
    scores.push_back({i, mse, psnr_from_mse(mse)});
  }
  return scores;
}

double pooled_psnr(std::span<const FrameScore> scores) {
  if (scores.empty()) throw std::invalid_argument("pooled_psnr: no frames");
  double total = 0.0;
  for (const FrameScore& s : scores) total += s.mse;
  return psnr_from_mse(total / double(scores.size()));
}

namespace {

Model initial_model(const VideoSequence& video, const DecoderConfig& decoder_config,
                    const TrainConfig& config) {
  config.validate();
  decoder_config.validate_for(video.height(), video.width());
  if (decoder_config.output_channels != video.channels()) {
    throw std::invalid_argument("decoder output_channels " +
                                std::to_string(decoder_config.output_channels) +
                                " does not match video channels " +
                                std::to_string(video.channels()));
  }
  const std::size_t n = config.initial_nodes(video.length());
  return Model{TreeGrid::from_uniform(video.length(), n, decoder_config.input_shape,
                                      config.seed),
               Decoder(decoder_config, config.seed + 1), video.length(), n,
               config.split};
}

}  // namespace

Trainer::Trainer(const VideoSequence& video, const DecoderConfig& decoder_config,
                 const TrainConfig& config, std::vector<bool> mask)
    : video_(video),
      config_(config),
      model_(initial_model(video, decoder_config, config)),
      optimizer_(config.adam),
      rng_(config.seed + 2) {
  if (mask.empty()) mask = training_mask(config.split, video.length());
  if (mask.size() != video.length()) {
    throw std::invalid_argument("training mask length does not match the video");
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) frames_.push_back(i);
  }
  if (frames_.empty()) throw std::invalid_argument("training mask selects no frames");
  stats_ = partition_gops(model_.grid, frames_);
}

EpochMetrics Trainer::train_epoch() {
  const double lr = cosine_lr(epoch_, config_);
  std::vector<std::size_t> order = frames_;
  std::shuffle(order.begin(), order.end(), rng_);
  stats_.reset_losses();
  std::vector<Tensor> params = model_.decoder.parameters();
  double total = 0.0;
  for (std::size_t f : order) {
    const double t = double(f);
    Tape tape;
    const BoundPair bounds = model_.grid.query_bounds(t);
    const Tensor embedding = TreeGrid::interpolate(bounds, t, &tape);
    const Tensor pred = model_.decoder.forward(embedding, &tape);
    const Scalar loss = mse_loss(pred, video_.frame(f), &tape);
    if (!std::isfinite(loss.value)) {
      throw TrainingError(fmt::format("non-finite loss at epoch {} frame {}", epoch_, f));
    }
    tape.backward(loss);
    for (Tensor& p : params) optimizer_.step(p, lr);
    Tensor lower = bounds.lower.value;
    optimizer_.step(lower, lr);
    if (!bounds.single()) {
      Tensor upper = bounds.upper.value;
      optimizer_.step(upper, lr);
    }
    stats_.accumulate(t, loss.value);
    total += loss.value;
  }
  const double mean = total / double(order.size());
  EpochMetrics metrics{epoch_, lr, mean, psnr_from_mse(mean), model_.grid.size()};
  ++epoch_;
  spdlog::debug("epoch {} lr={:.3e} loss={:.6e} psnr={:.3f} nodes={}", metrics.epoch,
                metrics.lr, metrics.loss, metrics.psnr, metrics.nodes);
  return metrics;
}

GrowthEvent Trainer::grow_stage() {
  GrowthEvent event;
  event.epoch = epoch_;
  event.keys = grow(model_.grid, stats_, config_.topk);
  event.stage = ++stages_done_;
  spdlog::debug("growth stage {} after epoch {}: +{} keys, {} nodes", event.stage,
               event.epoch, event.keys.size(), model_.grid.size());
  return event;
}

FitResult fit(const VideoSequence& video, const DecoderConfig& decoder_config,
              const TrainConfig& config, const FitObserver& observer,
              std::vector<bool> mask) {
  Trainer trainer(video, decoder_config, config, std::move(mask));
  const std::vector<std::size_t> growth_at = config.growth_epochs();
  std::vector<EpochMetrics> epochs;
  std::vector<GrowthEvent> growth;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    epochs.push_back(trainer.train_epoch());
    if (observer.on_epoch) observer.on_epoch(epochs.back());
    if (trainer.stages_done() < growth_at.size() &&
        trainer.epoch() == growth_at[trainer.stages_done()]) {
      growth.push_back(trainer.grow_stage());
      if (ValidationReport report = trainer.model().grid.validate(); !report) {
        throw std::logic_error("tree invalid after growth: " + report.message);
      }
      if (observer.on_growth) observer.on_growth(growth.back(), trainer.model().grid);
    }
  }
  std::vector<bool> train_mask(video.length(), false);
  for (std::size_t f : trainer.training_frames()) train_mask[f] = true;
  FitResult result{std::move(trainer.model()), std::move(epochs), std::move(growth), 0.0};
  result.train_psnr = pooled_psnr(evaluate(result.model, video, train_mask));
  return result;
}

void write_training_log(std::ostream& out, const FitResult& result,
                        const TrainConfig& config) {
  out << fmt::format("# optimizer=adam beta1={} beta2={} eps={}\n",
                     config.adam.beta1, config.adam.beta2, config.adam.eps);
  out << "epoch,lr,loss,psnr,nodes\n";
  auto next_growth = result.growth.begin();
  for (const EpochMetrics& m : result.epochs) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{}\n", m.epoch, m.lr, m.loss,
                       m.psnr, m.nodes);
    while (next_growth != result.growth.end() && next_growth->epoch == m.epoch + 1) {
      out << fmt::format("# grow epoch={} keys=[{:.17g}]\n", next_growth->epoch,
                         fmt::join(next_growth->keys, ","));
      ++next_growth;
    }
  }
}

}  // namespace treenerv
