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

#include "treenerv/commands.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "treenerv/analyze.hpp"
#include "treenerv/json_fields.hpp"
#include "treenerv/metrics.hpp"

namespace treenerv {
namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

Model load_model(const std::filesystem::path& path) {
  spdlog::info("loading model {}", path.string());
  return decompress(read_file(path));
}

void check_video_matches(const Model& model, const VideoSequence& video) {
  const DecoderConfig& d = model.decoder.config();
  if (video.length() != model.video_length || video.height() != d.output_height() ||
      video.width() != d.output_width() || video.channels() != d.output_channels) {
    throw std::invalid_argument(fmt::format(
        "video is {} frames of {}x{}x{}, model expects {} frames of {}x{}x{}", video.length(),
        video.channels(), video.height(), video.width(), model.video_length,
        d.output_channels, d.output_height(), d.output_width()));
  }
}

void write_scores(const std::filesystem::path& path, const std::vector<FrameScore>& scores,
                  const std::vector<bool>& seen) {
  std::ofstream out = open_csv(path);
  out << "frame,seen,mse,psnr\n";
  for (const FrameScore& s : scores) {
    out << fmt::format("{},{},{:.17g},{:.17g}\n", s.frame, seen[s.frame] ? 1 : 0, s.mse,
                       s.psnr);
  }
}

}  // namespace

const std::vector<std::string_view>& command_names() {
  static const std::vector<std::string_view> names = {
      "fit", "reconstruct", "interpolate", "compress", "decompress", "analyze", "synth"};
  return names;
}

nlohmann::json cmd_synth(const RunConfig& config) {
  if (!config.synth) throw ConfigError("synth: config needs video.synth");
  const VideoSequence video = config.load_video();
  const std::filesystem::path dir = config.out / "frames";
  save_frames(video, dir);
  const std::vector<double> adjacent = adjacent_frame_mse(video);
  std::ofstream out = open_csv(config.out / "adjacent_mse.csv");
  out << "frame,adjacent_mse\n";
  for (std::size_t i = 0; i < adjacent.size(); ++i) {
    out << fmt::format("{},{:.17g}\n", i, adjacent[i]);
  }
  return {{"command", "synth"}, {"frames", video.length()}, {"dir", dir.string()}};
}

nlohmann::json cmd_fit(const RunConfig& config) {
  const VideoSequence video = config.load_video();
  FitObserver observer;
  observer.on_epoch = [&](const EpochMetrics& m) {
    if ((m.epoch + 1) % 25 == 0 || m.epoch + 1 == config.train.epochs) {
      spdlog::info("epoch {}/{} loss={:.4e} psnr={:.2f} nodes={}", m.epoch + 1,
                   config.train.epochs, m.loss, m.psnr, m.nodes);
    }
  };
  observer.on_growth = [](const GrowthEvent& e, const TreeGrid& grid) {
    spdlog::info("growth stage {}: +{} keys -> {} nodes", e.stage, e.keys.size(), grid.size());
  };
  const FitResult result = fit(video, config.decoder, config.train, observer);
  const std::vector<std::uint8_t> bytes = encode_float32(result.model);
  std::filesystem::create_directories(config.model_path().parent_path());
  write_file(config.model_path(), bytes);
  {
    std::ofstream log = open_csv(config.out / "train_log.csv");
    write_training_log(log, result, config.train);
  }
  return {{"command", "fit"},
          {"psnr", result.train_psnr},
          {"nodes", result.model.grid.size()},
          {"parameters", parameter_count(result.model)},
          {"model", config.model_path().string()}};
}

nlohmann::json cmd_reconstruct(const RunConfig& config) {
  const Model model = load_model(config.model_path());
  const VideoSequence video = config.load_video();
  check_video_matches(model, video);
  const std::vector<bool> seen = training_mask(model.split, video.length());
  const std::vector<FrameScore> scores = evaluate(model, video);
  write_scores(config.out / "reconstruct.csv", scores, seen);
  std::vector<FrameScore> train;
  for (const FrameScore& s : scores) {
    if (seen[s.frame]) train.push_back(s);
  }
  std::vector<Tensor> frames;
  for (std::size_t i = 0; i < video.length(); ++i) frames.push_back(model.render(double(i)));
  save_frames(VideoSequence(std::move(frames), "reconstruction"), config.out / "reconstruction");
  return {{"command", "reconstruct"},
          {"psnr", pooled_psnr(scores)},
          {"train_psnr", pooled_psnr(train)},
          {"frames", scores.size()}};
}

nlohmann::json cmd_interpolate(const RunConfig& config) {
  const Model model = load_model(config.model_path());
  const VideoSequence video = config.load_video();
  check_video_matches(model, video);
  const std::vector<bool> seen = training_mask(model.split, video.length());
  const std::vector<FrameScore> scores = evaluate(model, video);
  write_scores(config.out / "interpolate.csv", scores, seen);
  std::vector<FrameScore> a;
  std::vector<FrameScore> b;
  for (const FrameScore& s : scores) (seen[s.frame] ? a : b).push_back(s);
  nlohmann::json summary = {{"command", "interpolate"},
                            {"seen_frames", a.size()},
                            {"unseen_frames", b.size()},
                            {"seen_psnr", pooled_psnr(a)}};
  summary["unseen_psnr"] = b.empty() ? nlohmann::json(nullptr) : nlohmann::json(pooled_psnr(b));
  return summary;
}

nlohmann::json cmd_compress(const RunConfig& config) {
  const Model model = load_model(config.model_path());
  const Compressed c = compress(model, config.compress);
  std::filesystem::create_directories(config.compressed_path().parent_path());
  write_file(config.compressed_path(), c.bytes);
  const DecoderConfig& d = model.decoder.config();
  const double bpp = bits_per_pixel(c.report.total_bits, model.video_length,
                                    d.output_height(), d.output_width());
  nlohmann::json summary = {{"command", "compress"},
                            {"total_bits", c.report.total_bits},
                            {"payload_bits", c.report.payload_bits},
                            {"header_bits", c.report.header_bits},
                            {"key_bits", c.report.key_bits},
                            {"parameters", c.report.parameter_count},
                            {"pruned", c.report.pruned},
                            {"bpp", bpp},
                            {"output", config.compressed_path().string()}};
  std::ofstream out = open_csv(config.out / "compress.csv");
  out << "total_bits,payload_bits,header_bits,key_bits,parameters,pruned,bpp,psnr_float,"
         "psnr_compressed\n";
  double before = 0.0;
  double after = 0.0;
  if (config.has_video()) {
    const VideoSequence video = config.load_video();
    check_video_matches(model, video);
    before = pooled_psnr(evaluate(model, video));
    after = pooled_psnr(evaluate(c.model, video));
    summary["psnr_float"] = before;
    summary["psnr_compressed"] = after;
  }
  out << fmt::format("{},{},{},{},{},{},{:.17g},{:.17g},{:.17g}\n", c.report.total_bits,
                     c.report.payload_bits, c.report.header_bits, c.report.key_bits,
                     c.report.parameter_count, c.report.pruned, bpp, before, after);
  return summary;
}

nlohmann::json cmd_decompress(const RunConfig& config) {
  const std::vector<std::uint8_t> bytes = read_file(config.compressed_path());
  if (container_encoding(bytes) != Encoding::kQuantized) {
    throw ContainerError(config.compressed_path().string() + " is not a quantized container");
  }
  const Model model = decompress(bytes);
  const std::filesystem::path path = config.out / "model_dq.tnrv";
  std::filesystem::create_directories(config.out);
  write_file(path, encode_float32(model));
  return {{"command", "decompress"}, {"output", path.string()}};
}

nlohmann::json cmd_analyze(const RunConfig& config) {
  const Model model = load_model(config.model_path());
  const VideoSequence video = config.load_video();
  check_video_matches(model, video);
  const Analysis a = analyze(model, video);
  write_analysis(a, config.out / "analysis");
  return {{"command", "analyze"},
          {"correlation", a.correlation},
          {"grown_keys", a.grown_keys.size()},
          {"grown_second_half", a.grown_second_half}};
}

nlohmann::json run_command(std::string_view command, const RunConfig& config) {
  if (command == "synth") return cmd_synth(config);
  if (command == "fit") return cmd_fit(config);
  if (command == "reconstruct") return cmd_reconstruct(config);
  if (command == "interpolate") return cmd_interpolate(config);
  if (command == "compress") return cmd_compress(config);
  if (command == "decompress") return cmd_decompress(config);
  if (command == "analyze") return cmd_analyze(config);
  throw std::invalid_argument("unknown command '" + std::string(command) + "'");
}

}  // namespace treenerv
