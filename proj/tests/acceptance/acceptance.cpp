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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <fmt/core.h>

#include "treenerv/container.hpp"
#include "treenerv/decoder.hpp"
#include "treenerv/huffman.hpp"
#include "treenerv/metrics.hpp"
#include "treenerv/prune.hpp"
#include "treenerv/quantize.hpp"
#include "treenerv/trainer.hpp"
#include "treenerv/tree_grid.hpp"
#include "treenerv/video.hpp"

#include "../support/oracles.hpp"
#include "../support/reference.hpp"

using namespace treenerv;

namespace {

constexpr double kGradTol = 1e-3;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

// ---- 1 ---------------------------------------------------------------------

Outcome query_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::size_t queries = 0;
  const std::size_t trees = 1000;
  for (std::size_t tree = 0; tree < trees && o.pass; ++tree) {
    const std::size_t n = 1 + rng() % 512;
    std::vector<double> keys;
    const TreeGrid g = oracle::random_tree(rng, n, &keys);
    std::sort(keys.begin(), keys.end());
    std::uniform_real_distribution<double> span(keys.front() - 2.0, keys.back() + 2.0);
    for (int q = 0; q < 100; ++q) {
      // Mix exact keys, quarter-unit grid points and arbitrary times.
      double t = span(rng);
      if (q % 4 == 0) t = keys[rng() % keys.size()];
      if (q % 4 == 1) t = std::round(t * 8.0) / 8.0;
      const BoundPair b = g.query_bounds(t);
      const auto [lo, hi] = oracle::linear_bounds(keys, t);
      ++queries;
      if (b.lower.key != lo || b.upper.key != hi) {
        o.fail(fmt::format("tree {} (n={}) t={}: got ({}, {}), oracle ({}, {})", tree, n, t,
                           b.lower.key, b.upper.key, lo, hi));
        break;
      }
    }
  }
  if (o.pass) o.detail = fmt::format("{} trees, {} queries, exact", trees, queries);
  return o;
}

// ---- 2 ---------------------------------------------------------------------

void check_avl(const TreeGrid& g, Outcome& o, const std::string& where) {
  const ValidationReport r = g.validate();
  if (!r) o.fail(where + ": " + r.message);
  if (oracle::height_of(g.root()) != g.height()) o.fail(where + ": stored height is stale");
  if (double(g.height()) > oracle::avl_height_bound(g.size())) {
    o.fail(fmt::format("{}: height {} exceeds bound {:.2f} at n={}", where, g.height(),
                       oracle::avl_height_bound(g.size()), g.size()));
  }
}

Outcome avl_invariants() {
  Outcome o;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  TreeGrid g(FeatureShape{1, 1, 1});
  std::size_t inserted = 0;
  while (inserted < 10000) {
    const double k = u(rng);
    if (g.find(k) != nullptr) continue;
    g.insert(k, oracle::scalar_value(k));
    ++inserted;
    if (inserted % 1000 == 0) check_avl(g, o, fmt::format("after {} inserts", inserted));
  }
  // Sorted runs are the worst case for an unbalanced tree.
  TreeGrid sorted(FeatureShape{1, 1, 1});
  for (int i = 0; i < 10000; ++i) sorted.insert(double(i), oracle::scalar_value(i));
  check_avl(sorted, o, "10000 ascending inserts");

  // Growth during training.
  const VideoSequence v = synth(SynthKind::kPiecewise, 48, 8, 8, 5);
  DecoderConfig d;
  d.input_shape = {2, 2, 4};
  d.strides = {2, 2};
  d.channels = {8, 8};
  d.min_channels = 4;
  TrainConfig c;
  c.epochs = 12;
  c.warmup_epochs = 2;
  c.growth_interval = 2;
  c.growth_stages = 4;
  c.topk = 5;
  c.init_nodes = 4;
  c.seed = 3;
  std::size_t stages = 0;
  FitObserver obs;
  obs.on_growth = [&](const GrowthEvent& e, const TreeGrid& grid) {
    ++stages;
    check_avl(grid, o, fmt::format("growth stage {}", e.stage));
  };
  const FitResult r = fit(v, d, c, obs);
  if (stages != 4) o.fail(fmt::format("expected 4 growth stages, saw {}", stages));
  if (o.pass) {
    o.detail = fmt::format("10000 random inserts height {} (bound {:.2f}); {} growth stages valid",
                           g.height(), oracle::avl_height_bound(g.size()), stages);
  }
  return o;
}

// ---- 3 ---------------------------------------------------------------------

TreeGrid from_preorder_keys(const std::vector<double>& keys) {
  std::vector<Bound> nodes;
  for (double k : keys) nodes.push_back({k, oracle::scalar_value(k)});
  return TreeGrid::from_preorder(FeatureShape{1, 1, 1}, std::move(nodes));
}

Outcome rotations() {
  Outcome o;
  struct Case {
    const char* name;
    std::vector<double> start;  // pre-order of the starting tree
    std::vector<double> inserts;
    const char* expected;
  };
  const std::vector<Case> cases = {
      {"LL", {}, {5, 3, 1}, "3(1,5)"},
      {"LR", {}, {5, 3, 4}, "4(3,5)"},
      {"RR", {}, {4, 6, 7}, "6(4,7)"},
      {"RL", {}, {4, 6, 5}, "5(4,6)"},
      {"LL, deeper", {6, 4, 2, 5, 7}, {1}, "4(2(1,-),6(5,7))"},
      {"RR, deeper", {3, 2, 5, 4, 6}, {7}, "5(3(2,4),6(-,7))"},
      {"LR, deeper", {6, 2, 1, 4, 7}, {3}, "4(2(1,3),6(-,7))"},
      {"RL, deeper", {2, 1, 6, 4, 7}, {5}, "4(2(1,-),6(5,7))"},
  };
  for (const Case& c : cases) {
    TreeGrid g = c.start.empty() ? TreeGrid(FeatureShape{1, 1, 1}) : from_preorder_keys(c.start);
    for (double k : c.inserts) g.insert(k, oracle::scalar_value(k));
    const std::string got = structure_string(g);
    if (got != c.expected) o.fail(fmt::format("{}: got {}, expected {}", c.name, got, c.expected));
    if (!g.validate()) o.fail(std::string(c.name) + ": invalid after rotation");
  }
  if (o.pass) o.detail = fmt::format("{} cases match exactly", cases.size());
  return o;
}

// ---- 4 ---------------------------------------------------------------------

Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1, double hi = 1,
                     bool grad = true) {
  const std::size_t n = shape_numel(shape);
  return Tensor::from_data(std::move(shape), ref::uniform(rng, n, lo, hi), grad);
}

ref::Vec grad_of(const Tensor& t) { return ref::Vec(t.grad().begin(), t.grad().end()); }

struct GradAudit {
  explicit GradAudit(std::string n) : name(std::move(n)) {}

  std::string name;
  std::size_t instances = 0;
  double worst = 0.0;
  std::string worst_site;
  // max |a - n| / max |n| per tensor; reported, not gated.
  double worst_normwise = 0.0;

  void add(const ref::Vec& analytic, const ref::Vec& numeric) {
    const ref::GradCompare c = ref::compare(analytic, numeric);
    double scale = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      scale = std::max(scale, std::abs(numeric[i]));
      diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    }
    if (scale > 0.0) worst_normwise = std::max(worst_normwise, diff / scale);
    if (c.worst > worst) {
      worst = c.worst;
      worst_site = fmt::format("instance {}: analytic {:.6g} vs numeric {:.6g}, tensor max {:.3g}",
                               instances, analytic[c.worst_index], numeric[c.worst_index], scale);
    }
  }
};

Outcome gradients() {
  Outcome o;
  std::mt19937_64 rng(404);
  const std::size_t trials = 100;
  std::vector<GradAudit> audits;

  {
    GradAudit a{"conv2d"};
    for (std::size_t t = 0; t < trials; ++t, ++a.instances) {
      const std::size_t k = t % 2 == 0 ? 3 : 1;
      const std::size_t ci = 1 + rng() % 3, co = 1 + rng() % 3, h = 1 + rng() % 4,
                        w = 1 + rng() % 4;
      Tensor in = random_tensor(rng, {ci, h, w});
      Tensor wt = random_tensor(rng, {co, ci, k, k});
      Tensor b = random_tensor(rng, {co});
      Tensor target = random_tensor(rng, {co, h, w}, -1, 1, false);
      Tape tape;
      tape.backward(mse_loss(conv2d(in, wt, b, &tape), target, &tape));
      const ref::Vec vi = ref::to_vec(in), vw = ref::to_vec(wt), vb = ref::to_vec(b),
                     vt = ref::to_vec(target);
      a.add(grad_of(in), ref::numeric_grad([&](const ref::Vec& x) {
              return ref::mse(ref::conv2d(x, ci, h, w, vw, vb, co, k), vt);
            }, vi));
      a.add(grad_of(wt), ref::numeric_grad([&](const ref::Vec& x) {
              return ref::mse(ref::conv2d(vi, ci, h, w, x, vb, co, k), vt);
            }, vw));
      a.add(grad_of(b), ref::numeric_grad([&](const ref::Vec& x) {
              return ref::mse(ref::conv2d(vi, ci, h, w, vw, x, co, k), vt);
            }, vb));
    }
    audits.push_back(a);
  }
  {
    GradAudit a{"pixel_shuffle"};
    for (std::size_t t = 0; t < trials; ++t, ++a.instances) {
      const std::size_t s = 1 + rng() % 3, c = 1 + rng() % 2, h = 1 + rng() % 3, w = 1 + rng() % 3;
      Tensor in = random_tensor(rng, {c * s * s, h, w});
      Tensor target = random_tensor(rng, {c, h * s, w * s}, -1, 1, false);
      Tape tape;
      tape.backward(mse_loss(pixel_shuffle(in, s, &tape), target, &tape));
      const ref::Vec vt = ref::to_vec(target);
      a.add(grad_of(in), ref::numeric_grad([&](const ref::Vec& x) {
              return ref::mse(ref::pixel_shuffle(x, c * s * s, h, w, s), vt);
            }, ref::to_vec(in)));
    }
    audits.push_back(a);
  }
  for (const bool is_gelu : {true, false}) {
    GradAudit a{is_gelu ? "gelu" : "sigmoid"};
    for (std::size_t t = 0; t < trials; ++t, ++a.instances) {
      const std::size_t n = 1 + rng() % 40;
      Tensor x = random_tensor(rng, {n}, -3, 3);
      Tensor target = random_tensor(rng, {n}, -1, 1, false);
      Tape tape;
      tape.backward(mse_loss(is_gelu ? gelu(x, &tape) : sigmoid(x, &tape), target, &tape));
      const ref::Vec vt = ref::to_vec(target);
      a.add(grad_of(x), ref::numeric_grad([&](const ref::Vec& v) {
              return ref::mse(ref::map(v, is_gelu ? ref::gelu : ref::sigmoid), vt);
            }, ref::to_vec(x)));
    }
    audits.push_back(a);
  }
  {
    GradAudit a{"lerp_combine"};
    for (std::size_t t = 0; t < trials; ++t, ++a.instances) {
      const std::size_t n = 1 + rng() % 30;
      const double wl = std::uniform_real_distribution<double>(0, 1)(rng);
      Tensor lo = random_tensor(rng, {n});
      Tensor hi = random_tensor(rng, {n});
      Tensor target = random_tensor(rng, {n}, -1, 1, false);
      Tape tape;
      tape.backward(mse_loss(lerp_combine(lo, hi, wl, 1.0 - wl, &tape), target, &tape));
      const ref::Vec vl = ref::to_vec(lo), vh = ref::to_vec(hi), vt = ref::to_vec(target);
      const double wlf = double(float(wl)), wuf = double(float(1.0 - wl));
      auto blend = [&](const ref::Vec& l, const ref::Vec& u) {
        ref::Vec out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = wlf * l[i] + wuf * u[i];
        return ref::mse(out, vt);
      };
      a.add(grad_of(lo), ref::numeric_grad([&](const ref::Vec& x) { return blend(x, vh); }, vl));
      a.add(grad_of(hi), ref::numeric_grad([&](const ref::Vec& x) { return blend(vl, x); }, vh));
    }
    audits.push_back(a);
  }
  {
    GradAudit a{"hwc_to_chw"};
    for (std::size_t t = 0; t < trials; ++t, ++a.instances) {
      const std::size_t h = 1 + rng() % 3, w = 1 + rng() % 3, c = 1 + rng() % 4;
      Tensor x = random_tensor(rng, {h, w, c});
      Tensor target = random_tensor(rng, {c, h, w}, -1, 1, false);
      Tape tape;
      tape.backward(mse_loss(hwc_to_chw(x, &tape), target, &tape));
      const ref::Vec vt = ref::to_vec(target);
      a.add(grad_of(x), ref::numeric_grad([&](const ref::Vec& v) {
              return ref::mse(ref::hwc_to_chw(v, h, w, c), vt);
            }, ref::to_vec(x)));
    }
    audits.push_back(a);
  }
  {
    GradAudit a{"mse_loss"};
    for (std::size_t t = 0; t < trials; ++t, ++a.instances) {
      const std::size_t n = 1 + rng() % 50;
      Tensor p = random_tensor(rng, {n});
      Tensor q = random_tensor(rng, {n});
      Tape tape;
      tape.backward(mse_loss(p, q, &tape));
      const ref::Vec vp = ref::to_vec(p), vq = ref::to_vec(q);
      a.add(grad_of(p), ref::numeric_grad([&](const ref::Vec& x) { return ref::mse(x, vq); }, vp));
      a.add(grad_of(q), ref::numeric_grad([&](const ref::Vec& x) { return ref::mse(vp, x); }, vq));
    }
    audits.push_back(a);
  }
  {
    GradAudit a{"sum"};
    for (std::size_t t = 0; t < trials; ++t, ++a.instances) {
      const std::size_t n = 1 + rng() % 50;
      Tensor p = random_tensor(rng, {n});
      Tape tape;
      tape.backward(sum(gelu(p, &tape), &tape));
      a.add(grad_of(p), ref::numeric_grad([&](const ref::Vec& x) {
              const ref::Vec y = ref::map(x, ref::gelu);
              return std::accumulate(y.begin(), y.end(), 0.0);
            }, ref::to_vec(p)));
    }
    audits.push_back(a);
  }
  {
    // Tree query -> interpolated embedding -> decoder -> mse.
    GradAudit a{"embedding->decoder->loss"};
    for (std::size_t t = 0; t < trials; ++t, ++a.instances) {
      DecoderConfig cfg;
      cfg.input_shape = {1 + rng() % 2, 1 + rng() % 2, 4 + rng() % 5};
      cfg.strides = {1 + rng() % 2, 1 + rng() % 2};
      cfg.channels = {4 + rng() % 5, 4};
      cfg.min_channels = 2;
      cfg.output_channels = rng() % 2 ? 3 : 1;
      const Decoder dec(cfg, t);
      const std::size_t length = 8 + rng() % 8;
      const std::size_t nodes = 2 + rng() % 4;
      const TreeGrid grid = TreeGrid::from_uniform(
          length, nodes, cfg.input_shape, t, [&](std::size_t, const FeatureShape& s) {
            return random_tensor(rng, s.as_shape());
          });
      double time = std::uniform_real_distribution<double>(0.0, double(length - 1))(rng);
      BoundPair b = grid.query_bounds(time);
      if (b.single()) {
        time = 0.5 * time + 0.25;  // keep the probe strictly between two keys
        b = grid.query_bounds(time);
      }
      Tensor target = random_tensor(rng, {cfg.output_channels, cfg.output_height(),
                                          cfg.output_width()}, 0, 1, false);
      Tape tape;
      tape.backward(mse_loss(dec.forward(grid.time_embedding(time, &tape), &tape), target, &tape));

      const auto [wl, wu] = TreeGrid::interpolation_weights(b, time);
      const double wlf = double(float(wl)), wuf = double(float(wu));
      const ref::Vec vl = ref::to_vec(b.lower.value), vu = ref::to_vec(b.upper.value);
      const ref::Vec vt = ref::to_vec(target);
      const std::vector<ref::Vec> params = ref::decoder_params(dec);
      auto loss = [&](const ref::Vec& l, const ref::Vec& u, const std::vector<ref::Vec>& p) {
        ref::Vec e(l.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = wlf * l[i] + wuf * u[i];
        return ref::mse(ref::decoder_forward(cfg, p, e), vt);
      };
      a.add(grad_of(b.lower.value),
            ref::numeric_grad([&](const ref::Vec& x) { return loss(x, vu, params); }, vl));
      a.add(grad_of(b.upper.value),
            ref::numeric_grad([&](const ref::Vec& x) { return loss(vl, x, params); }, vu));
      const std::vector<Tensor> tensors = dec.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        a.add(grad_of(tensors[p]), ref::numeric_grad([&](const ref::Vec& x) {
                std::vector<ref::Vec> probe = params;
                probe[p] = x;
                return loss(vl, vu, probe);
              }, params[p]));
      }
    }
    audits.push_back(a);
  }

  std::string summary;
  for (const GradAudit& a : audits) {
    if (a.worst >= kGradTol) {
      o.fail(fmt::format("{}: worst relative error {:.3g} over {} instances at {}; "
                         "worst normwise error {:.2g}",
                         a.name, a.worst, a.instances, a.worst_site, a.worst_normwise));
    }
    summary += fmt::format("{}{} {:.2g}", summary.empty() ? "" : ", ", a.name, a.worst);
  }
  if (o.pass) o.detail = fmt::format("{} instances each; worst rel err: {}", trials, summary);
  return o;
}

// ---- 5 ---------------------------------------------------------------------

Outcome parameter_accounting() {
  Outcome o;
  std::mt19937_64 rng(505);
  const std::size_t configs = 500;
  for (std::size_t i = 0; i < configs; ++i) {
    DecoderConfig c;
    c.input_shape = {1 + rng() % 3, 1 + rng() % 3, 1 + rng() % 40};
    c.strides = {1 + rng() % 4};
    c.channels = {1 + rng() % 48};
    c.min_channels = 1;
    const Decoder dec(c, i);
    const NervBlock& block = dec.blocks().front();
    std::size_t built = 0;
    for (const ConvLayer& conv : block.convs) built += conv.weight.numel();
    const std::size_t d = c.input_shape.depth, out = c.channels[0], s = c.strides[0];
    const std::size_t dp = std::max<std::size_t>(1, std::min(d, out) / 4);
    const std::size_t expected = 9 * dp * (d * s * s + out);
    if (block.kind != BlockKind::kEnerv || built != expected) {
      o.fail(fmt::format("d={} O={} S={}: built {}, expected {}", d, out, s, built, expected));
      break;
    }
  }
  DecoderConfig c;
  c.input_shape = {2, 2, 16};
  c.strides = {2};
  c.channels = {16};
  const Decoder dec(c, 0);
  std::size_t built = 0;
  for (const ConvLayer& conv : dec.blocks().front().convs) built += conv.weight.numel();
  if (c.bottleneck() != 4) o.fail(fmt::format("d'={} for d=16,O=16", c.bottleneck()));
  if (built != 2880) o.fail(fmt::format("d=16,O=16,S=2,d'=4 built {} weights", built));
  if (o.pass) o.detail = fmt::format("{} random configs exact; reference case {}", configs, built);
  return o;
}

// ---- 6 ---------------------------------------------------------------------

Outcome growth_arithmetic() {
  Outcome o;
  const VideoSequence v = synth(SynthKind::kSmooth, 600, 4, 4, 6);
  DecoderConfig d;
  d.input_shape = {1, 1, 4};
  d.strides = {2, 2};
  d.channels = {4, 4};
  d.min_channels = 4;
  TrainConfig c;
  c.init_ratio = 0.1;
  c.growth_stages = 4;
  c.topk = 10;
  c.epochs = 5;
  c.warmup_epochs = 1;
  c.growth_interval = 1;
  std::vector<std::size_t> sizes;
  FitObserver obs;
  obs.on_growth = [&](const GrowthEvent& e, const TreeGrid& g) {
    if (e.keys.size() != 10) o.fail(fmt::format("stage {} inserted {}", e.stage, e.keys.size()));
    sizes.push_back(g.size());
  };
  const std::size_t init = c.initial_nodes(v.length());
  const FitResult r = fit(v, d, c, obs);
  if (init != 60) o.fail(fmt::format("initial nodes {}", init));
  if (r.model.grid.size() != 100) o.fail(fmt::format("final nodes {}", r.model.grid.size()));
  if (sizes != std::vector<std::size_t>{70, 80, 90, 100}) o.fail("stage sizes differ from 70/80/90/100");
  if (o.pass) o.detail = "60 -> 70 -> 80 -> 90 -> 100";
  return o;
}

// ---- 7 ---------------------------------------------------------------------

Outcome adaptive_vs_uniform() {
  Outcome o;
  const std::size_t length = 64;
  const VideoSequence v = synth(SynthKind::kStaticDynamic, length, 32, 64, 1);
  const DecoderConfig d;
  TrainConfig adaptive;
  adaptive.init_nodes = 5;
  adaptive.topk = 4;
  adaptive.growth_stages = 4;
  adaptive.seed = 1;
  std::vector<double> grown;
  FitObserver obs;
  obs.on_growth = [&](const GrowthEvent& e, const TreeGrid& g) {
    grown.insert(grown.end(), e.keys.begin(), e.keys.end());
    check_avl(g, o, fmt::format("adaptive growth stage {}", e.stage));
  };
  const FitResult a = fit(v, d, adaptive, obs);
  const std::size_t n = a.model.grid.size();

  TrainConfig uniform = adaptive;
  uniform.init_nodes = n;
  uniform.growth_stages = 0;
  const FitResult u = fit(v, d, uniform);

  const double pa = pooled_psnr(evaluate(a.model, v));
  const double pu = pooled_psnr(evaluate(u.model, v));
  const double mid = double(length - 1) / 2.0;
  const auto late = std::count_if(grown.begin(), grown.end(), [&](double k) { return k > mid; });
  const double placement = grown.empty() ? 0.0 : double(late) / double(grown.size());
  const std::string detail =
      fmt::format("n={} adaptive {:.3f} dB vs uniform {:.3f} dB (margin {:+.3f}); "
                  "{}/{} grown keys in dynamic half ({:.0f}%)",
                  n, pa, pu, pa - pu, late, grown.size(), 100.0 * placement);
  if (u.model.grid.size() != n) o.fail("uniform baseline node count differs");
  if (!(pa - pu >= 0.0)) o.fail("PSNR margin below 0 dB: " + detail);
  if (!(placement >= 0.7)) o.fail("placement below 70%: " + detail);
  if (o.pass) o.detail = detail;
  return o;
}

// ---- 8 and 9 share the trained smooth model ----------------------------------

struct SmoothRun {
  VideoSequence video = synth(SynthKind::kSmooth, 64, 32, 64, 1);
  std::optional<FitResult> full;
};

Outcome training_sanity(SmoothRun& run) {
  Outcome o;
  const DecoderConfig d;
  const TrainConfig c;
  run.full = fit(run.video, d, c);
  TrainConfig short_cfg = c;
  short_cfg.epochs = 100;
  const FitResult brief = fit(run.video, d, short_cfg);
  const double p300 = run.full->train_psnr;
  const double p100 = brief.train_psnr;
  const std::string detail = fmt::format("PSNR(300)={:.3f} dB, PSNR(100)={:.3f} dB", p300, p100);
  if (!(p300 >= 30.0)) o.fail("below 30 dB: " + detail);
  if (!(p300 > p100)) o.fail("300 epochs not better than 100: " + detail);
  if (o.pass) o.detail = detail;
  return o;
}

Outcome codec(const SmoothRun& run) {
  Outcome o;
  std::mt19937_64 rng(909);
  std::size_t streams = 0;
  for (int trial = 0; trial < 500; ++trial, ++streams) {
    const unsigned width = 1 + unsigned(rng() % 16);
    const std::uint32_t alphabet = std::uint32_t(1) << width;
    const std::size_t len = rng() % 5000;
    std::geometric_distribution<std::uint32_t> skew(0.05 + 0.5 * double(trial % 10) / 10.0);
    std::vector<std::uint32_t> s(len);
    for (auto& x : s) x = std::min(alphabet - 1, trial % 3 == 0 ? std::uint32_t(rng() % alphabet)
                                                                : skew(rng));
    const EncodedStream e = entropy_encode(s, width);
    if (entropy_decode(e.bytes, e.bit_length) != s) {
      o.fail(fmt::format("entropy roundtrip mismatch on stream {}", trial));
      break;
    }
  }

  double worst_ratio = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const unsigned bits = 2 + unsigned(rng() % 15);
    const std::size_t n = 1 + rng() % 2000;
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-4, 2)(rng));
    const std::vector<float> values = ref::uniform(rng, n, -scale, scale);
    const QuantizedTensor q = quantize_affine(Tensor::from_data({n}, values), bits);
    const QuantParams& p = q.params;
    for (std::size_t i = 0; i < n; ++i) {
      const double err = std::abs(double(values[i]) - (p.zero_point + p.scale * double(q.symbols[i])));
      if (p.scale > 0.0) worst_ratio = std::max(worst_ratio, err / p.scale);
      if (err > p.scale / 2.0) {
        o.fail(fmt::format("quantization error {} exceeds scale/2 = {}", err, p.scale / 2.0));
        break;
      }
    }
  }

  const Model& model = run.full->model;
  const Compressed c = compress(model, {0.1, 8});
  const Model restored = decompress(c.bytes);
  const double before = pooled_psnr(evaluate(model, run.video));
  const double after = pooled_psnr(evaluate(restored, run.video));
  const double bpp = bits_per_pixel(c.report.total_bits, run.video.length(), run.video.height(),
                                    run.video.width());
  // Attribution of the drop: pruning alone and quantization alone.
  Model pruned = model.clone();
  pruned.decoder = prune_global(model.decoder, 0.1).decoder;
  const double prune_only = pooled_psnr(evaluate(pruned, run.video));
  const double quant_only = pooled_psnr(evaluate(compress(model, {0.0, 8}).model, run.video));
  const std::string detail = fmt::format(
      "{} streams bit-exact; worst quant err {:.3f} step; float {:.3f} dB -> compressed {:.3f} dB "
      "(delta {:.3f}; prune only {:.3f}, 8-bit only {:.3f}) at {:.3f} bpp",
      streams, worst_ratio, before, after, before - after, before - prune_only,
      before - quant_only, bpp);
  if (!(std::abs(before - after) <= 1.0)) o.fail("PSNR delta above 1 dB: " + detail);
  if (o.pass) o.detail = detail;
  return o;
}

// ---- 10 --------------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  const VideoSequence v = synth(SynthKind::kStaticDynamic, 24, 16, 16, 10);
  DecoderConfig d;
  d.input_shape = {2, 2, 8};
  d.strides = {2, 2, 2};
  d.channels = {16, 8};
  TrainConfig c;
  c.epochs = 20;
  c.warmup_epochs = 4;
  c.growth_interval = 3;
  c.growth_stages = 3;
  c.topk = 2;
  c.init_nodes = 4;
  c.seed = 77;
  const std::vector<std::uint8_t> first = encode_float32(fit(v, d, c).model);
  const std::vector<std::uint8_t> second = encode_float32(fit(v, d, c).model);
  if (first != second) o.fail("float32 containers differ");
  const Model m = decompress(first);
  if (compress(m).bytes != compress(decompress(second)).bytes) o.fail("quantized containers differ");
  if (o.pass) o.detail = fmt::format("two fits -> identical {}-byte containers", first.size());
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  SmoothRun smooth;
  const std::vector<Criterion> criteria = {
      {1, "query-oracle equivalence", query_oracle},
      {2, "AVL invariants", avl_invariants},
      {3, "rotation correctness", rotations},
      {4, "gradient fidelity", gradients},
      {5, "parameter accounting", parameter_accounting},
      {6, "growth schedule arithmetic", growth_arithmetic},
      {7, "adaptive vs uniform", adaptive_vs_uniform},
      {8, "training sanity", [&] { return training_sanity(smooth); }},
      {9, "codec", [&] { return codec(smooth); }},
      {10, "determinism", determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("criterion {:>2} {} {} ({:.1f}s): {}\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
               secs, o.detail);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - std::size_t(failures),
             criteria.size());
  return failures == 0 ? 0 : 1;
}
