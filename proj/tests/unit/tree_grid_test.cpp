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

#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "treenerv/tree_grid.hpp"

#include "../support/oracles.hpp"

using namespace treenerv;

namespace {

TreeGrid preorder_tree(const std::vector<double>& keys) {
  std::vector<Bound> nodes;
  for (double k : keys) nodes.push_back({k, oracle::scalar_value(k)});
  return TreeGrid::from_preorder(FeatureShape{1, 1, 1}, std::move(nodes));
}

}  // namespace

TEST_SUITE("tree_grid") {

TEST_CASE("from_uniform key placement") {
  TreeGrid g = TreeGrid::from_uniform(5, 5, {1, 1, 2});
  CHECK(g.in_order_keys() == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(g.validate().ok);

  TreeGrid paper = TreeGrid::from_uniform(600, 60, {1, 1, 1});
  const std::vector<double> keys = paper.in_order_keys();
  REQUIRE(keys.size() == 60);
  for (std::size_t i = 1; i < keys.size(); ++i) {
    CHECK(keys[i] - keys[i - 1] == doctest::Approx(599.0 / 59.0));
  }
  CHECK(keys.front() == 0.0);
  CHECK(keys.back() == 599.0);

  for (float v : paper.root()->value.data()) {
    CHECK(v >= -1e-2f);
    CHECK(v <= 1e-2f);
  }
  CHECK_THROWS_AS(TreeGrid::from_uniform(10, 1, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(TreeGrid::from_uniform(10, 11, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("from_uniform is deterministic in the seed") {
  TreeGrid a = TreeGrid::from_uniform(20, 5, {2, 2, 2}, 9);
  TreeGrid b = TreeGrid::from_uniform(20, 5, {2, 2, 2}, 9);
  TreeGrid c = TreeGrid::from_uniform(20, 5, {2, 2, 2}, 10);
  const auto va = a.values_in_order(), vb = b.values_in_order(), vc = c.values_in_order();
  bool differs = false;
  for (std::size_t i = 0; i < va.size(); ++i) {
    for (std::size_t j = 0; j < va[i].numel(); ++j) {
      CHECK(va[i][j] == vb[i][j]);
      differs = differs || va[i][j] != vc[i][j];
    }
  }
  CHECK(differs);
}

TEST_CASE("query_bounds examples") {
  TreeGrid g = oracle::scalar_tree({0, 4, 8});
  BoundPair b = g.query_bounds(2);
  CHECK(b.lower.key == 0);
  CHECK(b.upper.key == 4);
  b = g.query_bounds(4);
  CHECK(b.lower.key == 4);
  CHECK(b.upper.key == 4);
  CHECK(b.lower.value.same_storage(b.upper.value));
  b = g.query_bounds(9);
  CHECK(b.lower.key == 8);
  CHECK(b.upper.key == 8);
  b = g.query_bounds(-3);
  CHECK(b.lower.key == 0);
  CHECK(b.upper.key == 0);
  CHECK_THROWS_AS(TreeGrid(FeatureShape{1, 1, 1}).query_bounds(0), std::logic_error);
}

TEST_CASE("query_bounds matches the linear-scan oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 128;
    std::vector<double> keys;
    TreeGrid g = oracle::random_tree(rng, n, &keys);
    std::sort(keys.begin(), keys.end());
    std::uniform_real_distribution<double> t_dist(-2.0, keys.back() + 2.0);
    for (int q = 0; q < 100; ++q) {
      const double t = q % 4 == 0 ? keys[rng() % n] : t_dist(rng);
      const BoundPair b = g.query_bounds(t);
      const auto [lo, hi] = oracle::linear_bounds(keys, t);
      CHECK(b.lower.key == lo);
      CHECK(b.upper.key == hi);
      CHECK(int(b.visited) <= g.height() + 1);
    }
  }
}

TEST_CASE("time_embedding interpolation") {
  TreeGrid g(FeatureShape{1, 1, 1});
  g.insert(0, oracle::scalar_value(1.0));
  g.insert(10, oracle::scalar_value(3.0));
  CHECK(g.time_embedding(2.5)[0] == doctest::Approx(1.5));
  CHECK(g.time_embedding(0)[0] == 1.0f);
  CHECK(g.time_embedding(10)[0] == 3.0f);
  CHECK(g.time_embedding(5)[0] == doctest::Approx(2.0));
  CHECK(g.time_embedding(-1)[0] == 1.0f);
  CHECK(g.time_embedding(11)[0] == 3.0f);

  const BoundPair b = g.query_bounds(7.5);
  const auto [wl, wu] = TreeGrid::interpolation_weights(b, 7.5);
  CHECK(wl == doctest::Approx(0.25));
  CHECK(wu == doctest::Approx(0.75));
}

TEST_CASE("time_embedding is continuous, piecewise linear and exact at keys") {
  TreeGrid g = TreeGrid::from_uniform(31, 7, {1, 2, 3}, 3);
  const std::vector<double> keys = g.in_order_keys();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Tensor at = g.time_embedding(keys[i]);
    const Tensor& v = g.find(keys[i])->value;
    for (std::size_t j = 0; j < v.numel(); ++j) CHECK(at[j] == v[j]);
    const Tensor before = g.time_embedding(keys[i] - 1e-6);
    const Tensor after = g.time_embedding(keys[i] + 1e-6);
    for (std::size_t j = 0; j < v.numel(); ++j) {
      CHECK(std::abs(before[j] - v[j]) < 1e-7);
      CHECK(std::abs(after[j] - v[j]) < 1e-7);
    }
    if (i + 1 == keys.size()) continue;
    // Linear on each interval: the quarter points line up with the ends.
    const double span = keys[i + 1] - keys[i];
    const Tensor q1 = g.time_embedding(keys[i] + 0.25 * span);
    const Tensor q3 = g.time_embedding(keys[i] + 0.75 * span);
    const Tensor& u = g.find(keys[i + 1])->value;
    for (std::size_t j = 0; j < v.numel(); ++j) {
      CHECK(q1[j] == doctest::Approx(0.75 * v[j] + 0.25 * u[j]).epsilon(1e-6));
      CHECK(q3[j] == doctest::Approx(0.25 * v[j] + 0.75 * u[j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("interpolation weights sum to one") {
  std::mt19937_64 rng(6);
  TreeGrid g = oracle::random_tree(rng, 50);
  std::uniform_real_distribution<double> t(0, 50);
  for (int i = 0; i < 1000; ++i) {
    const double q = t(rng);
    const BoundPair b = g.query_bounds(q);
    if (b.single()) continue;
    const auto [wl, wu] = TreeGrid::interpolation_weights(b, q);
    CHECK(std::abs(wl + wu - 1.0) <= 1e-12);
    CHECK(wl >= 0.0);
    CHECK(wu >= 0.0);
  }
}

TEST_CASE("gradients reach the two bound values") {
  TreeGrid g = oracle::scalar_tree({0, 4, 8});
  Tape tape;
  Tensor e = g.time_embedding(1.0, &tape);
  tape.backward(sum(e, &tape));
  CHECK(g.find(0)->value.grad()[0] == doctest::Approx(0.75));
  CHECK(g.find(4)->value.grad()[0] == doctest::Approx(0.25));
  CHECK_FALSE(g.find(8)->value.has_grad());
}

TEST_CASE("insert errors") {
  TreeGrid g = oracle::scalar_tree({1, 2});
  CHECK_THROWS_AS(g.insert(1, oracle::scalar_value(0)), std::invalid_argument);
  CHECK_THROWS_AS(g.insert(3, Tensor::zeros({1, 1, 2})), ShapeError);
  CHECK(g.size() == 2);
  CHECK(g.validate().ok);
}

TEST_CASE("rotation cases") {
  CHECK(structure_string(oracle::scalar_tree({1, 2, 3})) == "2(1,3)");
  CHECK(structure_string(oracle::scalar_tree({5, 3, 1})) == "3(1,5)");
  CHECK(structure_string(oracle::scalar_tree({5, 3, 4})) == "4(3,5)");
  CHECK(structure_string(oracle::scalar_tree({4, 6, 7})) == "6(4,7)");
  CHECK(structure_string(oracle::scalar_tree({4, 6, 5})) == "5(4,6)");

  TreeGrid right = preorder_tree({6, 4, 2, 5, 7});
  CHECK(structure_string(right) == "6(4(2,5),7)");
  right.insert(1, oracle::scalar_value(1));
  CHECK(structure_string(right) == "4(2(1,-),6(5,7))");

  TreeGrid left = preorder_tree({3, 2, 5, 4, 6});
  left.insert(7, oracle::scalar_value(7));
  CHECK(structure_string(left) == "5(3(2,4),6(-,7))");
}

TEST_CASE("AVL invariants under random insertion orders") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> keys;
    TreeGrid g(FeatureShape{1, 1, 1});
    const std::size_t n = 1 + rng() % 400;
    std::vector<double> pool;
    for (std::size_t i = 0; i < n; ++i) pool.push_back(double(i));
    if (trial % 3 != 0) std::shuffle(pool.begin(), pool.end(), rng);
    for (double k : pool) {
      const std::vector<double> before = g.in_order_keys();
      g.insert(k, oracle::scalar_value(k));
      REQUIRE(g.validate().ok);
      std::vector<double> expect = before;
      expect.insert(std::upper_bound(expect.begin(), expect.end(), k), k);
      REQUIRE(g.in_order_keys() == expect);
    }
    CHECK(g.size() == n);
    CHECK(double(g.height()) <= oracle::avl_height_bound(n));
    CHECK(g.height() == oracle::height_of(g.root()));
  }
}

TEST_CASE("midpoint_insert") {
  TreeGrid g(FeatureShape{1, 1, 2});
  g.insert(10, Tensor::zeros({1, 1, 2}, true));
  g.insert(20, Tensor::filled({1, 1, 2}, 1.0f, true));
  CHECK(g.midpoint_insert(10, 20) == 15.0);
  const FeatureNode* mid = g.find(15);
  REQUIRE(mid != nullptr);
  CHECK(mid->value[0] == 0.5f);
  CHECK(mid->value[1] == 0.5f);
  CHECK(mid->value.requires_grad());
  CHECK_FALSE(mid->value.same_storage(g.find(10)->value));
  CHECK_THROWS_AS(g.midpoint_insert(10, 20), std::invalid_argument);
  CHECK_THROWS_AS(g.midpoint_insert(20, 10), std::invalid_argument);
  CHECK_THROWS_AS(g.midpoint_insert(10, 11), std::invalid_argument);

  TreeGrid unit = oracle::scalar_tree({0, 1});
  CHECK(unit.midpoint_insert(0, 1) == 0.5);
}

TEST_CASE("in_order_keys") {
  CHECK(TreeGrid(FeatureShape{1, 1, 1}).in_order_keys().empty());
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    TreeGrid g = oracle::random_tree(rng, 1 + rng() % 60);
    const std::vector<double> keys = g.in_order_keys();
    CHECK(keys.size() == g.size());
    CHECK(std::adjacent_find(keys.begin(), keys.end(), std::greater_equal<>()) == keys.end());
  }
}

TEST_CASE("validate reports corruption") {
  TreeGrid g = oracle::scalar_tree({1, 2, 3, 4, 5});
  CHECK(g.validate().ok);
  g.find(4)->height = 7;
  const ValidationReport bad = g.validate();
  CHECK_FALSE(bad.ok);
  CHECK(bad.message.find("height") != std::string::npos);

  TreeGrid order = oracle::scalar_tree({1, 2, 3});
  order.find(1)->key = 2.5;
  const ValidationReport unordered = order.validate();
  CHECK_FALSE(unordered.ok);

  CHECK_THROWS_AS(preorder_tree({1, 2, 3}), std::invalid_argument);
}

TEST_CASE("clone and preorder roundtrip") {
  std::mt19937_64 rng(21);
  TreeGrid g = oracle::random_tree(rng, 40);
  TreeGrid c = g.clone();
  CHECK(structure_string(c) == structure_string(g));
  c.find(c.in_order_keys()[0])->value[0] = 99.0f;
  CHECK(g.find(g.in_order_keys()[0])->value[0] != 99.0f);
}

}  // TEST_SUITE
