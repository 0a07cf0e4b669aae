// SPDX-License-Identifier: Apache-2.0

#include "ipd/matching.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "ipd/errors.h"
#include "test_util.h"

namespace ipd {
namespace {

using testing::brute_force_min_cost;
using testing::uniform;

double total_cost(const std::vector<double>& cost, int cols,
                  const std::vector<std::pair<int, int>>& assignment) {
  double total = 0.0;
  for (const auto& [r, c] : assignment) total += cost[r * cols + c];
  return total;
}

void expect_one_to_one(const std::vector<std::pair<int, int>>& a, int rows,
                       int cols) {
  std::set<int> rs, cs;
  for (const auto& [r, c] : a) {
    ASSERT_GE(r, 0);
    ASSERT_LT(r, rows);
    ASSERT_GE(c, 0);
    ASSERT_LT(c, cols);
    ASSERT_TRUE(rs.insert(r).second);
    ASSERT_TRUE(cs.insert(c).second);
  }
  ASSERT_EQ(a.size(), static_cast<size_t>(std::min(rows, cols)));
}

TEST(AssignmentTest, SingleCell) {
  const std::vector<double> cost = {3.5};
  EXPECT_EQ(assignment_min_cost(cost, 1, 1),
            (std::vector<std::pair<int, int>>{{0, 0}}));
}

TEST(AssignmentTest, DominantDiagonal) {
  const std::vector<double> cost = {1, 10, 10, 1};
  const auto a = assignment_min_cost(cost, 2, 2);
  EXPECT_EQ(a, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
  EXPECT_EQ(total_cost(cost, 2, a), 2.0);
}

TEST(AssignmentTest, EmptyDimensions) {
  EXPECT_TRUE(assignment_min_cost({}, 0, 4).empty());
  EXPECT_TRUE(assignment_min_cost({}, 3, 0).empty());
}

TEST(AssignmentTest, RejectsBadCosts) {
  std::vector<double> cost = {1, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(assignment_min_cost(cost, 1, 2), InputError);
  cost = {1, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(assignment_min_cost(cost, 1, 2), InputError);
  cost = {1, -1};
  EXPECT_THROW(assignment_min_cost(cost, 1, 2), InputError);
  cost = {1, 2, 3};
  EXPECT_THROW(assignment_min_cost(cost, 2, 2), InputError);
}

TEST(AssignmentTest, FiveBySevenMatchesBruteForce) {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> cost(35);
    for (double& c : cost) c = uniform(rng, 0, 100);
    const auto a = assignment_min_cost(cost, 5, 7);
    expect_one_to_one(a, 5, 7);
    EXPECT_EQ(total_cost(cost, 7, a), brute_force_min_cost(cost, 5, 7));
  }
}

TEST(AssignmentTest, RandomShapesMatchBruteForce) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 150; ++trial) {
    const int rows = 1 + static_cast<int>(rng() % 8);
    const int cols = 1 + static_cast<int>(rng() % 8);
    std::vector<double> cost(static_cast<size_t>(rows * cols));
    // Small integer costs force many ties.
    const bool integral = trial % 2 == 0;
    for (double& c : cost) {
      c = integral ? static_cast<double>(rng() % 5) : uniform(rng, 0, 10);
    }
    const auto a = assignment_min_cost(cost, rows, cols);
    expect_one_to_one(a, rows, cols);
    EXPECT_EQ(total_cost(cost, cols, a), brute_force_min_cost(cost, rows, cols))
        << rows << "x" << cols;
  }
}

TEST(MatchInstancesTest, IdenticalSetsFullyMatched) {
  const std::vector<Point2> pts = {{0, 0}, {10, 3}, {4, 8}};
  const InstancePairing p =
      match_instances(AffineTransform2D::Identity(), pts, pts, 1.0);
  ASSERT_EQ(p.pairs.size(), 3u);
  for (const InstancePair& pair : p.pairs) {
    EXPECT_EQ(pair.real_index, pair.synth_index);
    EXPECT_EQ(pair.distance, 0.0);
  }
  EXPECT_TRUE(p.unmatched_real.empty());
  EXPECT_TRUE(p.unmatched_synth.empty());
}

TEST(MatchInstancesTest, ExtraRealPointLeftUnmatched) {
  const std::vector<Point2> synth = {{0, 0}};
  const std::vector<Point2> real = {{0, 0}, {100, 100}};
  const InstancePairing p =
      match_instances(AffineTransform2D::Identity(), synth, real, 5.0);
  ASSERT_EQ(p.pairs.size(), 1u);
  EXPECT_EQ(p.pairs[0], (InstancePair{0, 0, 0.0}));
  EXPECT_EQ(p.unmatched_real, std::vector<int>{1});
  EXPECT_TRUE(p.unmatched_synth.empty());
  EXPECT_EQ(p.gate_distance, 5.0);
}

TEST(MatchInstancesTest, AppliesTransformToSyntheticSide) {
  const std::vector<Point2> synth = {{0, 0}, {1, 0}};
  const std::vector<Point2> real = {{6, 3}, {5, 3}};
  const InstancePairing p =
      match_instances(AffineTransform2D::Translation(5, 3), synth, real, 0.5);
  ASSERT_EQ(p.pairs.size(), 2u);
  EXPECT_EQ(p.pairs[0], (InstancePair{0, 1, 0.0}));
  EXPECT_EQ(p.pairs[1], (InstancePair{1, 0, 0.0}));
}

TEST(MatchInstancesTest, FarOutlierDoesNotStealPartner) {
  // Unclipped, pairing s1 with the far r1 would pull r0 away from s1.
  const std::vector<Point2> synth = {{0, 0}, {6, 0}};
  const std::vector<Point2> real = {{5, 0}, {100, 0}};
  const InstancePairing p =
      match_instances(AffineTransform2D::Identity(), synth, real, 3.0);
  ASSERT_EQ(p.pairs.size(), 1u);
  EXPECT_EQ(p.pairs[0], (InstancePair{0, 1, 1.0}));
  EXPECT_EQ(p.unmatched_real, std::vector<int>{1});
  EXPECT_EQ(p.unmatched_synth, std::vector<int>{0});
}

TEST(MatchInstancesTest, SixBySixMatchesPermutationOracle) {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> synth(6), real(6);
    for (Point2& p : synth) p = {uniform(rng, 0, 50), uniform(rng, 0, 50)};
    for (Point2& p : real) p = {uniform(rng, 0, 50), uniform(rng, 0, 50)};
    const InstancePairing pairing =
        match_instances(AffineTransform2D::Identity(), synth, real, 1e6);
    ASSERT_EQ(pairing.pairs.size(), 6u);
    double total = 0.0;
    for (const InstancePair& p : pairing.pairs) total += p.distance;

    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    int count = 0;
    do {
      double sum = 0.0;
      for (int r = 0; r < 6; ++r) sum += distance(synth[perm[r]], real[r]);
      best = std::min(best, sum);
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    ASSERT_EQ(count, 720);
    EXPECT_NEAR(total, best, 1e-9);
  }
}

TEST(MatchInstancesTest, PartitionAndGateProperties) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const int ns = static_cast<int>(rng() % 12), nr = static_cast<int>(rng() % 12);
    std::vector<Point2> synth(ns), real(nr);
    for (Point2& p : synth) p = {uniform(rng, 0, 100), uniform(rng, 0, 100)};
    for (Point2& p : real) p = {uniform(rng, 0, 100), uniform(rng, 0, 100)};
    size_t previous = 0;
    for (double gate : {1.0, 5.0, 20.0, 50.0, 200.0}) {
      const InstancePairing p =
          match_instances(AffineTransform2D::Identity(), synth, real, gate);
      std::set<int> rs(p.unmatched_real.begin(), p.unmatched_real.end());
      std::set<int> ss(p.unmatched_synth.begin(), p.unmatched_synth.end());
      for (const InstancePair& pair : p.pairs) {
        EXPECT_LE(pair.distance, gate);
        EXPECT_TRUE(rs.insert(pair.real_index).second);
        EXPECT_TRUE(ss.insert(pair.synth_index).second);
      }
      EXPECT_EQ(p.pairs.size() + p.unmatched_real.size(), static_cast<size_t>(nr));
      EXPECT_EQ(p.pairs.size() + p.unmatched_synth.size(), static_cast<size_t>(ns));
      EXPECT_EQ(rs.size(), static_cast<size_t>(nr));
      EXPECT_EQ(ss.size(), static_cast<size_t>(ns));
      EXPECT_GE(p.pairs.size(), previous) << "gate " << gate;
      previous = p.pairs.size();
    }
  }
}

TEST(MatchInstancesTest, EmptyInputsAndValidation) {
  const std::vector<Point2> pts = {{0, 0}, {1, 1}};
  InstancePairing p = match_instances(AffineTransform2D::Identity(), {}, pts, 1.0);
  EXPECT_TRUE(p.pairs.empty());
  EXPECT_EQ(p.unmatched_real, (std::vector<int>{0, 1}));
  p = match_instances(AffineTransform2D::Identity(), pts, {}, 1.0);
  EXPECT_EQ(p.unmatched_synth, (std::vector<int>{0, 1}));
  EXPECT_THROW(match_instances(AffineTransform2D::Identity(), pts, pts, 0.0),
               InputError);
  AffineTransform2D bad;
  bad.tx = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(match_instances(bad, pts, pts, 1.0), InputError);
}

TEST(DefaultGateTest, HalfMedianDiagonal) {
  const std::vector<BBox> boxes = {{0, 0, 3, 4}, {0, 0, 6, 8}, {0, 0, 30, 40}};
  EXPECT_DOUBLE_EQ(default_gate_distance(boxes), 5.0);
  const std::vector<BBox> two = {{0, 0, 3, 4}, {0, 0, 6, 8}};
  EXPECT_DOUBLE_EQ(default_gate_distance(two), 3.75);
  EXPECT_EQ(default_gate_distance({}), 0.0);
}

}  // namespace
}  // namespace ipd
