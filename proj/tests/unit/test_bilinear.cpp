#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include "mdap/bilinear.hpp"
#include "mdap/exact.hpp"
#include "mdap/exp_random.hpp"

namespace mdap {
namespace {

std::vector<int> random_permutation(int n, std::uint64_t seed) {
  std::vector<int> p = identity_permutation(n);
  std::uint64_t s = seed;
  for (int i = n - 1; i > 0; --i) {
    s = splitmix64(s);
    std::swap(p[i], p[s % static_cast<std::uint64_t>(i + 1)]);
  }
  return p;
}

TEST(BilinearObjective, MatchesPlanarCostOnIdentity) {
  CostTensor t = CostTensor::sample(5, 3, 12);
  std::vector<int> id = identity_permutation(5);
  PlanarAssignment a{5, id, id};
  EXPECT_EQ(bilinear_objective(t, id, id), planar_cost(t, a));
}

TEST(BilinearObjective, RejectsNonPermutations) {
  CostTensor t = CostTensor::sample(3, 3, 1);
  std::vector<int> id = identity_permutation(3);
  EXPECT_THROW(bilinear_objective(t, {0, 0, 1}, id), PreconditionError);
  EXPECT_THROW(bilinear_objective(t, id, {0, 1}), PreconditionError);
  CostTensor flat = CostTensor::sample(3, 2, 1);
  EXPECT_THROW(bilinear_objective(flat, id, id), PreconditionError);
}

TEST(SolveFixedZ, FindsPlantedDiagonal) {
  // c(i,j,k) = 0 when j == i, else 1: with z = id the best y is the identity.
  int n = 4;
  std::vector<double> costs(64, 1.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) costs[(i * n + i) * n + k] = 0.0;
  CostTensor t(3, n, costs);
  auto [y, v] = solve_fixed_z(t, identity_permutation(n));
  EXPECT_EQ(y, identity_permutation(n));
  EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(SolveFixedZ, ExhaustiveTwoByTwo) {
  CostTensor t = CostTensor::sample(2, 3, 99);
  for (std::vector<int> z : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
    auto [y, v] = solve_fixed_z(t, z);
    double a = bilinear_objective(t, {0, 1}, z);
    double b = bilinear_objective(t, {1, 0}, z);
    EXPECT_DOUBLE_EQ(v, std::min(a, b));
    EXPECT_DOUBLE_EQ(bilinear_objective(t, y, z), v);
  }
}

TEST(SolveFixedY, BeatsRandomAlternatives) {
  CostTensor t = CostTensor::sample(6, 3, 2024);
  std::vector<int> y = random_permutation(6, 7);
  auto [z, v] = solve_fixed_y(t, y);
  EXPECT_DOUBLE_EQ(bilinear_objective(t, y, z), v);
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::vector<int> other = random_permutation(6, 1000 + s);
    EXPECT_LE(v, bilinear_objective(t, y, other) + 1e-12);
  }
}

TEST(BilinearAlternate, TraceIsMonotoneNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CostTensor t = CostTensor::sample(6, 3, 3000 + seed);
    BilinearResult r = bilinear_alternate(t, random_permutation(6, seed),
                                          random_permutation(6, seed + 500));
    ASSERT_GE(r.trace.size(), 2u);
    for (std::size_t s = 1; s < r.trace.size(); ++s)
      EXPECT_LE(r.trace[s], r.trace[s - 1]) << "seed " << seed;
    EXPECT_EQ(r.trace.back(), r.final.value);
    EXPECT_EQ(bilinear_objective(t, r.final.y, r.final.z), r.final.value);
    EXPECT_TRUE(r.converged);
  }
}

TEST(BilinearAlternate, StationaryAtPlanarOptimum) {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    CostTensor t = CostTensor::sample(4, 3, seed);
    PlanarSolution best = exact_planar(t);
    BilinearResult r =
        bilinear_alternate(t, best.assignment.sigma, best.assignment.pi);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.final.iteration, 1);
    EXPECT_EQ(r.final.value, best.cost);
    EXPECT_EQ(r.final.y, best.assignment.sigma);
    EXPECT_EQ(r.final.z, best.assignment.pi);
  }
}

TEST(BilinearAlternate, FinalDominatesExactOptimum) {
  for (std::uint64_t seed = 60; seed < 80; ++seed) {
    CostTensor t = CostTensor::sample(4, 3, seed);
    double best = exact_planar(t).cost;
    BilinearResult r = bilinear_alternate(t, random_permutation(4, seed),
                                          random_permutation(4, seed * 17 + 1));
    EXPECT_GE(r.final.value, best - 1e-12) << "seed " << seed;
  }
}

TEST(BilinearAlternate, FixedPointInBothBlocks) {
  // At convergence neither half-step can improve, so each one-block solve
  // returns a value equal to the final objective.
  for (std::uint64_t seed = 200; seed < 215; ++seed) {
    CostTensor t = CostTensor::sample(5, 3, seed);
    BilinearResult r = bilinear_alternate(t, random_permutation(5, seed),
                                          random_permutation(5, seed + 3));
    ASSERT_TRUE(r.converged);
    EXPECT_EQ(solve_fixed_z(t, r.final.z).second, r.final.value);
    EXPECT_EQ(solve_fixed_y(t, r.final.y).second, r.final.value);
  }
}

TEST(BilinearAlternate, MaxItersBoundsIterationCount) {
  CostTensor t = CostTensor::sample(7, 3, 404);
  BilinearResult r = bilinear_alternate(t, random_permutation(7, 1),
                                        random_permutation(7, 2), 1);
  EXPECT_LE(r.final.iteration, 1);
  if (!r.converged) EXPECT_EQ(r.final.iteration, 1);
  EXPECT_THROW(bilinear_alternate(t, identity_permutation(7),
                                  identity_permutation(7), 0),
               PreconditionError);
}

TEST(BilinearAlternate, MaximizeClimbsInstead) {
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    CostTensor t = CostTensor::sample(5, 3, seed);
    std::vector<int> y0 = random_permutation(5, seed);
    std::vector<int> z0 = random_permutation(5, seed + 9);
    BilinearResult up = bilinear_alternate(t, y0, z0, 100, true);
    BilinearResult down = bilinear_alternate(t, y0, z0, 100, false);
    for (std::size_t s = 1; s < up.trace.size(); ++s)
      EXPECT_GE(up.trace[s], up.trace[s - 1]);
    EXPECT_GE(up.final.value, down.final.value);
    EXPECT_EQ(bilinear_objective(t, up.final.y, up.final.z), up.final.value);
  }
}

TEST(BilinearAlternate, RejectsBadArguments) {
  CostTensor t = CostTensor::sample(3, 3, 8);
  EXPECT_THROW(
      bilinear_alternate(t, {0, 1, 1}, identity_permutation(3)),
      PreconditionError);
  EXPECT_THROW(
      bilinear_alternate(t, identity_permutation(3), {2, 1}),
      PreconditionError);
}

}  // namespace
}  // namespace mdap
