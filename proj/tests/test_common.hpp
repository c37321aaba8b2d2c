#pragma once

// Shared fixtures for the unit suite.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "mdr/backup.hpp"
#include "mdr/grid.hpp"
#include "mdr/models.hpp"
#include "mdr/value.hpp"

namespace mdrtest {

/// The two-node chain: 1D grid {0, 1}, unit drift, dt = 1, so node 0 maps
/// onto node 1 and node 1 onto itself (clamped). With h = (-1, -3) and
/// gamma = 0.9 the discounted fixed point is (-2.7, -3) by hand recursion.
struct ChainFixture {
  mdr::GridSpec grid{{0.0}, {1.0}, {2}};
  mdr::Chain1D model{1.0};
  mdr::TransitionTable table;
  mdr::ValueVector h{{-1.0, -3.0}, mdr::ValueRole::shifted_reward};

  explicit ChainFixture(double gamma = 0.9,
                        mdr::TransitionTable::Mode mode = mdr::TransitionTable::Mode::Auto)
      : table(grid, model, 1.0, 0.1, mode, mdr::TransitionTable::kDefaultBudget, 1,
              gamma) {}
};

/// Stationary flow on the same two-node grid: every node is its own
/// successor.
struct SelfLoopFixture {
  mdr::GridSpec grid{{0.0}, {1.0}, {2}};
  mdr::Chain1D model{0.0};
  mdr::TransitionTable table;

  explicit SelfLoopFixture(double gamma = 0.9)
      : table(grid, model, 1.0, 0.1, mdr::TransitionTable::Mode::Auto,
              mdr::TransitionTable::kDefaultBudget, 1, gamma) {}
};

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo,
                                         double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (double& x : out) x = dist(rng);
  return out;
}

}  // namespace mdrtest
