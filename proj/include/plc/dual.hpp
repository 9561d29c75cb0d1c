#pragma once

#include <optional>
#include <random>

#include "plc/model.hpp"

namespace plc {

/// Nonnegative Lagrange multiplier, one entry per queue.
struct Multiplier {
  Vector gamma;
  bool capped = false;  // the solve hit the V log(V) cap
  int iterations = 0;   // subgradient iterations spent
};

struct DualSolverParams {
  double V = 1.0;
  int max_iters = 10000;
  double step_scale = 1.0;  // alpha_0 = step_scale * V, alpha_n = alpha_0 / sqrt(n)
  /// Iterations spent by a warm-started solve. The step schedule continues
  /// where a cold solve of max_iters would have stopped.
  int warm_iters = 100;
  /// Consecutive iterations above the cap, with every drift coordinate
  /// positive, before the dual is declared unbounded.
  int unbounded_patience = 100;
  /// Early exit once the averaged iterate moves less than this (L-inf) over
  /// a block of 1000 iterations. Zero disables early exit.
  double tolerance = 0.0;

  double cap() const;
  void validate() const;
};

struct PerStateDual {
  double value = 0.0;
  Index action = 0;
};

/// min over the state's actions of V f + gamma . (A - mu); ties go to the
/// lowest action index.
PerStateDual per_state_dual(const SystemModel& model, Index state, const Vector& gamma, double V);

/// g(gamma, pi) = sum_i pi_i g_{s_i}(gamma).
double dual_value(const SystemModel& model, const Vector& gamma, const Distribution& pi, double V);

/// Expected drift sum_i pi_i (A - mu)(s_i, x_i*) at the per-state minimizers:
/// a supergradient of the concave dual at gamma.
Vector dual_supergradient(const SystemModel& model, const Vector& gamma, const Distribution& pi,
                          double V);

/// Projected supergradient ascent on the dual, returning the averaged
/// iterate. An unbounded dual, or an average beyond V log(V), returns
/// V log(V) * 1 with `capped` set.
Multiplier solve_multiplier(const SystemModel& model, const Distribution& pi,
                            const DualSolverParams& params,
                            const std::optional<Vector>& warm_start = std::nullopt);

/// Exhaustive lattice search over [0, grid_max]^r with spacing grid_step.
/// Ties resolve to the lexicographically smallest lattice point. Refuses r > 3.
Vector grid_oracle(const SystemModel& model, const Distribution& pi, double V, double grid_max,
                   double grid_step);

struct SlackReport {
  bool feasible = false;
  double slack = 0.0;  // best max_j expected drift found; feasible iff < 0
  Vector drift;        // the expected drift vector achieving it
};

/// Searches per-state randomized policies for the most negative worst-queue
/// expected drift. Pure policies come from greedy minimization of weighted
/// drift under `samples` random queue weightings; pairs of distinct pure
/// policies are then mixed optimally.
SlackReport verify_slack(const SystemModel& model, const Distribution& pi, int samples,
                         std::uint64_t seed = 0);

}  // namespace plc
