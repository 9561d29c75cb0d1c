#include "plc/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace plc {

double DualSolverParams::cap() const { return V * std::log(V); }

void DualSolverParams::validate() const {
  if (!(V >= 1.0) || !std::isfinite(V)) throw ParameterError("DualSolverParams: V >= 1 required");
  if (max_iters < 1) throw ParameterError("DualSolverParams: max_iters >= 1 required");
  if (warm_iters < 1) throw ParameterError("DualSolverParams: warm_iters >= 1 required");
  if (!(step_scale > 0.0)) throw ParameterError("DualSolverParams: step_scale > 0 required");
  if (unbounded_patience < 1) throw ParameterError("DualSolverParams: unbounded_patience >= 1 required");
  if (tolerance < 0.0) throw ParameterError("DualSolverParams: tolerance >= 0 required");
}

namespace {

void check_gamma(const SystemModel& model, const Vector& gamma) {
  if (gamma.size() != model.num_queues()) throw DimensionError("dual: gamma length must equal r");
}

void check_pi(const SystemModel& model, const Distribution& pi) {
  if (pi.size() != model.num_states()) throw DimensionError("dual: pi length must equal M");
}

// Minimizer of V f + gamma . drift over one state's actions, without
// allocating.
PerStateDual argmin_state(const SystemModel& model, Index state, const Vector& gamma, double V) {
  const Vector& cost = model.costs(state);
  const Matrix& drift = model.drift(state);
  const Index r = drift.cols();
  PerStateDual best{std::numeric_limits<double>::infinity(), 0};
  for (Index a = 0; a < cost.size(); ++a) {
    double v = V * cost[a];
    for (Index j = 0; j < r; ++j) v += gamma[j] * drift(a, j);
    if (v < best.value) best = PerStateDual{v, a};
  }
  return best;
}

void supergradient_into(const SystemModel& model, const Vector& gamma, const Vector& pi, double V,
                        Vector& out) {
  out.setZero();
  for (Index s = 0; s < pi.size(); ++s) {
    if (pi[s] == 0.0) continue;
    const Index a = argmin_state(model, s, gamma, V).action;
    out += pi[s] * model.drift(s).row(a).transpose();
  }
}

}  // namespace

PerStateDual per_state_dual(const SystemModel& model, Index state, const Vector& gamma, double V) {
  check_gamma(model, gamma);
  return argmin_state(model, state, gamma, V);
}

double dual_value(const SystemModel& model, const Vector& gamma, const Distribution& pi, double V) {
  check_gamma(model, gamma);
  check_pi(model, pi);
  double total = 0.0;
  for (Index s = 0; s < pi.size(); ++s) {
    if (pi[s] == 0.0) continue;
    total += pi[s] * argmin_state(model, s, gamma, V).value;
  }
  return total;
}

Vector dual_supergradient(const SystemModel& model, const Vector& gamma, const Distribution& pi,
                          double V) {
  check_gamma(model, gamma);
  check_pi(model, pi);
  Vector out(model.num_queues());
  supergradient_into(model, gamma, pi.probs(), V, out);
  return out;
}

Multiplier solve_multiplier(const SystemModel& model, const Distribution& pi,
                            const DualSolverParams& params, const std::optional<Vector>& warm_start) {
  params.validate();
  check_pi(model, pi);
  const Index r = model.num_queues();
  const double cap = params.cap();
  const double alpha0 = params.step_scale * params.V;

  Vector gamma = Vector::Zero(r);
  double offset = 0.0;
  int iters = params.max_iters;
  if (warm_start) {
    check_gamma(model, *warm_start);
    gamma = warm_start->cwiseMax(0.0);
    offset = static_cast<double>(params.max_iters);
    iters = params.warm_iters;
  }

  auto capped_result = [&](int n) {
    return Multiplier{Vector::Constant(r, cap), true, n};
  };

  Vector grad(r);
  Vector average = Vector::Zero(r);
  Vector block_start = average;
  int above = 0;
  int n = 1;
  for (; n <= iters; ++n) {
    supergradient_into(model, gamma, pi.probs(), params.V, grad);
    const double step = alpha0 / std::sqrt(offset + static_cast<double>(n));
    gamma = (gamma + step * grad).cwiseMax(0.0);
    average += (gamma - average) / static_cast<double>(n);

    if (gamma.maxCoeff() > cap && grad.minCoeff() > 0.0) {
      if (++above >= params.unbounded_patience) return capped_result(n);
    } else {
      above = 0;
    }
    if (params.tolerance > 0.0 && n % 1000 == 0) {
      if ((average - block_start).cwiseAbs().maxCoeff() < params.tolerance) break;
      block_start = average;
    }
  }
  const int spent = std::min(n, iters);
  if (average.maxCoeff() > cap) return capped_result(spent);
  return Multiplier{average, false, spent};
}

Vector grid_oracle(const SystemModel& model, const Distribution& pi, double V, double grid_max,
                   double grid_step) {
  check_pi(model, pi);
  const Index r = model.num_queues();
  if (r > 3) throw ParameterError("grid_oracle: r <= 3 required (desk-scale enumeration)");
  if (!(grid_step > 0.0) || !(grid_max >= 0.0)) {
    throw ParameterError("grid_oracle: grid_step > 0 and grid_max >= 0 required");
  }
  const auto per_axis = static_cast<long>(std::floor(grid_max / grid_step + 1e-9)) + 1;
  long total = 1;
  for (Index j = 0; j < r; ++j) total *= per_axis;

  Vector gamma(r);
  Vector best = Vector::Zero(r);
  double best_value = -std::numeric_limits<double>::infinity();
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    for (Index j = r - 1; j >= 0; --j) {
      gamma[j] = static_cast<double>(rem % per_axis) * grid_step;
      rem /= per_axis;
    }
    double value = 0.0;
    for (Index s = 0; s < pi.size(); ++s) {
      if (pi[s] != 0.0) value += pi[s] * argmin_state(model, s, gamma, V).value;
    }
    if (value > best_value) {
      best_value = value;
      best = gamma;
    }
  }
  return best;
}

namespace {

// min over theta in [0,1] of max_j (theta a_j + (1 - theta) b_j)
double best_mixture(const Vector& a, const Vector& b, Vector& mixed) {
  auto worst = [&](double theta) { return (theta * a + (1.0 - theta) * b).maxCoeff(); };
  double best_theta = 0.0;
  double best = worst(0.0);
  auto consider = [&](double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) return;
    const double v = worst(theta);
    if (v < best) {
      best = v;
      best_theta = theta;
    }
  };
  consider(1.0);
  const Vector slope = a - b;
  for (Index j = 0; j < a.size(); ++j) {
    for (Index k = j + 1; k < a.size(); ++k) {
      const double denom = slope[j] - slope[k];
      if (denom != 0.0) consider((b[k] - b[j]) / denom);
    }
  }
  mixed = best_theta * a + (1.0 - best_theta) * b;
  return best;
}

}  // namespace

SlackReport verify_slack(const SystemModel& model, const Distribution& pi, int samples,
                         std::uint64_t seed) {
  check_pi(model, pi);
  if (samples < 1) throw ParameterError("verify_slack: samples >= 1 required");
  const Index r = model.num_queues();
  const Index m = model.num_states();

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);

  std::set<std::vector<Index>> seen;
  std::vector<Vector> points;
  auto add_policy = [&](const Vector& weights) {
    std::vector<Index> policy(static_cast<std::size_t>(m));
    Vector drift = Vector::Zero(r);
    for (Index s = 0; s < m; ++s) {
      const Matrix& table = model.drift(s);
      Index best_a = 0;
      double best_v = std::numeric_limits<double>::infinity();
      for (Index a = 0; a < table.rows(); ++a) {
        const double v = table.row(a).dot(weights);
        if (v < best_v) {
          best_v = v;
          best_a = a;
        }
      }
      policy[static_cast<std::size_t>(s)] = best_a;
      drift += pi[s] * table.row(best_a).transpose();
    }
    if (seen.insert(policy).second) points.push_back(drift);
  };

  add_policy(Vector::Constant(r, 1.0 / static_cast<double>(r)));
  for (Index j = 0; j < r; ++j) add_policy(Vector::Unit(r, j));
  Vector weights(r);
  for (int i = 0; i < samples; ++i) {
    for (Index j = 0; j < r; ++j) weights[j] = expo(rng);
    add_policy(weights / weights.sum());
  }

  SlackReport report;
  report.slack = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    if (p.maxCoeff() < report.slack) {
      report.slack = p.maxCoeff();
      report.drift = p;
    }
  }
  constexpr std::size_t kPairLimit = 2000;
  const std::size_t n = std::min(points.size(), kPairLimit);
  Vector mixed(r);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const double v = best_mixture(points[i], points[k], mixed);
      if (v < report.slack) {
        report.slack = v;
        report.drift = mixed;
      }
    }
  }
  report.feasible = report.slack < 0.0;
  return report;
}

}  // namespace plc
