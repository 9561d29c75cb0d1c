#include "plc/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plc {

PredictionProfile PredictionProfile::constant(double error, Index window_size) {
  if (window_size < 1) throw ParameterError("PredictionProfile: window size must be >= 1");
  PredictionProfile p;
  p.error_curve.assign(static_cast<std::size_t>(window_size), error);
  p.validate();
  return p;
}

void PredictionProfile::validate() const {
  if (error_curve.empty()) throw ParameterError("PredictionProfile: error curve must be nonempty");
  for (double e : error_curve) {
    if (!(e >= 0.0 && e <= 2.0)) {
      throw ParameterError("PredictionProfile: every e(k) must lie in [0, 2]");
    }
  }
}

double average_error(const PredictionProfile& profile) {
  profile.validate();
  return std::accumulate(profile.error_curve.begin(), profile.error_curve.end(), 0.0) /
         static_cast<double>(profile.error_curve.size());
}

Vector PredictionWindow::mean() const {
  Vector acc = Vector::Zero(predicted.front().size());
  for (const auto& d : predicted) acc += d.probs();
  return acc / static_cast<double>(predicted.size());
}

Vector project_to_simplex(const Vector& x) {
  // Sort-based projection (Held, Wolfe, Crowder).
  std::vector<double> u(x.data(), x.data() + x.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumulative += u[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[i] - candidate > 0.0) tau = candidate;
  }
  Vector out = (x.array() - tau).max(0.0).matrix();
  return out / out.sum();
}

namespace {

Vector perturb(const Vector& truth, double budget, Rng& rng) {
  const Index m = truth.size();
  if (budget <= 0.0 || m < 2) return truth;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> radius_dist(0.0, budget);

  Vector direction(m);
  for (Index i = 0; i < m; ++i) direction[i] = normal(rng);
  direction.array() -= direction.mean();
  const double l1 = direction.cwiseAbs().sum();
  const double radius = radius_dist(rng);
  if (!(l1 > 0.0)) return truth;

  Vector candidate = project_to_simplex(truth + direction * (radius / l1));
  const double tv = total_variation(candidate, truth);
  if (tv > budget) {
    const double s = (budget / tv) * (1.0 - 1e-12);
    candidate = (1.0 - s) * truth + s * candidate;
  }
  return candidate;
}

}  // namespace

PredictionWindow synthesize_prediction(const DistributionSchedule& schedule, Slot t,
                                       const PredictionProfile& profile, Rng& rng) {
  PredictionWindow window;
  window.base_time = t;
  window.predicted.reserve(profile.error_curve.size());
  for (std::size_t k = 0; k < profile.error_curve.size(); ++k) {
    const Distribution& truth = schedule.at(t + static_cast<Slot>(k));
    const double budget = profile.error_curve[k];
    if (budget <= 0.0) {
      window.predicted.push_back(truth);
    } else {
      window.predicted.push_back(Distribution(perturb(truth.probs(), budget, rng)));
    }
  }
  return window;
}

}  // namespace plc
