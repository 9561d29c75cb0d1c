#include "plc/ade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plc {

void AdeParams::validate() const {
  const Slot w = horizon();
  if (num_states < 1) throw ParameterError("AdeParams: M must be >= 1");
  if (error_curve.empty()) throw ParameterError("AdeParams: error curve must have w+1 >= 1 entries");
  if (detection_window < w + 1) throw ParameterError("AdeParams: d >= w+1 required");
  if (confidence_length < detection_window) throw ParameterError("AdeParams: T_l >= d required");
  if (!(threshold > 0.0)) throw ParameterError("AdeParams: eps_d > 0 required");
  for (double e : error_curve) {
    if (!(e >= 0.0 && e <= 2.0)) throw ParameterError("AdeParams: e(k) must lie in [0, 2]");
  }
}

AdeEstimator::AdeEstimator(AdeParams params) : params_(std::move(params)) {
  params_.validate();
  if (params_.confidence_length != kInfiniteLength) {
    const double tl = static_cast<double>(params_.confidence_length);
    history_margin_ = 2.0 * static_cast<double>(params_.num_states) * std::log(tl) / std::sqrt(tl);
  }
  ring_.assign(static_cast<std::size_t>(params_.detection_window + params_.horizon() + 2), 0);
  counts_d_ = Vector::Zero(params_.num_states);
  counts_m_ = Vector::Zero(params_.num_states);
}

Index AdeEstimator::sample_at(Slot s) const {
  return ring_[static_cast<std::size_t>(s % static_cast<Slot>(ring_.size()))];
}

void AdeEstimator::restart(Slot t) {
  const Slot start = t + params_.horizon() + 1;
  b_m_ = b_d_start_ = b_d_end_ = start;
  counts_m_.setZero();
  m_end_ = start;
  frozen_m_.reset();
  restarts_.push_back(start);
}

AdeEvents AdeEstimator::update(Slot t, Index sample, const PredictionWindow& prediction) {
  if (t != t_ + 1) throw std::logic_error("AdeEstimator::update: slots must be consecutive from 0");
  if (sample < 0 || sample >= params_.num_states) throw DomainError("AdeEstimator: sample out of range");
  if (prediction.window_size() != params_.horizon() + 1) {
    throw DimensionError("AdeEstimator: prediction window must hold w+1 laws");
  }
  t_ = t;
  ring_[static_cast<std::size_t>(t % static_cast<Slot>(ring_.size()))] = sample;

  const Slot w = params_.horizon();
  const Slot d = params_.detection_window;
  const Slot recent_lo = std::max<Slot>(0, t + w + 1 - d);

  AdeEvents events;
  if (t <= b_d_start_) {
    events.frozen = true;  // (iii)
  } else {
    b_d_start_ = recent_lo;  // (iv)
    b_d_end_ = t + w;
  }

  // Observed part of the recent window.
  while (d_hi_ < t) {
    counts_d_[sample_at(d_hi_)] += 1.0;
    ++d_hi_;
  }
  while (d_lo_ < recent_lo) {
    counts_d_[sample_at(d_lo_)] -= 1.0;
    ++d_lo_;
  }

  // History window grows toward min(b_d^s, b_m + T_l).
  const Slot room = std::max<Slot>(0, b_d_start_ - b_m_);
  const Slot target_end = b_m_ + std::min(room, params_.confidence_length);
  while (m_end_ < target_end) {
    counts_m_[sample_at(m_end_)] += 1.0;
    ++m_end_;
  }
  const Slot wm = history_size();
  if (wm >= params_.confidence_length && !frozen_m_) {
    frozen_m_ = Distribution(counts_m_ / static_cast<double>(wm));
  }

  if (events.frozen || wm == 0) return events;

  const Vector pi_m = frozen_m_ ? frozen_m_->probs() : Vector(counts_m_ / static_cast<double>(wm));
  const bool recent_full = t + w + 1 - d >= 0;

  if (wm >= d && recent_full) {
    const Distribution pi_d = empirical_d(prediction);
    if (total_variation(pi_d.probs(), pi_m) > params_.threshold) {
      events.change_detected = true;
      restart(t);
      return events;
    }
  }
  if (wm == params_.confidence_length) {
    for (Index k = 0; k <= w; ++k) {
      const double bound = params_.error_curve[static_cast<std::size_t>(k)] + history_margin_;
      if (total_variation(prediction.predicted[static_cast<std::size_t>(k)].probs(), pi_m) > bound) {
        events.reset_point = true;
        restart(t);
        reset_points_.push_back(t + w + 1);
        return events;
      }
    }
  }
  return events;
}

Distribution AdeEstimator::estimate(const PredictionWindow& prediction) const {
  if (using_history() && frozen_m_) return *frozen_m_;
  return Distribution(prediction.mean());
}

std::optional<Distribution> AdeEstimator::empirical_m() const {
  const Slot wm = history_size();
  if (wm <= 0) return std::nullopt;
  if (frozen_m_) return frozen_m_;
  return Distribution(counts_m_ / static_cast<double>(wm));
}

Distribution AdeEstimator::empirical_d(const PredictionWindow& prediction) const {
  Vector acc = counts_d_;
  for (const auto& p : prediction.predicted) acc += p.probs();
  const double terms = static_cast<double>(d_hi_ - d_lo_) + static_cast<double>(prediction.window_size());
  return Distribution(acc / terms);
}

void AdeEstimator::check_invariants() const {
  if (t_ < 0) return;
  const Slot w = params_.horizon();
  const Slot wm = history_size();
  if (wm < 0 || wm > params_.confidence_length) throw std::logic_error("ADE: W_m out of range");
  if (wm > 0 && m_end_ > b_d_start_) throw std::logic_error("ADE: W_m overlaps W_d");
  if (b_d_end_ < b_d_start_) throw std::logic_error("ADE: W_d end before start");
  const bool frozen = !restarts_.empty() && t_ <= restarts_.back();
  if (frozen) {
    const Slot r = restarts_.back();
    if (b_m_ != r || b_d_start_ != r || b_d_end_ != r) {
      throw std::logic_error("ADE: restart markers must equal t+w+1 during the freeze");
    }
  } else if (b_d_end_ != t_ + w ||
             b_d_start_ != std::max<Slot>(0, t_ + w + 1 - params_.detection_window)) {
    throw std::logic_error("ADE: W_d must span [(t+w+1-d)_+, t+w]");
  }
  if (std::abs(counts_m_.sum() - static_cast<double>(wm)) > 0.5) {
    throw std::logic_error("ADE: history counts disagree with W_m");
  }
  if (std::abs(counts_d_.sum() - static_cast<double>(d_hi_ - d_lo_)) > 0.5) {
    throw std::logic_error("ADE: recent counts disagree with the observed range");
  }
}

Distribution empirical_distribution(const std::vector<Index>& samples, Index num_states) {
  if (samples.empty()) throw ParameterError("empirical_distribution: no samples");
  Vector counts = Vector::Zero(num_states);
  for (Index s : samples) {
    if (s < 0 || s >= num_states) throw DomainError("empirical_distribution: sample out of range");
    counts[s] += 1.0;
  }
  return Distribution(counts / static_cast<double>(samples.size()));
}

}  // namespace plc
