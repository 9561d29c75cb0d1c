#include <gtest/gtest.h>

#include <random>

#include "plc/ade.hpp"
#include "plc/control.hpp"
#include "plc/harness.hpp"

using namespace plc;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

PredictionWindow constant_window(Slot t, const Distribution& p, Slot w) {
  return PredictionWindow{t, std::vector<Distribution>(static_cast<std::size_t>(w + 1), p)};
}

Index draw(const Distribution& pi, std::mt19937_64& rng) {
  std::discrete_distribution<Index> dist(pi.probs().data(), pi.probs().data() + pi.size());
  return dist(rng);
}

AdeParams params(Slot T_l, Slot d, double eps, Index M, Slot w) {
  return AdeParams{T_l, d, eps, M, std::vector<double>(static_cast<std::size_t>(w + 1), 0.0)};
}

const Distribution kS1 = Distribution::point_mass(2, 0);
const Distribution kS2 = Distribution::point_mass(2, 1);

}  // namespace

TEST(EmpiricalM, DirectCounts) {
  EXPECT_EQ(empirical_distribution({0, 0, 1, 1}, 2).probs(), vec({0.5, 0.5}));
  EXPECT_EQ(empirical_distribution({0}, 2).probs(), vec({1, 0}));
  EXPECT_THROW(empirical_distribution({}, 2), ParameterError);
}

TEST(EmpiricalM, ThousandDrawsConcentrate) {
  const Distribution pi(vec({0.3, 0.7}));
  std::mt19937_64 rng(5);
  int close = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Index> samples(1000);
    for (auto& s : samples) s = draw(pi, rng);
    if (total_variation(empirical_distribution(samples, 2), pi) <= 0.1) ++close;
  }
  EXPECT_GE(close, 990);
}

TEST(EmpiricalM, EstimatorWindowUsesOnlyHistorySamples) {
  AdeEstimator ade(params(kInfiniteLength, 10, 1.99, 2, 4));
  EXPECT_FALSE(ade.empirical_m().has_value());
  for (Slot t = 0; t < 8; ++t) ade.update(t, t < 2 ? 0 : 1, constant_window(t, kS2, 4));
  // b_d^s(7) = 7 + 5 - 10 = 2, so W_m(7) = [0, 2): samples s1, s1.
  ASSERT_EQ(ade.history_size(), 2);
  EXPECT_EQ(ade.empirical_m()->probs(), vec({1, 0}));
  ade.update(8, 1, constant_window(8, kS2, 4));
  EXPECT_NEAR(ade.empirical_m()->probs()[0], 2.0 / 3.0, 1e-15);
}

TEST(EmpiricalD, PurePredictionWhenDEqualsWindow) {
  AdeEstimator ade(params(kInfiniteLength, 5, 0.1, 2, 4));
  const Distribution half(vec({0.5, 0.5}));
  for (Slot t = 0; t < 20; ++t) {
    ade.update(t, 0, constant_window(t, half, 4));
    EXPECT_EQ(ade.empirical_d(constant_window(t, half, 4)).probs(), vec({0.5, 0.5}));
  }
}

TEST(EmpiricalD, UnanimousObservedAndPredicted) {
  AdeEstimator ade(params(kInfiniteLength, 10, 0.1, 2, 4));
  for (Slot t = 0; t < 12; ++t) ade.update(t, 0, constant_window(t, kS1, 4));
  EXPECT_EQ(ade.empirical_d(constant_window(11, kS1, 4)).probs(), vec({1, 0}));
}

TEST(EmpiricalD, HalfObservedHalfPredicted) {
  // d = 10, w+1 = 5: five observed s1 slots and five predictions of s2.
  AdeEstimator ade(params(kInfiniteLength, 10, 0.1, 2, 4));
  for (Slot t = 0; t <= 5; ++t) ade.update(t, 0, constant_window(t, kS2, 4));
  EXPECT_EQ(ade.empirical_d(constant_window(5, kS2, 4)).probs(), vec({0.5, 0.5}));
  EXPECT_EQ(ade.detection_size(), 10);
}

TEST(EmpiricalD, NormalizesByTermsPresentDuringStartup) {
  AdeEstimator ade(params(kInfiniteLength, 10, 0.1, 2, 4));
  ade.update(0, 0, constant_window(0, kS2, 4));
  ade.update(1, 0, constant_window(1, kS2, 4));
  ade.update(2, 0, constant_window(2, kS2, 4));
  // Observed {0, 1}, predicted 5 x s2: 7 terms.
  const Vector d = ade.empirical_d(constant_window(2, kS2, 4)).probs();
  EXPECT_NEAR(d[0], 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(d.sum(), 1.0, 1e-15);
}

TEST(AdeUpdate, MaximalDivergenceRestartsBothWindows) {
  const Slot d = 10, w = 4;
  AdeEstimator ade(params(d, d, 0.1, 2, w));
  // s1 on [0, 10), s2 afterwards, predictions follow the truth.
  auto truth = [&](Slot t) { return t < d ? kS1 : kS2; };
  AdeEvents ev;
  Slot fired_at = -1;
  for (Slot t = 0; t < 2 * d; ++t) {
    PredictionWindow win{t, {}};
    for (Slot k = 0; k <= w; ++k) win.predicted.push_back(truth(t + k));
    ev = ade.update(t, t < d ? 0 : 1, win);
    ade.check_invariants();
    if (ev.change_detected) {
      fired_at = t;
      break;
    }
  }
  // First slot with W_m >= d and a full recent window: 2d - w - 1.
  EXPECT_EQ(fired_at, 2 * d - w - 1);
  EXPECT_FALSE(ev.reset_point);
  const Slot restart = fired_at + w + 1;
  EXPECT_EQ(ade.b_m(), restart);
  EXPECT_EQ(ade.b_d_start(), restart);
  EXPECT_EQ(ade.b_d_end(), restart);
  EXPECT_EQ(ade.restarts(), std::vector<Slot>{restart});
  EXPECT_TRUE(ade.reset_points().empty());
}

TEST(AdeUpdate, FreezeHoldsMarkersForWPlusOneSlots) {
  const Slot d = 10, w = 4;
  AdeEstimator ade(params(d, d, 0.1, 2, w));
  Slot t = 0;
  for (; t < 2 * d; ++t) {
    const AdeEvents ev = ade.update(t, t < d ? 0 : 1, constant_window(t, t < d ? kS1 : kS2, w));
    if (ev.restarted()) break;
  }
  const Slot fired = t;
  for (t = fired + 1; t <= fired + w + 1; ++t) {
    const AdeEvents ev = ade.update(t, 1, constant_window(t, kS2, w));
    EXPECT_TRUE(ev.frozen) << t;
    EXPECT_EQ(ade.b_m(), fired + w + 1);
    EXPECT_EQ(ade.b_d_start(), fired + w + 1);
    EXPECT_EQ(ade.b_d_end(), fired + w + 1);
    ade.check_invariants();
  }
  const AdeEvents ev = ade.update(t, 1, constant_window(t, kS2, w));
  EXPECT_FALSE(ev.frozen);
  EXPECT_EQ(ade.b_d_end(), t + w);
  ade.check_invariants();
}

TEST(AdeUpdate, StepTwoSilentOnStationaryStream) {
  // T_l = 1000 with exact predictions. A loose eps_d keeps step (i) out of the
  // way so that only the prediction-consistency test is exercised.
  const Distribution pi(vec({0.3, 0.7}));
  const Slot T_l = 1000, d = 200, w = 4;
  std::mt19937_64 rng(17);
  int silent = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    AdeEstimator ade(params(T_l, d, 1.5, 2, w));
    bool any = false;
    for (Slot t = 0; t < T_l + d + 100; ++t) {
      const AdeEvents ev = ade.update(t, draw(pi, rng), constant_window(t, pi, w));
      any = any || ev.reset_point;
    }
    EXPECT_EQ(ade.history_size(), T_l);
    if (!any) ++silent;
  }
  const double bound = 1.0 - 5.0 * 2.0 * std::pow(1000.0, -2.0 * std::log(1000.0));
  EXPECT_GE(static_cast<double>(silent) / trials, bound);
}

TEST(AdeUpdate, StepTwoFiresWhenPredictionContradictsHistory) {
  // The margin 2 M log(T_l) / sqrt(T_l) exceeds 2 for short histories, so use
  // a long one.
  const Slot w = 4;
  AdeEstimator big(params(20000, 5, 1.99, 2, w));
  const double margin = 2.0 * 2.0 * std::log(20000.0) / std::sqrt(20000.0);
  ASSERT_LT(margin, 0.6);
  Slot t = 0;
  for (; big.history_size() < 20000; ++t) big.update(t, t % 2, constant_window(t, Distribution(vec({0.5, 0.5})), w));
  const AdeEvents ev = big.update(t, 0, constant_window(t, kS1, w));
  EXPECT_TRUE(ev.reset_point);
  EXPECT_EQ(big.reset_points(), std::vector<Slot>{t + w + 1});
}

TEST(AdeOutput, PredictionBranchBeforeSaturation) {
  AdeEstimator ade(params(100, 5, 0.1, 2, 4));
  const Distribution p(vec({0.3, 0.7}));
  ade.update(0, 1, constant_window(0, p, 4));
  EXPECT_FALSE(ade.using_history());
  EXPECT_EQ(ade.estimate(constant_window(0, p, 4)).probs(), vec({0.3, 0.7}));
}

TEST(AdeOutput, FrozenHistoryBranch) {
  const Slot T_l = 25, w = 4;
  AdeEstimator ade(params(T_l, 5, 1.99, 2, w));
  const Distribution other(vec({0.9, 0.1}));
  Slot t = 0;
  for (; !ade.using_history(); ++t) ade.update(t, t < 7 ? 0 : 1, constant_window(t, other, w));
  EXPECT_EQ(ade.estimate(constant_window(t, other, w)).probs(), vec({0.28, 0.72}));
  // Later samples do not move the frozen law.
  for (Slot k = 0; k < 50; ++k, ++t) ade.update(t, 0, constant_window(t, other, w));
  EXPECT_EQ(ade.estimate(constant_window(t, kS1, w)).probs(), vec({0.28, 0.72}));
}

TEST(AdeOutput, DegenerateOneSlotPerfectPrediction) {
  AdeEstimator ade(params(kInfiniteLength, 1, 0.1, 3, 0));
  const Distribution a(vec({0.2, 0.3, 0.5}));
  const Distribution b(vec({0.6, 0.3, 0.1}));
  for (Slot t = 0; t < 50; ++t) {
    const Distribution& truth = t < 25 ? a : b;
    ade.update(t, 0, constant_window(t, truth, 0));
    EXPECT_EQ(ade.estimate(constant_window(t, truth, 0)), truth);
  }
}

TEST(AdeParams, Validation) {
  EXPECT_THROW(AdeEstimator(params(10, 3, 0.1, 2, 4)), ParameterError);   // d < w+1
  EXPECT_THROW(AdeEstimator(params(5, 10, 0.1, 2, 4)), ParameterError);   // T_l < d
  EXPECT_THROW(AdeEstimator(params(10, 10, 0.0, 2, 4)), ParameterError);  // eps_d
  AdeParams bad = params(10, 10, 0.1, 2, 4);
  bad.error_curve[2] = 2.5;
  EXPECT_THROW(AdeEstimator{bad}, ParameterError);
}

TEST(AdeUpdate, RejectsOutOfOrderSlots) {
  AdeEstimator ade(params(10, 5, 0.1, 2, 4));
  ade.update(0, 0, constant_window(0, kS1, 4));
  EXPECT_THROW(ade.update(2, 0, constant_window(2, kS1, 4)), std::logic_error);
}

TEST(AdeInvariants, HoldEverySlotOnRandomSchedules) {
  std::mt19937_64 rng(23);
  for (int run = 0; run < 20; ++run) {
    const Slot w = run % 5;
    const Slot d = w + 1 + 3 * run;
    const Slot T_l = d + run * 7;
    const Index M = 2 + run % 4;
    AdeEstimator ade(AdeParams{T_l, d, 0.05 + 0.02 * run, M, std::vector<double>(static_cast<std::size_t>(w + 1), 0.05)});
    std::exponential_distribution<double> expo(1.0);
    Vector weights(M);
    Distribution pi = Distribution::uniform(M);
    for (Slot t = 0; t < 3000; ++t) {
      if (t % 400 == 0) {
        for (Index i = 0; i < M; ++i) weights[i] = expo(rng);
        pi = Distribution::normalized(weights);
      }
      const AdeEvents ev = ade.update(t, draw(pi, rng), constant_window(t, pi, w));
      ASSERT_NO_THROW(ade.check_invariants()) << "run " << run << " slot " << t;
      EXPECT_NEAR(ade.estimate(constant_window(t, pi, w)).probs().sum(), 1.0, 1e-9);
      EXPECT_LE(ade.history_size(), T_l);
      if (ev.restarted()) EXPECT_EQ(ade.restarts().back(), t + w + 1);
    }
  }
}

TEST(ChangeTest, TwoStateDetectionAndFalsePositiveRates) {
  DetectBenchConfig cfg{Distribution(vec({0.8, 0.2})), Distribution(vec({0.2, 0.8})), 0.1, 0.005, 4, 2000, 1};
  const DetectBenchResult r = run_detect_bench(cfg);
  EXPECT_EQ(r.d, simulation_detection_window(0.1, 0.005, 4));
  EXPECT_GE(r.detection_rate(), 1.0 - cfg.delta);
  EXPECT_LE(r.false_positive_rate(), 2.0 * cfg.delta);
}

TEST(ChangeTest, DetectionMarkerLandsWithinDOfChange) {
  const Distribution before(vec({0.8, 0.2}));
  const Distribution after(vec({0.2, 0.8}));
  const Slot w = 4;
  const Slot d = simulation_detection_window(0.1, 0.005, w);
  const Slot change = 3 * d;
  std::mt19937_64 rng(31);
  int within = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    AdeEstimator ade(params(d, d, 0.1, 2, w));
    for (Slot t = 0; t < change + 2 * d; ++t) {
      PredictionWindow win{t, {}};
      for (Slot k = 0; k <= w; ++k) win.predicted.push_back(t + k < change ? before : after);
      const AdeEvents ev = ade.update(t, draw(t < change ? before : after, rng), win);
      if (ev.restarted() && t + w + 1 >= change) {
        const Slot marker = t + w + 1;
        if (marker >= change && marker <= change + d) ++within;
        break;
      }
    }
  }
  EXPECT_GE(within, trials - 2);
}
