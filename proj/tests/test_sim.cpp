#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "plc/sim.hpp"

using namespace plc;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

SimConfig bp_config(double V, Slot T, std::uint64_t seed) {
  SimConfig c;
  c.controller = ControllerKind::bp;
  c.V = V;
  c.horizon = T;
  c.seed = seed;
  return c;
}

SimConfig plc_config(double V, Slot T, std::uint64_t seed, double e_w) {
  SimConfig c = bp_config(V, T, seed);
  c.controller = ControllerKind::plc;
  c.plc = make_plc_config(derive_params(V, 0.5, 4, 0.1, e_w, ThetaMode::simulation));
  c.profile = PredictionProfile::constant(e_w, 5);
  return c;
}

DistributionSchedule stationary(double p1, double p2, Slot T) {
  return DistributionSchedule::stationary(two_queue_distribution(p1, p2), T);
}

TraceRecord record(Slot t, std::uint32_t events, Vector augmented = Vector::Zero(2)) {
  TraceRecord r;
  r.slot = t;
  r.events = events;
  r.augmented = std::move(augmented);
  r.queue = Vector::Zero(2);
  return r;
}

double mean_backlog(const std::vector<TraceRecord>& trace, std::size_t lo, std::size_t hi) {
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) sum += trace[i].queue.sum();
  return sum / static_cast<double>(hi - lo);
}

}  // namespace

TEST(QueueLedger, BatchServedNextSlotHasDelayOne) {
  QueueLedger ledger(1, ServiceOrder::lifo);
  ledger.arrive(0, 0, 1.0);
  EXPECT_EQ(ledger.serve(0, 1, 1.0), 1.0);
  EXPECT_EQ(ledger.delay_histogram(), (std::map<Slot, double>{{1, 1.0}}));
  EXPECT_EQ(ledger.backlog(0), 0.0);
}

TEST(QueueLedger, LifoServesNewestBatchFirst) {
  QueueLedger ledger(1, ServiceOrder::lifo);
  ledger.arrive(0, 0, 1.0);  // A
  ledger.arrive(0, 1, 1.0);  // B
  ledger.serve(0, 2, 1.0);
  EXPECT_EQ(ledger.delay_histogram(), (std::map<Slot, double>{{1, 1.0}}));
  EXPECT_EQ(ledger.backlog(0), 1.0);
  EXPECT_EQ(ledger.batches(0), 1u);
}

TEST(QueueLedger, FifoServesOldestBatchFirst) {
  QueueLedger ledger(1, ServiceOrder::fifo);
  ledger.arrive(0, 0, 1.0);
  ledger.arrive(0, 1, 1.0);
  ledger.serve(0, 2, 1.0);
  EXPECT_EQ(ledger.delay_histogram(), (std::map<Slot, double>{{2, 1.0}}));
}

TEST(QueueLedger, FractionalServiceAndWaste) {
  QueueLedger ledger(1, ServiceOrder::lifo);
  ledger.arrive(0, 0, 1.0);
  EXPECT_NEAR(ledger.serve(0, 0, std::log(3.0)), 1.0, 1e-15);  // excess service is wasted
  EXPECT_EQ(ledger.delay_histogram().at(0), 1.0);
  ledger.arrive(0, 3, 1.0);
  ledger.serve(0, 5, 0.25);
  EXPECT_NEAR(ledger.backlog(0), 0.75, 1e-15);
  EXPECT_NEAR(ledger.drop(0), 0.75, 1e-15);
  EXPECT_EQ(ledger.backlog(0), 0.0);
  EXPECT_NEAR(ledger.total_arrived() - ledger.total_served() - ledger.total_dropped(), 0.0, 1e-15);
}

TEST(MeasureDelay, AverageAndTrim) {
  QueueLedger ledger(1, ServiceOrder::fifo);
  ledger.arrive(0, 0, 1.0);
  ledger.serve(0, 0, 0.5);
  ledger.serve(0, 10, 0.5);
  const DelayStats all = measure_delay(ledger, 0.0);
  EXPECT_DOUBLE_EQ(all.average, 5.0);
  EXPECT_DOUBLE_EQ(all.trimmed, 5.0);
  const DelayStats half = measure_delay(ledger, 0.5);
  EXPECT_DOUBLE_EQ(half.trimmed, 0.0);
  const DelayStats quarter = measure_delay(ledger, 0.25);
  EXPECT_NEAR(quarter.trimmed, (0.5 * 0 + 0.25 * 10) / 0.75, 1e-12);
}

TEST(RunSimulation, ZeroArrivalsStayEmpty) {
  const SystemModel model = build_two_queue_preset();
  const DistributionSchedule schedule = stationary(0.0, 0.0, 2000);
  for (const SimConfig& c : {bp_config(50, 2000, 1), plc_config(50, 2000, 1, 0.0)}) {
    const SimResult r = run_simulation(model, schedule, c);
    EXPECT_EQ(r.metrics.avg_cost, 0.0);
    EXPECT_EQ(r.metrics.avg_backlog, 0.0);
    for (const auto& rec : r.trace) EXPECT_EQ(rec.backlog, vec({0, 0}));
  }
}

TEST(RunSimulation, SameSeedGivesByteIdenticalOutput) {
  const SystemModel model = build_two_queue_preset();
  const DistributionSchedule schedule = stationary(0.3, 0.6, 3000);
  for (const SimConfig& c : {bp_config(50, 3000, 9), plc_config(50, 3000, 9, 0.04)}) {
    const SimResult a = run_simulation(model, schedule, c);
    const SimResult b = run_simulation(model, schedule, c);
    std::ostringstream ta, tb;
    write_trace_csv(ta, a.trace);
    write_trace_csv(tb, b.trace);
    EXPECT_EQ(ta.str(), tb.str());
    EXPECT_EQ(metrics_json(a.metrics), metrics_json(b.metrics));
  }
}

TEST(RunSimulation, ControllersSeeTheSameStateSequence) {
  const SystemModel model = build_two_queue_preset();
  const DistributionSchedule schedule = stationary(0.3, 0.6, 2000);
  const SimResult bp = run_simulation(model, schedule, bp_config(50, 2000, 4));
  const SimResult plc = run_simulation(model, schedule, plc_config(50, 2000, 4, 0.04));
  for (std::size_t i = 0; i < bp.trace.size(); ++i) ASSERT_EQ(bp.trace[i].state, plc.trace[i].state);
}

TEST(RunSimulation, ConservationAndRecurrenceOverLongRuns) {
  const SystemModel model = build_two_queue_preset();
  const Slot T = 50000;
  const DistributionSchedule schedule({{0, two_queue_distribution(0.2, 0.4)}, {25000, two_queue_distribution(0.3, 0.6)}}, T);
  for (const SimConfig& c : {bp_config(100, T, 2), plc_config(100, T, 2, 0.0), plc_config(100, T, 2, 0.04)}) {
    const SimResult r = run_simulation(model, schedule, c);
    EXPECT_LE(r.max_conservation_error, 1e-9);
    EXPECT_LE(r.max_recurrence_error, 1e-9);
    EXPECT_NEAR(r.metrics.arrived_mass - r.metrics.served_mass - r.metrics.dropped_mass,
                r.trace.back().backlog.sum(), 1e-6);
    for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
      const TraceRecord& rec = r.trace[i];
      EXPECT_EQ(rec.backlog, queue_update(rec.queue, model.evaluate(rec.state, rec.action)));
      if (!r.trace[i + 1].has(kEventDrop)) ASSERT_EQ(r.trace[i + 1].queue, rec.backlog);
    }
  }
}

TEST(RunSimulation, DropsZeroTheQueue) {
  const SystemModel model = build_two_queue_preset();
  const Slot T = 20000;
  const DistributionSchedule schedule({{0, two_queue_distribution(0.2, 0.4)}, {10000, two_queue_distribution(0.3, 0.6)}}, T);
  long drops = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SimResult r = run_simulation(model, schedule, plc_config(100, T, seed, 0.04));
    for (const auto& rec : r.trace) {
      if (rec.has(kEventDrop)) {
        EXPECT_EQ(rec.queue, vec({0, 0}));
        ++drops;
      }
    }
    EXPECT_EQ(static_cast<long>(r.drop_slots.size()), r.metrics.drop_events);
  }
}

TEST(RunSimulation, PerfectPredictionNeverDropsWhenStationary) {
  const SystemModel model = build_two_queue_preset();
  const SimResult r = run_simulation(model, stationary(0.3, 0.6, 50000), plc_config(100, 50000, 3, 0.0));
  EXPECT_EQ(r.metrics.drop_events, 0);
  EXPECT_EQ(r.metrics.drop_rate, 0.0);
}

TEST(RunSimulation, BackpressureIsStable) {
  const SystemModel model = build_two_queue_preset();
  const Slot T = 50000;
  const SimResult r = run_simulation(model, stationary(0.3, 0.6, T), bp_config(100, T, 5));
  EXPECT_TRUE(std::isfinite(r.metrics.avg_cost));
  const double mid = mean_backlog(r.trace, 12500, 25000);
  const double late = mean_backlog(r.trace, 25000, 50000);
  EXPECT_LE(late, 1.1 * mid + 20.0);
  EXPECT_LE(r.trace.back().backlog.sum(), 10 * 100.0);
}

TEST(RunSimulation, PlcCutsDelayAgainstBackpressure) {
  const SystemModel model = build_two_queue_preset();
  const Slot T = 50000;
  const SimResult bp = run_simulation(model, stationary(0.3, 0.6, T), bp_config(100, T, 6));
  const SimResult plc = run_simulation(model, stationary(0.3, 0.6, T), plc_config(100, T, 6, 0.0));
  EXPECT_LT(plc.metrics.trimmed_delay, bp.metrics.trimmed_delay);
  EXPECT_LT(plc.metrics.avg_backlog, bp.metrics.avg_backlog);
}

TEST(RunSimulation, ValidationErrors) {
  const SystemModel model = build_two_queue_preset();
  const DistributionSchedule schedule = stationary(0.3, 0.6, 100);
  EXPECT_THROW(run_simulation(model, schedule, bp_config(10, 200, 0)), ParameterError);
  SimConfig c = plc_config(10, 100, 0, 0.0);
  c.plc.reset();
  EXPECT_THROW(run_simulation(model, schedule, c), ParameterError);
  c = plc_config(10, 100, 0, 0.0);
  c.V = 20;
  EXPECT_THROW(run_simulation(model, schedule, c), ParameterError);
  c = plc_config(10, 100, 0, 0.0);
  c.profile = PredictionProfile::constant(0.0, 3);
  EXPECT_THROW(run_simulation(model, schedule, c), ParameterError);
}

TEST(TraceAverages, MatchReportedMetrics) {
  const SystemModel model = build_two_queue_preset();
  const SimResult r = run_simulation(model, stationary(0.3, 0.6, 5000), plc_config(50, 5000, 8, 0.04));
  const TraceAverages avg = trace_averages(r.trace);
  EXPECT_NEAR(avg.avg_cost, r.metrics.avg_cost, 1e-12);
  EXPECT_NEAR(avg.avg_backlog, r.metrics.avg_backlog, 1e-9);
}

TEST(ConvergenceTime, Examples) {
  const Vector star = vec({100, 50});
  std::vector<TraceRecord> trace{record(0, 0, star), record(1, 0, vec({0, 0}))};
  EXPECT_EQ(convergence_time(trace, star, 1.0), 0);
  std::vector<TraceRecord> far{record(0, 0, vec({0, 0})), record(1, 0, vec({10, 10})), record(2, 0, vec({95, 50}))};
  EXPECT_EQ(convergence_time(far, star, 1e6), 0);
  EXPECT_EQ(convergence_time(far, star, 6.0), 2);
  EXPECT_EQ(convergence_time(far, star, 1.0), std::nullopt);
  EXPECT_EQ(convergence_time(far, star, 6.0, 1), 1);
}

TEST(DetectionStats, AttributesFirstEventPerChange) {
  const Distribution a = two_queue_distribution(0.2, 0.4);
  const Distribution b = two_queue_distribution(0.3, 0.6);
  const DistributionSchedule schedule({{0, a}, {100, b}}, 300);
  const std::vector<TraceRecord> trace{record(90, kEventDetection), record(98, kEventResetPoint),
                                       record(120, kEventDetection), record(150, kEventDrop)};
  const DetectionSummary s = detection_stats(trace, schedule, 4);
  ASSERT_EQ(s.changes.size(), 1u);
  EXPECT_EQ(s.changes[0].change_slot, 100);
  EXPECT_EQ(s.changes[0].detected_slot, 98);
  EXPECT_EQ(s.changes[0].delay, -2);
  EXPECT_EQ(s.false_positives, 2);
}

TEST(DetectionStats, StationaryHasNoChanges) {
  const DistributionSchedule schedule = stationary(0.3, 0.6, 100);
  const DetectionSummary s = detection_stats({record(5, kEventDetection)}, schedule, 4);
  EXPECT_TRUE(s.changes.empty());
  EXPECT_EQ(s.false_positives, 1);
}

TEST(TraceCsv, HeaderAndRowShape) {
  const SystemModel model = build_two_queue_preset();
  const SimResult r = run_simulation(model, stationary(0.3, 0.6, 10), plc_config(20, 10, 0, 0.0));
  std::ostringstream out;
  write_trace_csv(out, r.trace);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header,
            "slot,state,action,cost,arrival_1,arrival_2,service_1,service_2,queue_1,queue_2,backlog_1,backlog_2,"
            "gamma_1,gamma_2,augmented_1,augmented_2,branch,events");
  std::getline(in, row);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_NE(row.find("resolve"), std::string::npos);
}

TEST(MetricsJson, NullConvergenceWhenUnset) {
  Metrics m;
  EXPECT_NE(metrics_json(m).find("\"T_zeta\": null"), std::string::npos);
  m.convergence_time = 12;
  EXPECT_NE(metrics_json(m).find("\"T_zeta\": 12"), std::string::npos);
}
