#include "plc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace plc {

namespace fs = std::filesystem;

double ControllerSpec::e_w() const {
  if (kind == ControllerKind::bp || error_curve.empty()) return 0.0;
  double sum = 0.0;
  for (double e : error_curve) sum += e;
  return sum / static_cast<double>(error_curve.size());
}

namespace {

std::string exact(double x) {
  // Shortest representation that parses back to the same value.
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParameterError("config: " + key + " expects a number, got '" + text + "'");
  return value;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParameterError("config: " + key + " expects an integer, got '" + text + "'");
  return value;
}

ControllerSpec parse_controller(const std::string& token) {
  ControllerSpec spec;
  if (token == "bp") return spec;
  if (token.rfind("plc", 0) != 0) throw ParameterError("config: unknown controller '" + token + "'");
  spec.kind = ControllerKind::plc;
  if (token == "plc") return spec;
  if (token[3] != ':') throw ParameterError("config: controller expects plc:<e_w>, got '" + token + "'");
  for (const auto& e : split(token.substr(4), '/')) spec.error_curve.push_back(parse_double("controllers", e));
  return spec;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split(text, ',')) {
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto lo = parse_int("seeds", trim(item.substr(0, dash)));
      const auto hi = parse_int("seeds", trim(item.substr(dash + 1)));
      if (lo < 0 || hi < lo) throw ParameterError("config: seeds range must satisfy 0 <= a <= b");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    } else {
      const auto s = parse_int("seeds", item);
      if (s < 0) throw ParameterError("config: seeds must be nonnegative");
      seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  return seeds;
}

}  // namespace

std::string ControllerSpec::token() const {
  if (kind == ControllerKind::bp) return "bp";
  if (error_curve.empty()) return "plc";
  const bool constant = std::all_of(error_curve.begin(), error_curve.end(),
                                    [&](double e) { return e == error_curve.front(); });
  if (constant) return "plc:" + exact(error_curve.front());
  std::string out = "plc:";
  for (std::size_t k = 0; k < error_curve.size(); ++k) {
    if (k) out += '/';
    out += exact(error_curve[k]);
  }
  return out;
}

namespace {

std::vector<double> curve_for(const ControllerSpec& spec, Slot w) {
  const auto n = static_cast<std::size_t>(w + 1);
  if (spec.kind == ControllerKind::bp || spec.error_curve.empty()) return std::vector<double>(n, 0.0);
  if (spec.error_curve.size() == 1) return std::vector<double>(n, spec.error_curve.front());
  return spec.error_curve;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (model != "two_queue") throw ParameterError("config: model must be two_queue");
  if (horizon < 1) throw ParameterError("config: horizon >= 1 required");
  if (segments.empty()) throw ParameterError("config: at least one segment required");
  if (segments.front().start != 0) throw ParameterError("config: first segment must start at 0");
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    if (k && seg.start <= segments[k - 1].start) throw ParameterError("config: segment starts must increase");
    if (seg.start >= horizon) throw ParameterError("config: segment starts must lie before the horizon");
    if (!(seg.p1 >= 0.0 && seg.p1 <= 1.0 && seg.p2 >= 0.0 && seg.p2 <= 1.0)) {
      throw ParameterError("config: segment probabilities must lie in [0, 1]");
    }
  }
  if (controllers.empty()) throw ParameterError("config: at least one controller required");
  if (w < 0) throw ParameterError("config: w >= 0 required");
  for (const auto& ctl : controllers) {
    if (ctl.kind == ControllerKind::bp) continue;
    const auto n = ctl.error_curve.size();
    if (n > 1 && n != static_cast<std::size_t>(w + 1)) {
      throw ParameterError("config: error curve must hold one value or w+1 values");
    }
    for (double e : ctl.error_curve) {
      if (!(e >= 0.0 && e <= 2.0)) throw ParameterError("config: prediction errors must lie in [0, 2]");
    }
  }
  if (V_values.empty()) throw ParameterError("config: at least one V required");
  if (seeds.empty()) throw ParameterError("config: at least one seed required");
  if (!(zeta > 0.0)) throw ParameterError("config: zeta > 0 required");
  if (dual_iters < 1 || warm_iters < 1) throw ParameterError("config: dual_iters, warm_iters >= 1 required");
  if (!(warm_radius >= 0.0 && warm_radius <= 2.0)) throw ParameterError("config: warm_radius in [0, 2] required");
  if (out_dir.empty()) throw ParameterError("config: out_dir must not be empty");
  for (double V : V_values) {
    if (!(V >= 2.0) || !std::isfinite(V)) throw ParameterError("config: every V must be >= 2");
    for (const auto& ctl : controllers) {
      if (ctl.kind != ControllerKind::plc) continue;
      try {
        build_plc_config(*this, ctl, V);
      } catch (const std::exception& e) {
        throw ParameterError(std::string("config: V=") + exact(V) + ": " + e.what());
      }
    }
  }
}

ExperimentConfig scenario_stationary() {
  ExperimentConfig cfg;
  cfg.scenario = "stationary";
  cfg.horizon = 50000;
  cfg.segments = {{0, 0.3, 0.6}};
  cfg.controllers = {ControllerSpec{}, ControllerSpec{ControllerKind::plc, {0.0}},
                     ControllerSpec{ControllerKind::plc, {0.04}}};
  cfg.V_values = {20, 50, 100, 150, 200, 300};
  for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
  cfg.out_dir = "out/stationary";
  return cfg;
}

ExperimentConfig scenario_change() {
  ExperimentConfig cfg;
  cfg.scenario = "change";
  cfg.horizon = 5000;
  cfg.segments = {{0, 0.2, 0.4}, {2500, 0.3, 0.6}};
  cfg.controllers = {ControllerSpec{ControllerKind::plc, {0.0}}, ControllerSpec{ControllerKind::plc, {0.04}},
                     ControllerSpec{}};
  cfg.V_values = {100};
  for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
  cfg.out_dir = "out/change";
  return cfg;
}

ExperimentConfig scenario_by_name(const std::string& name) {
  if (name == "stationary") return scenario_stationary();
  if (name == "change") return scenario_change();
  throw ParameterError("unknown scenario '" + name + "' (expected stationary or change)");
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "scenario = " << cfg.scenario << '\n';
  out << "model = " << cfg.model << '\n';
  out << "horizon = " << cfg.horizon << '\n';
  out << "segments = ";
  for (std::size_t k = 0; k < cfg.segments.size(); ++k) {
    const auto& s = cfg.segments[k];
    out << (k ? ";" : "") << s.start << ':' << exact(s.p1) << ':' << exact(s.p2);
  }
  out << "\ncontrollers = ";
  for (std::size_t k = 0; k < cfg.controllers.size(); ++k) out << (k ? ";" : "") << cfg.controllers[k].token();
  out << "\nV = ";
  for (std::size_t k = 0; k < cfg.V_values.size(); ++k) out << (k ? "," : "") << exact(cfg.V_values[k]);
  out << "\nc = " << exact(cfg.c) << '\n';
  out << "w = " << cfg.w << '\n';
  out << "eps_d = " << exact(cfg.eps_d) << '\n';
  out << "delta = " << exact(cfg.delta) << '\n';
  out << "theta_mode = " << (cfg.theta_mode == ThetaMode::theory ? "theory" : "simulation") << '\n';
  out << "seeds = ";
  for (std::size_t k = 0; k < cfg.seeds.size(); ++k) out << (k ? "," : "") << cfg.seeds[k];
  out << "\nzeta = " << exact(cfg.zeta) << '\n';
  out << "dual_iters = " << cfg.dual_iters << '\n';
  out << "warm_iters = " << cfg.warm_iters << '\n';
  out << "warm_radius = " << exact(cfg.warm_radius) << '\n';
  out << "out_dir = " << cfg.out_dir << '\n';
  return out.str();
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "scenario") {
      cfg.scenario = value;
    } else if (key == "model") {
      cfg.model = value;
    } else if (key == "horizon") {
      cfg.horizon = parse_int(key, value);
    } else if (key == "segments") {
      cfg.segments.clear();
      for (const auto& item : split(value, ';')) {
        const auto parts = split(item, ':');
        if (parts.size() != 3) throw ParameterError("config: segments expects start:p1:p2 items");
        cfg.segments.push_back({parse_int(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])});
      }
    } else if (key == "controllers") {
      cfg.controllers.clear();
      for (const auto& item : split(value, ';')) cfg.controllers.push_back(parse_controller(item));
    } else if (key == "V") {
      cfg.V_values.clear();
      for (const auto& item : split(value, ',')) cfg.V_values.push_back(parse_double(key, item));
    } else if (key == "c") {
      cfg.c = parse_double(key, value);
    } else if (key == "w") {
      cfg.w = parse_int(key, value);
    } else if (key == "eps_d") {
      cfg.eps_d = parse_double(key, value);
    } else if (key == "delta") {
      cfg.delta = parse_double(key, value);
    } else if (key == "theta_mode") {
      if (value == "simulation") {
        cfg.theta_mode = ThetaMode::simulation;
      } else if (value == "theory") {
        cfg.theta_mode = ThetaMode::theory;
      } else {
        throw ParameterError("config: theta_mode must be simulation or theory");
      }
    } else if (key == "seeds") {
      cfg.seeds = parse_seeds(value);
    } else if (key == "zeta") {
      cfg.zeta = parse_double(key, value);
    } else if (key == "dual_iters") {
      cfg.dual_iters = static_cast<int>(parse_int(key, value));
    } else if (key == "warm_iters") {
      cfg.warm_iters = static_cast<int>(parse_int(key, value));
    } else if (key == "warm_radius") {
      cfg.warm_radius = parse_double(key, value);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else {
      throw ParameterError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

DistributionSchedule build_schedule(const ExperimentConfig& cfg) {
  std::vector<ScheduleSegment> segments;
  for (const auto& s : cfg.segments) segments.push_back({s.start, two_queue_distribution(s.p1, s.p2)});
  return DistributionSchedule(std::move(segments), cfg.horizon);
}

PlcConfig build_plc_config(const ExperimentConfig& cfg, const ControllerSpec& controller, double V) {
  const PlcParams params = derive_params(V, cfg.c, cfg.w, cfg.eps_d, controller.e_w(), cfg.theta_mode, cfg.delta);
  PlcConfig plc = make_plc_config(params);
  plc.dual.max_iters = cfg.dual_iters;
  plc.dual.warm_iters = cfg.warm_iters;
  plc.warm_radius = cfg.warm_radius;
  return plc;
}

namespace {

Vector reference_multiplier(const ExperimentConfig& cfg, const SystemModel& model, double V) {
  const auto& last = cfg.segments.back();
  DualSolverParams dual;
  dual.V = V;
  dual.max_iters = cfg.dual_iters;
  return solve_multiplier(model, two_queue_distribution(last.p1, last.p2), dual).gamma;
}

SimConfig sim_config_with_reference(const ExperimentConfig& cfg, const ControllerSpec& controller, double V,
                                    std::uint64_t seed, const Vector& reference) {
  SimConfig sc;
  sc.controller = controller.kind;
  sc.V = V;
  if (controller.kind == ControllerKind::plc) sc.plc = build_plc_config(cfg, controller, V);
  sc.profile.error_curve = curve_for(controller, cfg.w);
  sc.seed = seed;
  sc.horizon = cfg.horizon;
  sc.record_trace = false;
  sc.reference_gamma = reference;
  sc.convergence_from = cfg.segments.back().start;
  sc.zeta = cfg.zeta;
  return sc;
}

}  // namespace

SimConfig build_sim_config(const ExperimentConfig& cfg, const SystemModel& model, const ControllerSpec& controller,
                           double V, std::uint64_t seed) {
  return sim_config_with_reference(cfg, controller, V, seed, reference_multiplier(cfg, model, V));
}

namespace {

std::string cell_stem(const CellResult& c) {
  return std::string(to_string(c.controller.kind)) + "_ew" + format_number(c.controller.e_w()) + "_V" +
         format_number(c.V) + "_seed" + std::to_string(c.seed);
}

auto cell_key(const CellResult& c) {
  return std::make_tuple(std::string(to_string(c.controller.kind)), c.V, c.controller.e_w(), c.controller.token(),
                         c.seed);
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, const SweepOptions& options) {
  cfg.validate();
  const SystemModel model = build_two_queue_preset();
  const DistributionSchedule schedule = build_schedule(cfg);

  std::map<double, Vector> references;
  for (double V : cfg.V_values) references.emplace(V, reference_multiplier(cfg, model, V));

  SweepResult result;
  for (const auto& ctl : cfg.controllers) {
    for (double V : cfg.V_values) {
      for (auto seed : cfg.seeds) result.cells.push_back(CellResult{ctl, V, seed, false, {}, {}});
    }
  }
  std::sort(result.cells.begin(), result.cells.end(),
            [](const CellResult& a, const CellResult& b) { return cell_key(a) < cell_key(b); });

  const fs::path out_dir(cfg.out_dir);
  if (options.write_files) {
    fs::create_directories(out_dir / "runs");
    if (options.write_traces) fs::create_directories(out_dir / "traces");
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      CellResult& cell = result.cells[i];
      try {
        SimConfig sc = sim_config_with_reference(cfg, cell.controller, cell.V, cell.seed, references.at(cell.V));
        sc.record_trace = options.write_files && options.write_traces;
        const SimResult run = run_simulation(model, schedule, sc);
        cell.metrics = run.metrics;
        cell.ok = true;
        if (options.write_files) {
          std::ofstream(out_dir / "runs" / (cell_stem(cell) + ".json")) << metrics_json(run.metrics) << '\n';
          if (sc.record_trace) {
            std::ofstream trace(out_dir / "traces" / (cell_stem(cell) + ".csv"));
            write_trace_csv(trace, run.trace);
          }
        }
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& c : result.cells) {
    if (!c.ok) ++result.failures;
  }
  if (options.write_files) {
    std::ofstream(out_dir / "sweep.csv") << sweep_csv(result);
    std::ofstream(out_dir / "plot.csv") << plot_csv(result);
    std::ofstream(out_dir / "config.txt") << to_config_text(cfg);
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "controller,V,e_w,seed,avg_cost,avg_backlog,avg_delay,trimmed_delay,drop_rate,T_zeta,detection_delays,"
         "drop_events,status\n";
  for (const auto& c : result.cells) {
    const Metrics& m = c.metrics;
    out << to_string(c.controller.kind) << ',' << format_number(c.V) << ',' << format_number(c.controller.e_w())
        << ',' << c.seed << ',';
    if (!c.ok) {
      out << ",,,,,,,," << "error\n";
      continue;
    }
    out << format_number(m.avg_cost) << ',' << format_number(m.avg_backlog) << ',' << format_number(m.avg_delay)
        << ',' << format_number(m.trimmed_delay) << ',' << format_number(m.drop_rate) << ','
        << (m.convergence_time ? std::to_string(*m.convergence_time) : "inf") << ',';
    for (std::size_t k = 0; k < m.detection.changes.size(); ++k) {
      const auto& d = m.detection.changes[k];
      out << (k ? ";" : "") << (d.delay ? std::to_string(*d.delay) : "missed");
    }
    out << ',' << m.drop_events << ",ok\n";
  }
  return out.str();
}

std::string plot_csv(const SweepResult& result) {
  struct Acc {
    int n = 0;
    double cost = 0, cost_min = INFINITY, cost_max = -INFINITY;
    double delay = 0, delay_min = INFINITY, delay_max = -INFINITY;
    double avg_delay = 0, backlog = 0, drop = 0;
  };
  std::map<std::tuple<std::string, double, double>, Acc> groups;
  for (const auto& c : result.cells) {
    if (!c.ok) continue;
    Acc& a = groups[{to_string(c.controller.kind), c.controller.e_w(), c.V}];
    const Metrics& m = c.metrics;
    ++a.n;
    a.cost += m.avg_cost;
    a.cost_min = std::min(a.cost_min, m.avg_cost);
    a.cost_max = std::max(a.cost_max, m.avg_cost);
    a.delay += m.trimmed_delay;
    a.delay_min = std::min(a.delay_min, m.trimmed_delay);
    a.delay_max = std::max(a.delay_max, m.trimmed_delay);
    a.avg_delay += m.avg_delay;
    a.backlog += m.avg_backlog;
    a.drop += m.drop_rate;
  }
  std::ostringstream out;
  out << "controller,e_w,V,runs,avg_cost_mean,avg_cost_min,avg_cost_max,trimmed_delay_mean,trimmed_delay_min,"
         "trimmed_delay_max,avg_delay_mean,avg_backlog_mean,drop_rate_mean\n";
  for (const auto& [key, a] : groups) {
    const double n = a.n;
    out << std::get<0>(key) << ',' << format_number(std::get<1>(key)) << ',' << format_number(std::get<2>(key))
        << ',' << a.n << ',' << format_number(a.cost / n) << ',' << format_number(a.cost_min) << ','
        << format_number(a.cost_max) << ',' << format_number(a.delay / n) << ',' << format_number(a.delay_min) << ','
        << format_number(a.delay_max) << ',' << format_number(a.avg_delay / n) << ','
        << format_number(a.backlog / n) << ',' << format_number(a.drop / n) << '\n';
  }
  return out.str();
}

OracleRow run_oracle(double p1, double p2, double V, double grid_max_factor, double grid_step) {
  const SystemModel model = build_two_queue_preset();
  const Distribution pi = two_queue_distribution(p1, p2);
  OracleRow row;
  row.V = V;
  const auto start = std::chrono::steady_clock::now();
  DualSolverParams params;
  params.V = V;
  const Multiplier m = solve_multiplier(model, pi, params);
  row.solver = m.gamma;
  row.capped = m.capped;
  row.oracle = grid_oracle(model, pi, V, grid_max_factor * V, grid_step);
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  row.linf = (row.solver - row.oracle).cwiseAbs().maxCoeff();
  return row;
}

DetectBenchResult run_detect_bench(const DetectBenchConfig& cfg) {
  if (cfg.before.size() != cfg.after.size()) throw DimensionError("detect bench: laws must share M");
  if (cfg.trials < 1) throw ParameterError("detect bench: trials >= 1 required");
  const Index M = cfg.before.size();
  const Slot w = cfg.w;
  const Slot d = simulation_detection_window(cfg.eps_d, cfg.delta, w);
  const Slot test_slot = 2 * d - w - 1;

  DetectBenchResult res;
  res.d = d;
  res.test_slot = test_slot;
  res.trials = cfg.trials;

  // windows[k]: first k entries predict `before`, the rest `after`.
  std::vector<PredictionWindow> windows(static_cast<std::size_t>(w + 2));
  for (Slot k = 0; k <= w + 1; ++k) {
    auto& win = windows[static_cast<std::size_t>(k)];
    for (Slot j = 0; j <= w; ++j) win.predicted.push_back(j < k ? cfg.before : cfg.after);
  }
  const PredictionWindow stationary_window = windows.back();

  const AdeParams ade_params{d, d, cfg.eps_d, M, std::vector<double>(static_cast<std::size_t>(w + 1), 0.0)};
  std::vector<Index> samples(static_cast<std::size_t>(test_slot + 1));

  auto draw = [](const Distribution& pi, Rng& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    Index last = 0;
    for (Index i = 0; i < pi.size(); ++i) {
      if (pi[i] <= 0.0) continue;
      acc += pi[i];
      last = i;
      if (u < acc) return i;
    }
    return last;
  };

  // Independent recomputation of the statistic the estimator tests.
  auto window_tv = [&](bool change) {
    Vector hist = Vector::Zero(M);
    Vector recent = Vector::Zero(M);
    for (Slot s = 0; s < d; ++s) hist[samples[static_cast<std::size_t>(s)]] += 1.0;
    for (Slot s = test_slot + w + 1 - d; s < test_slot; ++s) recent[samples[static_cast<std::size_t>(s)]] += 1.0;
    recent += static_cast<double>(w + 1) * (change ? cfg.after : cfg.before).probs();
    return total_variation(hist / static_cast<double>(d), recent / static_cast<double>(d));
  };

  for (int trial = 0; trial < cfg.trials; ++trial) {
    for (int change = 1; change >= 0; --change) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(change)};
      Rng rng(seq);
      AdeEstimator ade(ade_params);
      bool fired = false;
      for (Slot t = 0; t <= test_slot; ++t) {
        const bool pre = !change || t < d;
        const Index s = draw(pre ? cfg.before : cfg.after, rng);
        samples[static_cast<std::size_t>(t)] = s;
        const auto& win = change ? windows[static_cast<std::size_t>(std::clamp<Slot>(d - t, 0, w + 1))]
                                 : stationary_window;
        const AdeEvents ev = ade.update(t, s, win);
        if (ev.restarted()) {
          fired = t == test_slot && ev.change_detected;
          break;
        }
      }
      if (change) {
        res.detections += fired;
        res.mean_tv_change += window_tv(true);
      } else {
        res.false_positives += fired;
        res.mean_tv_stationary += window_tv(false);
      }
    }
  }
  res.mean_tv_change /= cfg.trials;
  res.mean_tv_stationary /= cfg.trials;
  return res;
}

}  // namespace plc
