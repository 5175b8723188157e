#pragma once

// Parameter sweeps over chain configurations: time for the sink to reach a
// target population (capped at t_max), sink population at a fixed time, and
// grid searches for optimal input/output rates.  Cells are independent and
// may run on any number of threads; results land in a fixed row-major grid.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include "jch/chain_model.hpp"
#include "jch/evolution.hpp"

namespace jch {

enum class SweepParam { RateIn, RateOut, K, Mu, G };

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::RateIn: return "rate_in";
    case SweepParam::RateOut: return "rate_out";
    case SweepParam::K: return "k";
    case SweepParam::Mu: return "mu";
    case SweepParam::G: return "g";
  }
  return "?";
}

inline std::optional<SweepParam> parse_sweep_param(std::string_view s) {
  for (auto p : {SweepParam::RateIn, SweepParam::RateOut, SweepParam::K, SweepParam::Mu, SweepParam::G})
    if (s == to_string(p)) return p;
  return std::nullopt;
}

inline void set_param(ChainConfig& c, SweepParam p, double v) {
  switch (p) {
    case SweepParam::RateIn: c.rate_in = v; break;
    case SweepParam::RateOut: c.rate_out = v; break;
    case SweepParam::K: c.k = v; break;
    case SweepParam::Mu: c.mu = v; break;
    case SweepParam::G: c.g = v; break;
  }
}

struct Axis {
  SweepParam param;
  std::vector<double> values;

  bool operator==(const Axis&) const = default;
};

struct TimeToReach {
  double target = 0.995;
  double t_max = 400.0;

  bool operator==(const TimeToReach&) const = default;
};

struct SinkAtTime {
  double time = 0.0;

  bool operator==(const SinkAtTime&) const = default;
};

using Objective = std::variant<TimeToReach, SinkAtTime>;

struct SweepSpec {
  ChainConfig base;
  Axis axis1;
  std::optional<Axis> axis2;
  Objective objective = TimeToReach{};
  double dt = 0.01;

  bool operator==(const SweepSpec&) const = default;
};

/// 0.1, 0.2, …, 4.0
inline std::vector<double> default_rate_grid() {
  std::vector<double> v;
  for (int i = 1; i <= 40; ++i) v.push_back(i / 10.0);
  return v;
}

/// 0.0, 0.05, …, 2.0
inline std::vector<double> default_g_grid() {
  std::vector<double> v;
  for (int i = 0; i <= 40; ++i) v.push_back(i / 20.0);
  return v;
}

inline void validate(const SweepSpec& spec) {
  auto check_axis = [](const Axis& a) {
    if (a.values.empty()) throw std::invalid_argument(std::string("axis ") + to_string(a.param) + " has no values");
    for (std::size_t i = 1; i < a.values.size(); ++i)
      if (!(a.values[i] > a.values[i - 1]))
        throw std::invalid_argument(std::string("axis ") + to_string(a.param) + " values must be strictly increasing");
    for (double v : a.values)
      if (!std::isfinite(v)) throw std::invalid_argument(std::string("axis ") + to_string(a.param) + " has a non-finite value");
  };
  check_axis(spec.axis1);
  if (spec.axis2) {
    check_axis(*spec.axis2);
    if (spec.axis2->param == spec.axis1.param) throw std::invalid_argument("both sweep axes use the same parameter");
  }
  if (!(spec.dt > 0)) throw std::invalid_argument("dt must be > 0");
  if (const auto* r = std::get_if<TimeToReach>(&spec.objective)) {
    if (!(r->target > 0 && r->target < 1)) throw std::invalid_argument("target must lie in (0, 1)");
    if (!(r->t_max > 0)) throw std::invalid_argument("t_max must be > 0");
  } else if (std::get<SinkAtTime>(spec.objective).time < 0) {
    throw std::invalid_argument("objective_time must be >= 0");
  }
  validate(spec.base);
}

struct ReachTime {
  double time;
  bool capped;
};

struct NoHook {
  void operator()() const {}
};

/// Linear interpolation between the bracketing steps; capped at t_max.
/// after_step runs once after every step.
template <class Hook = NoHook>
ReachTime time_to_reach(Integrator& integ, double target, double t_max, Hook&& after_step = {}) {
  if (!(target > 0 && target < 1)) throw std::invalid_argument("target must lie in (0, 1)");
  double prev = integ.sink_population();
  if (prev >= target) return {integ.time(), false};
  const std::size_t n = step_count(t_max, integ.dt());
  for (std::size_t s = 1; s <= n; ++s) {
    const double t_prev = integ.time();
    integ.step();
    after_step();
    const double cur = integ.sink_population();
    if (cur >= target) {
      const double t = t_prev + integ.dt() * (target - prev) / (cur - prev);
      if (t <= t_max) return {t, false};
      break;
    }
    prev = cur;
  }
  return {t_max, true};
}

inline ReachTime time_to_reach(const ChainConfig& config, double target, double t_max, double dt) {
  const ChainModel model(config);
  Integrator integ(model, dt);
  return time_to_reach(integ, target, t_max);
}

template <class Hook = NoHook>
double sink_at_time(Integrator& integ, double t, Hook&& after_step = {}) {
  const std::size_t n = step_count(t, integ.dt());
  while (integ.steps() < n) {
    integ.step();
    after_step();
  }
  return integ.sink_population();
}

struct SweepOptions {
  unsigned threads = 0;                       // 0: hardware concurrency
  std::optional<std::uint64_t> shuffle_seed;  // permute cell execution order
  std::size_t monitor_every = 1000;           // steps between positivity checks

  SweepOptions() = default;
  explicit SweepOptions(unsigned n_threads, std::optional<std::uint64_t> seed = std::nullopt)
      : threads(n_threads), shuffle_seed(seed) {}
};

struct SweepResult {
  SweepSpec spec;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> grid;    // row-major, rows = axis1, cols = axis2 (or 1)
  std::vector<char> cap_mask;  // same layout
  double max_trace_drift = 0.0;
  double min_eigenvalue = 1.0;

  double value(std::size_t i, std::size_t j = 0) const { return grid.at(i * cols + j); }
  bool capped(std::size_t i, std::size_t j = 0) const { return cap_mask.at(i * cols + j) != 0; }
};

namespace detail {

struct CellOutcome {
  double value = 0.0;
  bool capped = false;
  double trace_drift = 0.0;
  double min_eigenvalue = 1.0;
};

inline CellOutcome run_cell(const ChainModel& model, std::shared_ptr<const Propagator> prop, const Objective& obj,
                            std::size_t monitor_every) {
  Integrator integ(model, std::move(prop), initial_density_matrix(model.config, model.basis));
  CellOutcome out;
  auto monitor = [&] {
    out.trace_drift = std::max(out.trace_drift, std::abs(integ.trace() - cplx(1.0, 0.0)));
    out.min_eigenvalue = std::min(out.min_eigenvalue, integ.state().min_eigenvalue());
  };
  auto hook = [&] {
    if (integ.steps() % monitor_every == 0) monitor();
  };
  if (const auto* r = std::get_if<TimeToReach>(&obj)) {
    const auto reach = time_to_reach(integ, r->target, r->t_max, hook);
    out.value = reach.time;
    out.capped = reach.capped;
  } else {
    out.value = sink_at_time(integ, std::get<SinkAtTime>(obj).time, hook);
  }
  monitor();
  return out;
}

// Cells sharing these parameters share H and therefore the propagator.
using HamiltonianKey = std::tuple<double, double, double>;

inline HamiltonianKey hamiltonian_key(const ChainConfig& c) {
  return {c.k, c.mu, c.dephasing == Dephasing::UnitaryPhonon ? c.g : 0.0};
}

}  // namespace detail

inline SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& opts = {}) {
  validate(spec);
  SweepResult res;
  res.spec = spec;
  res.rows = spec.axis1.values.size();
  res.cols = spec.axis2 ? spec.axis2->values.size() : 1;
  const std::size_t n_cells = res.rows * res.cols;

  std::vector<ChainConfig> configs(n_cells, spec.base);
  for (std::size_t i = 0; i < res.rows; ++i)
    for (std::size_t j = 0; j < res.cols; ++j) {
      auto& c = configs[i * res.cols + j];
      set_param(c, spec.axis1.param, spec.axis1.values[i]);
      if (spec.axis2) set_param(c, spec.axis2->param, spec.axis2->values[j]);
      validate(c);
    }

  // One propagator per distinct Hamiltonian, built up front.
  std::map<detail::HamiltonianKey, std::shared_ptr<const Propagator>> props;
  for (const auto& c : configs) {
    const auto key = detail::hamiltonian_key(c);
    if (props.contains(key)) continue;
    const auto basis = build_basis(c);
    props.emplace(key, std::make_shared<const Propagator>(diagonalize(build_hamiltonian(c, basis)).with_step(spec.dt)));
  }

  std::vector<std::size_t> order(n_cells);
  for (std::size_t k = 0; k < n_cells; ++k) order[k] = k;
  if (opts.shuffle_seed) {
    std::mt19937_64 rng(*opts.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  std::vector<detail::CellOutcome> outcomes(n_cells);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t monitor_every = std::max<std::size_t>(1, opts.monitor_every);
  auto worker = [&] {
    for (std::size_t k = next++; k < n_cells; k = next++) {
      const std::size_t cell = order[k];
      try {
        const ChainModel model(configs[cell]);
        outcomes[cell] = detail::run_cell(model, props.at(detail::hamiltonian_key(configs[cell])), spec.objective,
                                          monitor_every);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_cells));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  res.grid.resize(n_cells);
  res.cap_mask.resize(n_cells);
  for (std::size_t k = 0; k < n_cells; ++k) {
    res.grid[k] = outcomes[k].value;
    res.cap_mask[k] = outcomes[k].capped ? 1 : 0;
    res.max_trace_drift = std::max(res.max_trace_drift, outcomes[k].trace_drift);
    res.min_eigenvalue = std::min(res.min_eigenvalue, outcomes[k].min_eigenvalue);
  }
  return res;
}

inline SweepResult bottleneck_scan(const SweepSpec& spec, const SweepOptions& opts = {}) {
  const bool in_out = spec.axis1.param == SweepParam::RateIn && spec.axis2 && spec.axis2->param == SweepParam::RateOut;
  if (!in_out) throw std::invalid_argument("bottleneck scan needs axes rate_in x rate_out");
  if (!std::holds_alternative<TimeToReach>(spec.objective))
    throw std::invalid_argument("bottleneck scan needs the time_to_reach objective");
  return run_sweep(spec, opts);
}

inline SweepResult dat_scan(const SweepSpec& spec, const SweepOptions& opts = {}) {
  const bool out_g = spec.axis1.param == SweepParam::RateOut && spec.axis2 && spec.axis2->param == SweepParam::G;
  if (!out_g) throw std::invalid_argument("dat scan needs axes rate_out x g");
  if (!std::holds_alternative<SinkAtTime>(spec.objective))
    throw std::invalid_argument("dat scan needs the sink_at_time objective");
  if (spec.base.dephasing == Dephasing::None) throw std::invalid_argument("dat scan needs dephasing=lindblad or unitary");
  if (spec.base.rate_in != 0.0 || spec.base.initial_state != InitialState::PhotonInFirstCavity)
    throw std::invalid_argument("dat scan runs without input from a photon in the first cavity");
  return run_sweep(spec, opts);
}

struct RateOptimum {
  double rate;
  double time;
  bool capped;
};

/// Grid search over candidate rates for the smallest time to reach the target.
/// Ties go to the smaller rate; an all-capped grid returns the smallest
/// candidate flagged as capped.
inline RateOptimum optimal_rate(const ChainConfig& base, SweepParam which, std::vector<double> candidates,
                                double target, double t_max, double dt, const SweepOptions& opts = {}) {
  if (which != SweepParam::RateIn && which != SweepParam::RateOut)
    throw std::invalid_argument("optimal_rate optimizes rate_in or rate_out");
  if (candidates.empty()) throw std::invalid_argument("no candidate rates");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  SweepSpec spec{base, Axis{which, candidates}, std::nullopt, TimeToReach{target, t_max}, dt};
  const auto res = run_sweep(spec, opts);
  RateOptimum best{candidates.front(), t_max, true};
  for (std::size_t i = 0; i < res.rows; ++i) {
    if (res.capped(i)) continue;
    if (best.capped || res.value(i) < best.time) best = {candidates[i], res.value(i), false};
  }
  return best;
}

/// Summary of an out × g scan: the optimal out at g = 0 and, per out, the
/// best gain from non-zero dephasing.
struct DatSummary {
  std::size_t optimal_row = 0;
  double optimal_out = 0.0;
  std::vector<double> improvement;  // max_{g>0} sink(out, g) − sink(out, 0)
  std::vector<double> best_g;
};

inline DatSummary summarize_dat(const SweepResult& res) {
  if (!res.spec.axis2 || res.spec.axis2->param != SweepParam::G || res.spec.axis2->values.front() != 0.0)
    throw std::invalid_argument("dat summary needs a g axis starting at 0");
  DatSummary s;
  double best = -1.0;
  for (std::size_t i = 0; i < res.rows; ++i)
    if (res.value(i, 0) > best) {
      best = res.value(i, 0);
      s.optimal_row = i;
    }
  s.optimal_out = res.spec.axis1.values[s.optimal_row];
  for (std::size_t i = 0; i < res.rows; ++i) {
    double gain = 0.0;
    double g_at = 0.0;
    for (std::size_t j = 1; j < res.cols; ++j) {
      const double d = res.value(i, j) - res.value(i, 0);
      if (d > gain) {
        gain = d;
        g_at = res.spec.axis2->values[j];
      }
    }
    s.improvement.push_back(gain);
    s.best_g.push_back(g_at);
  }
  return s;
}

}  // namespace jch
