#include "codedsketch/straggler_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace codedsketch::sim {

DelayModel DelayModel::shifted_exponential(double shift, double rate,
                                           std::uint64_t seed) {
  DelayModel m;
  m.kind = DelayKind::shifted_exponential;
  m.shift = shift;
  m.rate = rate;
  m.seed = seed;
  return m;
}

DelayModel DelayModel::fixed_permutation(std::vector<double> delays) {
  DelayModel m;
  m.kind = DelayKind::fixed_permutation;
  m.fixed_delays = std::move(delays);
  return m;
}

DelayModel DelayModel::adversarial_set(std::vector<std::size_t> slow,
                                       double factor, std::uint64_t seed) {
  DelayModel m;
  m.kind = DelayKind::adversarial_set;
  m.slow_workers = std::move(slow);
  m.slow_factor = factor;
  m.seed = seed;
  return m;
}

DelayModel DelayModel::with_seed(std::uint64_t new_seed) const {
  DelayModel m = *this;
  m.seed = new_seed;
  return m;
}

DelayModel DelayModel::with_dropped(std::vector<std::size_t> workers) const {
  DelayModel m = *this;
  m.dropped = std::move(workers);
  return m;
}

const char* to_string(DelayKind kind) noexcept {
  switch (kind) {
    case DelayKind::shifted_exponential: return "shifted-exponential";
    case DelayKind::fixed_permutation: return "fixed-permutation";
    case DelayKind::adversarial_set: return "adversarial-set";
  }
  return "unknown";
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigurationError("cannot parse " + std::string(what) + " from '" +
                             std::string(text) + "'");
  }
  return value;
}

}  // namespace

DelayModel parse_delay_model(std::string_view spec, std::uint64_t seed,
                             std::size_t workers) {
  const auto parts = split(spec, ':');
  const auto name = parts.front();
  if (name == "shifted-exponential") {
    if (parts.size() != 1 && parts.size() != 3) {
      throw ConfigurationError("usage: shifted-exponential[:SHIFT:RATE]");
    }
    double shift = 1.0;
    double rate = 1.0;
    if (parts.size() == 3) {
      shift = parse_number<double>(parts[1], "shift");
      rate = parse_number<double>(parts[2], "rate");
    }
    return DelayModel::shifted_exponential(shift, rate, seed);
  }
  if (name == "fixed-permutation") {
    if (parts.size() != 1) throw ConfigurationError("fixed-permutation takes no arguments");
    return DelayModel::fixed_permutation();
  }
  if (name == "adversarial-set") {
    if (parts.size() != 1 && parts.size() != 3) {
      throw ConfigurationError("usage: adversarial-set[:COUNT:FACTOR]");
    }
    std::size_t count = workers / 10;
    double factor = 10.0;
    if (parts.size() == 3) {
      count = parse_number<std::size_t>(parts[1], "slow worker count");
      factor = parse_number<double>(parts[2], "slow factor");
    }
    if (count > workers) throw ConfigurationError("more slow workers than workers");
    std::vector<std::size_t> slow(count);
    std::iota(slow.begin(), slow.end(), std::size_t{0});
    return DelayModel::adversarial_set(std::move(slow), factor, seed);
  }
  throw ConfigurationError("unknown delay model '" + std::string(spec) + "'");
}

std::vector<double> sample_delays(const DelayModel& model, std::size_t workers) {
  std::vector<double> delays(workers);
  auto draw_shifted = [&] {
    if (!(model.rate > 0.0) || model.shift < 0.0) {
      throw ConfigurationError("shifted exponential needs rate > 0 and shift >= 0");
    }
    std::mt19937_64 rng(model.seed);
    std::exponential_distribution<double> exp(model.rate);
    for (auto& d : delays) {
      d = model.shift + exp(rng);
      if (!(d > 0.0)) d = std::numeric_limits<double>::min();
    }
  };
  switch (model.kind) {
    case DelayKind::shifted_exponential:
      draw_shifted();
      break;
    case DelayKind::fixed_permutation:
      if (model.fixed_delays.empty()) {
        for (std::size_t j = 0; j < workers; ++j) delays[j] = static_cast<double>(j + 1);
      } else {
        if (model.fixed_delays.size() != workers) {
          throw ConfigurationError("fixed delays list has " +
                                   std::to_string(model.fixed_delays.size()) +
                                   " entries for " + std::to_string(workers) + " workers");
        }
        delays = model.fixed_delays;
        for (double d : delays) {
          if (!(d > 0.0)) throw ConfigurationError("fixed delays must be > 0");
        }
      }
      break;
    case DelayKind::adversarial_set:
      if (!(model.slow_factor >= 1.0)) throw ConfigurationError("slow factor must be >= 1");
      draw_shifted();
      for (auto j : model.slow_workers) {
        if (j >= workers) throw ConfigurationError("slow worker index out of range");
        delays[j] *= model.slow_factor;
      }
      break;
  }
  return delays;
}

SimulationOutcome run_round(std::span<const EncodedShare> shares,
                            const DelayModel& model, std::size_t k,
                            std::size_t threads) {
  const std::size_t workers = shares.size();
  const auto delays = sample_delays(model, workers);
  std::vector<bool> is_dropped(workers, false);
  for (auto j : model.dropped) {
    if (j >= workers) throw ConfigurationError("dropped worker index out of range");
    is_dropped[j] = true;
  }
  const auto live = static_cast<std::size_t>(std::count(is_dropped.begin(), is_dropped.end(), false));
  if (k > live) {
    throw StarvationError(k - live, "requested " + std::to_string(k) +
                                        " results but only " + std::to_string(live) +
                                        " workers are alive (short by " +
                                        std::to_string(k - live) + ")");
  }

  std::vector<std::size_t> order;
  order.reserve(live);
  for (std::size_t j = 0; j < workers; ++j) {
    if (!is_dropped[j]) order.push_back(j);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return delays[x] != delays[y] ? delays[x] < delays[y] : x < y;
  });
  order.resize(k);

  SimulationOutcome outcome;
  outcome.arrivals.resize(k);
  auto compute = [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) {
      outcome.arrivals[q] = worker_compute(shares[order[q]]);
      outcome.arrivals[q].completion_time = delays[order[q]];
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, k));
  if (threads == 1) {
    compute(0, k);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (k + threads - 1) / threads;
    for (std::size_t begin = 0; begin < k; begin += chunk) {
      pool.emplace_back(compute, begin, std::min(k, begin + chunk));
    }
  }
  outcome.kth_delay = k == 0 ? 0.0 : delays[order.back()];
  outcome.dropped = model.dropped;
  std::sort(outcome.dropped.begin(), outcome.dropped.end());
  return outcome;
}

namespace {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

std::vector<SweepRow> sweep(std::span<const SweepPoint> grid, const DelayModel& model,
                            std::size_t trials, std::uint64_t root_seed,
                            poly::GridMode grid_mode) {
  if (grid.empty()) throw ConfigurationError("sweep grid is empty");
  for (const auto& point : grid) {
    point.params.validate();
    check_divisibility(point.r, point.s, point.t, point.params);
  }

  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto& point = grid[c];
    const auto& params = point.params;
    const auto needed = static_cast<std::size_t>(threshold_cs(params));
    const auto config_seed = sketch::derive_seed(root_seed, 1000 + c);
    const auto workers_grid = poly::EvaluationGrid::make(grid_mode, params.workers);

    std::vector<double> errors;
    std::vector<double> kth;
    std::size_t successes = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const auto data_seed = sketch::derive_seed(root_seed, trial);
      const Matrix a = random_dense(point.r, point.s, sketch::derive_seed(data_seed, 0));
      const Matrix b = random_dense(point.s, point.t, sketch::derive_seed(data_seed, 1));
      const auto trial_seed = sketch::derive_seed(config_seed, trial);
      const auto family = sketch::make_sketch_family(sketch::derive_seed(trial_seed, 0),
                                                     params.d, params.m, params.n,
                                                     params.bprime);
      try {
        const auto shares = encode(a, b, params, family, workers_grid);
        const auto outcome =
            run_round(shares, model.with_seed(sketch::derive_seed(trial_seed, 1)), needed);
        kth.push_back(outcome.kth_delay);
        const auto sketches = decode(outcome.arrivals, params, family);
        const auto estimate = median_recover(sketches, params);
        const Matrix exact = a * b;
        const double norm = exact.norm();
        const double err = (estimate.estimate - exact).cwiseAbs().maxCoeff();
        errors.push_back(norm > 0.0 ? err / norm : err);
        ++successes;
      } catch (const InsufficientSamplesError&) {
      } catch (const NumericalFailureError&) {
      } catch (const StarvationError&) {
      }
    }

    SweepRow row;
    row.params = params;
    row.r = point.r;
    row.s = point.s;
    row.t = point.t;
    row.trials = trials;
    row.success_rate = trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
    row.error_median = quantile(errors, 0.5);
    row.error_p90 = quantile(errors, 0.9);
    row.error_max = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
    row.kth_delay_mean = kth.empty() ? 0.0 : std::accumulate(kth.begin(), kth.end(), 0.0) /
                                                 static_cast<double>(kth.size());
    row.kth_delay_median = quantile(kth, 0.5);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace codedsketch::sim
