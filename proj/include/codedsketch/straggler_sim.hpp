#pragma once

// Seeded master/worker simulation: per-worker completion delays, delivery of
// the fastest K results, and failure injection.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "codedsketch/engine.hpp"

namespace codedsketch::sim {

enum class DelayKind { shifted_exponential, fixed_permutation, adversarial_set };

struct DelayModel {
  DelayKind kind = DelayKind::shifted_exponential;
  double shift = 1.0;
  double rate = 1.0;
  /// fixed_permutation: delay of worker j; empty means j + 1.
  std::vector<double> fixed_delays;
  /// adversarial_set: these workers run slow_factor times slower.
  std::vector<std::size_t> slow_workers;
  double slow_factor = 10.0;
  /// Workers that never respond (any kind).
  std::vector<std::size_t> dropped;
  std::uint64_t seed = 0;

  static DelayModel shifted_exponential(double shift, double rate, std::uint64_t seed);
  static DelayModel fixed_permutation(std::vector<double> delays = {});
  static DelayModel adversarial_set(std::vector<std::size_t> slow, double factor,
                                    std::uint64_t seed);

  DelayModel with_seed(std::uint64_t new_seed) const;
  DelayModel with_dropped(std::vector<std::size_t> workers) const;
};

const char* to_string(DelayKind kind) noexcept;

/// Parses "shifted-exponential[:shift:rate]", "fixed-permutation" or
/// "adversarial-set[:count:factor]" (count slowest-indexed workers made
/// slow). Throws ConfigurationError on anything else.
DelayModel parse_delay_model(std::string_view spec, std::uint64_t seed,
                             std::size_t workers);

/// Strictly positive delay for each of `workers` workers.
std::vector<double> sample_delays(const DelayModel& model, std::size_t workers);

struct SimulationOutcome {
  /// Delivered results sorted by (delay, index).
  std::vector<WorkerResult> arrivals;
  /// Delay of the K-th arrival.
  double kth_delay = 0.0;
  std::vector<std::size_t> dropped;
};

/// Delivers the K fastest non-dropped workers' products. Worker products may
/// be computed on up to `threads` threads; the delivered order does not
/// depend on it.
SimulationOutcome run_round(std::span<const EncodedShare> shares,
                            const DelayModel& model, std::size_t k,
                            std::size_t threads = 1);

struct SweepPoint {
  SchemeParams params;
  std::size_t r = 0;
  std::size_t s = 0;
  std::size_t t = 0;
};

struct SweepRow {
  SchemeParams params;
  std::size_t r = 0;
  std::size_t s = 0;
  std::size_t t = 0;
  std::size_t trials = 0;
  double success_rate = 0.0;
  /// Quantiles of max|C~ - C| / ||C||_F over successful trials.
  double error_median = 0.0;
  double error_p90 = 0.0;
  double error_max = 0.0;
  double kth_delay_mean = 0.0;
  double kth_delay_median = 0.0;
};

/// One row per configuration, aggregated over `trials` rounds. Trial t uses
/// the same (A, B) for every configuration; families and delays are seeded
/// per configuration and trial from `root_seed`.
std::vector<SweepRow> sweep(std::span<const SweepPoint> grid,
                            const DelayModel& model, std::size_t trials,
                            std::uint64_t root_seed,
                            poly::GridMode grid_mode = poly::GridMode::roots_of_unity);

}  // namespace codedsketch::sim
