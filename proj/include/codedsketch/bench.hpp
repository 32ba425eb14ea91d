#pragma once

// Experiment runner behind the CLI: configuration, execution of the four
// modes and report serialization.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codedsketch/engine.hpp"
#include "codedsketch/straggler_sim.hpp"

namespace codedsketch::bench {

inline constexpr int kSchemaVersion = 1;

enum class Mode { approx, sparse_exact, example_golden, sweep };
enum class MatrixSource { random_dense, random_block_sparse, files };
enum class Format { json, csv };

const char* to_string(Mode mode) noexcept;
const char* to_string(MatrixSource source) noexcept;
const char* to_string(Format format) noexcept;

struct ExperimentConfig {
  Mode mode = Mode::approx;
  std::size_t p = 1;
  std::size_t m = 1;
  std::size_t n = 1;
  /// Several values only in sweep mode.
  std::vector<std::size_t> bprime;
  std::vector<std::size_t> d;
  std::optional<std::size_t> workers;
  std::optional<double> epsilon;
  std::optional<double> delta;
  double log_base = 2.0;

  MatrixSource source = MatrixSource::random_dense;
  /// r, s, t; empty means (4m, 4p, 4n).
  std::optional<std::array<std::size_t, 3>> dims;
  std::size_t sparse_k = 0;
  std::string matrix_a;
  std::string matrix_b;

  poly::GridMode grid = poly::GridMode::roots_of_unity;
  std::string delay_model = "shifted-exponential";
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::string out;
  Format format = Format::json;
};

/// Sets one option by its CLI name without the leading dashes, e.g.
/// ("bprime", "2,4,8") or ("random", "16x16x16"). Throws ConfigurationError.
void apply_option(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Scheme parameters for a non-sweep mode, with b' and d derived from
/// (epsilon, delta) when not given explicitly.
SchemeParams resolve_params(const ExperimentConfig& config);

struct TrialRecord {
  std::size_t trial = 0;
  /// max |C~ - C| / ||C||_F (plain max |C~ - C| when C = 0).
  double relative_error = 0.0;
  double max_abs_error = 0.0;
  double frobenius = 0.0;
  /// Fraction of entries with |C~ - C| >= eps ||C||_F.
  double exceedance_rate = 0.0;
  bool exact = false;
  double kth_delay = 0.0;
  double imaginary_residue = 0.0;
};

struct Unbiasedness {
  std::size_t entries = 0;
  std::size_t within = 0;
  double pass_fraction = 0.0;
  /// Largest |mean - exact| / standard error over entries with nonzero spread.
  double max_z = 0.0;
};

struct Thresholds {
  std::uint64_t operational = 0;
  std::uint64_t printed_first_term = 0;
  std::uint64_t exact = 0;
  std::uint64_t printed_bound = 0;
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  int schema_version = kSchemaVersion;
  ExperimentConfig config;
  /// Scheme used; in sweep mode the first grid point.
  SchemeParams params;
  bool derived_from_accuracy = false;
  Thresholds thresholds;
  std::vector<TrialRecord> trials;
  /// Exceedance over every entry of every trial; 0 when no epsilon applies.
  double exceedance_rate = 0.0;
  double epsilon_used = 0.0;
  std::optional<Unbiasedness> unbiasedness;
  /// Fraction of trials with exact recovery (sparse-exact mode).
  double exact_rate = 0.0;
  std::vector<sim::SweepRow> sweep_rows;
  std::vector<Assertion> assertions;
  double elapsed_seconds = 0.0;
  std::string timestamp;

  bool passed() const;
};

/// Validates everything (parameters, divisibility, input files, delay model)
/// before computing anything.
Report run(const ExperimentConfig& config);

/// Canonical JSON: sorted keys, shortest round-trip numbers. The "timing"
/// object holds the only nondeterministic fields.
std::string to_json(const Report& report);
/// Sweep rows in sweep mode, trial rows otherwise; header only when empty.
std::string to_csv(const Report& report);
std::string serialize(const Report& report, Format format);
/// Writes serialize(report, format) to `path`; IoError on failure.
void emit_report(const Report& report, Format format, const std::string& path);

/// Reads a JSON report back (config echo excluded).
Report report_from_json(std::string_view text);

}  // namespace codedsketch::bench
