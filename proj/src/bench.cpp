#include "codedsketch/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "codedsketch/matrix_io.hpp"

namespace codedsketch::bench {

using nlohmann::json;

const char* to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::approx: return "approx";
    case Mode::sparse_exact: return "sparse-exact";
    case Mode::example_golden: return "example-golden";
    case Mode::sweep: return "sweep";
  }
  return "unknown";
}

const char* to_string(MatrixSource source) noexcept {
  switch (source) {
    case MatrixSource::random_dense: return "random-dense";
    case MatrixSource::random_block_sparse: return "random-block-sparse";
    case MatrixSource::files: return "files";
  }
  return "unknown";
}

const char* to_string(Format format) noexcept {
  return format == Format::json ? "json" : "csv";
}

namespace {

const char* grid_name(poly::GridMode mode) {
  switch (mode) {
    case poly::GridMode::roots_of_unity: return "roots-of-unity";
    case poly::GridMode::chebyshev: return "chebyshev";
    case poly::GridMode::explicit_points: return "explicit";
  }
  return "unknown";
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigurationError("invalid value '" + std::string(value) + "' for --" +
                           std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

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

std::vector<std::size_t> parse_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  for (auto part : split(value, ',')) out.push_back(parse_number<std::size_t>(key, part));
  return out;
}

std::size_t positive(std::string_view key, std::string_view value) {
  const auto v = parse_number<std::size_t>(key, value);
  if (v == 0) throw ConfigurationError("--" + std::string(key) + " must be >= 1");
  return v;
}

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::array<std::size_t, 3> default_dims(const ExperimentConfig& config) {
  if (config.mode == Mode::example_golden) return {8, 8, 8};
  return {4 * config.m, 4 * config.p, 4 * config.n};
}

struct Inputs {
  std::size_t r = 0;
  std::size_t s = 0;
  std::size_t t = 0;
  std::optional<Matrix> a;
  std::optional<Matrix> b;
};

Inputs load_inputs(const ExperimentConfig& config) {
  Inputs inputs;
  if (config.source == MatrixSource::files) {
    if (config.matrix_a.empty() || config.matrix_b.empty()) {
      throw ConfigurationError("file input needs both --matrix-a and --matrix-b");
    }
    inputs.a = io::load_matrix(config.matrix_a);
    inputs.b = io::load_matrix(config.matrix_b);
    if (inputs.a->cols() != inputs.b->rows()) {
      throw ConfigurationError("A is " + std::to_string(inputs.a->rows()) + "x" +
                               std::to_string(inputs.a->cols()) + " but B is " +
                               std::to_string(inputs.b->rows()) + "x" +
                               std::to_string(inputs.b->cols()));
    }
    inputs.r = static_cast<std::size_t>(inputs.a->rows());
    inputs.s = static_cast<std::size_t>(inputs.a->cols());
    inputs.t = static_cast<std::size_t>(inputs.b->cols());
  } else {
    const auto dims = config.dims.value_or(default_dims(config));
    inputs.r = dims[0];
    inputs.s = dims[1];
    inputs.t = dims[2];
  }
  return inputs;
}

void check_sparse(const ExperimentConfig& config, const SchemeParams& params) {
  if (config.source != MatrixSource::random_block_sparse) return;
  if (config.sparse_k == 0) throw ConfigurationError("--block-sparse K must be >= 1");
  if (config.sparse_k > params.m * params.n) {
    throw ConfigurationError("--block-sparse " + std::to_string(config.sparse_k) +
                             " exceeds the " + std::to_string(params.m * params.n) +
                             " blocks of C");
  }
  if (config.sparse_k > params.p) {
    throw ConfigurationError("block-sparse generation needs p >= k (p=" +
                             std::to_string(params.p) + ", k=" +
                             std::to_string(config.sparse_k) + ")");
  }
}

Thresholds thresholds_for(const SchemeParams& params) {
  Thresholds t;
  t.operational = threshold_cs(params);
  t.printed_first_term = t.operational - 1;
  t.exact = threshold_exact(params);
  t.printed_bound = std::min(t.printed_first_term, t.exact);
  return t;
}

struct Pair {
  Matrix a;
  Matrix b;
};

Pair make_data(const ExperimentConfig& config, const Inputs& inputs,
               const SchemeParams& params, std::uint64_t seed) {
  switch (config.source) {
    case MatrixSource::files:
      return {*inputs.a, *inputs.b};
    case MatrixSource::random_block_sparse: {
      auto problem = random_block_sparse(inputs.r, inputs.s, inputs.t, params,
                                         config.sparse_k, seed);
      return {std::move(problem.a), std::move(problem.b)};
    }
    case MatrixSource::random_dense:
      break;
  }
  return {random_dense(inputs.r, inputs.s, sketch::derive_seed(seed, 0)),
          random_dense(inputs.s, inputs.t, sketch::derive_seed(seed, 1))};
}

struct RoundResult {
  EstimateReport estimate;
  SketchSet sketches;
  double kth_delay = 0.0;
};

RoundResult run_pipeline(const Pair& data, const SchemeParams& params,
                         const SketchFamily& family, const sim::DelayModel& model,
                         poly::GridMode grid) {
  const auto points = poly::EvaluationGrid::make(grid, params.workers);
  const auto shares = encode(data.a, data.b, params, family, points);
  const auto outcome = sim::run_round(shares, model, static_cast<std::size_t>(threshold_cs(params)));
  RoundResult out;
  out.sketches = decode(outcome.arrivals, params, family);
  out.estimate = median_recover(out.sketches, params);
  out.kth_delay = outcome.kth_delay;
  return out;
}

TrialRecord score(std::size_t trial, const Matrix& estimate, const Matrix& exact,
                  double epsilon, double residue, double kth_delay) {
  TrialRecord rec;
  rec.trial = trial;
  rec.frobenius = exact.norm();
  const Matrix err = (estimate - exact).cwiseAbs();
  rec.max_abs_error = err.maxCoeff();
  rec.relative_error = rec.frobenius > 0.0 ? rec.max_abs_error / rec.frobenius : rec.max_abs_error;
  const double limit = epsilon * rec.frobenius;
  const auto exceed = limit > 0.0 ? (err.array() >= limit).count() : (err.array() > 0.0).count();
  rec.exceedance_rate = static_cast<double>(exceed) / static_cast<double>(err.size());
  rec.exact = rec.max_abs_error <= 1e-9 * std::max(1.0, rec.frobenius);
  rec.kth_delay = kth_delay;
  rec.imaginary_residue = residue;
  return rec;
}

std::uint64_t trial_seed(std::uint64_t root, std::size_t trial) {
  return sketch::derive_seed(sketch::derive_seed(root, 1000), trial);
}

void run_approx(const ExperimentConfig& config, const Inputs& inputs,
                const sim::DelayModel& model, Report& report) {
  const auto& params = report.params;
  const Pair data = make_data(config, inputs, params, sketch::derive_seed(config.seed, 0));
  const Matrix exact = data.a * data.b;
  const double norm = exact.norm();
  report.epsilon_used = config.epsilon.value_or(std::sqrt(3.0 / static_cast<double>(params.bprime)));

  Matrix sum = Matrix::Zero(exact.rows(), exact.cols());
  Matrix sumsq = Matrix::Zero(exact.rows(), exact.cols());
  double exceed_total = 0.0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const auto seed = trial_seed(config.seed, t);
    const auto family = sketch::make_sketch_family(sketch::derive_seed(seed, 0), params.d,
                                                   params.m, params.n, params.bprime);
    const auto round = run_pipeline(data, params, family,
                                    model.with_seed(sketch::derive_seed(seed, 1)), config.grid);
    const Matrix& est = round.estimate.estimate;
    report.trials.push_back(score(t, est, exact, report.epsilon_used,
                                  round.sketches.max_imaginary_residue, round.kth_delay));
    exceed_total += report.trials.back().exceedance_rate;
    const Matrix dev = est - exact;
    sum += dev;
    sumsq += dev.cwiseProduct(dev);
  }
  report.exceedance_rate = exceed_total / static_cast<double>(config.trials);

  if (config.trials >= 2) {
    const double count = static_cast<double>(config.trials);
    const double floor = 1e-9 * std::max(1.0, norm);
    Unbiasedness u;
    u.entries = static_cast<std::size_t>(exact.size());
    for (Eigen::Index i = 0; i < exact.rows(); ++i) {
      for (Eigen::Index j = 0; j < exact.cols(); ++j) {
        const double mean = sum(i, j) / count;
        const double var = std::max(0.0, (sumsq(i, j) - sum(i, j) * mean) / (count - 1.0));
        const double se = std::sqrt(var / count);
        if (se * 1e3 > floor) {
          const double z = std::abs(mean) / se;
          u.max_z = std::max(u.max_z, z);
          if (z <= 4.0) ++u.within;
        } else if (std::abs(mean) <= floor) {
          ++u.within;
        }
      }
    }
    u.pass_fraction = static_cast<double>(u.within) / static_cast<double>(u.entries);
    report.unbiasedness = u;
    if (config.trials >= 1000) {
      report.assertions.push_back(
          {"unbiasedness", u.pass_fraction >= 0.99,
           "entries within 4 standard errors: " + format_number(u.pass_fraction) +
               " (need >= 0.99)"});
    }
  }
  if (config.delta) {
    const double limit = *config.delta + 0.05;
    report.assertions.push_back(
        {"accuracy", report.exceedance_rate <= limit,
         "exceedance of eps*||C||_F with eps=" + format_number(report.epsilon_used) + ": " +
             format_number(report.exceedance_rate) + " (need <= " + format_number(limit) + ")"});
  }
}

void run_sparse(const ExperimentConfig& config, const Inputs& inputs,
                const sim::DelayModel& model, Report& report) {
  const auto& params = report.params;
  std::size_t exact_count = 0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const auto seed = trial_seed(config.seed, t);
    const Pair data = make_data(config, inputs, params, sketch::derive_seed(seed, 2));
    const Matrix exact = data.a * data.b;
    const auto family = sketch::make_sketch_family(sketch::derive_seed(seed, 0), params.d,
                                                   params.m, params.n, params.bprime);
    const auto round = run_pipeline(data, params, family,
                                    model.with_seed(sketch::derive_seed(seed, 1)), config.grid);
    report.trials.push_back(score(t, round.estimate.estimate, exact, 0.0,
                                  round.sketches.max_imaginary_residue, round.kth_delay));
    if (report.trials.back().exact) ++exact_count;
  }
  report.exact_rate = static_cast<double>(exact_count) / static_cast<double>(config.trials);
  report.assertions.push_back({"sparse-exact", report.exact_rate >= 0.9,
                               "exact recovery rate " + format_number(report.exact_rate) +
                                   " (need >= 0.9)"});
}

void run_golden(const ExperimentConfig& config, const Inputs& inputs,
                const sim::DelayModel& model, Report& report) {
  const auto& params = report.params;
  const auto family = golden_family();
  const auto& table = golden_table();
  double worst = 0.0;
  bool all_match = true;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const auto seed = trial_seed(config.seed, t);
    const Pair data = make_data(config, inputs, params, sketch::derive_seed(seed, 2));
    const Matrix exact = data.a * data.b;
    const double scale = std::max(1.0, exact.norm());
    const auto round = run_pipeline(data, params, family,
                                    model.with_seed(sketch::derive_seed(seed, 1)), config.grid);
    for (std::size_t eta = 1; eta <= params.d; ++eta) {
      for (std::size_t k = 0; k < 2 * params.bprime - 1; ++k) {
        const Matrix expected =
            combine_blocks(exact, params.m, params.n, table[eta - 1][k]);
        const double diff = (round.sketches.at(eta, k) - expected).cwiseAbs().maxCoeff() / scale;
        worst = std::max(worst, diff);
        if (!(diff <= 1e-8)) all_match = false;
      }
    }
    report.trials.push_back(score(t, round.estimate.estimate, exact,
                                  std::sqrt(3.0 / static_cast<double>(params.bprime)),
                                  round.sketches.max_imaginary_residue, round.kth_delay));
  }
  report.epsilon_used = std::sqrt(3.0 / static_cast<double>(params.bprime));
  double exceed = 0.0;
  for (const auto& rec : report.trials) exceed += rec.exceedance_rate;
  report.exceedance_rate = exceed / static_cast<double>(config.trials);
  report.assertions.push_back(
      {"sketch-table", all_match,
       "worst relative deviation from the sketch table " + format_number(worst) +
           " (need <= 1e-8)"});
  report.assertions.push_back(
      {"threshold", report.thresholds.operational == 75,
       "decoded from " + std::to_string(report.thresholds.operational) + " of " +
           std::to_string(params.workers) + " workers"});
}

std::vector<sim::SweepPoint> sweep_points(const ExperimentConfig& config,
                                          const Inputs& inputs) {
  std::vector<std::size_t> bprimes = config.bprime;
  std::vector<std::size_t> depths = config.d;
  if (bprimes.empty() && config.epsilon) bprimes = {bprime_for_epsilon(*config.epsilon)};
  if (depths.empty() && config.delta) depths = {depth_for_delta(*config.delta, config.log_base)};
  if (bprimes.empty() || depths.empty()) {
    throw ConfigurationError("sweep needs --bprime and --d lists (or --epsilon/--delta)");
  }
  std::vector<sim::SweepPoint> points;
  for (auto b : bprimes) {
    for (auto d : depths) {
      sim::SweepPoint point;
      point.params.p = config.p;
      point.params.m = config.m;
      point.params.n = config.n;
      point.params.bprime = b;
      point.params.d = d;
      point.params.epsilon = config.epsilon.value_or(0.0);
      point.params.delta = config.delta.value_or(0.0);
      point.params.log_base = config.log_base;
      point.params.workers = config.workers.value_or(
          b == 0 || d == 0 ? 0 : static_cast<std::size_t>(threshold_cs(config.p, b, d)));
      point.r = inputs.r;
      point.s = inputs.s;
      point.t = inputs.t;
      point.params.validate();
      check_divisibility(point.r, point.s, point.t, point.params);
      points.push_back(point);
    }
  }
  return points;
}

}  // namespace

void apply_option(ExperimentConfig& config, std::string_view key, std::string_view value) {
  if (key == "p") {
    config.p = positive(key, value);
  } else if (key == "m") {
    config.m = positive(key, value);
  } else if (key == "n") {
    config.n = positive(key, value);
  } else if (key == "bprime") {
    config.bprime = parse_list(key, value);
  } else if (key == "d") {
    config.d = parse_list(key, value);
  } else if (key == "workers") {
    config.workers = positive(key, value);
  } else if (key == "epsilon") {
    const auto v = parse_number<double>(key, value);
    if (!(v > 0.0) || !std::isfinite(v)) bad_value(key, value);
    config.epsilon = v;
  } else if (key == "delta") {
    const auto v = parse_number<double>(key, value);
    if (!(v > 0.0 && v < 1.0)) bad_value(key, value);
    config.delta = v;
  } else if (key == "log-base") {
    const auto v = parse_number<double>(key, value);
    if (!(v > 1.0) || !std::isfinite(v)) bad_value(key, value);
    config.log_base = v;
  } else if (key == "grid") {
    if (value == "roots-of-unity") {
      config.grid = poly::GridMode::roots_of_unity;
    } else if (value == "chebyshev") {
      config.grid = poly::GridMode::chebyshev;
    } else {
      bad_value(key, value);
    }
  } else if (key == "matrix-a") {
    config.matrix_a = std::string(value);
    config.source = MatrixSource::files;
  } else if (key == "matrix-b") {
    config.matrix_b = std::string(value);
    config.source = MatrixSource::files;
  } else if (key == "random") {
    const auto parts = split(value, 'x');
    if (parts.size() != 3) bad_value(key, value);
    config.dims = std::array<std::size_t, 3>{positive(key, parts[0]), positive(key, parts[1]),
                                             positive(key, parts[2])};
  } else if (key == "block-sparse") {
    config.sparse_k = positive(key, value);
    config.source = MatrixSource::random_block_sparse;
  } else if (key == "delay-model") {
    config.delay_model = std::string(value);
  } else if (key == "trials") {
    config.trials = positive(key, value);
  } else if (key == "seed") {
    config.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "mode") {
    if (value == "approx") {
      config.mode = Mode::approx;
    } else if (value == "sparse-exact") {
      config.mode = Mode::sparse_exact;
    } else if (value == "example-golden") {
      config.mode = Mode::example_golden;
    } else if (value == "sweep") {
      config.mode = Mode::sweep;
    } else {
      bad_value(key, value);
    }
  } else if (key == "out") {
    config.out = std::string(value);
  } else if (key == "format") {
    if (value == "json") {
      config.format = Format::json;
    } else if (value == "csv") {
      config.format = Format::csv;
    } else {
      bad_value(key, value);
    }
  } else {
    throw ConfigurationError("unknown option --" + std::string(key));
  }
}

SchemeParams resolve_params(const ExperimentConfig& config) {
  if (config.mode == Mode::example_golden) {
    auto params = golden_params();
    if (config.workers) params.workers = *config.workers;
    params.validate();
    return params;
  }
  if (config.bprime.size() > 1 || config.d.size() > 1) {
    throw ConfigurationError("lists for --bprime/--d are only allowed in sweep mode");
  }
  SchemeParams params;
  params.p = config.p;
  params.m = config.m;
  params.n = config.n;
  params.log_base = config.log_base;
  params.epsilon = config.epsilon.value_or(0.0);
  params.delta = config.delta.value_or(0.0);
  const bool sparse = config.mode == Mode::sparse_exact;

  if (!config.bprime.empty()) {
    params.bprime = config.bprime.front();
  } else if (config.epsilon && sparse) {
    params.bprime = sparse_threshold_report(config.p, config.m, config.n, config.sparse_k,
                                            *config.epsilon, config.log_base)
                        .derived_bprime;
  } else if (config.epsilon) {
    params.bprime = bprime_for_epsilon(*config.epsilon);
  } else {
    throw ConfigurationError("b' is not set: pass --bprime or --epsilon");
  }

  if (!config.d.empty()) {
    params.d = config.d.front();
  } else if (sparse) {
    params.d = sparse_threshold_report(config.p, config.m, config.n, 1, 1.0, config.log_base)
                   .derived_d;
  } else if (config.delta) {
    params.d = depth_for_delta(*config.delta, config.log_base);
  } else {
    throw ConfigurationError("d is not set: pass --d or --delta");
  }
  if (params.bprime == 0 || params.d == 0) throw ConfigurationError("b' and d must be >= 1");
  params.workers = config.workers.value_or(static_cast<std::size_t>(threshold_cs(params)));
  params.validate();
  return params;
}

bool Report::passed() const {
  return std::all_of(assertions.begin(), assertions.end(),
                     [](const Assertion& a) { return a.passed; });
}

Report run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.config = config;
  report.timestamp = utc_timestamp();

  if (config.trials == 0) throw ConfigurationError("--trials must be >= 1");
  if (config.mode == Mode::sparse_exact && config.source == MatrixSource::random_dense) {
    throw ConfigurationError("sparse-exact mode needs --block-sparse K or matrix files");
  }
  const auto inputs = load_inputs(config);

  if (config.mode == Mode::sweep) {
    const auto points = sweep_points(config, inputs);
    report.params = points.front().params;
    report.thresholds = thresholds_for(report.params);
    check_sparse(config, report.params);
    const auto model = sim::parse_delay_model(config.delay_model, config.seed,
                                              report.params.workers);
    report.sweep_rows = sim::sweep(points, model, config.trials, config.seed, config.grid);
  } else {
    report.params = resolve_params(config);
    report.derived_from_accuracy =
        config.mode != Mode::example_golden && (config.bprime.empty() || config.d.empty());
    report.thresholds = thresholds_for(report.params);
    check_divisibility(inputs.r, inputs.s, inputs.t, report.params);
    check_sparse(config, report.params);
    const auto model = sim::parse_delay_model(config.delay_model, config.seed,
                                              report.params.workers);
    sim::sample_delays(model, report.params.workers);
    switch (config.mode) {
      case Mode::approx: run_approx(config, inputs, model, report); break;
      case Mode::sparse_exact: run_sparse(config, inputs, model, report); break;
      case Mode::example_golden: run_golden(config, inputs, model, report); break;
      case Mode::sweep: break;
    }
  }

  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

json params_json(const SchemeParams& p) {
  return {{"p", p.p},           {"m", p.m},         {"n", p.n},
          {"bprime", p.bprime}, {"d", p.d},         {"workers", p.workers},
          {"epsilon", p.epsilon}, {"delta", p.delta}, {"log_base", p.log_base}};
}

SchemeParams params_from(const json& j) {
  SchemeParams p;
  p.p = j.at("p");
  p.m = j.at("m");
  p.n = j.at("n");
  p.bprime = j.at("bprime");
  p.d = j.at("d");
  p.workers = j.at("workers");
  p.epsilon = j.at("epsilon");
  p.delta = j.at("delta");
  p.log_base = j.at("log_base");
  return p;
}

json config_json(const ExperimentConfig& c) {
  json j = {{"mode", to_string(c.mode)},
            {"p", c.p},
            {"m", c.m},
            {"n", c.n},
            {"bprime", c.bprime},
            {"d", c.d},
            {"log_base", c.log_base},
            {"source", to_string(c.source)},
            {"block_sparse_k", c.sparse_k},
            {"matrix_a", c.matrix_a},
            {"matrix_b", c.matrix_b},
            {"grid", grid_name(c.grid)},
            {"delay_model", c.delay_model},
            {"trials", c.trials},
            {"seed", c.seed},
            {"format", to_string(c.format)}};
  j["workers"] = c.workers ? json(*c.workers) : json(nullptr);
  j["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
  j["delta"] = c.delta ? json(*c.delta) : json(nullptr);
  j["dims"] = c.dims ? json(*c.dims) : json(nullptr);
  return j;
}

const std::vector<std::string>& trial_columns() {
  static const std::vector<std::string> cols = {
      "trial", "relative_error", "max_abs_error", "frobenius",
      "exceedance_rate", "exact", "kth_delay", "imaginary_residue"};
  return cols;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "p", "m", "n", "bprime", "d", "workers", "r", "s", "t", "trials",
      "success_rate", "error_median", "error_p90", "error_max",
      "kth_delay_mean", "kth_delay_median"};
  return cols;
}

json trial_json(const TrialRecord& r) {
  return {{"trial", r.trial},
          {"relative_error", r.relative_error},
          {"max_abs_error", r.max_abs_error},
          {"frobenius", r.frobenius},
          {"exceedance_rate", r.exceedance_rate},
          {"exact", r.exact},
          {"kth_delay", r.kth_delay},
          {"imaginary_residue", r.imaginary_residue}};
}

json sweep_json(const sim::SweepRow& r) {
  return {{"p", r.params.p},
          {"m", r.params.m},
          {"n", r.params.n},
          {"bprime", r.params.bprime},
          {"d", r.params.d},
          {"workers", r.params.workers},
          {"r", r.r},
          {"s", r.s},
          {"t", r.t},
          {"trials", r.trials},
          {"success_rate", r.success_rate},
          {"error_median", r.error_median},
          {"error_p90", r.error_p90},
          {"error_max", r.error_max},
          {"kth_delay_mean", r.kth_delay_mean},
          {"kth_delay_median", r.kth_delay_median}};
}

std::string csv_cell(const json& value) {
  if (value.is_boolean()) return value.get<bool>() ? "1" : "0";
  if (value.is_number_float()) return format_number(value.get<double>());
  return value.dump();
}

std::string csv_table(const std::vector<std::string>& columns, const std::vector<json>& rows) {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c > 0) out += ',';
    out += columns[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c > 0) out += ',';
      out += csv_cell(row.at(columns[c]));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string to_json(const Report& report) {
  json j;
  j["schema_version"] = report.schema_version;
  j["config"] = config_json(report.config);
  j["params"] = params_json(report.params);
  j["derived_from_accuracy"] = report.derived_from_accuracy;
  j["thresholds"] = {{"operational", report.thresholds.operational},
                     {"printed_first_term", report.thresholds.printed_first_term},
                     {"printed_bound", report.thresholds.printed_bound},
                     {"exact_entangled", report.thresholds.exact}};
  j["trials"] = json::array();
  for (const auto& r : report.trials) j["trials"].push_back(trial_json(r));
  j["sweep"] = json::array();
  for (const auto& r : report.sweep_rows) j["sweep"].push_back(sweep_json(r));
  json summary = {{"exceedance_rate", report.exceedance_rate},
                  {"epsilon_used", report.epsilon_used},
                  {"exact_rate", report.exact_rate}};
  if (report.unbiasedness) {
    const auto& u = *report.unbiasedness;
    summary["unbiasedness"] = {{"entries", u.entries},
                               {"within", u.within},
                               {"pass_fraction", u.pass_fraction},
                               {"max_z", u.max_z}};
  } else {
    summary["unbiasedness"] = nullptr;
  }
  j["summary"] = summary;
  j["assertions"] = json::array();
  for (const auto& a : report.assertions) {
    j["assertions"].push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  }
  j["passed"] = report.passed();
  j["timing"] = {{"elapsed_seconds", report.elapsed_seconds}, {"timestamp", report.timestamp}};
  return j.dump(2) + "\n";
}

std::string to_csv(const Report& report) {
  std::vector<json> rows;
  if (report.config.mode == Mode::sweep) {
    for (const auto& r : report.sweep_rows) rows.push_back(sweep_json(r));
    return csv_table(sweep_columns(), rows);
  }
  for (const auto& r : report.trials) rows.push_back(trial_json(r));
  return csv_table(trial_columns(), rows);
}

std::string serialize(const Report& report, Format format) {
  return format == Format::json ? to_json(report) : to_csv(report);
}

void emit_report(const Report& report, Format format, const std::string& path) {
  const auto text = serialize(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open report file '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to report file '" + path + "' failed");
}

Report report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    Report report;
    report.schema_version = j.at("schema_version");
    if (report.schema_version != kSchemaVersion) {
      throw IoError("unsupported report schema version " +
                    std::to_string(report.schema_version));
    }
    report.params = params_from(j.at("params"));
    report.derived_from_accuracy = j.at("derived_from_accuracy");
    const auto& t = j.at("thresholds");
    report.thresholds.operational = t.at("operational");
    report.thresholds.printed_first_term = t.at("printed_first_term");
    report.thresholds.printed_bound = t.at("printed_bound");
    report.thresholds.exact = t.at("exact_entangled");
    for (const auto& r : j.at("trials")) {
      TrialRecord rec;
      rec.trial = r.at("trial");
      rec.relative_error = r.at("relative_error");
      rec.max_abs_error = r.at("max_abs_error");
      rec.frobenius = r.at("frobenius");
      rec.exceedance_rate = r.at("exceedance_rate");
      rec.exact = r.at("exact");
      rec.kth_delay = r.at("kth_delay");
      rec.imaginary_residue = r.at("imaginary_residue");
      report.trials.push_back(rec);
    }
    for (const auto& r : j.at("sweep")) {
      sim::SweepRow row;
      row.params.p = r.at("p");
      row.params.m = r.at("m");
      row.params.n = r.at("n");
      row.params.bprime = r.at("bprime");
      row.params.d = r.at("d");
      row.params.workers = r.at("workers");
      row.r = r.at("r");
      row.s = r.at("s");
      row.t = r.at("t");
      row.trials = r.at("trials");
      row.success_rate = r.at("success_rate");
      row.error_median = r.at("error_median");
      row.error_p90 = r.at("error_p90");
      row.error_max = r.at("error_max");
      row.kth_delay_mean = r.at("kth_delay_mean");
      row.kth_delay_median = r.at("kth_delay_median");
      report.sweep_rows.push_back(row);
    }
    const auto& s = j.at("summary");
    report.exceedance_rate = s.at("exceedance_rate");
    report.epsilon_used = s.at("epsilon_used");
    report.exact_rate = s.at("exact_rate");
    if (!s.at("unbiasedness").is_null()) {
      const auto& u = s.at("unbiasedness");
      report.unbiasedness = Unbiasedness{u.at("entries"), u.at("within"),
                                         u.at("pass_fraction"), u.at("max_z")};
    }
    for (const auto& a : j.at("assertions")) {
      report.assertions.push_back({a.at("name"), a.at("passed"), a.at("detail")});
    }
    report.elapsed_seconds = j.at("timing").at("elapsed_seconds");
    report.timestamp = j.at("timing").at("timestamp");
    return report;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace codedsketch::bench
