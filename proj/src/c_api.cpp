#include "codedsketch/codedsketch.h"

#include <cstring>
#include <new>
#include <string>

#include "codedsketch/bench.hpp"
#include "codedsketch/matrix_io.hpp"

struct cs_matrix {
  codedsketch::Matrix value;
};

struct cs_config {
  codedsketch::bench::ExperimentConfig value;
};

struct cs_report {
  codedsketch::bench::Report value;
};

namespace {

thread_local std::string last_error;

cs_status status_of(codedsketch::ErrorCode code) {
  using codedsketch::ErrorCode;
  switch (code) {
    case ErrorCode::parameter: return CS_ERR_PARAMETER;
    case ErrorCode::partition: return CS_ERR_PARTITION;
    case ErrorCode::configuration: return CS_ERR_CONFIGURATION;
    case ErrorCode::insufficient_samples: return CS_ERR_INSUFFICIENT_SAMPLES;
    case ErrorCode::numerical_failure: return CS_ERR_NUMERICAL;
    case ErrorCode::starvation: return CS_ERR_STARVATION;
    case ErrorCode::io: return CS_ERR_IO;
  }
  return CS_ERR_INTERNAL;
}

template <typename F>
cs_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return CS_OK;
  } catch (const codedsketch::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CS_ERR_INTERNAL;
  }
}

void require(const void* ptr, const char* what) {
  if (ptr == nullptr) throw codedsketch::ParameterError(std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* cs_version(void) { return "1.0.0"; }

const char* cs_last_error(void) { return last_error.c_str(); }

const char* cs_status_name(cs_status status) {
  switch (status) {
    case CS_OK: return "ok";
    case CS_ERR_PARAMETER: return "parameter";
    case CS_ERR_PARTITION: return "partition";
    case CS_ERR_CONFIGURATION: return "configuration";
    case CS_ERR_INSUFFICIENT_SAMPLES: return "insufficient-samples";
    case CS_ERR_NUMERICAL: return "numerical-failure";
    case CS_ERR_STARVATION: return "starvation";
    case CS_ERR_IO: return "io";
    case CS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

cs_status cs_matrix_create(size_t rows, size_t cols, const double* data, cs_matrix** out) {
  return guard([&] {
    require(out, "out");
    if (rows == 0 || cols == 0) throw codedsketch::ParameterError("matrix dimensions must be >= 1");
    auto* m = new cs_matrix{codedsketch::Matrix::Zero(static_cast<Eigen::Index>(rows),
                                                      static_cast<Eigen::Index>(cols))};
    if (data != nullptr) {
      for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) {
          m->value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * cols + j];
        }
      }
    }
    *out = m;
  });
}

void cs_matrix_destroy(cs_matrix* matrix) { delete matrix; }

size_t cs_matrix_rows(const cs_matrix* matrix) {
  return matrix ? static_cast<size_t>(matrix->value.rows()) : 0;
}

size_t cs_matrix_cols(const cs_matrix* matrix) {
  return matrix ? static_cast<size_t>(matrix->value.cols()) : 0;
}

cs_status cs_matrix_copy(const cs_matrix* matrix, double* out, size_t capacity) {
  return guard([&] {
    require(matrix, "matrix");
    require(out, "out");
    const auto rows = static_cast<size_t>(matrix->value.rows());
    const auto cols = static_cast<size_t>(matrix->value.cols());
    if (capacity < rows * cols) {
      throw codedsketch::ParameterError("buffer holds " + std::to_string(capacity) +
                                        " values, matrix has " + std::to_string(rows * cols));
    }
    for (size_t i = 0; i < rows; ++i) {
      for (size_t j = 0; j < cols; ++j) {
        out[i * cols + j] = matrix->value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  });
}

cs_status cs_matrix_load(const char* path, cs_matrix** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new cs_matrix{codedsketch::io::load_matrix(path)};
  });
}

cs_status cs_matrix_save(const cs_matrix* matrix, const char* path) {
  return guard([&] {
    require(matrix, "matrix");
    require(path, "path");
    codedsketch::io::save_matrix(path, matrix->value);
  });
}

cs_status cs_scheme_from_accuracy(size_t p, size_t m, size_t n, double epsilon, double delta,
                                  double log_base, cs_scheme* out) {
  return guard([&] {
    require(out, "out");
    const auto params = codedsketch::params_from_accuracy(p, m, n, epsilon, delta, log_base);
    *out = cs_scheme{params.p,       params.m,     params.n,     params.bprime, params.d,
                     params.workers, params.epsilon, params.delta, params.log_base};
  });
}

uint64_t cs_threshold_cs(size_t p, size_t bprime, size_t d) {
  if (p == 0 || bprime == 0 || d == 0) return 0;
  return codedsketch::threshold_cs(p, bprime, d);
}

uint64_t cs_threshold_exact(size_t p, size_t m, size_t n) {
  return codedsketch::threshold_exact(p, m, n);
}

cs_status cs_printed_bound(size_t p, size_t m, size_t n, double epsilon, double delta,
                           double log_base, uint64_t* first_term, uint64_t* bound) {
  return guard([&] {
    const auto report = codedsketch::threshold_report(p, m, n, epsilon, delta, log_base);
    if (first_term) *first_term = report.printed_first;
    if (bound) *bound = report.printed_bound;
  });
}

cs_status cs_approximate_multiply(const cs_matrix* a, const cs_matrix* b, const cs_scheme* scheme,
                                  uint64_t seed, cs_grid grid, cs_matrix** out) {
  return guard([&] {
    require(a, "a");
    require(b, "b");
    require(scheme, "scheme");
    require(out, "out");
    codedsketch::SchemeParams params;
    params.p = scheme->p;
    params.m = scheme->m;
    params.n = scheme->n;
    params.bprime = scheme->bprime;
    params.d = scheme->d;
    params.workers = scheme->workers;
    params.epsilon = scheme->epsilon;
    params.delta = scheme->delta;
    params.log_base = scheme->log_base;
    codedsketch::MultiplyOptions options;
    if (grid == CS_GRID_CHEBYSHEV) {
      options.grid = codedsketch::poly::GridMode::chebyshev;
    } else if (grid != CS_GRID_ROOTS_OF_UNITY) {
      throw codedsketch::ParameterError("unknown grid");
    }
    auto report = codedsketch::approximate_multiply(a->value, b->value, params, seed, options);
    *out = new cs_matrix{std::move(report.estimate)};
  });
}

cs_status cs_config_create(cs_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new cs_config{};
  });
}

void cs_config_destroy(cs_config* config) { delete config; }

cs_status cs_config_set(cs_config* config, const char* key, const char* value) {
  return guard([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    codedsketch::bench::apply_option(config->value, key, value);
  });
}

cs_status cs_experiment_run(const cs_config* config, cs_report** out) {
  return guard([&] {
    require(config, "config");
    require(out, "out");
    *out = new cs_report{codedsketch::bench::run(config->value)};
  });
}

int cs_report_passed(const cs_report* report) {
  return report != nullptr && report->value.passed() ? 1 : 0;
}

cs_status cs_report_to_string(const cs_report* report, cs_format format, char** out) {
  return guard([&] {
    require(report, "report");
    require(out, "out");
    const auto text = codedsketch::bench::serialize(
        report->value, format == CS_FORMAT_CSV ? codedsketch::bench::Format::csv
                                               : codedsketch::bench::Format::json);
    auto* buffer = new char[text.size() + 1];
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    *out = buffer;
  });
}

cs_status cs_report_write(const cs_report* report, cs_format format, const char* path) {
  return guard([&] {
    require(report, "report");
    require(path, "path");
    codedsketch::bench::emit_report(
        report->value,
        format == CS_FORMAT_CSV ? codedsketch::bench::Format::csv : codedsketch::bench::Format::json,
        path);
  });
}

void cs_report_destroy(cs_report* report) { delete report; }

void cs_string_free(char* text) { delete[] text; }

}  // extern "C"
