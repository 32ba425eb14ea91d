// codedsketch: run an experiment and write its report.
//
// Exit status: 0 all assertions passed, 1 an assertion failed, 2 bad
// configuration or I/O, 3 numerical failure.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "codedsketch/codedsketch.h"

namespace {

int exit_code(cs_status status) {
  switch (status) {
    case CS_OK: return 0;
    case CS_ERR_NUMERICAL: return 3;
    case CS_ERR_INTERNAL: return 3;
    default: return 2;
  }
}

int fail(cs_status status) {
  std::cerr << "codedsketch: " << cs_status_name(status) << " error: " << cs_last_error() << "\n";
  return exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Straggler-resistant approximate matrix multiplication experiments"};
  app.set_version_flag("--version", std::string(cs_version()));

  const std::vector<std::string> keys = {
      "p",      "m",     "n",        "bprime",   "d",      "workers",      "epsilon",
      "delta",  "log-base", "grid",  "matrix-a", "matrix-b", "random",     "block-sparse",
      "delay-model", "trials", "seed", "mode",   "out",    "format"};
  const std::vector<std::pair<std::string, std::string>> help = {
      {"p", "inner block count (A is m x p blocks, B is p x n)"},
      {"m", "row block count of A"},
      {"n", "column block count of B"},
      {"bprime", "sketch width b' (comma list in sweep mode)"},
      {"d", "sketch depth (comma list in sweep mode)"},
      {"workers", "number of workers N (default: the recovery threshold)"},
      {"epsilon", "accuracy target; derives b' when --bprime is absent"},
      {"delta", "failure probability; derives d when --d is absent"},
      {"log-base", "base of the logarithm used for d (default 2)"},
      {"grid", "roots-of-unity | chebyshev"},
      {"matrix-a", "matrix file for A (binary CSKMAT01 or .csv)"},
      {"matrix-b", "matrix file for B"},
      {"random", "random dense dimensions RxSxT"},
      {"block-sparse", "random block-sparse product with K nonzero blocks"},
      {"delay-model", "shifted-exponential[:SHIFT:RATE] | fixed-permutation | "
                      "adversarial-set[:COUNT:FACTOR]"},
      {"trials", "number of trials"},
      {"seed", "root seed (falls back to CODEDSKETCH_SEED, then 0)"},
      {"mode", "approx | sparse-exact | example-golden | sweep"},
      {"out", "report path (default: stdout)"},
      {"format", "json | csv"},
  };
  std::vector<std::optional<std::string>> values(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    app.add_option("--" + keys[i], values[i], help[i].second);
  }
  CLI11_PARSE(app, argc, argv);

  const auto seed_index = static_cast<std::size_t>(
      std::find(keys.begin(), keys.end(), "seed") - keys.begin());
  if (!values[seed_index]) {
    if (const char* env = std::getenv("CODEDSKETCH_SEED"); env != nullptr && *env != '\0') {
      values[seed_index] = env;
    }
  }

  cs_config* config = nullptr;
  if (auto st = cs_config_create(&config); st != CS_OK) return fail(st);
  cs_format format = CS_FORMAT_JSON;
  std::string out_path;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!values[i]) continue;
    if (auto st = cs_config_set(config, keys[i].c_str(), values[i]->c_str()); st != CS_OK) {
      cs_config_destroy(config);
      return fail(st);
    }
    if (keys[i] == "format" && *values[i] == "csv") format = CS_FORMAT_CSV;
    if (keys[i] == "out") out_path = *values[i];
  }

  cs_report* report = nullptr;
  const auto st = cs_experiment_run(config, &report);
  cs_config_destroy(config);
  if (st != CS_OK) return fail(st);

  cs_status write_status = CS_OK;
  if (out_path.empty()) {
    char* text = nullptr;
    write_status = cs_report_to_string(report, format, &text);
    if (write_status == CS_OK) {
      std::fputs(text, stdout);
      cs_string_free(text);
    }
  } else {
    write_status = cs_report_write(report, format, out_path.c_str());
  }
  const bool passed = cs_report_passed(report) != 0;
  cs_report_destroy(report);
  if (write_status != CS_OK) return fail(write_status);
  if (!passed) {
    std::cerr << "codedsketch: one or more assertions failed\n";
    return 1;
  }
  return 0;
}
