#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "paramshap/rational.hpp"

namespace paramshap {

/// What one CLI run computed, renderable as an aligned text table or JSON.
/// Exact scores serialize as rational strings so that re-parsing them
/// reproduces the in-memory values bit for bit.
struct RunReport {
  std::string command;  // shap | esim | whynot | check | gen
  std::string method;
  std::map<std::string, std::string> inputs;  // echoed settings
  std::map<std::string, std::string> facts;   // analysis findings, extra values
  std::vector<std::string> warnings;

  std::vector<std::string> names;  // parameters or filters, aligned with scores
  std::vector<Rational> scores;    // exact paths
  std::vector<double> estimates;   // sampled paths

  bool has_utility_span = false;
  Rational nu_full, nu_empty;

  bool has_mc_meta = false;
  double epsilon = 0, delta = 0;
  uint64_t samples_per_side = 0, seed = 0;

  double elapsed_seconds = 0;
};

std::string report_to_json(const RunReport& r);
std::string report_to_table(const RunReport& r);

/// Writes JSON to `out_path` when non-empty, otherwise the table to stdout.
void emit_report(const RunReport& r, const std::string& out_path);

}  // namespace paramshap
