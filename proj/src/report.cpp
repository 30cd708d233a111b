#include "paramshap/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "paramshap/errors.hpp"

namespace paramshap {

std::string report_to_json(const RunReport& r) {
  nlohmann::json root;
  root["command"] = r.command;
  root["method"] = r.method;
  root["inputs"] = r.inputs;
  if (!r.facts.empty()) root["facts"] = r.facts;
  root["warnings"] = r.warnings;
  nlohmann::json rows = nlohmann::json::array();
  for (size_t i = 0; i < r.names.size(); ++i) {
    nlohmann::json row;
    row["name"] = r.names[i];
    if (i < r.scores.size()) {
      row["score"] = r.scores[i].to_string();
      row["score_approx"] = r.scores[i].to_double();
    }
    if (i < r.estimates.size()) row["estimate"] = r.estimates[i];
    rows.push_back(std::move(row));
  }
  root["results"] = std::move(rows);
  if (r.has_utility_span) {
    root["utility_full"] = r.nu_full.to_string();
    root["utility_empty"] = r.nu_empty.to_string();
  }
  if (r.has_mc_meta) {
    root["epsilon"] = r.epsilon;
    root["delta"] = r.delta;
    root["samples_per_side"] = r.samples_per_side;
    root["seed"] = r.seed;
  }
  root["elapsed_seconds"] = r.elapsed_seconds;
  return root.dump(2) + "\n";
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

std::string report_to_table(const RunReport& r) {
  std::ostringstream out;
  out << r.command;
  if (!r.method.empty()) out << " (" << r.method << ")";
  out << "\n";
  for (const auto& [k, v] : r.inputs) out << "  " << k << ": " << v << "\n";
  for (const auto& [k, v] : r.facts) out << "  " << k << ": " << v << "\n";
  for (const auto& w : r.warnings) out << "  warning: " << w << "\n";
  if (r.has_mc_meta) {
    out << "  epsilon: " << format_double(r.epsilon) << "  delta: " << format_double(r.delta)
        << "  samples_per_side: " << r.samples_per_side << "  seed: " << r.seed << "\n";
  }

  if (!r.names.empty()) {
    const bool exact = !r.scores.empty();
    size_t name_w = 4;
    for (const auto& n : r.names) name_w = std::max(name_w, n.size());
    std::vector<std::string> mid, right;
    size_t mid_w = exact ? 5 : 8;
    for (size_t i = 0; i < r.names.size(); ++i) {
      std::string m = exact ? r.scores[i].to_string() : format_double(r.estimates[i]);
      mid_w = std::max(mid_w, m.size());
      mid.push_back(std::move(m));
      right.push_back(exact ? format_double(r.scores[i].to_double()) : "");
    }
    out << "  " << std::left << std::setw(static_cast<int>(name_w)) << "name" << "  "
        << std::setw(static_cast<int>(mid_w)) << (exact ? "score" : "estimate");
    if (exact) out << "  approx";
    out << "\n";
    for (size_t i = 0; i < r.names.size(); ++i) {
      out << "  " << std::left << std::setw(static_cast<int>(name_w)) << r.names[i] << "  "
          << std::setw(static_cast<int>(mid_w)) << mid[i];
      if (exact) out << "  " << right[i];
      out << "\n";
    }
  }
  if (r.has_utility_span) {
    out << "  utility at full set: " << r.nu_full.to_string()
        << "   at empty set: " << r.nu_empty.to_string() << "\n";
  }
  out << "  elapsed: " << format_double(r.elapsed_seconds) << " s\n";
  return out.str();
}

void emit_report(const RunReport& r, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report_to_table(r);
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw ValidationError("cannot write report to '" + out_path + "'");
  f << report_to_json(r);
}

}  // namespace paramshap
