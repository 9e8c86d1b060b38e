#pragma once

#include <chrono>

#include "qdac/estimator.hpp"

namespace qdac {

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Schema-versioned run record written by the CLI.
struct ResultRecord {
  static constexpr int schema_version = 1;

  json config;              // snapshot of the resolved run configuration
  double value = 0.0;
  double raw = 0.0;
  BudgetReport budget;
  std::optional<double> oracle;
  json tree;
  json timings_ms = json::object();
  json checks = json::array();

  json to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["timestamp_utc"] = utc_timestamp();
    j["config"] = config;
    j["value"] = value;
    j["raw"] = raw;
    j["budget"] = budget.to_json();
    if (oracle) j["oracle"] = *oracle;
    if (!tree.is_null()) j["tree"] = tree;
    j["timings_ms"] = timings_ms;
    if (!checks.empty()) j["checks"] = checks;
    return j;
  }
};

inline json params_to_json(const EstimatorParams& p) {
  json j;
  j["delta"] = p.delta;
  j["Delta"] = p.Delta;
  j["K"] = p.K;
  j["T"] = p.T;
  j["eta"] = p.eta;
  j["eps"] = p.eps;
  j["eps2"] = p.eps2;
  j["h"] = p.h_budget;
  j["w0"] = p.w0;
  j["z_width"] = p.z_width;
  j["w_slice"] = p.w_slice;
  j["spacing"] = p.spacing;
  if (p.axis) j["axis"] = axis_name(*p.axis);
  j["paper_mode"] = p.paper_mode;
  return j;
}

}  // namespace qdac
