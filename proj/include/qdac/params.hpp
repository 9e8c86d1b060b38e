#pragma once

#include <optional>

#include "qdac/common.hpp"

namespace qdac {

// Estimator knobs. The desk profile drives every knob directly; paper_mode
// recomputes them from the asymptotic formulas (base-2 logs) and enforces the
// stopping-width relation w0 = 20 d (Delta + h + 2).
struct EstimatorParams {
  double delta = 0.1;   // target additive error
  int Delta = 1;        // cuts per division step
  int K = 3;            // projector power
  int T = 3;            // trace power for kappa
  int eta = 2;          // recursion depth budget
  double eps = 1e-6;    // base-case error
  double eps2 = 1e-8;   // kappa base-case error
  double h_budget = 1;  // light slices tolerated before the zero branch
  int w0 = 12;          // stopping width
  int z_width = 6;      // central window width
  int w_slice = 2;      // per-section slice width
  int spacing = 2;      // gap between consecutive slices
  std::optional<Axis> axis;      // cut axis; default = longest
  bool paper_mode = false;
  double brute_force_delta = 1e-9;

  void validate() const {
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    if (Delta < 1 || K < 1 || T < 1 || eta < 0 || w_slice < 1 || spacing < 0 ||
        w0 < 1 || z_width < 1 || !(eps > 0) || !(eps2 > 0) || !(h_budget > 0))
      throw std::invalid_argument("estimator parameters must be positive");
  }

  void enforce_paper_w0(int depth_d) const {
    const int expect = 20 * depth_d * (Delta + static_cast<int>(h_budget) + 2);
    if (paper_mode && w0 != expect)
      throw std::invalid_argument("paper mode requires w0 = 20d(Delta+h+2) = " +
                                  std::to_string(expect));
  }
};

// Asymptotic parameter schedule for n qubits at depth d. Infeasible at desk
// scale for any realistic n; exposed so the CLI can print and refuse.
inline EstimatorParams paper_params(int n, double delta, int depth_d) {
  if (n < 4) throw std::invalid_argument("paper parameters need n >= 4");
  const double ln = std::log2(static_cast<double>(n));
  EstimatorParams p;
  p.paper_mode = true;
  p.delta = delta;
  p.Delta = static_cast<int>(std::llround(ln));
  p.K = p.T = static_cast<int>(std::llround(ln * ln * ln));
  p.h_budget = std::pow(ln, 7.0);
  p.eps = p.eps2 = delta * std::pow(2.0, -10.0 * ln * std::log2(ln));
  p.eta = static_cast<int>(std::llround(ln / (3.0 * std::log2(4.0 / 3.0))));
  p.w0 = 20 * depth_d * (p.Delta + static_cast<int>(p.h_budget) + 2);
  p.z_width = p.w0 / 2;
  p.w_slice = 10 * depth_d;
  p.spacing = 10 * depth_d;
  return p;
}

}  // namespace qdac
