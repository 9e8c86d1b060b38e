#pragma once

#include <memory>

#include "qdac/mps.hpp"
#include "qdac/params.hpp"

namespace qdac {

// ---------------------------------------------------------------------------
// Base-case estimator: probability that the measured-plus-active registers of
// a synthesis all read zero, with an additive error contract.
// ---------------------------------------------------------------------------

enum class BaseCaseMode { MpsCalibrated, MpsExact, Dense };

struct BaseCaseStats {
  long calls = 0;
  long exact_calls = 0;
  long max_registers = 0;
  long max_bond = 1;
};

class BaseCaseEstimator {
 public:
  explicit BaseCaseEstimator(BaseCaseMode mode = BaseCaseMode::MpsExact,
                             MpsConfig cfg = {})
      : mode_(mode), cfg_(cfg), stats_(std::make_shared<BaseCaseStats>()) {}

  double operator()(const Synthesis& s, double eps) const {
    ++stats_->calls;
    stats_->max_registers = std::max<long>(
        stats_->max_registers, static_cast<long>(s.qubit_order().size()));
    switch (mode_) {
      case BaseCaseMode::Dense:
        return synthesis_value_dense(s);
      case BaseCaseMode::MpsExact: {
        ++stats_->exact_calls;
        return exact_contract(make_slab(s, cfg_));
      }
      case BaseCaseMode::MpsCalibrated: {
        EstimateDiagnostics diag;
        const double v = estimate(make_slab(s, cfg_), eps, cfg_, &diag);
        stats_->max_bond = std::max(stats_->max_bond, diag.bond_used);
        return v;
      }
    }
    return 0.0;
  }

  SynthesisEstimator as_function() const {
    return [*this](const Synthesis& s, double eps) { return (*this)(s, eps); };
  }

  const BaseCaseStats& stats() const { return *stats_; }
  BaseCaseMode mode() const { return mode_; }
  const MpsConfig& config() const { return cfg_; }

 private:
  BaseCaseMode mode_;
  MpsConfig cfg_;
  std::shared_ptr<BaseCaseStats> stats_;
};

// ---------------------------------------------------------------------------
// Heavy-slice detection.
// ---------------------------------------------------------------------------

// Scalar synthesis for the slice weight P(M_i = 0): only the cone of M_i
// matters, so the circuit is the slice circuit itself, a thin slab.
inline Synthesis slice_weight_synthesis(const LayeredCircuit& c,
                                        const SliceSpec& s) {
  Synthesis w;
  w.circuit = extract_slice_circuit(c, s);
  w.circuit.cut_axis = s.axis;
  w.traced = s.b_region(c.dims).unioned(s.f_region(c.dims));
  w.measured = s.m_region(c.dims);
  w.active = Region{};
  w.active.set_cut_axis(s.axis);
  w.id = "weight_at" + std::to_string(s.b_start);
  return w;
}

struct HeavySliceEntry {
  int index = 0;
  SliceSpec spec;
  double weight_estimate = 0.0;
  bool heavy = false;
};

struct HeavySliceReport {
  std::vector<HeavySliceEntry> entries;
  double threshold = 0.0;   // acceptance level on the true weight
  double eps_tilde = 0.0;   // estimation error budget per slice
  double light_bound = 1.0; // certified upper bound on the oracle value
  std::vector<int> heavy_indices;

  bool zero_branch(double delta) const { return light_bound <= delta; }
};

// Classify slices by their M-zero weight. Accepted slices have true weight
// >= threshold; the certified product over rejected slices upper-bounds the
// all-zeros probability and justifies the zero-return branch.
inline HeavySliceReport detect_heavy_slices(const LayeredCircuit& c,
                                            const std::vector<SliceSpec>& slices,
                                            double delta, double h_budget,
                                            const SynthesisEstimator& base) {
  if (!(delta > 0) || delta >= 1.0)
    throw std::invalid_argument("delta must lie in (0, 1) for slice detection");
  HeavySliceReport rep;
  const double log_delta = std::log2(delta);
  rep.threshold = std::pow(2.0, log_delta / h_budget);
  rep.eps_tilde = std::pow(2.0, log_delta / (2 * h_budget) - 1) -
                  std::pow(2.0, log_delta / h_budget - 1);
  if (!(rep.eps_tilde > 0))
    throw std::runtime_error("slice-weight separation is not positive");
  for (std::size_t i = 0; i < slices.size(); ++i) {
    HeavySliceEntry e;
    e.index = static_cast<int>(i);
    e.spec = slices[i];
    const double raw = base(slice_weight_synthesis(c, slices[i]), rep.eps_tilde);
    e.weight_estimate = std::min(std::max(raw, 0.0), 1.0);
    e.heavy = e.weight_estimate >= rep.threshold + rep.eps_tilde;
    if (e.heavy)
      rep.heavy_indices.push_back(e.index);
    else
      rep.light_bound *= std::min(1.0, e.weight_estimate + rep.eps_tilde);
    rep.entries.push_back(e);
  }
  if (rep.heavy_indices.size() == rep.entries.size()) rep.light_bound = 1.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Error budget.
// ---------------------------------------------------------------------------

struct BudgetReport {
  double e = 0.0;  // max per-slice weight defect
  double g = 0.0;  // max per-slice projector distance bound
  double E1 = 0.0, E2 = 0.0, E3 = 0.0;
  double budget = 0.0;

  json to_json() const {
    return json{{"e", e}, {"g", g}, {"E1", E1}, {"E2", E2}, {"E3", E3},
                {"budget", budget}};
  }
};

inline BudgetReport error_budget(const EstimatorParams& p, double e_max,
                                 double g_max) {
  BudgetReport b;
  b.e = e_max;
  b.g = g_max;
  const double pow_e = std::pow(e_max, 2.0 * p.T);
  b.E1 = 10.0 * p.K * (pow_e + 6.0 * g_max + p.eps2);
  b.E2 = b.E1 + p.eps;
  const double two_d = std::pow(2.0, p.Delta);
  b.E3 = 10.0 * (two_d * 6.0 * g_max + two_d * p.K * (pow_e + p.eps2) + p.eps);
  if (p.eta <= 0) {
    b.budget = p.eps;
    return b;
  }
  b.budget = p.eta * std::pow(20.0, p.eta) *
             std::pow(static_cast<double>(p.Delta), 2.0 * p.eta) *
             (b.E3 + std::pow(2.0 * e_max + 2.0 * g_max, p.Delta));
  return b;
}

// ---------------------------------------------------------------------------
// Recursive estimator.
// ---------------------------------------------------------------------------

struct TooFewHeavySlices : std::runtime_error {
  int achievable;
  explicit TooFewHeavySlices(int n)
      : std::runtime_error("only " + std::to_string(n) +
                           " heavy slices available in the central window"),
        achievable(n) {}
};

struct EstimateTrace {
  double value = 0.0;  // clamped to [0, 1]
  double raw = 0.0;
  BudgetReport budget;
  json tree;
  long base_calls = 0;
  long recursion_nodes = 0;
  int max_depth_used = 0;
};

namespace detail {

struct RecursionContext {
  const EstimatorParams* params;
  const SynthesisEstimator* base;
  const LayeredCircuit* root_circuit;
  std::vector<SliceSpec> heavy;             // cone-separated heavy slices
  std::map<int, KappaEstimate> kappa_cache; // by slice b_start
  std::map<std::pair<std::string, int>, double> memo;
  bool use_memo = true;
  long base_calls = 0;
  int max_depth_used = 0;

  const KappaEstimate& kappa(const SliceSpec& s) {
    auto it = kappa_cache.find(s.b_start);
    if (it != kappa_cache.end()) return it->second;
    KappaEstimate k =
        estimate_kappa(extract_slice_circuit(*root_circuit, s), s,
                       params->T, params->eps2, *base);
    return kappa_cache.emplace(s.b_start, std::move(k)).first->second;
  }
};

inline std::pair<int, int> active_span(const Synthesis& s) {
  const Axis a = s.circuit.cut_axis;
  int lo = 1 << 30, hi = -(1 << 30);
  for (const auto& q : s.active) {
    lo = std::min(lo, q.coord(a));
    hi = std::max(hi, q.coord(a));
  }
  return {lo, hi};
}

// The Delta window slices closest to dividing the central region evenly;
// ties resolved toward lower coordinates.
inline std::vector<SliceSpec> choose_slices(const std::vector<SliceSpec>& in,
                                            int zlo, int zw, int want) {
  std::vector<SliceSpec> pool = in;
  std::vector<SliceSpec> chosen;
  for (int k = 0; k < want; ++k) {
    const double ideal = zlo + (k + 1) * static_cast<double>(zw) / (want + 1);
    int best = -1;
    double best_d = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double center = 0.5 * pool[i].m_center2();
      const double d = std::abs(center - ideal);
      if (best < 0 || d < best_d - 1e-12 ||
          (std::abs(d - best_d) <= 1e-12 && pool[i].b_start < pool[best].b_start)) {
        best = static_cast<int>(i);
        best_d = d;
      }
    }
    chosen.push_back(pool[best]);
    pool.erase(pool.begin() + best);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const SliceSpec& a, const SliceSpec& b) {
              return a.b_start < b.b_start;
            });
  return chosen;
}

inline double a_recursive(const Synthesis& s, int eta, RecursionContext& ctx,
                          json& node);

inline double child_call(const Synthesis& child, int eta, RecursionContext& ctx,
                         json& parent_node) {
  const auto key = std::make_pair(child.id, eta);
  if (ctx.use_memo) {
    auto it = ctx.memo.find(key);
    if (it != ctx.memo.end()) return it->second;
  }
  json node;
  const double v = a_recursive(child, eta, ctx, node);
  parent_node["children"].push_back(node);
  if (ctx.use_memo) ctx.memo[key] = v;
  return v;
}

inline double a_recursive(const Synthesis& s, int eta, RecursionContext& ctx,
                          json& node) {
  const EstimatorParams& p = *ctx.params;
  const int width = s.active_width();
  node["id"] = s.id;
  node["width"] = width;
  node["eta"] = eta;
  ctx.max_depth_used = std::max(ctx.max_depth_used, p.eta - eta);

  if (width < p.w0 || eta < 1) {
    node["branch"] = "base";
    ++ctx.base_calls;
    const double v = (*ctx.base)(s, p.eps);
    node["value"] = v;
    return v;
  }

  const auto [lo, hi] = active_span(s);
  const int zw = std::min(p.z_width, width / 2);
  const int zlo = lo + (width - zw) / 2;
  std::vector<SliceSpec> window;
  for (const auto& spec : ctx.heavy) {
    if (spec.b_start < zlo || spec.end() > zlo + zw) continue;
    if (!spec.k_region(s.circuit.dims).is_subset_of(s.active)) continue;
    window.push_back(spec);
  }
  const bool root_call = eta == p.eta;
  if (static_cast<int>(window.size()) < p.Delta && root_call)
    throw TooFewHeavySlices(static_cast<int>(window.size()));
  if (window.empty()) {
    // A deep node whose window holds no usable cut stops early.
    node["branch"] = "base-window";
    ++ctx.base_calls;
    const double v = (*ctx.base)(s, p.eps);
    node["value"] = v;
    return v;
  }
  node["branch"] = "divide";
  node["children"] = json::array();

  const int D = std::min<int>(p.Delta, static_cast<int>(window.size()));
  const std::vector<SliceSpec> cut = choose_slices(window, zlo, zw, D);
  node["cuts"] = json::array();
  for (const auto& spec : cut) node["cuts"].push_back(spec.b_start);
  std::vector<double> kap(D);
  std::vector<double> a_left(D), a_right(D);
  for (int i = 0; i < D; ++i) kap[i] = ctx.kappa(cut[i]).value;
  node["kappas"] = kap;

  // 2*Delta distinct child calls, shared across all terms below.
  std::vector<DivisionResult> singles(D);
  for (int i = 0; i < D; ++i) {
    singles[i] = divide(s, cut[i], std::nullopt, p.K);
    a_left[i] = child_call(singles[i].left, eta - 1, ctx, node);
    a_right[i] = child_call(singles[i].right, eta - 1, ctx, node);
  }

  double value = 0.0;
  for (int i = 0; i < D; ++i)
    value += a_left[i] * a_right[i] / std::pow(kap[i], 4 * p.K + 1);

  for (int i = 0; i < D; ++i)
    for (int j = i + 1; j < D; ++j) {
      DivisionResult pair = divide(s, cut[i], cut[j], p.K);
      const double norm = std::pow(kap[i] * kap[j], 4 * p.K + 1);
      ++ctx.base_calls;
      const double mid = (*ctx.base)(*pair.middle, p.eps);
      value -= a_left[i] * mid * a_right[j] / norm;
      if (j < i + 2) continue;
      // Inclusion-exclusion over interior projector subsets.
      const int m = j - i - 1;
      double inner = 0.0;
      for (unsigned mask = 1; mask < (1u << m); ++mask) {
        std::vector<SliceSpec> sigma;
        double kap_pow = 1.0;
        for (int t = 0; t < m; ++t)
          if (mask & (1u << t)) {
            sigma.push_back(cut[i + 1 + t]);
            kap_pow *= std::pow(kap[i + 1 + t], 2 * p.K);
          }
        const Synthesis folded =
            fold_interior_projectors(*pair.middle, s.circuit, sigma, p.K);
        ++ctx.base_calls;
        const double b = (*ctx.base)(folded, p.eps / std::pow(2.0, D));
        const double sign = (sigma.size() % 2 == 1) ? 1.0 : -1.0;
        inner += sign * b / kap_pow;
      }
      value += a_left[i] * a_right[j] * inner / norm;
    }
  node["value"] = value;
  return value;
}

}  // namespace detail

// Width of the active register required before a division is attempted is
// w0; every child's width is at most (3/4) of its parent's by construction
// of the central window.
inline double a_recursive(const Synthesis& s, int eta,
                          const EstimatorParams& params,
                          const SynthesisEstimator& base,
                          const std::vector<SliceSpec>& heavy,
                          json* tree_out = nullptr, bool use_memo = true) {
  detail::RecursionContext ctx;
  ctx.params = &params;
  ctx.base = &base;
  ctx.root_circuit = &s.circuit;
  ctx.heavy = heavy;
  ctx.use_memo = use_memo;
  json node;
  const double v = detail::a_recursive(s, eta, ctx, node);
  if (tree_out) *tree_out = node;
  return v;
}

// Full driver. Branches: (i) delta small enough that the exact dense value is
// cheaper than any approximation; (ii) delta >= 1/2 answered by the constant
// 1/2; (iii) enough light slices to certify the value is at most delta;
// (iv) the recursive division. When the central window cannot supply Delta
// heavy slices the driver retries with fewer cuts, and degenerates to a
// single base-case call on the root synthesis.
inline EstimateTrace a_full(const LayeredCircuit& c,
                            const BaseCaseEstimator& base,
                            const EstimatorParams& params_in,
                            bool use_memo = true) {
  EstimatorParams params = params_in;
  params.validate();
  params.enforce_paper_w0(std::max(1, c.depth()));
  {
    const ValidationReport rep = validate_circuit(c);
    if (!rep.ok())
      throw std::invalid_argument("circuit is not admissible:\n" + rep.to_string());
  }
  EstimateTrace out;
  out.tree = json::object();

  if (params.delta <= params.brute_force_delta &&
      c.dims.size() <= dense_cap()) {
    out.raw = zero_probability(c);
    out.value = out.raw;
    out.tree["branch"] = "brute-force";
    out.budget = BudgetReport{};
    return out;
  }
  if (params.delta >= 0.5) {
    out.raw = out.value = 0.5;
    out.tree["branch"] = "half";
    out.budget = BudgetReport{};
    out.budget.budget = params.delta;
    return out;
  }

  const Axis axis = params.axis.value_or(c.dims.longest_axis());
  std::vector<SliceSpec> slices;
  try {
    slices = enumerate_slices(c, axis, params.w_slice, params.spacing);
  } catch (const std::invalid_argument&) {
    slices.clear();  // lattice too small to slice; fall through to base case
  }

  const SynthesisEstimator base_fn = base.as_function();
  HeavySliceReport report;
  if (!slices.empty()) {
    report = detect_heavy_slices(c, slices, params.delta, params.h_budget, base_fn);
    out.tree["weights"] = json::array();
    for (const auto& e : report.entries)
      out.tree["weights"].push_back(
          {{"at", e.spec.b_start}, {"w", e.weight_estimate}, {"heavy", e.heavy}});
    if (report.zero_branch(params.delta)) {
      out.raw = out.value = 0.0;
      out.tree["branch"] = "light";
      out.tree["light_bound"] = report.light_bound;
      out.budget.budget = params.delta;
      return out;
    }
  }

  std::vector<SliceSpec> heavy;
  for (int i : report.heavy_indices) heavy.push_back(report.entries[i].spec);

  Synthesis root = make_root_synthesis(c);
  root.circuit.cut_axis = axis;
  root.active.set_cut_axis(axis);
  root.traced.set_cut_axis(axis);
  root.measured.set_cut_axis(axis);

  detail::RecursionContext ctx;
  ctx.base = &base_fn;
  ctx.root_circuit = &c;
  ctx.heavy = heavy;
  ctx.use_memo = use_memo;

  EstimatorParams attempt = params;
  json node;
  double value = 0.0;
  bool done = false;
  while (!done) {
    ctx.params = &attempt;
    ctx.memo.clear();
    ctx.base_calls = 0;
    ctx.max_depth_used = 0;
    node = json::object();
    try {
      value = detail::a_recursive(root, attempt.eta, ctx, node);
      done = true;
    } catch (const TooFewHeavySlices& e) {
      if (e.achievable >= 1) {
        attempt.Delta = e.achievable;
      } else {
        // No usable cut: answer with one base-case call on the root.
        node = json::object();
        node["branch"] = "base";
        node["id"] = root.id;
        ++ctx.base_calls;
        value = base_fn(root, attempt.eps);
        done = true;
      }
    }
  }
  out.tree["branch"] = "recursive";
  out.tree["delta_used"] = attempt.Delta;
  out.tree["root"] = node;
  out.base_calls = ctx.base_calls;
  out.max_depth_used = ctx.max_depth_used;

  double e_max = 0.0, g_max = 0.0;
  for (const auto& [pos, kap] : ctx.kappa_cache) {
    const double lam = std::min(kap.value, 1.0);
    const double e = std::max(1.0 - lam, 0.0);
    e_max = std::max(e_max, e);
    g_max = std::max(g_max, std::pow(e / std::max(lam, 1e-12), attempt.K));
  }
  out.budget = error_budget(attempt, e_max, g_max);
  out.raw = value;
  out.value = std::min(std::max(value, 0.0), 1.0);
  return out;
}

}  // namespace qdac
