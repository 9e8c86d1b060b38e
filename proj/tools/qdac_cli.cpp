// Command-line front end: corpus generation, estimation, oracle comparison,
// verification suites and benchmarks. All artifacts are JSON.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qdac/qdac.hpp"

namespace fs = std::filesystem;
using namespace qdac;

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

LayeredCircuit load_circuit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open circuit file: " + path);
  json j;
  in >> j;
  return circuit_from_json(j);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << j.dump(2) << "\n";
}

struct ParamFlags {
  EstimatorParams p;
  std::string axis;
  std::string mode = "exact";
  int paper_n = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--delta", p.delta, "target additive error");
    cmd->add_option("--Delta", p.Delta, "cuts per division");
    cmd->add_option("--K", p.K, "projector power");
    cmd->add_option("--T", p.T, "kappa trace power");
    cmd->add_option("--eta", p.eta, "recursion depth budget");
    cmd->add_option("--eps", p.eps, "base-case error");
    cmd->add_option("--eps2", p.eps2, "kappa base-case error");
    cmd->add_option("--h-budget", p.h_budget, "light-slice budget");
    cmd->add_option("--w0", p.w0, "stopping width");
    cmd->add_option("--z-width", p.z_width, "central window width");
    cmd->add_option("--w-slice", p.w_slice, "per-section slice width");
    cmd->add_option("--spacing", p.spacing, "gap between slices");
    cmd->add_option("--axis", axis, "cut axis (x|y|z)");
    cmd->add_option("--mode", mode, "base case: exact|calibrated|dense")
        ->check(CLI::IsMember({"exact", "calibrated", "dense"}));
    cmd->add_option("--paper-params", paper_n,
                    "derive the asymptotic schedule for n qubits and refuse "
                    "if infeasible");
  }

  EstimatorParams resolve(const LayeredCircuit& c) {
    if (paper_n > 0) {
      EstimatorParams pp = paper_params(paper_n, p.delta, std::max(1, c.depth()));
      std::cout << "asymptotic schedule for n=" << paper_n << ":\n"
                << params_to_json(pp).dump(2) << "\n";
      const Axis a = pp.axis.value_or(c.dims.longest_axis());
      if (pp.w0 > c.dims.extent(a))
        throw std::runtime_error(
            "schedule infeasible at this size: stopping width " +
            std::to_string(pp.w0) + " exceeds the lattice extent " +
            std::to_string(c.dims.extent(a)));
      return pp;
    }
    if (!axis.empty()) p.axis = axis_from_name(axis);
    return p;
  }

  BaseCaseEstimator estimator() const {
    if (mode == "dense") return BaseCaseEstimator(BaseCaseMode::Dense);
    if (mode == "calibrated")
      return BaseCaseEstimator(BaseCaseMode::MpsCalibrated);
    return BaseCaseEstimator(BaseCaseMode::MpsExact);
  }
};

int cmd_gen(const std::string& profile, int nx, int ny, int nz, int depth,
            double theta, int w_slice, int spacing, std::uint64_t seed,
            int count, const std::string& out_dir) {
  CorpusSpec spec;
  spec.profile = profile;
  spec.dims = {nx, ny, nz};
  spec.depth = depth;
  spec.theta = theta;
  spec.w_slice = w_slice;
  spec.spacing = spacing;
  fs::create_directories(out_dir);
  const auto corpus = gen_corpus(spec, seed, count);
  for (int k = 0; k < count; ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "circuit_%04d.json", k);
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path);
    out << circuit_to_json(corpus[k]).dump() << "\n";
    std::cout << path.string() << "\n";
  }
  return 0;
}

int cmd_oracle(const std::string& circuit_path, const std::string& out,
               const std::string& dump_state) {
  const LayeredCircuit c = load_circuit(circuit_path);
  const auto t0 = std::chrono::steady_clock::now();
  const double v = zero_probability(c);
  std::cout.precision(17);
  std::cout << v << "\n";
  if (!dump_state.empty()) {
    const DenseState s = statevector(c);
    json js = json::array();
    for (long i = 0; i < s.amp.size(); ++i)
      js.push_back({s.amp(i).real(), s.amp(i).imag()});
    write_json(dump_state, js);
  }
  if (!out.empty()) {
    ResultRecord r;
    r.config = {{"command", "oracle"}, {"circuit", circuit_path}};
    r.value = r.raw = v;
    r.timings_ms["oracle"] = ms_since(t0);
    write_json(out, r.to_json());
  }
  return 0;
}

int cmd_estimate(const std::string& circuit_path, ParamFlags& flags,
                 const std::string& out, bool no_memo, bool bond_profile) {
  const LayeredCircuit c = load_circuit(circuit_path);
  EstimatorParams params = flags.resolve(c);
  BaseCaseEstimator base = flags.estimator();
  const auto t0 = std::chrono::steady_clock::now();
  const EstimateTrace t = a_full(c, base, params, !no_memo);
  const double elapsed = ms_since(t0);
  std::cout.precision(17);
  std::cout << t.value << "\n";
  if (bond_profile)
    std::cout << "max bond used: " << base.stats().max_bond << "\n";
  if (!out.empty()) {
    ResultRecord r;
    r.config = {{"command", "estimate"},
                {"circuit", circuit_path},
                {"mode", flags.mode},
                {"params", params_to_json(params)}};
    r.value = t.value;
    r.raw = t.raw;
    r.budget = t.budget;
    r.tree = t.tree;
    r.timings_ms["estimate"] = elapsed;
    write_json(out, r.to_json());
  }
  return 0;
}

int cmd_compare(const std::string& circuit_path, ParamFlags& flags,
                const std::string& out) {
  const LayeredCircuit c = load_circuit(circuit_path);
  EstimatorParams params = flags.resolve(c);
  BaseCaseEstimator base = flags.estimator();
  const auto t0 = std::chrono::steady_clock::now();
  const EstimateTrace t = a_full(c, base, params);
  const double t_est = ms_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  const double oracle = zero_probability(c);
  const double t_orc = ms_since(t1);
  const double diff = std::abs(t.value - oracle);
  std::cout.precision(17);
  std::cout << "estimate " << t.value << "\noracle   " << oracle
            << "\n|diff|   " << diff << "\nbudget   " << t.budget.budget
            << "\n";
  if (!out.empty()) {
    ResultRecord r;
    r.config = {{"command", "compare"},
                {"circuit", circuit_path},
                {"mode", flags.mode},
                {"params", params_to_json(params)}};
    r.value = t.value;
    r.raw = t.raw;
    r.budget = t.budget;
    r.oracle = oracle;
    r.tree = t.tree;
    r.timings_ms["estimate"] = t_est;
    r.timings_ms["oracle"] = t_orc;
    write_json(out, r.to_json());
  }
  const double allowance =
      t.budget.budget > 0 ? 5.0 * t.budget.budget : params.delta;
  if (diff > allowance) {
    std::cerr << "FAIL: |estimate - oracle| exceeds five times the budget\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Verification suites: scaled-down, fixed-seed versions of the property
// checks in the test corpus, runnable one by one.
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

using CheckFn = std::function<CheckResult()>;

LayeredCircuit chain(int len, int depth, std::uint64_t seed,
                     const std::string& profile, double theta = 0.15,
                     int w = 2, int sp = 2) {
  CorpusSpec spec;
  spec.profile = profile;
  spec.dims = {1, 1, len};
  spec.depth = depth;
  spec.theta = theta;
  spec.w_slice = w;
  spec.spacing = sp;
  return gen_circuit(spec, seed);
}

SliceRegions unit_regions() {
  SliceRegions r;
  r.axis = Axis::Z;
  r.b = Region(std::vector<Qubit>{{0, 0, 0, 0}});
  r.m = Region(std::vector<Qubit>{{0, 0, 1, 0}});
  r.f = Region(std::vector<Qubit>{{0, 0, 2, 0}});
  return r;
}

Mat dense_rho_of(const LayeredCircuit& sc, const SliceRegions& r, Side side) {
  const Region all = r.b.unioned(r.m).unioned(r.f);
  const DenseState st = statevector_on(sc, all.qubits());
  const DenseState psi = project_zeros(st, r.m);
  return partial_trace(psi, side == Side::F ? r.f : r.b).matrix;
}

CheckResult check_block_encoding_identity() {
  CheckResult res{"block-encoding-identity"};
  std::uint64_t seed = 1000;
  for (int K = 1; K <= 3 && res.pass; ++K)
    for (int rep = 0; rep < 8 && res.pass; ++rep) {
      const LayeredCircuit c = chain(3, 2, seed++, "random-shallow");
      const SliceRegions r = unit_regions();
      for (Side side : {Side::F, Side::B}) {
        Mat rho = dense_rho_of(c, r, side);
        Mat target = rho;
        for (int k = 1; k < K; ++k) target = target * rho;
        const Mat block = extract_block(encode_rho_power(c, r, side, K));
        if (spectral_norm(block - target) > 1e-10) {
          res.pass = false;
          res.detail = "extraction mismatch at K=" + std::to_string(K);
        }
      }
    }
  return res;
}

CheckResult check_projector_bound() {
  CheckResult res{"schmidt-projector-bound"};
  Rng rng(2000);
  for (int rep = 0; rep < 25 && res.pass; ++rep) {
    LayeredCircuit c;
    c.dims = {1, 1, 3};
    const double alpha = rng.uniform(0.0, 0.6);
    c.add_gate(0, {{0, 0, 0, 0}}, gates::rotation_1q(alpha, 0, 1, 0));
    c.add_gate(1, {{0, 0, 0, 0}, {0, 0, 1, 0}}, gates::cnot());
    c.add_gate(2, {{0, 0, 1, 0}, {0, 0, 2, 0}}, gates::cnot());
    c.add_gate(3, {{0, 0, 0, 0}, {0, 0, 1, 0}}, gates::cnot());
    const SliceRegions r = unit_regions();
    const Mat rho = dense_rho_of(c, r, Side::F);
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    const double lam = es.eigenvalues().maxCoeff();
    const DenseState psi = project_zeros(
        statevector_on(c, r.b.unioned(r.m).unioned(r.f).qubits()), r.m);
    const SchmidtData sd = schmidt_across(psi, r.b);
    const Vec w1 = sd.right_vectors.col(0);
    for (int K = 1; K <= 4; ++K) {
      const Mat p = extract_block(encode_rho_power(c, r, Side::F, K)) /
                    std::pow(lam, K);
      if (trace_norm(p - w1 * w1.adjoint()) >
          std::pow((1 - lam) / lam, K) + 1e-12) {
        res.pass = false;
        res.detail = "bound violated at K=" + std::to_string(K);
      }
    }
  }
  return res;
}

CheckResult check_independence() {
  CheckResult res{"buffer-independence"};
  for (std::uint64_t seed = 3000; seed < 3010 && res.pass; ++seed) {
    const LayeredCircuit c = chain(18, 1, seed, "random-shallow");
    const auto slices = enumerate_slices(c, Axis::Z, 2, 2);
    const Region m1 = slices[0].m_region(c.dims);
    const Region m2 = slices[1].m_region(c.dims);
    const double joint = marginal_zero_probability(c, m1.unioned(m2));
    const double split = marginal_zero_probability(c, m1) *
                         marginal_zero_probability(c, m2);
    if (std::abs(joint - split) > 1e-12) {
      res.pass = false;
      res.detail = "joint probability fails to factorize";
    }
  }
  return res;
}

CheckResult check_heavy_count() {
  CheckResult res{"heavy-slice-count"};
  const double q = 4.0;
  for (std::uint64_t seed = 4000; seed < 4010 && res.pass; ++seed) {
    const LayeredCircuit c = chain(18, 1, seed, "near-identity", 0.15);
    if (zero_probability(c) <= 1.0 / q) continue;
    const auto slices = enumerate_slices(c, Axis::Z, 2, 2);
    const int nk = static_cast<int>(slices.size());
    for (double h : {0.25, 0.5, 0.75}) {
      const double thr = std::pow(1.0 / q, 1.0 / ((1.0 - h) * nk));
      int heavy = 0;
      for (const auto& s : slices)
        heavy += marginal_zero_probability(c, s.m_region(c.dims)) >= thr;
      if (heavy < static_cast<int>(std::ceil(h * nk))) {
        res.pass = false;
        res.detail = "not enough heavy slices over the threshold";
      }
    }
  }
  return res;
}

CheckResult check_top_weight() {
  CheckResult res{"top-schmidt-weight"};
  for (std::uint64_t seed = 5000; seed < 5010 && res.pass; ++seed) {
    const LayeredCircuit c = chain(14, 1, seed, "near-identity", 0.3);
    for (const auto& s : enumerate_slices(c, Axis::Z, 2, 2)) {
      const LayeredCircuit sc = extract_slice_circuit(c, s);
      const DenseState st = statevector_on(sc, s.k_region(c.dims).qubits());
      const double p = marginal_zero_probability(st, s.m_region(c.dims));
      const DenseState psi = project_zeros(st, s.m_region(c.dims));
      const double top = schmidt_across(psi, s.b_region(c.dims)).top_weight();
      if (top < 1.0 - 4.0 * (1.0 - p) - 1e-12) {
        res.pass = false;
        res.detail = "weight bound violated";
      }
    }
  }
  return res;
}

CheckResult check_kappa_accuracy() {
  CheckResult res{"kappa-accuracy"};
  Rng rng(6000);
  const SynthesisEstimator dense_base = [](const Synthesis& s, double) {
    return synthesis_value_dense(s);
  };
  for (int rep = 0; rep < 10 && res.pass; ++rep) {
    LayeredCircuit c;
    c.dims = {1, 1, 3};
    const double alpha = rng.uniform(0.05, 0.45);
    c.add_gate(0, {{0, 0, 0, 0}}, gates::rotation_1q(alpha, 0, 1, 0));
    c.add_gate(1, {{0, 0, 0, 0}, {0, 0, 1, 0}}, gates::cnot());
    c.add_gate(2, {{0, 0, 1, 0}, {0, 0, 2, 0}}, gates::cnot());
    c.add_gate(3, {{0, 0, 0, 0}, {0, 0, 1, 0}}, gates::cnot());
    SliceSpec s;
    s.axis = Axis::Z;
    s.b_start = 0;
    s.width = 1;
    const SliceRegions r = unit_regions();
    Eigen::SelfAdjointEigenSolver<Mat> es(dense_rho_of(c, r, Side::B));
    const double lam = es.eigenvalues().maxCoeff();
    const double eps2 = 1e-8;
    for (int T : {2, 3}) {
      const KappaEstimate k = estimate_kappa(c, s, T, eps2, dense_base);
      const double bound =
          10.0 * (std::pow(1 - lam, 2 * T) + eps2) / std::pow(lam, 2 * T + 1);
      if (std::abs(k.value - lam) > bound) {
        res.pass = false;
        res.detail = "kappa misses the top weight at T=" + std::to_string(T);
      }
    }
  }
  return res;
}

CheckResult check_product_split() {
  CheckResult res{"product-split"};
  BaseCaseEstimator base(BaseCaseMode::MpsExact);
  EstimatorParams p;
  p.delta = 0.05;
  p.Delta = 1;
  p.K = 2;
  p.T = 2;
  p.eta = 2;
  p.eps = 1e-7;
  p.eps2 = 1e-8;
  p.w0 = 12;
  p.z_width = 8;
  p.w_slice = 1;
  p.spacing = 3;
  for (std::uint64_t seed = 7000; seed < 7004 && res.pass; ++seed) {
    const LayeredCircuit c = chain(24, 1, seed, "product-across-slices", 0.3, 1, 3);
    const EstimateTrace t = a_full(c, base, p);
    if (std::abs(t.value - zero_probability(c)) > p.eps + 1e-9) {
      res.pass = false;
      res.detail = "exact-regime division misses the oracle";
    }
  }
  return res;
}

int cmd_verify(const std::string& only, const std::string& out) {
  const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"block-encoding-identity", check_block_encoding_identity},
      {"schmidt-projector-bound", check_projector_bound},
      {"buffer-independence", check_independence},
      {"heavy-slice-count", check_heavy_count},
      {"top-schmidt-weight", check_top_weight},
      {"kappa-accuracy", check_kappa_accuracy},
      {"product-split", check_product_split},
  };
  json results = json::array();
  bool all_pass = true;
  for (const auto& [name, fn] : checks) {
    if (!only.empty() && only != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const CheckResult r = fn();
    all_pass &= r.pass;
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.detail.empty()) std::cout << " — " << r.detail;
    std::cout << " (" << static_cast<long>(ms_since(t0)) << " ms)\n";
    results.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  }
  if (!out.empty()) {
    ResultRecord rec;
    rec.config = {{"command", "verify"}};
    rec.checks = results;
    write_json(out, rec.to_json());
  }
  return all_pass ? 0 : 2;
}

int cmd_bench(const std::string& out) {
  json rows = json::array();
  std::cout << "size  oracle_ms  mps_exact_ms  estimate_ms\n";
  for (int len : {12, 16, 20}) {
    const LayeredCircuit c = chain(len, 1, 123, "near-identity", 0.12, 1, 3);
    json row;
    row["n"] = len;
    {
      const auto t0 = std::chrono::steady_clock::now();
      volatile double v = zero_probability(c);
      (void)v;
      row["oracle_ms"] = ms_since(t0);
    }
    {
      MpsConfig cfg;
      const auto t0 = std::chrono::steady_clock::now();
      volatile double v = exact_contract(make_slab(make_root_synthesis(c), cfg));
      (void)v;
      row["mps_exact_ms"] = ms_since(t0);
    }
    {
      BaseCaseEstimator base(BaseCaseMode::MpsExact);
      EstimatorParams p;
      p.delta = 0.05;
      p.w_slice = 1;
      p.spacing = 3;
      p.w0 = 12;
      p.z_width = 8;
      p.K = p.T = 2;
      const auto t0 = std::chrono::steady_clock::now();
      volatile double v = a_full(c, base, p).value;
      (void)v;
      row["estimate_ms"] = ms_since(t0);
    }
    std::cout << len << "  " << row["oracle_ms"] << "  " << row["mps_exact_ms"]
              << "  " << row["estimate_ms"] << "\n";
    rows.push_back(row);
  }
  if (!out.empty()) {
    ResultRecord rec;
    rec.config = {{"command", "bench"}};
    rec.timings_ms = rows;
    write_json(out, rec.to_json());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divide-and-conquer estimator for shallow lattice circuits"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a circuit corpus");
  std::string profile = "near-identity", out_dir = "corpus";
  int nx = 1, ny = 1, nz = 16, depth = 1, count = 1, gw = 2, gsp = 2;
  double theta = 0.12;
  std::uint64_t seed = 1;
  gen->add_option("--profile", profile)
      ->check(CLI::IsMember({"near-identity", "random-shallow",
                             "product-across-slices",
                             "adversarial-light-slice"}));
  gen->add_option("--nx", nx);
  gen->add_option("--ny", ny);
  gen->add_option("--nz", nz);
  gen->add_option("--depth", depth);
  gen->add_option("--theta", theta);
  gen->add_option("--w-slice", gw);
  gen->add_option("--spacing", gsp);
  gen->add_option("--seed", seed);
  gen->add_option("--count", count);
  gen->add_option("--out", out_dir);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exact dense value");
  std::string o_circuit, o_out, o_dump;
  oracle->add_option("--circuit", o_circuit)->required();
  oracle->add_option("--out", o_out);
  oracle->add_option("--dump-state", o_dump);

  // estimate
  auto* est = app.add_subcommand("estimate", "divide-and-conquer estimate");
  std::string e_circuit, e_out;
  bool e_no_memo = false, e_bond = false;
  ParamFlags e_flags;
  est->add_option("--circuit", e_circuit)->required();
  est->add_option("--out", e_out);
  est->add_flag("--no-memo", e_no_memo, "disable child-call memoization");
  est->add_flag("--dump-bond-profile", e_bond);
  e_flags.attach(est);

  // compare
  auto* cmp = app.add_subcommand("compare", "estimate against the oracle");
  std::string c_circuit, c_out;
  ParamFlags c_flags;
  cmp->add_option("--circuit", c_circuit)->required();
  cmp->add_option("--out", c_out);
  c_flags.attach(cmp);

  // verify
  auto* ver = app.add_subcommand("verify", "run the property suites");
  std::string v_only, v_out;
  ver->add_option("--only", v_only, "run a single named suite");
  ver->add_option("--out", v_out);

  // bench
  auto* ben = app.add_subcommand("bench", "per-module timing sweep");
  std::string b_out;
  ben->add_option("--out", b_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen(profile, nx, ny, nz, depth, theta, gw, gsp, seed, count,
                     out_dir);
    if (oracle->parsed()) return cmd_oracle(o_circuit, o_out, o_dump);
    if (est->parsed())
      return cmd_estimate(e_circuit, e_flags, e_out, e_no_memo, e_bond);
    if (cmp->parsed()) return cmd_compare(c_circuit, c_flags, c_out);
    if (ver->parsed()) return cmd_verify(v_only, v_out);
    if (ben->parsed()) return cmd_bench(b_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
