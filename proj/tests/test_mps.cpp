#include "helpers.hpp"

using namespace qdac;
using namespace qdac::test;

namespace {

LayeredCircuit slab_circuit(int nx, int ny, int nz, int depth,
                            std::uint64_t seed, double theta = 0.3) {
  CorpusSpec spec;
  spec.profile = "near-identity";
  spec.dims = {nx, ny, nz};
  spec.depth = depth;
  spec.theta = theta;
  return gen_circuit(spec, seed);
}

SliceSpec slice_at(int b_start, int width = 1) {
  SliceSpec s;
  s.axis = Axis::Z;
  s.b_start = b_start;
  s.width = width;
  return s;
}

}  // namespace

TEST_CASE("identity slab contracts to one") {
  LayeredCircuit id;
  id.dims = {2, 2, 3};
  id.layers.resize(1);
  const Synthesis s = make_root_synthesis(id);
  MpsConfig cfg;
  REQUIRE(std::abs(exact_contract(make_slab(s, cfg)) - 1.0) < 1e-12);
  REQUIRE(std::abs(estimate(make_slab(s, cfg), 1e-3, cfg) - 1.0) < 1e-3);
}

TEST_CASE("exact contraction matches the dense oracle on chains") {
  MpsConfig cfg;
  for (std::uint64_t seed : {11, 12, 13, 14}) {
    const LayeredCircuit c = chain_circuit(14, 2, seed, "random-shallow");
    const Synthesis s = make_root_synthesis(c);
    const double mps = exact_contract(make_slab(s, cfg));
    REQUIRE(std::abs(mps - zero_probability(c)) < 1e-10);
  }
}

TEST_CASE("exact contraction matches the dense oracle on 2D slabs") {
  MpsConfig cfg;
  for (std::uint64_t seed : {21, 22}) {
    const LayeredCircuit c = slab_circuit(4, 4, 1, 2, seed);
    const Synthesis s = make_root_synthesis(c);
    const double mps = exact_contract(make_slab(s, cfg));
    REQUIRE(std::abs(mps - zero_probability(c)) < 1e-10);
    const double est = estimate(make_slab(s, cfg), 1e-3, cfg);
    REQUIRE(std::abs(est - zero_probability(c)) <= 1e-3);
  }
}

TEST_CASE("exact contraction handles syntheses with traced registers") {
  MpsConfig cfg;
  for (std::uint64_t seed : {31, 32, 33}) {
    const LayeredCircuit c = chain_circuit(12, 2, seed, "random-shallow");
    Synthesis s = make_root_synthesis(c);
    // Trace three sites and measure two, leaving the rest active.
    s.traced = region_of_z({0, 5, 11});
    s.measured = region_of_z({2, 7});
    s.active = s.active.minus(s.traced).minus(s.measured);
    const double mps = exact_contract(make_slab(s, cfg));
    REQUIRE(std::abs(mps - synthesis_value_dense(s)) < 1e-10);
  }
}

TEST_CASE("exact contraction matches on divided children with ancillas") {
  MpsConfig cfg;
  const LayeredCircuit c = chain_circuit(12, 1, 47, "near-identity", 0.25, 1, 1);
  const auto slices = enumerate_slices(c, Axis::Z, 1, 1);
  const Synthesis root = make_root_synthesis(c);
  const DivisionResult d = divide(root, slices[0], std::nullopt, 2);
  for (const Synthesis* ch : {&d.left, &d.right}) {
    const double mps = exact_contract(make_slab(*ch, cfg));
    const double dense = synthesis_value_dense(*ch);
    REQUIRE(std::abs(mps - dense) < 1e-10);
  }
}

TEST_CASE("truncated estimates improve with the bond cap") {
  const LayeredCircuit c = chain_circuit(16, 3, 51, "random-shallow");
  const Synthesis s = make_root_synthesis(c);
  const double exact = detail::run_mps(s, 0, 1e-15).value;
  double prev_err = 1e9;
  int shrank = 0, steps = 0;
  for (long bond : {2L, 4L, 8L, 16L, 32L}) {
    const double err = std::abs(detail::run_mps(s, bond, 1e-15).value - exact);
    if (err <= prev_err + 1e-9) ++shrank;
    ++steps;
    prev_err = err;
  }
  REQUIRE(shrank == steps);
  REQUIRE(prev_err < 1e-10);  // the last cap reaches the exact rank
}

TEST_CASE("estimate calibrates the bond dimension to the requested error") {
  const LayeredCircuit c = chain_circuit(18, 3, 61, "random-shallow");
  const Synthesis s = make_root_synthesis(c);
  MpsConfig cfg;
  cfg.calibration_start = 2;
  EstimateDiagnostics diag;
  const double eps = 1e-4;
  const double est = estimate(make_slab(s, cfg), eps, cfg, &diag);
  const double exact = exact_contract(make_slab(s, cfg));
  REQUIRE(std::abs(est - exact) <= eps);
  REQUIRE(diag.sweeps >= 1);
  REQUIRE(diag.bond_used >= 2);
  REQUIRE_FALSE(diag.peak_bond.empty());
}

TEST_CASE("estimate depends only on the cone of the kept registers") {
  // Gates outside the reverse cone of M ∪ N cannot shift the estimate.
  Rng rng(3);
  const LayeredCircuit c = chain_circuit(14, 2, 71, "random-shallow");
  Synthesis s = make_root_synthesis(c);
  // Keep only the left half active; trace the right half.
  Region right;
  for (int z = 7; z < 14; ++z) right.insert(site_z(z));
  s.traced = right;
  s.active = s.active.minus(right);
  const Region cone =
      lightcone(c, s.zero_region(), ConeDirection::Reverse);
  MpsConfig cfg;
  const double base = exact_contract(make_slab(s, cfg));
  int perturbed = 0;
  for (int l = 0; l < c.depth(); ++l)
    for (std::size_t i = 0; i < c.layers[l].size(); ++i) {
      const auto& g = c.layers[l][i];
      bool inside = false;
      for (const auto& q : g.support) inside |= cone.contains(q);
      if (inside) continue;
      Synthesis mod = s;
      mod.circuit.layers[l][i].unitary =
          gates::random_haar(rng, g.arity()) * g.unitary;
      REQUIRE(std::abs(exact_contract(make_slab(mod, cfg)) - base) < 1e-12);
      ++perturbed;
    }
  REQUIRE(perturbed > 0);
}

TEST_CASE("estimates stay within the probability range") {
  MpsConfig cfg;
  for (std::uint64_t seed : {81, 82, 83}) {
    const LayeredCircuit c = chain_circuit(12, 2, seed, "random-shallow");
    const Synthesis s = make_root_synthesis(c);
    const double v = estimate(make_slab(s, cfg), 1e-3, cfg);
    REQUIRE(v >= -1e-3);
    REQUIRE(v <= 1.0 + 1e-3);
  }
}

TEST_CASE("thick slabs are rejected with advice") {
  LayeredCircuit c;
  c.dims = {1, 1, 30};
  c.layers.resize(1);
  MpsConfig cfg;
  cfg.slab_width_max = 8;
  REQUIRE_THROWS_WITH(make_slab(make_root_synthesis(c), cfg),
                      Catch::Matchers::ContainsSubstring("divide"));
}

TEST_CASE("scalar kappa syntheses contract exactly") {
  // The base-case route for kappa agrees with dense evaluation, including
  // the Bell-pair trace form with its value_scale.
  const LayeredCircuit c = chain_circuit(3, 2, 91, "random-shallow");
  MpsConfig cfg;
  for (int T : {1, 2, 3, 4}) {
    const auto [lam_s, z_s] = kappa_syntheses(c, slice_at(0), T);
    REQUIRE(std::abs(exact_contract(make_slab(z_s, cfg)) -
                     synthesis_value_dense(z_s)) < 1e-10);
    REQUIRE(std::abs(exact_contract(make_slab(lam_s, cfg)) -
                     synthesis_value_dense(lam_s)) < 1e-10);
  }
}
