#include "helpers.hpp"

using namespace qdac;
using namespace qdac::test;

namespace {

const SynthesisEstimator dense_base = [](const Synthesis& s, double) {
  return synthesis_value_dense(s);
};

// Chain with one rank-one slice of tunable weight: the buffer is rotated by
// beta after being uncomputed, so psi = cos(beta)|0..0> exactly.
LayeredCircuit rank_one_slice_chain(int length, int b_start, double alpha,
                                    double beta, std::uint64_t seed) {
  Rng rng(seed);
  LayeredCircuit c;
  c.dims = {1, 1, length};
  const int b = b_start, m = b_start + 1, f = b_start + 2;
  c.add_gate(0, {site_z(b)}, gates::rotation_1q(alpha, 0, 1, 0));
  c.add_gate(1, {site_z(b), site_z(m)}, gates::cnot());
  c.add_gate(2, {site_z(m), site_z(f)}, gates::cnot());
  c.add_gate(3, {site_z(b), site_z(m)}, gates::cnot());
  c.add_gate(4, {site_z(m)}, gates::rotation_1q(beta, 0, 1, 0));
  // Entangle the wings away from the slice.
  for (int z = 0; z + 1 < length; z += 2) {
    if (z >= b - 2 && z <= f + 1) continue;
    c.add_gate(0, {site_z(z), site_z(z + 1)},
               gates::random_near_identity_2q(rng, 0.4));
  }
  c.sort_layers();
  return c;
}

SliceSpec slice_at(int b_start, int width = 1) {
  SliceSpec s;
  s.axis = Axis::Z;
  s.b_start = b_start;
  s.width = width;
  return s;
}

double top_weight_of_slice(const LayeredCircuit& c, const SliceSpec& s) {
  return slice_top_weight(c, s);
}

}  // namespace

TEST_CASE("root synthesis evaluates the zero-outcome probability") {
  LayeredCircuit id;
  id.dims = {1, 1, 2};
  REQUIRE(synthesis_value_dense(make_root_synthesis(id)) == 1.0);

  LayeredCircuit x;
  x.dims = {1, 1, 2};
  x.add_gate(0, {site_z(0)}, gates::x());
  REQUIRE(synthesis_value_dense(make_root_synthesis(x)) < 1e-24);

  const LayeredCircuit c = chain_circuit(10, 2, 91, "random-shallow");
  REQUIRE(std::abs(synthesis_value_dense(make_root_synthesis(c)) -
                   zero_probability(c)) < 1e-12);
}

TEST_CASE("one-cut division reproduces the parent value in the exact regime") {
  // Rank-one slices: with the true top weight plugged in, the single-cut
  // normalization kappa^(4K+1) telescopes exactly.
  for (double beta : {0.0, 0.35}) {
    const LayeredCircuit c = rank_one_slice_chain(9, 3, 0.0, beta, 17);
    const SliceSpec s = slice_at(3);
    const double lam = top_weight_of_slice(c, s);
    REQUIRE(std::abs(lam - std::cos(beta) * std::cos(beta)) < 1e-12);

    const Synthesis root = make_root_synthesis(c);
    for (int K : {1, 2}) {
      const DivisionResult d = divide(root, s, std::nullopt, K);
      const double left = synthesis_value_dense(d.left);
      const double right = synthesis_value_dense(d.right);
      const double parent = synthesis_value_dense(root);
      const double recombined =
          left * right / std::pow(lam, 4 * K + 1);
      REQUIRE(std::abs(recombined - parent) < 1e-10);
    }
  }
}

TEST_CASE("division register bookkeeping") {
  const LayeredCircuit c = rank_one_slice_chain(9, 3, 0.3, 0.2, 19);
  const SliceSpec s = slice_at(3);
  const Synthesis root = make_root_synthesis(c);
  const DivisionResult d = divide(root, s, std::nullopt, 2);

  // Child active registers, the buffer, and the slice faces partition N.
  Region together = d.left.active.unioned(d.right.active)
                        .unioned(s.m_region(c.dims));
  REQUIRE(together == root.active);
  REQUIRE(d.left.active.intersects(d.right.active) == false);

  // L, M, N stay disjoint and cover each child's circuit support.
  for (const Synthesis* ch : {&d.left, &d.right}) {
    REQUIRE_FALSE(ch->traced.intersects(ch->measured));
    REQUIRE_FALSE(ch->traced.intersects(ch->active));
    REQUIRE_FALSE(ch->measured.intersects(ch->active));
    const Region all = ch->qubit_order().empty()
                           ? Region{}
                           : Region(ch->qubit_order());
    REQUIRE(ch->circuit.support_region().is_subset_of(all));
  }

  // Slices outside the active register are rejected.
  REQUIRE_THROWS_AS(divide(d.left, slice_at(6), std::nullopt, 1),
                    std::invalid_argument);
}

TEST_CASE("two-cut division splits into left, middle, right") {
  // Three rank-one product slices; the middle synthesis carries both
  // projectors and reproduces Psi_{i,j} exactly at unit top weight.
  const LayeredCircuit c = chain_circuit(12, 1, 23, "product-across-slices",
                                         0.3, 1, 1);
  const auto slices = enumerate_slices(c, Axis::Z, 1, 1);
  REQUIRE(slices.size() == 3);
  const Synthesis root = make_root_synthesis(c);
  const int K = 1;
  const DivisionResult d = divide(root, slices[0], slices[2], K);
  REQUIRE(d.middle.has_value());

  const double parent = synthesis_value_dense(root);
  const double left = synthesis_value_dense(d.left);
  const double mid = synthesis_value_dense(*d.middle);
  const double right = synthesis_value_dense(d.right);
  // Both cuts are exactly product with weight one, so the two-cut term equals
  // the parent with unit normalization.
  REQUIRE(std::abs(left * mid * right - parent) < 1e-9);

  // Middle active register spans F_i .. B_j.
  const auto [lo, hi] = qdac::detail::active_span(*d.middle);
  REQUIRE(lo == slices[0].f_start());
  REQUIRE(hi == slices[2].b_start + slices[2].width - 1);
}

TEST_CASE("interior projector folding matches the dense sandwich") {
  const LayeredCircuit c = chain_circuit(12, 1, 29, "product-across-slices",
                                         0.3, 1, 1);
  const auto slices = enumerate_slices(c, Axis::Z, 1, 1);
  REQUIRE(slices.size() == 3);
  const Synthesis root = make_root_synthesis(c);
  const int K = 1;
  const DivisionResult d = divide(root, slices[0], slices[2], K);

  const Synthesis folded =
      fold_interior_projectors(*d.middle, root.circuit, {slices[1]}, K);
  const double via_fold = synthesis_value_dense(folded);

  // Direct evaluation: run the middle circuit, conjugate by the wrap, apply
  // the raw power block on F of the interior slice, and read the marginal.
  const Synthesis& m = *d.middle;
  const auto order = m.qubit_order();
  DenseState st = statevector_on(m.circuit, order);
  const WrapDecomposition w = decompose_wrap(root.circuit, slices[1]);
  LayeredCircuit wrap = w.l_wrap;
  for (int l = 0; l < w.r_wrap.depth(); ++l)
    for (const auto& g : w.r_wrap.layers[l]) wrap.add_gate(l, g.support, g.unitary);
  apply_circuit(st.amp, order, wrap.adjoint());
  const Mat rho_pow = dense_rho_power(
      circuit_from_mask(root.circuit, w.slice_mask),
      SliceRegions::of(slices[1], c.dims), Side::F, K);
  apply_operator_inplace(st.amp, order, slices[1].f_region(c.dims).qubits(),
                         rho_pow);
  apply_circuit(st.amp, order, wrap);
  const double direct = marginal_zero_probability(
      st, m.zero_region());  // M_k sits inside the active register here
  REQUIRE(std::abs(via_fold - direct) < 1e-11);
}

TEST_CASE("scalar syntheses evaluate the trace identities") {
  Rng rng(31);
  for (std::uint64_t seed : {41, 42, 43}) {
    const LayeredCircuit c = chain_circuit(3, 2, seed, "random-shallow");
    const SliceSpec s = slice_at(0);
    const SliceRegions r = SliceRegions::of(s, c.dims);
    const Mat rho = dense_rho(c, r, Side::B);
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    const Eigen::VectorXd eig = es.eigenvalues();
    for (int T = 1; T <= 4; ++T) {
      double z_expect = 0.0, l_expect = 0.0;
      for (int i = 0; i < eig.size(); ++i) {
        z_expect += std::pow(eig(i), T);
        l_expect += std::pow(eig(i), 2 * T + 1);
      }
      const auto [lam_s, z_s] = kappa_syntheses(c, s, T);
      REQUIRE(std::abs(synthesis_value_dense(z_s) - z_expect) < 1e-10);
      REQUIRE(std::abs(synthesis_value_dense(lam_s) - l_expect) < 1e-10);
    }
  }
}

TEST_CASE("scalar syntheses on product and Bell slices") {
  {  // weight-one product slice: Z^T = 1 and Lambda = 1 for every T
    const LayeredCircuit c = rank_one_slice_chain(3, 0, 0.0, 0.0, 3);
    for (int T : {1, 2, 3}) {
      const auto [lam_s, z_s] = kappa_syntheses(c, slice_at(0), T);
      REQUIRE(std::abs(synthesis_value_dense(z_s) - 1.0) < 1e-12);
      REQUIRE(std::abs(synthesis_value_dense(lam_s) - 1.0) < 1e-12);
    }
  }
  {  // Bell-like slice: rho_B = I/2, so Z^T = 2^(1-T)
    LayeredCircuit c;
    c.dims = {1, 1, 3};
    c.add_gate(0, {site_z(0)}, gates::h());
    c.add_gate(1, {site_z(0), site_z(1)}, gates::cnot());
    c.add_gate(2, {site_z(1), site_z(2)}, gates::cnot());
    c.add_gate(3, {site_z(0), site_z(1)}, gates::cnot());
    for (int T : {1, 2, 3, 4}) {
      const auto [lam_s, z_s] = kappa_syntheses(c, slice_at(0), T);
      REQUIRE(std::abs(synthesis_value_dense(z_s) - std::pow(2.0, 1 - T)) <
              1e-12);
    }
  }
}

TEST_CASE("kappa estimates the top weight") {
  {  // product slice: kappa = 1 within 2 eps2
    const LayeredCircuit c = rank_one_slice_chain(3, 0, 0.0, 0.0, 5);
    const KappaEstimate k = estimate_kappa(c, slice_at(0), 2, 1e-8, dense_base);
    REQUIRE(std::abs(k.value - 1.0) <= 2e-8);
  }
  {  // two-term slice with top weight 0.95
    const double alpha = std::acos(std::sqrt(0.95));
    const LayeredCircuit c = rank_one_slice_chain(3, 0, alpha, 0.0, 5);
    const double lam = top_weight_of_slice(c, slice_at(0));
    REQUIRE(std::abs(lam - 0.95) < 1e-12);
    const double eps2 = 1e-6;
    const KappaEstimate k = estimate_kappa(c, slice_at(0), 3, eps2, dense_base);
    const double bound =
        (std::pow(1.0 - 0.95, 6) + eps2) / std::pow(0.95, 7);
    const double c_measured = std::abs(k.value - 0.95) / bound;
    INFO("kappa constant " << c_measured);
    REQUIRE(c_measured <= 10.0);
  }
}

TEST_CASE("kappa error shrinks with T on heavy slices") {
  Rng rng(6);
  int improved = 0, total = 0;
  for (int rep = 0; rep < 12; ++rep) {
    const double alpha = rng.uniform(0.1, 0.5);
    const double beta = rng.uniform(0.0, 0.4);
    const LayeredCircuit c = rank_one_slice_chain(3, 0, alpha, beta, 70 + rep);
    const SliceSpec s = slice_at(0);
    const double lam = top_weight_of_slice(c, s);
    const double e2 = estimate_kappa(c, s, 2, 1e-10, dense_base).value - lam;
    const double e4 = estimate_kappa(c, s, 4, 1e-10, dense_base).value - lam;
    ++total;
    improved += std::abs(e4) <= std::abs(e2) + 1e-9;
  }
  REQUIRE(improved == total);
}

TEST_CASE("kappa rejects slices that are too light") {
  LayeredCircuit c;  // X on the buffer: the slice weight is zero
  c.dims = {1, 1, 3};
  c.add_gate(0, {site_z(1)}, gates::x());
  REQUIRE_THROWS_WITH(estimate_kappa(c, slice_at(0), 2, 1e-8, dense_base),
                      Catch::Matchers::ContainsSubstring("too light"));
}

TEST_CASE("kappa stays within its clamp") {
  Rng rng(12);
  for (int rep = 0; rep < 8; ++rep) {
    const LayeredCircuit c =
        rank_one_slice_chain(3, 0, rng.uniform(0, 0.6), rng.uniform(0, 0.3),
                             90 + rep);
    const double eps2 = 1e-8;
    const KappaEstimate k = estimate_kappa(c, slice_at(0), 3, eps2, dense_base);
    REQUIRE(k.value > 0.0);
    REQUIRE(k.value <= 1.0 + 2 * eps2);
  }
}

TEST_CASE("synthesis serialization carries the register annotations") {
  const LayeredCircuit c = rank_one_slice_chain(9, 3, 0.2, 0.1, 44);
  const Synthesis root = make_root_synthesis(c);
  const DivisionResult d = divide(root, slice_at(3), std::nullopt, 1);
  const json j = synthesis_to_json(d.left);
  REQUIRE(j.contains("L"));
  REQUIRE(j.contains("M"));
  REQUIRE(j.contains("N"));
  REQUIRE(j["N"].size() == d.left.active.size());
  REQUIRE(j["M"].size() == d.left.measured.size());
}
