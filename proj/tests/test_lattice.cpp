#include "helpers.hpp"

using namespace qdac;
using namespace qdac::test;

TEST_CASE("validation accepts single-qubit layers") {
  LayeredCircuit c;
  c.dims = {2, 2, 1};
  std::vector<GateOp> layer;
  for (const auto& q : c.lattice_region()) {
    GateOp g;
    g.support = {q};
    g.unitary = gates::h();
    layer.push_back(g);
  }
  c.append_layer(layer);
  REQUIRE(validate_circuit(c).ok());
}

TEST_CASE("validation flags non-local gates") {
  LayeredCircuit c;
  c.dims = {3, 1, 1};
  c.add_gate(0, {{0, 0, 0, 0}, {2, 0, 0, 0}}, gates::cz());
  const auto rep = validate_circuit(c);
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.violations[0].kind == "locality");
}

TEST_CASE("validation flags non-unitary matrices") {
  LayeredCircuit c;
  c.dims = {2, 1, 1};
  Mat bad(2, 2);
  bad << 1, 1, 0, 1;
  c.add_gate(0, {{0, 0, 0, 0}}, bad);
  const auto rep = validate_circuit(c);
  REQUIRE_FALSE(rep.ok());
  bool found = false;
  for (const auto& v : rep.violations) found |= v.kind == "unitarity";
  REQUIRE(found);
}

TEST_CASE("validation flags same-layer collisions") {
  LayeredCircuit c;
  c.dims = {3, 1, 1};
  c.add_gate(0, {{0, 0, 0, 0}, {1, 0, 0, 0}}, gates::cz());
  c.add_gate(0, {{1, 0, 0, 0}, {2, 0, 0, 0}}, gates::cz());
  const auto rep = validate_circuit(c);
  REQUIRE_FALSE(rep.ok());
  bool found = false;
  for (const auto& v : rep.violations) found |= v.kind == "collision";
  REQUIRE(found);
}

TEST_CASE("lightcone of the identity circuit is the region itself") {
  LayeredCircuit c;
  c.dims = {1, 1, 6};
  const Region r = region_of_z({3});
  REQUIRE(lightcone(c, r, ConeDirection::Forward) == r);
  REQUIRE(lightcone(c, r, ConeDirection::Reverse) == r);
  REQUIRE_THROWS_AS(lightcone(c, Region{}, ConeDirection::Forward),
                    std::invalid_argument);
}

TEST_CASE("lightcone closes over a single gate") {
  LayeredCircuit c;
  c.dims = {2, 1, 1};
  c.add_gate(0, {{0, 0, 0, 0}, {1, 0, 0, 0}}, gates::cz());
  const Region r(std::vector<Qubit>{Qubit{0, 0, 0, 0}});
  const Region cone = lightcone(c, r, ConeDirection::Forward);
  REQUIRE(cone.size() == 2);
}

TEST_CASE("lightcone matches a brute-force influence test") {
  // Perturbing any gate outside the reverse cone of r leaves the marginal on
  // r unchanged; the forward cone of the perturbed gate's support must be
  // checked against r instead.
  Rng rng(7);
  const LayeredCircuit c = chain_circuit(8, 2, 21, "random-shallow");
  const Region r = region_of_z({4});
  const Region rev = lightcone(c, r, ConeDirection::Reverse);
  const DenseState base = statevector(c);
  const Region rest = c.lattice_region().minus(r);
  const DenseOperator marg0 = partial_trace(base, r);

  for (int l = 0; l < c.depth(); ++l)
    for (std::size_t i = 0; i < c.layers[l].size(); ++i) {
      const auto& g = c.layers[l][i];
      bool in_cone = false;
      for (const auto& q : g.support) in_cone |= rev.contains(q);
      if (in_cone) continue;
      LayeredCircuit mod = c;
      mod.layers[l][i].unitary =
          gates::random_haar(rng, g.arity()) * g.unitary;
      const DenseOperator marg1 = partial_trace(statevector(mod), r);
      REQUIRE((marg0.matrix - marg1.matrix).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("slice enumeration arithmetic") {
  LayeredCircuit c40;
  c40.dims = {1, 1, 40};
  REQUIRE(enumerate_slices(c40, Axis::Z, 10, 10).size() == 1);
  LayeredCircuit c80;
  c80.dims = {1, 1, 80};
  REQUIRE(enumerate_slices(c80, Axis::Z, 10, 10).size() == 2);
  LayeredCircuit small;
  small.dims = {1, 1, 20};
  REQUIRE_THROWS_WITH(enumerate_slices(small, Axis::Z, 10, 10),
                      Catch::Matchers::ContainsSubstring("minimum"));
}

TEST_CASE("enumerated slices are cone-separated") {
  const LayeredCircuit c = chain_circuit(24, 2, 3);
  const auto slices = enumerate_slices(c, Axis::Z, 2, 2);
  REQUIRE(slices.size() >= 2);
  for (std::size_t i = 0; i < slices.size(); ++i)
    for (std::size_t j = i + 1; j < slices.size(); ++j) {
      const auto ci =
          lightcone(c, slices[i].m_region(c.dims), ConeDirection::Forward);
      const auto cj =
          lightcone(c, slices[j].m_region(c.dims), ConeDirection::Forward);
      REQUIRE_FALSE(ci.intersects(cj));
    }
}

TEST_CASE("slice circuit of an untouched buffer is empty") {
  LayeredCircuit c;
  c.dims = {1, 1, 12};
  c.add_gate(0, {site_z(0), site_z(1)}, gates::cz());  // far from the buffer
  SliceSpec s;
  s.axis = Axis::Z;
  s.b_start = 4;
  s.width = 2;
  REQUIRE(extract_slice_circuit(c, s).gate_count() == 0);
}

TEST_CASE("depth-1 slice circuit keeps exactly the gates touching M") {
  const LayeredCircuit c = chain_circuit(16, 1, 11);
  SliceSpec s;
  s.axis = Axis::Z;
  s.b_start = 5;
  s.width = 2;
  const Region m = s.m_region(c.dims);
  const LayeredCircuit sc = extract_slice_circuit(c, s);
  std::size_t expect = 0;
  for (const auto* g : c.all_gates()) {
    bool touches = false;
    for (const auto& q : g->support) touches |= m.contains(q);
    expect += touches;
  }
  REQUIRE(sc.gate_count() == expect);
}

TEST_CASE("prefix property: C = C_rest ∘ C_slice as operators") {
  Rng rng(5);
  const LayeredCircuit c = chain_circuit(10, 3, 17, "random-shallow");
  SliceSpec s;
  s.axis = Axis::Z;
  s.b_start = 2;
  s.width = 2;
  const GateMask mask = slice_circuit_mask(c, s);
  const LayeredCircuit slice = circuit_from_mask(c, mask);
  GateMask rest_mask = empty_mask(c);
  for (int l = 0; l < c.depth(); ++l)
    for (std::size_t i = 0; i < c.layers[l].size(); ++i)
      rest_mask[l][i] = !mask[l][i];
  const LayeredCircuit rest = circuit_from_mask(c, rest_mask);
  const auto order = c.lattice_region().qubits();
  REQUIRE(circuits_distance_on_states(c, composed(slice, rest), order, rng) <
          1e-12);
}

TEST_CASE("wrap decomposition: gate partition and the conjugation identity") {
  Rng rng(9);
  for (std::uint64_t seed : {100, 101, 102}) {
    const LayeredCircuit c = chain_circuit(12, 3, seed, "random-shallow");
    SliceSpec s;
    s.axis = Axis::Z;
    s.b_start = 3;
    s.width = 2;
    const WrapDecomposition w = decompose_wrap(c, s);
    const std::size_t total = c.gate_count();
    const std::size_t parts = mask_count(w.slice_mask) + w.l_wrap.gate_count() +
                              w.r_wrap.gate_count() + w.l_prime.gate_count() +
                              w.r_prime.gate_count();
    REQUIRE(parts == total);

    // Wrap gates stay within one lightcone step per layer of the slice.
    for (const auto* g : w.l_wrap.all_gates())
      for (const auto& q : g->support)
        REQUIRE(std::abs(q.z - (s.m_start() - 1)) <= 2 * s.width + c.depth());

    // C_Wrap† ∘ C = C'_L ∘ C_slice ∘ C'_R.
    const LayeredCircuit slice = circuit_from_mask(c, w.slice_mask);
    LayeredCircuit wrap = w.l_wrap;
    for (int l = 0; l < w.r_wrap.depth(); ++l)
      for (const auto& g : w.r_wrap.layers[l]) wrap.add_gate(l, g.support, g.unitary);
    const LayeredCircuit lhs = composed(c, wrap.adjoint());
    const LayeredCircuit rhs =
        composed(composed(w.r_prime, slice), w.l_prime);
    const auto order = c.lattice_region().qubits();
    REQUIRE(circuits_distance_on_states(lhs, rhs, order, rng) < 1e-12);

    // C'_L stays strictly left of M, C'_R strictly right, and neither meets
    // the slice circuit's support.
    const Region sup = slice.support_region();
    for (const auto* g : w.l_prime.all_gates())
      for (const auto& q : g->support) {
        REQUIRE(q.z < s.m_start());
        REQUIRE_FALSE(sup.contains(q));
      }
    for (const auto* g : w.r_prime.all_gates())
      for (const auto& q : g->support) {
        REQUIRE(q.z >= s.f_start());
        REQUIRE_FALSE(sup.contains(q));
      }
  }
}

TEST_CASE("depth-1 circuit has an empty wrap") {
  const LayeredCircuit c = chain_circuit(14, 1, 23);
  SliceSpec s;
  s.axis = Axis::Z;
  s.b_start = 4;
  s.width = 2;
  const WrapDecomposition w = decompose_wrap(c, s);
  REQUIRE(w.l_wrap.gate_count() == 0);
  REQUIRE(w.r_wrap.gate_count() == 0);
}

TEST_CASE("bridge circuit covers exactly the gates between two buffers") {
  Rng rng(13);
  const LayeredCircuit c = chain_circuit(14, 3, 31, "random-shallow");
  SliceSpec si, sj;
  si.axis = sj.axis = Axis::Z;
  si.b_start = 1;
  si.width = 1;
  sj.b_start = 10;
  sj.width = 1;
  const LayeredCircuit bridge = bridge_circuit(c, si, sj);
  const GateMask mi = slice_circuit_mask(c, si), mj = slice_circuit_mask(c, sj);

  // Union check: slice circuits plus the bridge give every gate between the
  // two buffers, as operators.
  GateMask between = empty_mask(c);
  for (int l = 0; l < c.depth(); ++l)
    for (std::size_t k = 0; k < c.layers[l].size(); ++k) {
      const auto& g = c.layers[l][k];
      between[l][k] = gate_right_of(g, Axis::Z, si.f_start()) &&
                      gate_left_of(g, Axis::Z, sj.m_start());
      between[l][k] = between[l][k] || mi[l][k] || mj[l][k];
    }
  const LayeredCircuit whole = circuit_from_mask(c, between);
  const LayeredCircuit parts =
      composed(composed(circuit_from_mask(c, mask_union(mi, mj)), bridge),
               LayeredCircuit{{1, 1, 14}});
  const auto order = c.lattice_region().qubits();
  REQUIRE(circuits_distance_on_states(whole, parts, order, rng) < 1e-12);

  REQUIRE_THROWS_AS(bridge_circuit(c, sj, si), std::invalid_argument);
}

TEST_CASE("depth-1 bridge is the between-gates set") {
  const LayeredCircuit c = chain_circuit(14, 1, 37);
  SliceSpec si, sj;
  si.axis = sj.axis = Axis::Z;
  si.b_start = 1;
  si.width = 1;
  sj.b_start = 10;
  sj.width = 1;
  const LayeredCircuit bridge = bridge_circuit(c, si, sj);
  for (const auto* g : bridge.all_gates())
    for (const auto& q : g->support) {
      REQUIRE(q.z >= si.f_start());
      REQUIRE(q.z < sj.m_start());
    }
}

TEST_CASE("circuit JSON round-trips byte-identically") {
  const LayeredCircuit c = chain_circuit(10, 2, 41);
  const json j = circuit_to_json(c);
  const LayeredCircuit back = circuit_from_json(j);
  REQUIRE(circuit_to_json(back).dump() == j.dump());
  json bad = j;
  bad["unexpected"] = 1;
  REQUIRE_THROWS_AS(circuit_from_json(bad), std::invalid_argument);
}

TEST_CASE("lightcone monotonicity") {
  const LayeredCircuit c = chain_circuit(12, 2, 43);
  const Region r = region_of_z({5, 6});
  const Region cone = lightcone(c, r, ConeDirection::Forward);
  REQUIRE(r.is_subset_of(cone));
  // Monotone in the region, and the full lattice is a fixed point.
  const Region bigger = lightcone(c, region_of_z({4, 5, 6}), ConeDirection::Forward);
  REQUIRE(cone.is_subset_of(bigger));
  const Region all = c.lattice_region();
  REQUIRE(lightcone(c, all, ConeDirection::Forward) == all);
}
