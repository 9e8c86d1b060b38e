#pragma once

#include "qdac/dense.hpp"

namespace qdac {

enum class Side { F, B };

inline const char* side_name(Side s) { return s == Side::F ? "F" : "B"; }

// The three sections of a cut; every SliceSpec yields one, but encodings also
// accept hand-built triples (possibly with an empty B or M).
struct SliceRegions {
  Region b, m, f;
  Axis axis = Axis::Z;

  static SliceRegions of(const SliceSpec& s, const LatticeDims& dims) {
    return {s.b_region(dims), s.m_region(dims), s.f_region(dims), s.axis};
  }
};

// Unitary circuit whose top-left block (ancillas post-selected to |0>) equals
// a target operator on `system`.
struct BlockEncoding {
  LayeredCircuit circuit;  // extended circuit, axis_scale = 2K + 1
  Region ancilla;
  Region system;
  int power = 1;
  Side side = Side::F;
  SliceRegions regions;

  int measured_depth() const { return circuit.depth(); }

  std::vector<Qubit> full_order() const {
    return ancilla.unioned(system).qubits();
  }
};

namespace detail {

inline Qubit at_sub(Qubit q, int sub) {
  q.sub = sub;
  return q;
}

inline GateOp map_gate_sub(const GateOp& g, const Region& m_region, int fw,
                           int m_sub) {
  GateOp out = g;
  for (auto& q : out.support)
    q = at_sub(q, m_region.contains(q) ? m_sub : fw);
  return out;
}

// Transposition layer between two sub-slots across every site of a region.
inline std::vector<GateOp> swap_layer(const Region& sites, int sub_a, int sub_b) {
  std::vector<GateOp> layer;
  for (const auto& q : sites) {
    GateOp g;
    g.support = {at_sub(q, sub_a), at_sub(q, sub_b)};
    g.unitary = gates::swap();
    layer.push_back(std::move(g));
  }
  return layer;
}

}  // namespace detail

// Block encoding of rho^K, where rho is the reduced density matrix of the
// projected slice state psi = <0|_M C_s |0> on the chosen side.
//
// Register layout, per power factor j (1-based): the slice circuit runs on a
// dummy copy of B ∪ M ∪ F at slot 2j-1; the copy of the system side is then
// swapped with the real register through explicit transposition layers over
// the occupied slots; the adjoint copy runs with a fresh M slot 2j. Sharing
// the off-side and system dummies between the two copies realizes the partial
// trace, the split M slots realize the zero-projection of psi on both sides.
// All ancillas are zero-projected at the end; each factor uses fresh ones, so
// the factors compose to the K-th power.
inline BlockEncoding encode_rho_power(const LayeredCircuit& slice_circuit,
                                      const SliceRegions& regions, Side side,
                                      int K) {
  if (K < 1) throw std::invalid_argument("power K must be >= 1");
  if ((side == Side::F ? regions.f : regions.b).is_empty())
    throw std::invalid_argument("system side of the slice is empty");
  BlockEncoding be;
  be.power = K;
  be.side = side;
  be.regions = regions;
  be.system = side == Side::F ? regions.f : regions.b;
  be.system.set_cut_axis(regions.axis);

  LayeredCircuit& c = be.circuit;
  c.dims = slice_circuit.dims;
  c.cut_axis = regions.axis;
  c.axis_scale = 2 * K + 1;

  const Region m = regions.m;
  const Region k_all = regions.b.unioned(m).unioned(regions.f);

  Region ancilla;
  ancilla.set_cut_axis(regions.axis);
  for (int j = 1; j <= K; ++j) {
    const int fw = 2 * j - 1, bw = 2 * j;
    for (const auto& q : k_all) ancilla.insert(detail::at_sub(q, fw));
    for (const auto& q : m) ancilla.insert(detail::at_sub(q, bw));
  }
  be.ancilla = ancilla;

  for (int j = 1; j <= K; ++j) {
    const int fw = 2 * j - 1, bw = 2 * j;
    // Forward copy at slot fw.
    for (const auto& layer : slice_circuit.layers) {
      std::vector<GateOp> mapped;
      for (const auto& g : layer)
        mapped.push_back(detail::map_gate_sub(g, m, fw, fw));
      c.append_layer(std::move(mapped));
    }
    // Route the system copy at slot fw next to the real register and swap.
    // Occupied slots on system sites are 0, 1, 3, ..., 2K-1; factor j's copy
    // sits j hops away, so the conjugated chain costs 2j-1 layers.
    std::vector<int> slots{0};
    for (int t = 1; t <= j; ++t) slots.push_back(2 * t - 1);
    for (int t = j; t >= 2; --t)
      c.append_layer(detail::swap_layer(be.system, slots[t], slots[t - 1]));
    c.append_layer(detail::swap_layer(be.system, slots[1], slots[0]));
    for (int t = 2; t <= j; ++t)
      c.append_layer(detail::swap_layer(be.system, slots[t - 1], slots[t]));
    // Adjoint copy; M uses the fresh slot bw.
    const LayeredCircuit adj = slice_circuit.adjoint();
    for (const auto& layer : adj.layers) {
      std::vector<GateOp> mapped;
      for (const auto& g : layer)
        mapped.push_back(detail::map_gate_sub(g, m, fw, bw));
      c.append_layer(std::move(mapped));
    }
  }
  c.sort_layers();
  return be;
}

inline BlockEncoding encode_rho_power(const LayeredCircuit& slice_circuit,
                                      const SliceSpec& spec, Side side, int K) {
  return encode_rho_power(slice_circuit,
                          SliceRegions::of(spec, slice_circuit.dims), side, K);
}

inline BlockEncoding encode_rho(const LayeredCircuit& slice_circuit,
                                const SliceRegions& regions, Side side) {
  return encode_rho_power(slice_circuit, regions, side, 1);
}

inline BlockEncoding encode_rho(const LayeredCircuit& slice_circuit,
                                const SliceSpec& spec, Side side) {
  return encode_rho_power(slice_circuit, spec, side, 1);
}

// <0_anc| U |0_anc> as a matrix over the system basis. Exponential in the
// total register count; used for verification at desk scale.
inline Mat extract_block(const BlockEncoding& be) {
  const std::vector<Qubit> order = be.full_order();
  const int n = static_cast<int>(order.size());
  if (n > dense_cap())
    throw std::runtime_error("block extraction needs " + std::to_string(n) +
                             " qubits, above the dense cap of " +
                             std::to_string(dense_cap()));
  const int ns = static_cast<int>(be.system.size());
  std::vector<int> sys_pos;
  for (const auto& q : be.system)
    sys_pos.push_back(detail::find_position(order, q));
  long anc_mask = (1L << n) - 1;
  for (int p : sys_pos) anc_mask &= ~(1L << (n - 1 - p));

  Mat block(1L << ns, 1L << ns);
  for (long in = 0; in < (1L << ns); ++in) {
    Vec amp = Vec::Zero(1L << n);
    long idx = 0;
    for (int k = 0; k < ns; ++k)
      if ((in >> (ns - 1 - k)) & 1L) idx |= 1L << (n - 1 - sys_pos[k]);
    amp(idx) = 1.0;
    apply_circuit(amp, order, be.circuit);
    for (long i = 0; i < amp.size(); ++i) {
      if (i & anc_mask) continue;
      long out = 0;
      for (int k = 0; k < ns; ++k)
        out |= ((i >> (n - 1 - sys_pos[k])) & 1L) << (ns - 1 - k);
      block(out, in) = amp(i);
    }
  }
  return block;
}

// P^K = (rho / lambda1)^K. The circuit stays unscaled; the normalization is
// classical metadata applied on extraction and folded into the estimator's
// return expression.
struct SchmidtProjector {
  BlockEncoding encoding;
  double lambda1_used = 1.0;
  Side side = Side::F;

  Mat dense_operator() const {
    return extract_block(encoding) / std::pow(lambda1_used, encoding.power);
  }
};

inline SchmidtProjector schmidt_projector(const LayeredCircuit& slice_circuit,
                                          const SliceRegions& regions, Side side,
                                          int K, double lambda1_estimate) {
  if (!(lambda1_estimate > 0.0) || lambda1_estimate > 1.0 + 1e-9)
    throw std::invalid_argument("lambda1 estimate must lie in (0, 1]");
  SchmidtProjector p;
  p.encoding = encode_rho_power(slice_circuit, regions, side, K);
  p.lambda1_used = lambda1_estimate;
  p.side = side;
  return p;
}

inline SchmidtProjector schmidt_projector(const LayeredCircuit& slice_circuit,
                                          const SliceSpec& spec, Side side,
                                          int K, double lambda1_estimate) {
  return schmidt_projector(slice_circuit,
                           SliceRegions::of(spec, slice_circuit.dims), side, K,
                           lambda1_estimate);
}

// Pi^K = C_Wrap P^K C_Wrap^dagger; acts as the identity on M.
struct WrappedProjector {
  SchmidtProjector projector;
  LayeredCircuit wrap;  // C_Wrap = C_{L-Wrap} ∘ C_{R-Wrap}

  // Apply to a dense state over `order` (wrap gates, P^K on the system
  // register, reversed wrap gates).
  void apply(Vec& amp, const std::vector<Qubit>& order) const {
    const LayeredCircuit wrap_adj = wrap.adjoint();
    apply_circuit(amp, order, wrap_adj);
    apply_operator_inplace(amp, order, projector.encoding.system.qubits(),
                           projector.dense_operator());
    apply_circuit(amp, order, wrap);
  }
};

inline WrappedProjector wrapped_projector(const LayeredCircuit& c,
                                          const SliceSpec& spec, int K,
                                          double lambda1_estimate) {
  WrapDecomposition w = decompose_wrap(c, spec);
  WrappedProjector wp;
  wp.projector = schmidt_projector(extract_slice_circuit(c, spec), spec, Side::F,
                                   K, lambda1_estimate);
  // C_Wrap as one circuit; the two halves act on disjoint registers.
  wp.wrap = w.l_wrap;
  for (int l = 0; l < w.r_wrap.depth(); ++l)
    for (const auto& g : w.r_wrap.layers[l]) wp.wrap.add_gate(l, g.support, g.unitary);
  return wp;
}

}  // namespace qdac
