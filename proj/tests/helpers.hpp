#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "qdac/qdac.hpp"

namespace qdac::test {

inline LayeredCircuit chain_circuit(int length, int depth, std::uint64_t seed,
                                    const std::string& profile = "near-identity",
                                    double theta = 0.12, int w_slice = 2,
                                    int spacing = 2) {
  CorpusSpec spec;
  spec.profile = profile;
  spec.dims = {1, 1, length};
  spec.depth = depth;
  spec.theta = theta;
  spec.w_slice = w_slice;
  spec.spacing = spacing;
  return gen_circuit(spec, seed);
}

inline Qubit site_z(int z) { return Qubit{0, 0, z, 0}; }

inline Region region_of_z(std::initializer_list<int> zs) {
  std::vector<Qubit> qs;
  for (int z : zs) qs.push_back(site_z(z));
  return Region(std::move(qs));
}

// ||(A - B)|psi>|| over a handful of random states; equality of operators at
// working precision without materializing matrices.
inline double circuits_distance_on_states(const LayeredCircuit& a,
                                          const LayeredCircuit& b,
                                          const std::vector<Qubit>& order,
                                          Rng& rng, int trials = 4) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    DenseState psi = random_dense_state(rng, order);
    Vec va = psi.amp, vb = psi.amp;
    apply_circuit(va, order, a);
    apply_circuit(vb, order, b);
    worst = std::max(worst, (va - vb).norm());
  }
  return worst;
}

// Compose circuits as operators: result applies `first` and then `second`.
inline LayeredCircuit composed(const LayeredCircuit& first,
                               const LayeredCircuit& second) {
  LayeredCircuit c = first;
  for (const auto& layer : second.layers) c.append_layer(layer);
  return c;
}

inline double slice_top_weight(const LayeredCircuit& c, const SliceSpec& s) {
  const LayeredCircuit sc = extract_slice_circuit(c, s);
  const DenseState st = statevector_on(sc, s.k_region(c.dims).qubits());
  const DenseState psi = project_zeros(st, s.m_region(c.dims));
  return schmidt_across(psi, s.b_region(c.dims)).top_weight();
}

inline double slice_weight(const LayeredCircuit& c, const SliceSpec& s) {
  const LayeredCircuit sc = extract_slice_circuit(c, s);
  const DenseState st = statevector_on(sc, s.k_region(c.dims).qubits());
  return marginal_zero_probability(st, s.m_region(c.dims));
}

// Dense rho of the projected slice state psi = <0|_M C_s|0>, the target of
// the block encodings. `slice_circuit` must already be the slice circuit.
inline Mat dense_rho(const LayeredCircuit& slice_circuit,
                     const SliceRegions& r, Side side) {
  const Region all = r.b.unioned(r.m).unioned(r.f);
  const DenseState st = statevector_on(slice_circuit, all.qubits());
  const DenseState psi = project_zeros(st, r.m);
  const Region keep = side == Side::F ? r.f : r.b;
  if (keep.size() == psi.order.size()) {  // nothing to trace out
    Mat dm = psi.amp * psi.amp.adjoint();
    return dm;
  }
  return partial_trace(psi, keep).matrix;
}

inline Mat dense_rho_power(const LayeredCircuit& slice_circuit,
                           const SliceRegions& r, Side side, int K) {
  const Mat rho = dense_rho(slice_circuit, r, side);
  Mat out = rho;
  for (int k = 1; k < K; ++k) out = out * rho;
  return out;
}

inline Mat dense_rho_power(const LayeredCircuit& c, const SliceSpec& s,
                           Side side, int K) {
  return dense_rho_power(extract_slice_circuit(c, s),
                         SliceRegions::of(s, c.dims), side, K);
}

}  // namespace qdac::test
