#pragma once

#include <functional>
#include <map>
#include <optional>

#include "qdac/block_encoding.hpp"

namespace qdac {

// (Γ, L, M, N): circuit with traced register L, zero-post-selected register M
// and active register N. The represented value is
//   <0_N| tr_{L∪M}( <0_M| Γ |0..0><0..0| Γ† |0_M> ) |0_N>
// which equals the probability that every qubit of M ∪ N reads zero when
// measuring Γ|0..0>, multiplied by `value_scale`.
struct Synthesis {
  LayeredCircuit circuit;
  Region traced;    // L
  Region measured;  // M
  Region active;    // N
  double value_scale = 1.0;
  std::string id = "root";

  int depth_meta() const { return circuit.depth(); }

  std::vector<Qubit> qubit_order() const {
    return traced.unioned(measured).unioned(active).qubits();
  }
  Region zero_region() const { return measured.unioned(active); }

  int active_width() const {
    if (active.is_empty()) return 0;
    const Axis a = circuit.cut_axis;
    int lo = active.qubits().front().coord(a), hi = lo;
    for (const auto& q : active) {
      lo = std::min(lo, q.coord(a));
      hi = std::max(hi, q.coord(a));
    }
    return hi - lo + 1;
  }
};

inline Synthesis make_root_synthesis(const LayeredCircuit& c) {
  Synthesis s;
  s.circuit = c;
  s.active = c.lattice_region();
  s.traced.set_cut_axis(c.cut_axis);
  s.measured.set_cut_axis(c.cut_axis);
  return s;
}

// Exact evaluation; requires the full register count to fit under the dense
// cap.
inline double synthesis_value_dense(const Synthesis& s) {
  const DenseState st = statevector_on(s.circuit, s.qubit_order());
  return s.value_scale * marginal_zero_probability(st, s.zero_region());
}

inline json synthesis_to_json(const Synthesis& s) {
  json j = circuit_to_json(s.circuit);
  j["L"] = region_to_json(s.traced, s.circuit.axis_scale, s.circuit.cut_axis);
  j["M"] = region_to_json(s.measured, s.circuit.axis_scale, s.circuit.cut_axis);
  j["N"] = region_to_json(s.active, s.circuit.axis_scale, s.circuit.cut_axis);
  if (s.value_scale != 1.0) j["value_scale"] = s.value_scale;
  j["id"] = s.id;
  return j;
}

namespace detail {

// Child registers: new slice registers take priority, inherited traced and
// measured registers survive only where the child circuit still touches them,
// and registers never change classification.
inline void assign_child_registers(Synthesis& child, const Synthesis& parent,
                                   const Region& new_traced,
                                   const Region& new_measured) {
  const Axis axis = parent.circuit.cut_axis;
  Region relevant = child.circuit.support_region().unioned(child.active)
                        .unioned(new_traced).unioned(new_measured);
  relevant.set_cut_axis(axis);
  child.traced = new_traced;
  child.measured = new_measured;
  child.traced.set_cut_axis(axis);
  child.measured.set_cut_axis(axis);
  for (const auto& q : relevant) {
    if (child.active.contains(q) || child.traced.contains(q) ||
        child.measured.contains(q))
      continue;
    if (parent.traced.contains(q))
      child.traced.insert(q);
    else if (parent.measured.contains(q))
      child.measured.insert(q);
    else
      throw std::runtime_error("child circuit touches an unclassified qubit");
  }
}

inline Region region_coord_below(const Region& r, Axis axis, int bound) {
  std::vector<Qubit> qs;
  for (const auto& q : r)
    if (q.coord(axis) < bound) qs.push_back(q);
  return Region(std::move(qs), axis);
}

inline Region region_coord_at_least(const Region& r, Axis axis, int bound) {
  std::vector<Qubit> qs;
  for (const auto& q : r)
    if (q.coord(axis) >= bound) qs.push_back(q);
  return Region(std::move(qs), axis);
}

inline void append_circuit(LayeredCircuit& dst, const LayeredCircuit& src) {
  for (const auto& layer : src.layers) dst.append_layer(layer);
}

}  // namespace detail

struct DivisionResult {
  Synthesis left;                 // S_{L,i}
  Synthesis right;                // S_{j,R} (or S_{i,R} for a single cut)
  std::optional<Synthesis> middle;  // S_{i,j} when two slices are given
  std::map<int, double> kappa_values;
};

// Division step about one or two cone-separated heavy slices. Children carry
// the unscaled rho^K block encodings; all lambda/kappa normalization lives in
// the estimator's return expression.
inline DivisionResult divide(const Synthesis& s, const SliceSpec& si,
                             const std::optional<SliceSpec>& sj, int K,
                             const std::map<int, double>& kappas = {}) {
  const Axis axis = si.axis;
  const LatticeDims dims = s.circuit.dims;
  auto in_active = [&](const Region& r) { return r.is_subset_of(s.active); };
  if (!in_active(si.k_region(dims)) || (sj && !in_active(sj->k_region(dims))))
    throw std::invalid_argument("slice does not lie inside the active register");

  DivisionResult out;
  out.kappa_values = kappas;

  const GateMask slice_i = slice_circuit_mask(s.circuit, si);
  const LayeredCircuit slice_i_circ = circuit_from_mask(s.circuit, slice_i);

  {  // S_{L,i}: everything strictly left of M_i stays active, F_i is traced.
    GateMask left = empty_mask(s.circuit);
    for (int l = 0; l < s.circuit.depth(); ++l)
      for (std::size_t g = 0; g < s.circuit.layers[l].size(); ++g)
        left[l][g] = !slice_i[l][g] &&
                     gate_left_of(s.circuit.layers[l][g], axis, si.m_start());
    Synthesis child;
    child.circuit = circuit_from_mask(s.circuit, mask_union(slice_i, left));
    const BlockEncoding enc = encode_rho_power(slice_i_circ, si, Side::F, K);
    child.circuit.axis_scale = std::max(s.circuit.axis_scale, enc.circuit.axis_scale);
    detail::append_circuit(child.circuit, enc.circuit);
    child.active = detail::region_coord_below(s.active, axis, si.m_start());
    detail::assign_child_registers(child, s, si.f_region(dims),
                                   si.m_region(dims).unioned(enc.ancilla));
    child.id = s.id + "/L" + std::to_string(si.b_start);
    out.left = std::move(child);
  }

  const SliceSpec sr = sj.value_or(si);
  const GateMask slice_r = sj ? slice_circuit_mask(s.circuit, sr) : slice_i;
  const LayeredCircuit slice_r_circ =
      sj ? circuit_from_mask(s.circuit, slice_r) : slice_i_circ;

  {  // S_{j,R}: everything from F_j on stays active, B_j is traced.
    GateMask right = empty_mask(s.circuit);
    for (int l = 0; l < s.circuit.depth(); ++l)
      for (std::size_t g = 0; g < s.circuit.layers[l].size(); ++g)
        right[l][g] = !slice_r[l][g] &&
                      gate_right_of(s.circuit.layers[l][g], axis, sr.f_start());
    Synthesis child;
    child.circuit = circuit_from_mask(s.circuit, mask_union(slice_r, right));
    const BlockEncoding enc = encode_rho_power(slice_r_circ, sr, Side::B, K);
    child.circuit.axis_scale = std::max(s.circuit.axis_scale, enc.circuit.axis_scale);
    detail::append_circuit(child.circuit, enc.circuit);
    child.active = detail::region_coord_at_least(s.active, axis, sr.f_start());
    detail::assign_child_registers(child, s, sr.b_region(dims),
                                   sr.m_region(dims).unioned(enc.ancilla));
    child.id = s.id + "/R" + std::to_string(sr.b_start);
    out.right = std::move(child);
  }

  if (sj) {  // S_{i,j}: the span from F_i to B_j, projected at both ends.
    Synthesis child;
    // Both slice circuits plus the bridge, recombined in original layer order.
    const GateMask both = mask_union(slice_i, slice_r);
    GateMask bridge_mask = empty_mask(s.circuit);
    for (int l = 0; l < s.circuit.depth(); ++l)
      for (std::size_t g = 0; g < s.circuit.layers[l].size(); ++g) {
        const auto& gate = s.circuit.layers[l][g];
        bridge_mask[l][g] = !both[l][g] &&
                            gate_right_of(gate, axis, si.f_start()) &&
                            gate_left_of(gate, axis, sj->m_start());
      }
    child.circuit =
        circuit_from_mask(s.circuit, mask_union(both, bridge_mask));
    const BlockEncoding enc_b = encode_rho_power(slice_i_circ, si, Side::B, K);
    const BlockEncoding enc_f = encode_rho_power(slice_r_circ, sr, Side::F, K);
    child.circuit.axis_scale =
        std::max({s.circuit.axis_scale, enc_b.circuit.axis_scale,
                  enc_f.circuit.axis_scale});
    detail::append_circuit(child.circuit, enc_b.circuit);
    detail::append_circuit(child.circuit, enc_f.circuit);
    Region act = detail::region_coord_at_least(s.active, axis, si.f_start());
    child.active = detail::region_coord_below(act, axis, sj->m_start());
    detail::assign_child_registers(
        child, s, si.b_region(dims).unioned(sj->f_region(dims)),
        si.m_region(dims).unioned(sj->m_region(dims))
            .unioned(enc_b.ancilla).unioned(enc_f.ancilla));
    child.id = s.id + "/M" + std::to_string(si.b_start) + "_" +
               std::to_string(sj->b_start);
    out.middle = std::move(child);
  }
  return out;
}

// Fold wrapped projectors Pi^K at interior slices into a synthesis: append
// Wrap† , the F-side encoding, then Wrap, and move each M_k into the measured
// register. The caller divides the estimate by kappa_k^{2K} per slice.
inline Synthesis fold_interior_projectors(const Synthesis& base,
                                          const LayeredCircuit& host_circuit,
                                          const std::vector<SliceSpec>& interior,
                                          int K) {
  Synthesis out = base;
  std::string suffix;
  for (const auto& sk : interior) {
    const WrapDecomposition w = decompose_wrap(host_circuit, sk);
    LayeredCircuit wrap = w.l_wrap;
    for (int l = 0; l < w.r_wrap.depth(); ++l)
      for (const auto& g : w.r_wrap.layers[l]) wrap.add_gate(l, g.support, g.unitary);
    const BlockEncoding enc = encode_rho_power(
        circuit_from_mask(host_circuit, w.slice_mask), sk, Side::F, K);
    out.circuit.axis_scale =
        std::max(out.circuit.axis_scale, enc.circuit.axis_scale);
    detail::append_circuit(out.circuit, wrap.adjoint());
    detail::append_circuit(out.circuit, enc.circuit);
    detail::append_circuit(out.circuit, wrap);
    const Region mk = sk.m_region(host_circuit.dims);
    out.active = out.active.minus(mk);
    out.measured.insert(mk);
    out.measured.insert(enc.ancilla);
    suffix += "p" + std::to_string(sk.b_start);
  }
  if (!suffix.empty()) out.id += "/" + suffix;
  return out;
}

// ---------------------------------------------------------------------------
// Scalar syntheses for the top Schmidt weight.
// ---------------------------------------------------------------------------

// Λ with label T evaluates tr(rho_B^T |psi><psi| rho_B^T) = Σ_i w_i^{2T+1}
// over the eigenvalues w_i of rho_B: the real slice state sandwiched by the
// B-side power encoding, everything traced or measured.
inline Synthesis lambda_synthesis(const LayeredCircuit& slice_circuit,
                                  const SliceSpec& spec, int T) {
  Synthesis s;
  s.circuit = slice_circuit;
  s.circuit.cut_axis = spec.axis;
  if (T >= 1) {
    const BlockEncoding enc = encode_rho_power(slice_circuit, spec, Side::B, T);
    s.circuit.axis_scale = enc.circuit.axis_scale;
    detail::append_circuit(s.circuit, enc.circuit);
    s.measured = spec.m_region(slice_circuit.dims).unioned(enc.ancilla);
  } else {
    s.measured = spec.m_region(slice_circuit.dims);
  }
  s.traced = spec.b_region(slice_circuit.dims)
                 .unioned(spec.f_region(slice_circuit.dims));
  s.active = Region{};
  s.active.set_cut_axis(spec.axis);
  s.id = "lambda_T" + std::to_string(T) + "_at" + std::to_string(spec.b_start);
  return s;
}

// Z with label T evaluates tr(rho_B^T) = Σ_i w_i^T. Odd labels reuse the
// sandwich form with (T-1)/2 factors; even labels pair the real B register
// with a mirror register in Bell states, which turns <0|..|0> into a trace at
// the cost of a known 2^{|B|} factor recorded in value_scale.
inline Synthesis z_synthesis(const LayeredCircuit& slice_circuit,
                             const SliceSpec& spec, int T) {
  if (T < 1) throw std::invalid_argument("trace power T must be >= 1");
  if (T % 2 == 1) {
    Synthesis s = lambda_synthesis(slice_circuit, spec, (T - 1) / 2);
    s.id = "z_T" + std::to_string(T) + "_at" + std::to_string(spec.b_start);
    return s;
  }
  const int a = T / 2;
  const BlockEncoding enc = encode_rho_power(slice_circuit, spec, Side::B, a);
  Synthesis s;
  s.circuit.dims = slice_circuit.dims;
  s.circuit.cut_axis = spec.axis;
  s.circuit.axis_scale = std::max(enc.circuit.axis_scale, 2 * a + 2);
  const Region b_real = spec.b_region(slice_circuit.dims);
  Region b_mirror;
  b_mirror.set_cut_axis(spec.axis);
  const int mirror_sub = 2 * a + 1;
  std::vector<GateOp> hs, cxs;
  for (const auto& q : b_real) {
    const Qubit mq = detail::at_sub(q, mirror_sub);
    b_mirror.insert(mq);
    GateOp h;
    h.support = {mq};
    h.unitary = gates::h();
    hs.push_back(std::move(h));
    GateOp cx;
    cx.support = {mq, q};
    cx.unitary = gates::cnot();
    cxs.push_back(std::move(cx));
  }
  s.circuit.append_layer(std::move(hs));
  s.circuit.append_layer(std::move(cxs));
  detail::append_circuit(s.circuit, enc.circuit);
  s.traced = b_real.unioned(b_mirror);
  s.measured = enc.ancilla;
  s.active = Region{};
  s.active.set_cut_axis(spec.axis);
  s.value_scale = std::pow(2.0, static_cast<double>(b_real.size()));
  s.id = "z_T" + std::to_string(T) + "_at" + std::to_string(spec.b_start);
  return s;
}

inline std::pair<Synthesis, Synthesis> kappa_syntheses(
    const LayeredCircuit& slice_circuit, const SliceSpec& spec, int T) {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  return {lambda_synthesis(slice_circuit, spec, T),
          z_synthesis(slice_circuit, spec, T)};
}

struct KappaEstimate {
  double value = 0.0;  // clamped to (0, 1 + 2*eps2]
  double raw = 0.0;
  int T = 0;
  double eps2 = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

using SynthesisEstimator = std::function<double(const Synthesis&, double)>;

// kappa = B(Λ_T, eps2) / B(Z_{2T}, eps2), the base-case approximation of the
// top eigenvalue of rho_B.
inline KappaEstimate estimate_kappa(const LayeredCircuit& slice_circuit,
                                    const SliceSpec& spec, int T, double eps2,
                                    const SynthesisEstimator& base) {
  if (!(eps2 > 0)) throw std::invalid_argument("eps2 must be positive");
  KappaEstimate k;
  k.T = T;
  k.eps2 = eps2;
  k.numerator = base(lambda_synthesis(slice_circuit, spec, T), eps2);
  k.denominator = base(z_synthesis(slice_circuit, spec, 2 * T), eps2);
  if (k.denominator <= eps2)
    throw std::runtime_error("slice too light for a kappa estimate (Z <= eps2)");
  k.raw = k.numerator / k.denominator;
  k.value = std::min(std::max(k.raw, 1e-300), 1.0 + 2 * eps2);
  return k;
}

}  // namespace qdac
