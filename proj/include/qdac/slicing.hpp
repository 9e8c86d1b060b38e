#pragma once

#include "qdac/lightcone.hpp"

namespace qdac {

// One cut K_i = B_i ∪ M_i ∪ F_i perpendicular to `axis`. The three sections
// are contiguous intervals of equal width; B sits at lower coordinates.
struct SliceSpec {
  Axis axis = Axis::Z;
  int b_start = 0;   // first coordinate of B
  int width = 1;     // per-section width

  int m_start() const { return b_start + width; }
  int f_start() const { return b_start + 2 * width; }
  int end() const { return b_start + 3 * width; }  // one past F
  int m_center2() const { return 2 * m_start() + width - 1; }  // 2x center

  Region section(const LatticeDims& dims, int lo, int hi) const {
    std::vector<Qubit> qs;
    for (int x = 0; x < dims.nx; ++x)
      for (int y = 0; y < dims.ny; ++y)
        for (int z = 0; z < dims.nz; ++z) {
          Qubit q{x, y, z, 0};
          const int a = q.coord(axis);
          if (a >= lo && a < hi) qs.push_back(q);
        }
    return Region(std::move(qs), axis);
  }
  Region b_region(const LatticeDims& d) const { return section(d, b_start, m_start()); }
  Region m_region(const LatticeDims& d) const { return section(d, m_start(), f_start()); }
  Region f_region(const LatticeDims& d) const { return section(d, f_start(), end()); }
  Region k_region(const LatticeDims& d) const { return section(d, b_start, end()); }
};

struct SliceCheck {
  bool ok = true;
  std::string reason;
};

// Structural invariants of a slice against a concrete circuit: the cone of M
// stays inside K, and the reverse cones of B and F do not meet.
inline SliceCheck check_slice(const LayeredCircuit& c, const SliceSpec& s) {
  SliceCheck r;
  if (s.width < 1 || s.b_start < 0 || s.end() > c.dims.extent(s.axis)) {
    r.ok = false;
    r.reason = "slice interval out of range";
    return r;
  }
  const Region b = s.b_region(c.dims), m = s.m_region(c.dims), f = s.f_region(c.dims);
  if (!lightcone(c, m, ConeDirection::Forward).is_subset_of(s.k_region(c.dims))) {
    r.ok = false;
    r.reason = "lightcone of M escapes B∪M∪F";
    return r;
  }
  if (lightcone(c, b, ConeDirection::Reverse)
          .intersects(lightcone(c, f, ConeDirection::Reverse))) {
    r.ok = false;
    r.reason = "reverse cones of B and F intersect";
    return r;
  }
  return r;
}

// B-start positions of the maximal evenly spaced slice family in `extent`:
// pitch 3*w_slice + spacing, centered.
inline std::vector<int> slice_starts(int extent, int w_slice, int spacing) {
  const int pitch = 3 * w_slice + spacing;
  if (extent < pitch)
    throw std::invalid_argument(
        "extent " + std::to_string(extent) + " is below the minimum " +
        std::to_string(pitch) + " (= 3*w_slice + spacing) needed for one slice");
  const int count = extent / pitch;
  const int span = count * pitch - spacing;
  const int start = (extent - span) / 2;
  std::vector<int> out;
  for (int i = 0; i < count; ++i) out.push_back(start + i * pitch);
  return out;
}

// Maximal evenly spaced family of slices along `axis`. Consecutive slices are
// `spacing` sites apart and the family is centered in the extent.
inline std::vector<SliceSpec> enumerate_slices(const LayeredCircuit& c, Axis axis,
                                               int w_slice, int spacing) {
  std::vector<int> starts;
  try {
    starts = slice_starts(c.dims.extent(axis), w_slice, spacing);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument(
        "extent " + std::to_string(c.dims.extent(axis)) + " along " +
        axis_name(axis) + " is below the minimum " +
        std::to_string(3 * w_slice + spacing) +
        " (= 3*w_slice + spacing) needed for one slice");
  }
  std::vector<SliceSpec> out;
  for (int b : starts) {
    SliceSpec s;
    s.axis = axis;
    s.width = w_slice;
    s.b_start = b;
    if (!check_slice(c, s).ok)
      throw std::runtime_error("slice at " + std::to_string(s.b_start) +
                               " fails structural invariants: " +
                               check_slice(c, s).reason);
    out.push_back(s);
  }
  // Pairwise separation of the M cones, checked structurally.
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      auto ci = lightcone(c, out[i].m_region(c.dims), ConeDirection::Forward);
      auto cj = lightcone(c, out[j].m_region(c.dims), ConeDirection::Forward);
      if (ci.intersects(cj))
        throw std::runtime_error("slices " + std::to_string(i) + "," +
                                 std::to_string(j) + " are not cone-separated");
    }
  return out;
}

inline GateMask slice_circuit_mask(const LayeredCircuit& c, const SliceSpec& s) {
  return backward_closure(c, s.m_region(c.dims));
}

// Minimal prefix of `c` containing every gate acting on M; acts only within
// B ∪ M ∪ F when the slice invariants hold.
inline LayeredCircuit extract_slice_circuit(const LayeredCircuit& c,
                                            const SliceSpec& s) {
  return circuit_from_mask(c, slice_circuit_mask(c, s));
}

// Position tests for gates relative to an axis interval. A gate is strictly
// left of `lo` when every support coordinate is below it.
inline bool gate_left_of(const GateOp& g, Axis axis, int lo) {
  for (const auto& q : g.support)
    if (q.coord(axis) >= lo) return false;
  return true;
}
inline bool gate_right_of(const GateOp& g, Axis axis, int hi) {
  for (const auto& q : g.support)
    if (q.coord(axis) < hi) return false;
  return true;
}

struct WrapDecomposition {
  LayeredCircuit l_wrap, r_wrap;   // C_{L-Wrap}, C_{R-Wrap}
  LayeredCircuit l_prime, r_prime; // remaining gates strictly within L / R
  GateMask slice_mask;             // gates of C_{B∪M∪F}
};

// Split the non-slice gates around a cut. The wrap sets are the forward
// closures, among the left (resp. right) remainder, of the gates meeting the
// slice circuit's support: exactly the gates that cannot be commuted past
// C_{B∪M∪F}. This makes the operator identity
//   C_Wrap† ∘ C = C'_L ∘ C_{B∪M∪F} ∘ C'_R
// hold exactly, with C'_L strictly left of M and C'_R strictly right of it.
// A depth-1 circuit has an empty wrap: its remainder gates share no qubits
// with the slice gates.
inline WrapDecomposition decompose_wrap(const LayeredCircuit& c,
                                        const SliceSpec& s) {
  WrapDecomposition w;
  w.slice_mask = slice_circuit_mask(c, s);

  Region slice_support;
  slice_support.set_cut_axis(s.axis);
  for (int l = 0; l < c.depth(); ++l)
    for (std::size_t i = 0; i < c.layers[l].size(); ++i)
      if (w.slice_mask[l][i])
        for (const auto& q : c.layers[l][i].support) slice_support.insert(q);

  GateMask left = empty_mask(c), right = empty_mask(c);
  for (int l = 0; l < c.depth(); ++l)
    for (std::size_t i = 0; i < c.layers[l].size(); ++i) {
      if (w.slice_mask[l][i]) continue;
      const auto& g = c.layers[l][i];
      if (gate_left_of(g, s.axis, s.m_start()))
        left[l][i] = 1;
      else if (gate_right_of(g, s.axis, s.f_start()))
        right[l][i] = 1;
      else
        throw std::runtime_error("gate straddles M without touching it");
    }

  const GateMask lw = forward_closure(c, slice_support, left);
  const GateMask rw = forward_closure(c, slice_support, right);
  w.l_wrap = circuit_from_mask(c, lw);
  w.r_wrap = circuit_from_mask(c, rw);
  w.l_prime = circuit_from_mask(c, mask_minus(left, lw));
  w.r_prime = circuit_from_mask(c, mask_minus(right, rw));
  return w;
}

// Γ_{i,j}: gates strictly between M_i and M_j not already in either slice
// circuit.
inline LayeredCircuit bridge_circuit(const LayeredCircuit& c, const SliceSpec& si,
                                     const SliceSpec& sj) {
  if (si.axis != sj.axis || si.end() > sj.b_start)
    throw std::invalid_argument("slices overlap or are unordered");
  const GateMask mi = slice_circuit_mask(c, si);
  const GateMask mj = slice_circuit_mask(c, sj);
  GateMask between = empty_mask(c);
  for (int l = 0; l < c.depth(); ++l)
    for (std::size_t k = 0; k < c.layers[l].size(); ++k) {
      if (mi[l][k] || mj[l][k]) continue;
      const auto& g = c.layers[l][k];
      if (!gate_left_of(g, si.axis, sj.m_start())) continue;
      if (!gate_right_of(g, si.axis, si.f_start())) continue;
      between[l][k] = 1;
    }
  return circuit_from_mask(c, between);
}

}  // namespace qdac
