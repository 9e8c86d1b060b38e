#pragma once

#include "qdac/circuit.hpp"

namespace qdac {

enum class ConeDirection { Forward, Reverse };

// Influence cone through the layered gate graph: forward collects qubits the
// region can influence, reverse collects qubits that can influence it.
inline Region lightcone(const LayeredCircuit& c, const Region& r,
                        ConeDirection dir) {
  if (r.is_empty()) throw std::invalid_argument("lightcone of empty region");
  Region s = r;
  s.set_cut_axis(c.cut_axis);
  auto sweep = [&](int layer) {
    for (const auto& g : c.layers[layer]) {
      bool hit = false;
      for (const auto& q : g.support)
        if (s.contains(q)) { hit = true; break; }
      if (!hit) continue;
      for (const auto& q : g.support) s.insert(q);
    }
  };
  if (dir == ConeDirection::Forward)
    for (int l = 0; l < c.depth(); ++l) sweep(l);
  else
    for (int l = c.depth() - 1; l >= 0; --l) sweep(l);
  return s;
}

// Per-layer inclusion flags for a gate subset of `c`.
using GateMask = std::vector<std::vector<char>>;

inline GateMask empty_mask(const LayeredCircuit& c) {
  GateMask m(c.depth());
  for (int l = 0; l < c.depth(); ++l) m[l].assign(c.layers[l].size(), 0);
  return m;
}

inline LayeredCircuit circuit_from_mask(const LayeredCircuit& c,
                                        const GateMask& m) {
  LayeredCircuit out;
  out.dims = c.dims;
  out.axis_scale = c.axis_scale;
  out.cut_axis = c.cut_axis;
  out.layers.resize(c.depth());
  for (int l = 0; l < c.depth(); ++l)
    for (std::size_t i = 0; i < c.layers[l].size(); ++i)
      if (m[l][i]) out.layers[l].push_back(c.layers[l][i]);
  return out;
}

inline GateMask mask_union(const GateMask& a, const GateMask& b) {
  GateMask m = a;
  for (std::size_t l = 0; l < m.size(); ++l)
    for (std::size_t i = 0; i < m[l].size(); ++i) m[l][i] |= b[l][i];
  return m;
}

inline GateMask mask_minus(const GateMask& a, const GateMask& b) {
  GateMask m = a;
  for (std::size_t l = 0; l < m.size(); ++l)
    for (std::size_t i = 0; i < m[l].size(); ++i)
      if (b[l][i]) m[l][i] = 0;
  return m;
}

inline std::size_t mask_count(const GateMask& m) {
  std::size_t n = 0;
  for (const auto& l : m)
    for (char f : l) n += f != 0;
  return n;
}

// Gates that must precede every gate acting on `seed`: walk layers backward,
// pulling in any gate that shares a qubit with the growing set. Applying these
// first leaves the excluded gates forming a valid suffix of the circuit.
inline GateMask backward_closure(const LayeredCircuit& c, const Region& seed) {
  GateMask m = empty_mask(c);
  Region active = seed;
  active.set_cut_axis(c.cut_axis);
  for (int l = c.depth() - 1; l >= 0; --l) {
    for (std::size_t i = 0; i < c.layers[l].size(); ++i) {
      const auto& g = c.layers[l][i];
      bool hit = false;
      for (const auto& q : g.support)
        if (active.contains(q)) { hit = true; break; }
      if (!hit) continue;
      m[l][i] = 1;
      for (const auto& q : g.support) active.insert(q);
    }
  }
  return m;
}

// Gates that cannot be commuted in front of the gates touching `seed`: walk
// layers forward from the seed-touching gates, closing over shared qubits.
// `candidates` restricts which gates may be included.
inline GateMask forward_closure(const LayeredCircuit& c, const Region& seed,
                                const GateMask& candidates) {
  GateMask m = empty_mask(c);
  Region active = seed;
  active.set_cut_axis(c.cut_axis);
  for (int l = 0; l < c.depth(); ++l) {
    for (std::size_t i = 0; i < c.layers[l].size(); ++i) {
      if (!candidates[l][i]) continue;
      const auto& g = c.layers[l][i];
      bool hit = false;
      for (const auto& q : g.support)
        if (active.contains(q)) { hit = true; break; }
      if (!hit) continue;
      m[l][i] = 1;
      for (const auto& q : g.support) active.insert(q);
    }
  }
  return m;
}

}  // namespace qdac
