#pragma once

#include "qdac/dense.hpp"

namespace qdac {

// Randomized circuit families used by the verification suites and the CLI.
//   near-identity          brickwork of small-angle gates; every slice heavy
//   random-shallow         brickwork of Haar gates
//   product-across-slices  diagonal gates at the slice buffers, so each slice
//                          has weight one and Schmidt rank one
//   adversarial-light-slice near-identity with an X dropped into one buffer
struct CorpusSpec {
  std::string profile = "near-identity";
  LatticeDims dims{1, 1, 16};
  int depth = 2;
  double theta = 0.12;  // angle scale for near-identity profiles
  int w_slice = 2;
  int spacing = 2;
};

namespace detail {

inline Mat random_diagonal(Rng& rng, int nq, double t) {
  const int d = 1 << nq;
  Mat m = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double phi = rng.uniform(-t, t);
    m(k, k) = cplx(std::cos(phi), std::sin(phi));
  }
  return m;
}

inline Qubit shifted(Qubit q, Axis a, int step) {
  switch (a) {
    case Axis::X: q.x += step; break;
    case Axis::Y: q.y += step; break;
    case Axis::Z: q.z += step; break;
  }
  return q;
}

}  // namespace detail

inline LayeredCircuit gen_circuit(const CorpusSpec& spec, std::uint64_t seed) {
  static const std::vector<std::string> profiles = {
      "near-identity", "random-shallow", "product-across-slices",
      "adversarial-light-slice"};
  if (std::find(profiles.begin(), profiles.end(), spec.profile) == profiles.end())
    throw std::invalid_argument("unknown corpus profile: " + spec.profile);

  Rng rng(seed);
  LayeredCircuit c;
  c.dims = spec.dims;
  const Axis cut = spec.dims.longest_axis();
  c.cut_axis = cut;

  // Buffer intervals of the slice family along the cut axis.
  std::vector<std::pair<int, int>> m_intervals;
  if (spec.profile == "product-across-slices" ||
      spec.profile == "adversarial-light-slice") {
    for (int b : slice_starts(spec.dims.extent(cut), spec.w_slice, spec.spacing))
      m_intervals.push_back({b + spec.w_slice, b + 2 * spec.w_slice});
  }
  auto touches_m = [&](const Qubit& q) {
    for (auto [lo, hi] : m_intervals) {
      const int a = q.coord(cut);
      if (a >= lo && a < hi) return true;
    }
    return false;
  };

  std::vector<Axis> dirs;
  for (Axis a : {Axis::X, Axis::Y, Axis::Z})
    if (spec.dims.extent(a) > 1) dirs.push_back(a);
  if (dirs.empty()) dirs.push_back(cut);

  const bool haar = spec.profile == "random-shallow";
  for (int l = 0; l < spec.depth; ++l) {
    const Axis dir = dirs[l % dirs.size()];
    const int offset = (l / dirs.size()) % 2;
    Region paired;
    paired.set_cut_axis(cut);
    std::vector<GateOp> layer;
    for (const auto& q : c.lattice_region()) {
      if (q.coord(dir) % 2 != offset) continue;
      const Qubit p = detail::shifted(q, dir, 1);
      if (p.coord(dir) >= spec.dims.extent(dir)) continue;
      GateOp g;
      g.support = {q, p};
      if (touches_m(q) || touches_m(p))
        g.unitary = detail::random_diagonal(rng, 2, spec.theta);
      else
        g.unitary = haar ? gates::random_haar(rng, 2)
                         : gates::random_near_identity_2q(rng, spec.theta);
      paired.insert(q);
      paired.insert(p);
      layer.push_back(std::move(g));
    }
    for (const auto& q : c.lattice_region()) {
      if (paired.contains(q)) continue;
      if (rng.uniform() < 0.5) continue;
      GateOp g;
      g.support = {q};
      if (touches_m(q))
        g.unitary = detail::random_diagonal(rng, 1, spec.theta);
      else
        g.unitary = haar ? gates::random_haar(rng, 1)
                         : gates::random_1q_rotation(rng, spec.theta);
      layer.push_back(std::move(g));
    }
    c.append_layer(std::move(layer));
  }

  if (spec.profile == "adversarial-light-slice" && !m_intervals.empty()) {
    // Flip one buffer qubit so that slice can never read all zeros.
    Qubit q{0, 0, 0, 0};
    const int pos = (m_intervals[0].first + m_intervals[0].second) / 2;
    switch (cut) {
      case Axis::X: q.x = pos; break;
      case Axis::Y: q.y = pos; break;
      case Axis::Z: q.z = pos; break;
    }
    std::vector<GateOp> layer;
    GateOp g;
    g.support = {q};
    g.unitary = gates::x();
    layer.push_back(std::move(g));
    c.append_layer(std::move(layer));
  }
  c.sort_layers();
  return c;
}

// Oracle checks on the slice family of a generated circuit; cheap because the
// slice circuits act on O(w_slice) sites.
inline double min_slice_weight(const LayeredCircuit& c, int w_slice, int spacing) {
  const Axis axis = c.dims.longest_axis();
  double wmin = 1.0;
  for (const auto& s : enumerate_slices(c, axis, w_slice, spacing)) {
    const LayeredCircuit sc = extract_slice_circuit(c, s);
    const DenseState st = statevector_on(sc, s.k_region(c.dims).qubits());
    wmin = std::min(wmin, marginal_zero_probability(st, s.m_region(c.dims)));
  }
  return wmin;
}

inline double min_slice_top_weight(const LayeredCircuit& c, int w_slice,
                                   int spacing) {
  const Axis axis = c.dims.longest_axis();
  double lmin = 1.0;
  for (const auto& s : enumerate_slices(c, axis, w_slice, spacing)) {
    const LayeredCircuit sc = extract_slice_circuit(c, s);
    const DenseState st = statevector_on(sc, s.k_region(c.dims).qubits());
    const DenseState psi = project_zeros(st, s.m_region(c.dims));
    const SchmidtData sd = schmidt_across(psi, s.b_region(c.dims));
    lmin = std::min(lmin, sd.top_weight());
  }
  return lmin;
}

// Deterministic corpus: instance k of a profile uses seed base_seed + k and
// resamples (bounded) until the profile's oracle certificate holds.
inline std::vector<LayeredCircuit> gen_corpus(const CorpusSpec& spec,
                                              std::uint64_t base_seed,
                                              int count) {
  std::vector<LayeredCircuit> out;
  for (int k = 0; k < count; ++k) {
    std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    for (int attempt = 0;; ++attempt) {
      LayeredCircuit c = gen_circuit(spec, seed);
      bool ok = true;
      if (spec.profile == "near-identity")
        ok = min_slice_weight(c, spec.w_slice, spec.spacing) >= 0.5;
      else if (spec.profile == "product-across-slices")
        ok = min_slice_top_weight(c, spec.w_slice, spec.spacing) >= 1.0 - 1e-9;
      if (ok) {
        out.push_back(std::move(c));
        break;
      }
      if (attempt > 64)
        throw std::runtime_error("corpus resampling failed for " + spec.profile);
      seed += 0x9e3779b97f4a7c15ull;
    }
  }
  return out;
}

}  // namespace qdac
