#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <sstream>

#include "qdac/gates.hpp"

namespace qdac {

using json = nlohmann::json;

struct GateOp {
  int layer = 0;
  std::vector<Qubit> support;  // 1 or 2 qubits; index 0 is the high-order bit
  Mat unitary;

  int arity() const { return static_cast<int>(support.size()); }
};

// Gates on a lattice organized by depth layer. axis_scale > 1 marks a circuit
// whose cut-axis coordinate has been stretched to host interleaved ancilla
// slots (sub > 0); input circuits always have axis_scale == 1.
struct LayeredCircuit {
  LatticeDims dims;
  int axis_scale = 1;
  Axis cut_axis = Axis::Z;
  std::vector<std::vector<GateOp>> layers;

  int depth() const { return static_cast<int>(layers.size()); }

  std::size_t gate_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
  }

  std::vector<const GateOp*> all_gates() const {
    std::vector<const GateOp*> v;
    for (const auto& l : layers)
      for (const auto& g : l) v.push_back(&g);
    return v;
  }

  // Every lattice site (sub == 0). Ancilla qubits are tracked by the regions
  // of the synthesis or encoding that owns them.
  Region lattice_region() const {
    std::vector<Qubit> qs;
    qs.reserve(dims.size());
    for (int x = 0; x < dims.nx; ++x)
      for (int y = 0; y < dims.ny; ++y)
        for (int z = 0; z < dims.nz; ++z) qs.push_back({x, y, z, 0});
    return Region(std::move(qs), cut_axis);
  }

  Region support_region() const {
    std::vector<Qubit> qs;
    for (const auto& l : layers)
      for (const auto& g : l)
        for (const auto& q : g.support) qs.push_back(q);
    return Region(std::move(qs), cut_axis);
  }

  void add_gate(int layer, std::vector<Qubit> support, Mat u) {
    while (depth() <= layer) layers.emplace_back();
    GateOp g;
    g.layer = layer;
    g.support = std::move(support);
    g.unitary = std::move(u);
    layers[layer].push_back(std::move(g));
  }

  void append_layer(std::vector<GateOp> gates) {
    const int l = depth();
    for (auto& g : gates) g.layer = l;
    layers.push_back(std::move(gates));
  }

  // Deterministic gate order inside each layer.
  void sort_layers() {
    for (auto& l : layers)
      std::sort(l.begin(), l.end(), [this](const GateOp& a, const GateOp& b) {
        return QubitLess{cut_axis}(a.support[0], b.support[0]);
      });
  }

  LayeredCircuit adjoint() const {
    LayeredCircuit c;
    c.dims = dims;
    c.axis_scale = axis_scale;
    c.cut_axis = cut_axis;
    for (int l = depth() - 1; l >= 0; --l) {
      std::vector<GateOp> rl;
      for (const auto& g : layers[l]) {
        GateOp r = g;
        r.layer = c.depth();
        r.unitary = g.unitary.adjoint();
        rl.push_back(std::move(r));
      }
      c.layers.push_back(std::move(rl));
    }
    return c;
  }
};

struct Violation {
  std::string kind;
  int layer = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    std::ostringstream os;
    for (const auto& v : violations)
      os << v.kind << " (layer " << v.layer << "): " << v.message << "\n";
    return os.str();
  }
};

namespace detail {

inline std::string qubit_str(const Qubit& q) {
  std::ostringstream os;
  os << "(" << q.x << "," << q.y << "," << q.z;
  if (q.sub != 0) os << "+" << q.sub;
  os << ")";
  return os.str();
}

inline bool base_adjacent(const Qubit& a, const Qubit& b) {
  return std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1 &&
         std::abs(a.z - b.z) <= 1;
}

}  // namespace detail

// Admissibility check for input circuits: geometric locality (Chebyshev
// distance <= 1), unitarity to 1e-12, in-bounds supports, disjoint supports
// within a layer, layer indices consistent. Empty report <=> admissible.
inline ValidationReport validate_circuit(const LayeredCircuit& c) {
  ValidationReport rep;
  auto add = [&rep](const std::string& kind, int layer, const std::string& msg) {
    rep.violations.push_back({kind, layer, msg});
  };
  if (c.dims.nx < 1 || c.dims.ny < 1 || c.dims.nz < 1)
    add("dims", -1, "lattice dimensions must be >= 1");
  for (int l = 0; l < c.depth(); ++l) {
    Region used;
    used.set_cut_axis(c.cut_axis);
    for (const auto& g : c.layers[l]) {
      if (g.layer != l)
        add("layer-index", l, "gate records layer " + std::to_string(g.layer));
      if (g.arity() < 1 || g.arity() > 2)
        add("arity", l, "gate arity " + std::to_string(g.arity()));
      const int dim = 1 << g.arity();
      if (g.unitary.rows() != dim || g.unitary.cols() != dim)
        add("shape", l, "unitary dimension mismatch");
      else if (gates::unitarity_defect(g.unitary) > 1e-12)
        add("unitarity", l, "columns not orthonormal at " +
                                detail::qubit_str(g.support[0]));
      for (const auto& q : g.support) {
        if (q.x < 0 || q.x >= c.dims.nx || q.y < 0 || q.y >= c.dims.ny ||
            q.z < 0 || q.z >= c.dims.nz || q.sub < 0 || q.sub >= c.axis_scale)
          add("bounds", l, "qubit " + detail::qubit_str(q) + " outside lattice");
        if (used.contains(q))
          add("collision", l, "qubit " + detail::qubit_str(q) +
                                  " used twice in one layer");
        used.insert(q);
      }
      if (g.arity() == 2) {
        if (g.support[0] == g.support[1])
          add("support", l, "duplicate qubit in support");
        else if (!detail::base_adjacent(g.support[0], g.support[1]))
          add("locality", l, "gate between " + detail::qubit_str(g.support[0]) +
                                 " and " + detail::qubit_str(g.support[1]) +
                                 " is not nearest-neighbor");
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Canonical JSON interchange:
//   { "dims": [nx,ny,nz], "layers": [[{ "support": [[x,y,z],...],
//     "u": [[re,im],...] (row-major) }]] }
// Extended circuits additionally carry "axis_scale" and "cut_axis"; their
// exported coordinates fold the slot into the scaled cut axis.
// ---------------------------------------------------------------------------

inline json circuit_to_json(const LayeredCircuit& c) {
  json j;
  const bool extended = c.axis_scale != 1;
  if (extended) {
    LatticeDims d = c.dims;
    switch (c.cut_axis) {
      case Axis::X: d.nx *= c.axis_scale; break;
      case Axis::Y: d.ny *= c.axis_scale; break;
      case Axis::Z: d.nz *= c.axis_scale; break;
    }
    j["dims"] = {d.nx, d.ny, d.nz};
    j["axis_scale"] = c.axis_scale;
    j["cut_axis"] = axis_name(c.cut_axis);
  } else {
    j["dims"] = {c.dims.nx, c.dims.ny, c.dims.nz};
  }
  json layers = json::array();
  for (const auto& l : c.layers) {
    json jl = json::array();
    for (const auto& g : l) {
      json jg;
      json sup = json::array();
      for (const auto& q : g.support) {
        long xs = q.scaled(Axis::X, c.cut_axis == Axis::X ? c.axis_scale : 1);
        long ys = q.scaled(Axis::Y, c.cut_axis == Axis::Y ? c.axis_scale : 1);
        long zs = q.scaled(Axis::Z, c.cut_axis == Axis::Z ? c.axis_scale : 1);
        sup.push_back({xs, ys, zs});
      }
      jg["support"] = sup;
      json u = json::array();
      for (int r = 0; r < g.unitary.rows(); ++r)
        for (int col = 0; col < g.unitary.cols(); ++col)
          u.push_back({g.unitary(r, col).real(), g.unitary(r, col).imag()});
      jg["u"] = u;
      jl.push_back(jg);
    }
    layers.push_back(jl);
  }
  j["layers"] = layers;
  return j;
}

inline LayeredCircuit circuit_from_json(const json& j) {
  static const std::vector<std::string> known = {"dims", "layers", "axis_scale",
                                                 "cut_axis"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw std::invalid_argument("unknown circuit key: " + it.key());
  LayeredCircuit c;
  auto d = j.at("dims");
  if (!d.is_array() || d.size() != 3)
    throw std::invalid_argument("dims must be [nx,ny,nz]");
  c.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
  if (j.contains("axis_scale")) c.axis_scale = j["axis_scale"].get<int>();
  if (j.contains("cut_axis")) c.cut_axis = axis_from_name(j["cut_axis"]);
  if (c.axis_scale != 1) {
    // Undo the export scaling so we recover (base, sub) pairs.
    int* ext = nullptr;
    switch (c.cut_axis) {
      case Axis::X: ext = &c.dims.nx; break;
      case Axis::Y: ext = &c.dims.ny; break;
      case Axis::Z: ext = &c.dims.nz; break;
    }
    if (*ext % c.axis_scale != 0)
      throw std::invalid_argument("scaled extent not divisible by axis_scale");
    *ext /= c.axis_scale;
  }
  int layer = 0;
  for (const auto& jl : j.at("layers")) {
    std::vector<GateOp> gl;
    for (const auto& jg : jl) {
      for (auto it = jg.begin(); it != jg.end(); ++it)
        if (it.key() != "support" && it.key() != "u")
          throw std::invalid_argument("unknown gate key: " + it.key());
      GateOp g;
      g.layer = layer;
      for (const auto& jq : jg.at("support")) {
        if (!jq.is_array() || jq.size() != 3)
          throw std::invalid_argument("support entries must be [x,y,z]");
        long xyz[3] = {jq[0].get<long>(), jq[1].get<long>(), jq[2].get<long>()};
        Qubit q;
        const int ai = static_cast<int>(c.cut_axis);
        long scaled = xyz[ai];
        q.sub = c.axis_scale == 1 ? 0 : static_cast<int>(scaled % c.axis_scale);
        xyz[ai] = c.axis_scale == 1 ? scaled : scaled / c.axis_scale;
        q.x = static_cast<int>(xyz[0]);
        q.y = static_cast<int>(xyz[1]);
        q.z = static_cast<int>(xyz[2]);
        g.support.push_back(q);
      }
      const auto& ju = jg.at("u");
      const int dim = 1 << g.support.size();
      if (static_cast<int>(ju.size()) != dim * dim)
        throw std::invalid_argument("unitary entry count mismatch");
      g.unitary = Mat(dim, dim);
      int k = 0;
      for (int r = 0; r < dim; ++r)
        for (int col = 0; col < dim; ++col, ++k)
          g.unitary(r, col) = cplx(ju[k][0].get<double>(), ju[k][1].get<double>());
      gl.push_back(std::move(g));
    }
    c.layers.push_back(std::move(gl));
    ++layer;
  }
  return c;
}

inline json region_to_json(const Region& r, int axis_scale, Axis cut) {
  json a = json::array();
  for (const auto& q : r) {
    long xs = q.scaled(Axis::X, cut == Axis::X ? axis_scale : 1);
    long ys = q.scaled(Axis::Y, cut == Axis::Y ? axis_scale : 1);
    long zs = q.scaled(Axis::Z, cut == Axis::Z ? axis_scale : 1);
    a.push_back({xs, ys, zs});
  }
  return a;
}

}  // namespace qdac
