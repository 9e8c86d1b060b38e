#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdac {

using cplx = std::complex<double>;

enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

inline Axis axis_from_name(const std::string& s) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  throw std::invalid_argument("unknown axis: " + s);
}

struct LatticeDims {
  int nx = 1, ny = 1, nz = 1;

  int size() const { return nx * ny * nz; }
  int extent(Axis a) const {
    switch (a) {
      case Axis::X: return nx;
      case Axis::Y: return ny;
      case Axis::Z: return nz;
    }
    return 0;
  }
  // Longest axis, ties broken X < Y < Z.
  Axis longest_axis() const {
    Axis best = Axis::X;
    int ext = nx;
    if (ny > ext) { best = Axis::Y; ext = ny; }
    if (nz > ext) { best = Axis::Z; ext = nz; }
    return best;
  }
  bool operator==(const LatticeDims& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz;
  }
};

// A qubit sits at a base lattice site, plus a fractional slot `sub` along the
// cut axis. sub == 0 is the lattice qubit itself; sub > 0 are interleaved
// ancilla copies created by block-encoding constructions. Copies share the
// unit cell of their base site, so base-coordinate adjacency is preserved.
struct Qubit {
  int x = 0, y = 0, z = 0;
  int sub = 0;

  int coord(Axis a) const {
    switch (a) {
      case Axis::X: return x;
      case Axis::Y: return y;
      case Axis::Z: return z;
    }
    return 0;
  }
  // Position along `a` in fractional units: base coordinate scaled by the
  // circuit's axis_scale, plus the slot.
  long scaled(Axis a, int axis_scale) const {
    return static_cast<long>(coord(a)) * axis_scale + sub;
  }
  bool operator==(const Qubit& o) const {
    return x == o.x && y == o.y && z == o.z && sub == o.sub;
  }
  bool operator!=(const Qubit& o) const { return !(*this == o); }
};

// Total order interleaving `sub` immediately after the cut axis coordinate.
// With sub == 0 everywhere this is row-major (x, y, z).
struct QubitLess {
  Axis cut = Axis::Z;
  bool operator()(const Qubit& a, const Qubit& b) const {
    std::array<long, 4> ka{}, kb{};
    int i = 0;
    for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
      ka[i] = a.coord(ax);
      kb[i] = b.coord(ax);
      ++i;
      if (ax == cut) { ka[i] = a.sub; kb[i] = b.sub; ++i; }
    }
    return std::lexicographical_compare(ka.begin(), ka.begin() + i,
                                        kb.begin(), kb.begin() + i);
  }
};

// Sorted, duplicate-free set of qubits. Value type, cheap at desk scale.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Qubit> qs, Axis cut = Axis::Z) : cut_(cut) {
    qubits_ = std::move(qs);
    normalize();
  }

  static Region empty() { return Region{}; }

  void set_cut_axis(Axis a) { cut_ = a; normalize(); }
  Axis cut_axis() const { return cut_; }

  const std::vector<Qubit>& qubits() const { return qubits_; }
  std::size_t size() const { return qubits_.size(); }
  bool is_empty() const { return qubits_.empty(); }

  bool contains(const Qubit& q) const {
    return std::binary_search(qubits_.begin(), qubits_.end(), q, QubitLess{cut_});
  }
  void insert(const Qubit& q) {
    auto it = std::lower_bound(qubits_.begin(), qubits_.end(), q, QubitLess{cut_});
    if (it == qubits_.end() || !(*it == q)) qubits_.insert(it, q);
  }
  void insert(const Region& r) {
    for (const auto& q : r.qubits()) insert(q);
  }

  bool intersects(const Region& o) const {
    for (const auto& q : qubits_)
      if (o.contains(q)) return true;
    return false;
  }
  bool is_subset_of(const Region& o) const {
    for (const auto& q : qubits_)
      if (!o.contains(q)) return false;
    return true;
  }

  Region unioned(const Region& o) const {
    Region r = *this;
    r.insert(o);
    return r;
  }
  Region intersected(const Region& o) const {
    Region r;
    r.cut_ = cut_;
    for (const auto& q : qubits_)
      if (o.contains(q)) r.qubits_.push_back(q);
    return r;
  }
  Region minus(const Region& o) const {
    Region r;
    r.cut_ = cut_;
    for (const auto& q : qubits_)
      if (!o.contains(q)) r.qubits_.push_back(q);
    return r;
  }

  bool operator==(const Region& o) const { return qubits_ == o.qubits_; }

  auto begin() const { return qubits_.begin(); }
  auto end() const { return qubits_.end(); }

 private:
  void normalize() {
    std::sort(qubits_.begin(), qubits_.end(), QubitLess{cut_});
    qubits_.erase(std::unique(qubits_.begin(), qubits_.end()), qubits_.end());
  }
  std::vector<Qubit> qubits_;
  Axis cut_ = Axis::Z;
};

// Deterministic RNG. All randomness is derived from raw mt19937_64 words so
// corpora are byte-stable for a fixed seed (std distributions are not pinned
// by the standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  cplx normal_cplx() { return {normal(), normal()}; }

 private:
  std::mt19937_64 eng_;
};

inline bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace qdac
