#pragma once

#include <Eigen/SVD>
#include <cstdlib>

#include "qdac/slicing.hpp"

namespace qdac {

// Exact statevector cap. Overridable through QDAC_DENSE_CAP.
inline int dense_cap() {
  static int cap = [] {
    if (const char* s = std::getenv("QDAC_DENSE_CAP")) return std::atoi(s);
    return 24;
  }();
  return cap;
}

// Amplitudes over an explicit qubit order; order[0] is the most significant
// bit. Sub-normalized states are first-class (norm <= 1 + 1e-12).
struct DenseState {
  Vec amp;
  std::vector<Qubit> order;

  int num_qubits() const { return static_cast<int>(order.size()); }
  double norm2() const { return amp.squaredNorm(); }
};

struct DenseOperator {
  Mat matrix;
  std::vector<Qubit> order;  // row and column qubit order coincide

  int num_qubits() const { return static_cast<int>(order.size()); }
};

// Schmidt coefficients are the singular values of the reshaped amplitude
// matrix, descending. The squared coefficients are the eigenvalues of the
// reduced density matrix.
struct SchmidtData {
  Eigen::VectorXd coefficients;
  Mat left_vectors;   // columns, over left_order
  Mat right_vectors;  // columns, over right_order
  std::vector<Qubit> left_order, right_order;

  double lambda1() const { return coefficients.size() ? coefficients(0) : 0.0; }
  // Largest eigenvalue of the reduced density matrix.
  double top_weight() const { return lambda1() * lambda1(); }
};

namespace detail {

inline int find_position(const std::vector<Qubit>& order, const Qubit& q) {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == q) return static_cast<int>(i);
  throw std::invalid_argument("qubit not in state order: " + qubit_str(q));
}

inline void apply_gate_inplace(Vec& amp, const std::vector<Qubit>& order,
                               const GateOp& g) {
  const int n = static_cast<int>(order.size());
  if (g.arity() == 1) {
    const int b = n - 1 - find_position(order, g.support[0]);
    const long stride = 1L << b;
    const Mat& u = g.unitary;
    for (long i = 0; i < amp.size(); ++i) {
      if (i & stride) continue;
      const cplx a0 = amp(i), a1 = amp(i | stride);
      amp(i) = u(0, 0) * a0 + u(0, 1) * a1;
      amp(i | stride) = u(1, 0) * a0 + u(1, 1) * a1;
    }
    return;
  }
  const int b1 = n - 1 - find_position(order, g.support[0]);
  const int b2 = n - 1 - find_position(order, g.support[1]);
  const long s1 = 1L << b1, s2 = 1L << b2;
  const Mat& u = g.unitary;
  for (long i = 0; i < amp.size(); ++i) {
    if ((i & s1) || (i & s2)) continue;
    const long i00 = i, i01 = i | s2, i10 = i | s1, i11 = i | s1 | s2;
    const cplx a00 = amp(i00), a01 = amp(i01), a10 = amp(i10), a11 = amp(i11);
    amp(i00) = u(0, 0) * a00 + u(0, 1) * a01 + u(0, 2) * a10 + u(0, 3) * a11;
    amp(i01) = u(1, 0) * a00 + u(1, 1) * a01 + u(1, 2) * a10 + u(1, 3) * a11;
    amp(i10) = u(2, 0) * a00 + u(2, 1) * a01 + u(2, 2) * a10 + u(2, 3) * a11;
    amp(i11) = u(3, 0) * a00 + u(3, 1) * a01 + u(3, 2) * a10 + u(3, 3) * a11;
  }
}

inline long zero_mask_bits(const std::vector<Qubit>& order, const Region& r) {
  const int n = static_cast<int>(order.size());
  long mask = 0;
  for (const auto& q : r) mask |= 1L << (n - 1 - find_position(order, q));
  return mask;
}

}  // namespace detail

inline void apply_circuit(Vec& amp, const std::vector<Qubit>& order,
                          const LayeredCircuit& c) {
  for (const auto& l : c.layers)
    for (const auto& g : l) detail::apply_gate_inplace(amp, order, g);
}

inline DenseState statevector_on(const LayeredCircuit& c,
                                 std::vector<Qubit> order) {
  const int n = static_cast<int>(order.size());
  if (n > dense_cap())
    throw std::runtime_error("statevector needs " + std::to_string(n) +
                             " qubits, above the dense cap of " +
                             std::to_string(dense_cap()));
  DenseState s;
  s.order = std::move(order);
  s.amp = Vec::Zero(1L << n);
  s.amp(0) = 1.0;
  apply_circuit(s.amp, s.order, c);
  return s;
}

// C|0^n> over the full lattice in row-major (x, y, z) order.
inline DenseState statevector(const LayeredCircuit& c) {
  return statevector_on(c, c.lattice_region().qubits());
}

inline double zero_probability(const LayeredCircuit& c) {
  const DenseState s = statevector(c);
  return std::norm(s.amp(0));
}

// P(r == 0...0) when measuring C|0^n> in the computational basis.
inline double marginal_zero_probability(const LayeredCircuit& c, const Region& r) {
  if (r.is_empty()) return 1.0;
  if (!r.is_subset_of(c.lattice_region()))
    throw std::invalid_argument("region not contained in the lattice");
  const DenseState s = statevector(c);
  const long mask = detail::zero_mask_bits(s.order, r);
  double p = 0.0;
  for (long i = 0; i < s.amp.size(); ++i)
    if (!(i & mask)) p += std::norm(s.amp(i));
  return p;
}

inline double marginal_zero_probability(const DenseState& s, const Region& r) {
  if (r.is_empty()) return 1.0;
  const long mask = detail::zero_mask_bits(s.order, r);
  double p = 0.0;
  for (long i = 0; i < s.amp.size(); ++i)
    if (!(i & mask)) p += std::norm(s.amp(i));
  return p;
}

// <0|_Z C |0^n> on the complement of Z, sub-normalized.
inline DenseState project_zeros(const DenseState& s, const Region& zero_region) {
  if (zero_region.is_empty()) return s;
  const int n = s.num_qubits();
  std::vector<int> keep_pos;
  for (int k = 0; k < n; ++k)
    if (!zero_region.contains(s.order[k])) keep_pos.push_back(k);
  const long mask = detail::zero_mask_bits(s.order, zero_region);
  const int m = static_cast<int>(keep_pos.size());
  DenseState out;
  for (int k : keep_pos) out.order.push_back(s.order[k]);
  out.amp = Vec::Zero(1L << m);
  for (long i = 0; i < s.amp.size(); ++i) {
    if (i & mask) continue;
    long j = 0;
    for (int k = 0; k < m; ++k)
      j |= ((i >> (n - 1 - keep_pos[k])) & 1L) << (m - 1 - k);
    out.amp(j) = s.amp(i);
  }
  return out;
}

inline DenseState projected_state(const LayeredCircuit& c,
                                  const Region& zero_region) {
  return project_zeros(statevector(c), zero_region);
}

namespace detail {

// Reshape amplitudes into a (left x right) matrix following the relative
// order of the qubits in each part.
inline Mat bipartite_matrix(const DenseState& s, const Region& left,
                            std::vector<Qubit>* lorder,
                            std::vector<Qubit>* rorder) {
  const int n = s.num_qubits();
  std::vector<int> lpos, rpos;
  for (int k = 0; k < n; ++k)
    (left.contains(s.order[k]) ? lpos : rpos).push_back(k);
  const int nl = static_cast<int>(lpos.size()), nr = static_cast<int>(rpos.size());
  if (lorder) for (int k : lpos) lorder->push_back(s.order[k]);
  if (rorder) for (int k : rpos) rorder->push_back(s.order[k]);
  Mat m = Mat::Zero(1L << nl, 1L << nr);
  for (long i = 0; i < s.amp.size(); ++i) {
    long r = 0, c = 0;
    for (int k = 0; k < nl; ++k)
      r |= ((i >> (n - 1 - lpos[k])) & 1L) << (nl - 1 - k);
    for (int k = 0; k < nr; ++k)
      c |= ((i >> (n - 1 - rpos[k])) & 1L) << (nr - 1 - k);
    m(r, c) = s.amp(i);
  }
  return m;
}

inline Eigen::JacobiSVD<Mat> svd_of(const Mat& m) {
  return Eigen::JacobiSVD<Mat>(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

}  // namespace detail

inline SchmidtData schmidt_across(const DenseState& s, const Region& left) {
  if (left.is_empty())
    throw std::invalid_argument("schmidt partition: left side empty");
  int inside = 0;
  for (const auto& q : s.order)
    if (left.contains(q)) ++inside;
  if (inside == 0 || inside == s.num_qubits())
    throw std::invalid_argument("schmidt partition is degenerate");
  SchmidtData d;
  const Mat m = detail::bipartite_matrix(s, left, &d.left_order, &d.right_order);
  auto svd = detail::svd_of(m);
  d.coefficients = svd.singularValues();
  d.left_vectors = svd.matrixU();
  d.right_vectors = svd.matrixV().conjugate();
  return d;
}

// tr over the complement of `keep` of |s><s|; Hermitian PSD with trace equal
// to the squared norm of the state.
inline DenseOperator partial_trace(const DenseState& s, const Region& keep) {
  int inside = 0;
  for (const auto& q : s.order)
    if (keep.contains(q)) ++inside;
  if (inside != static_cast<int>(keep.size()) || inside == s.num_qubits())
    throw std::invalid_argument("keep must be a proper subset of the state");
  DenseOperator op;
  const Mat m = detail::bipartite_matrix(s, keep, &op.order, nullptr);
  op.matrix = m * m.adjoint();
  return op;
}

inline DenseOperator partial_trace(const DenseOperator& in, const Region& keep) {
  const int n = in.num_qubits();
  std::vector<int> kpos, tpos;
  for (int k = 0; k < n; ++k)
    (keep.contains(in.order[k]) ? kpos : tpos).push_back(k);
  if (kpos.size() != keep.size() || tpos.empty())
    throw std::invalid_argument("keep must be a proper subset of the operator");
  const int nk = static_cast<int>(kpos.size()), nt = static_cast<int>(tpos.size());
  DenseOperator op;
  for (int k : kpos) op.order.push_back(in.order[k]);
  op.matrix = Mat::Zero(1L << nk, 1L << nk);
  auto build = [&](long kept, long traced) {
    long i = 0;
    for (int k = 0; k < nk; ++k)
      i |= ((kept >> (nk - 1 - k)) & 1L) << (n - 1 - kpos[k]);
    for (int k = 0; k < nt; ++k)
      i |= ((traced >> (nt - 1 - k)) & 1L) << (n - 1 - tpos[k]);
    return i;
  };
  for (long a = 0; a < (1L << nk); ++a)
    for (long b = 0; b < (1L << nk); ++b) {
      cplx sum = 0;
      for (long e = 0; e < (1L << nt); ++e)
        sum += in.matrix(build(a, e), build(b, e));
      op.matrix(a, b) = sum;
    }
  return op;
}

inline double trace_norm(const Mat& m) {
  return detail::svd_of(m).singularValues().sum();
}

inline double spectral_norm(const Mat& m) {
  auto sv = detail::svd_of(m).singularValues();
  return sv.size() ? sv(0) : 0.0;
}

// Apply a 2^k x 2^k matrix (not necessarily unitary) to k qubits of a state.
inline void apply_operator_inplace(Vec& amp, const std::vector<Qubit>& order,
                                   const std::vector<Qubit>& support,
                                   const Mat& op) {
  const int n = static_cast<int>(order.size());
  const int k = static_cast<int>(support.size());
  if (op.rows() != (1L << k) || op.cols() != (1L << k))
    throw std::invalid_argument("operator dimension mismatch");
  std::vector<long> strides(k);
  long allmask = 0;
  for (int j = 0; j < k; ++j) {
    strides[j] = 1L << (n - 1 - detail::find_position(order, support[j]));
    allmask |= strides[j];
  }
  const long dim = 1L << k;
  std::vector<cplx> in(dim), out(dim);
  std::vector<long> offsets(dim);
  for (long a = 0; a < dim; ++a) {
    long off = 0;
    for (int j = 0; j < k; ++j)
      if ((a >> (k - 1 - j)) & 1L) off |= strides[j];
    offsets[a] = off;
  }
  for (long i = 0; i < amp.size(); ++i) {
    if (i & allmask) continue;
    for (long a = 0; a < dim; ++a) in[a] = amp(i | offsets[a]);
    for (long a = 0; a < dim; ++a) {
      cplx s = 0;
      for (long b = 0; b < dim; ++b) s += op(a, b) * in[b];
      out[a] = s;
    }
    for (long a = 0; a < dim; ++a) amp(i | offsets[a]) = out[a];
  }
}

// Trace norm of sum_k w_k |v_k><v_k| without materializing the matrix:
// orthonormalize the vectors and diagonalize the small middle factor.
inline double trace_norm_weighted_outer(const std::vector<Vec>& vectors,
                                        const std::vector<double>& weights) {
  if (vectors.empty()) return 0.0;
  const long dim = vectors[0].size();
  const int r = static_cast<int>(vectors.size());
  Mat v(dim, r);
  for (int k = 0; k < r; ++k) v.col(k) = vectors[k];
  Eigen::HouseholderQR<Mat> qr(v);
  Mat rr = qr.matrixQR().topRows(std::min<long>(dim, r))
               .triangularView<Eigen::Upper>();
  Mat mid = Mat::Zero(rr.rows(), rr.rows());
  for (int k = 0; k < r; ++k)
    mid += weights[k] * (rr.col(k) * rr.col(k).adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(mid);
  return es.eigenvalues().cwiseAbs().sum();
}

// Full unitary of a circuit over `order`; exponential in qubit count, tests
// only.
inline Mat circuit_unitary(const LayeredCircuit& c,
                           const std::vector<Qubit>& order) {
  const int n = static_cast<int>(order.size());
  const long dim = 1L << n;
  Mat u(dim, dim);
  for (long col = 0; col < dim; ++col) {
    Vec v = Vec::Zero(dim);
    v(col) = 1.0;
    apply_circuit(v, order, c);
    u.col(col) = v;
  }
  return u;
}

inline DenseState random_dense_state(Rng& rng, std::vector<Qubit> order) {
  DenseState s;
  s.order = std::move(order);
  s.amp = Vec(1L << s.order.size());
  for (long i = 0; i < s.amp.size(); ++i) s.amp(i) = rng.normal_cplx();
  s.amp.normalize();
  return s;
}

}  // namespace qdac
