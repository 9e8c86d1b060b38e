#pragma once

#include <climits>

#include "qdac/synthesis.hpp"

namespace qdac {

struct MpsConfig {
  long max_bond = 0;            // 0 = unlimited (exact-rank)
  double truncation_tol = 1e-14;  // relative singular value cutoff
  int calibration_start = 4;    // initial bond cap for the eps-driven loop
  int slab_width_max = 64;      // admissible thickness along the cut axis
};

// A synthesis whose active footprint is thin along one axis, the shape the
// tensor-network estimator contracts.
struct SlabSynthesis {
  Synthesis synthesis;
  Axis thin_axis = Axis::Z;
  int thickness = 0;
};

inline SlabSynthesis make_slab(const Synthesis& s, const MpsConfig& cfg) {
  SlabSynthesis slab;
  slab.synthesis = s;
  slab.thin_axis = s.circuit.cut_axis;
  int lo = 1 << 30, hi = -(1 << 30);
  for (const auto& q : s.qubit_order()) {
    lo = std::min(lo, q.coord(slab.thin_axis));
    hi = std::max(hi, q.coord(slab.thin_axis));
  }
  slab.thickness = lo > hi ? 0 : hi - lo + 1;
  if (slab.thickness > cfg.slab_width_max)
    throw std::runtime_error(
        "slab thickness " + std::to_string(slab.thickness) + " exceeds " +
        std::to_string(cfg.slab_width_max) +
        "; divide further or use the dense oracle");
  return slab;
}

namespace detail {

// Sweep along the axis with the largest scaled extent so columns stay small.
inline std::vector<Qubit> mps_order(const Synthesis& s) {
  std::vector<Qubit> qs = s.qubit_order();
  if (qs.empty()) return qs;
  const int scale = s.circuit.axis_scale;
  const Axis cut = s.circuit.cut_axis;
  long best_span = -1;
  Axis sweep = cut;
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    long lo = LONG_MAX, hi = LONG_MIN;
    for (const auto& q : qs) {
      const long v = q.scaled(a, a == cut ? scale : 1);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_span) { best_span = hi - lo; sweep = a; }
  }
  auto key = [&](const Qubit& q) {
    std::array<long, 3> k{};
    int i = 0;
    k[i++] = q.scaled(sweep, sweep == cut ? scale : 1);
    for (Axis a : {Axis::X, Axis::Y, Axis::Z})
      if (a != sweep) k[i++] = q.scaled(a, a == cut ? scale : 1);
    return k;
  };
  std::sort(qs.begin(), qs.end(),
            [&](const Qubit& a, const Qubit& b) { return key(a) < key(b); });
  return qs;
}

// Mixed-canonical MPS: tensors left of the center are left-canonical and
// tensors right of it are right-canonical, so the singular values seen at a
// two-site split are the global Schmidt coefficients and truncating against
// them is sound.
class MpsState {
 public:
  MpsState(int n, long max_bond, double tol)
      : n_(n), max_bond_(max_bond), tol_(tol) {
    tensors_.resize(n);
    for (auto& t : tensors_) {
      t[0] = Mat::Ones(1, 1);
      t[1] = Mat::Zero(1, 1);
    }
    peak_bond_.assign(std::max(0, n - 1), 1);
  }

  double truncated_weight() const { return truncated_weight_; }
  const std::vector<long>& peak_bond() const { return peak_bond_; }

  void apply_1q(int i, const Mat& u) {
    const Mat a = tensors_[i][0], b = tensors_[i][1];
    tensors_[i][0] = u(0, 0) * a + u(0, 1) * b;
    tensors_[i][1] = u(1, 0) * a + u(1, 1) * b;
  }

  // Gate on (i, i+1); row index of `u` is s_i * 2 + s_{i+1}.
  void apply_2site(int i, const Mat& u) {
    if (center_ < i) move_center(i);
    if (center_ > i + 1) move_center(i + 1);
    const long cl = tensors_[i][0].rows();
    const long cr = tensors_[i + 1][0].cols();
    Mat theta[4];  // index s1*2+s2, each cl x cr
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2)
        theta[s1 * 2 + s2] = tensors_[i][s1] * tensors_[i + 1][s2];
    Mat out[4];
    for (int r = 0; r < 4; ++r) {
      out[r] = Mat::Zero(cl, cr);
      for (int c = 0; c < 4; ++c)
        if (u(r, c) != cplx(0, 0)) out[r] += u(r, c) * theta[c];
    }
    // Reshape to (cl*2) x (2*cr) and split by SVD.
    Mat m(cl * 2, 2 * cr);
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2)
        m.block(s1 * cl, s2 * cr, cl, cr) = out[s1 * 2 + s2];
    Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    long keep = sv.size();
    const double cutoff = sv.size() ? sv(0) * tol_ : 0.0;
    while (keep > 1 && sv(keep - 1) <= cutoff) --keep;
    if (max_bond_ > 0 && keep > max_bond_) keep = max_bond_;
    for (long k = keep; k < sv.size(); ++k)
      truncated_weight_ += sv(k) * sv(k);
    Mat left = svd.matrixU().leftCols(keep);
    Mat right = sv.head(keep).asDiagonal() *
                svd.matrixV().leftCols(keep).adjoint();
    for (int s1 = 0; s1 < 2; ++s1)
      tensors_[i][s1] = left.block(s1 * cl, 0, cl, keep);
    for (int s2 = 0; s2 < 2; ++s2)
      tensors_[i + 1][s2] = right.block(0, s2 * cr, keep, cr);
    center_ = i + 1;
    peak_bond_[i] = std::max(peak_bond_[i], keep);
  }

  void apply_gate(int i, int j, const Mat& u) {
    if (i == j) throw std::invalid_argument("degenerate two-qubit gate");
    Mat g = u;
    if (i > j) {  // reorder so the high-order qubit comes first
      std::swap(i, j);
      g = gates::swap() * g * gates::swap();
    }
    for (int p = j - 1; p > i; --p) apply_2site(p, gates::swap());
    apply_2site(i, g);
    for (int p = i + 1; p < j; ++p) apply_2site(p, gates::swap());
  }

  // <psi| prod O_q |psi> with O_q = |0><0| on sites flagged in `zero`,
  // identity elsewhere.
  double expect_zeros(const std::vector<char>& zero) const {
    Mat l = Mat::Ones(1, 1);
    for (int i = 0; i < n_; ++i) {
      Mat next = Mat::Zero(tensors_[i][0].cols(), tensors_[i][0].cols());
      for (int s = 0; s < 2; ++s) {
        if (zero[i] && s == 1) continue;
        next += tensors_[i][s].transpose() * l * tensors_[i][s].conjugate();
      }
      l = std::move(next);
    }
    return l(0, 0).real();
  }

 private:
  // Shift the canonical center one QR step at a time.
  void move_center(int p) {
    while (center_ < p) {
      auto& t = tensors_[center_];
      const long cl = t[0].rows(), cr = t[0].cols();
      Mat m(cl * 2, cr);
      m.topRows(cl) = t[0];
      m.bottomRows(cl) = t[1];
      Eigen::HouseholderQR<Mat> qr(m);
      const long k = std::min(cl * 2, cr);
      Mat q = qr.householderQ() * Mat::Identity(cl * 2, k);
      Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
      t[0] = q.topRows(cl);
      t[1] = q.bottomRows(cl);
      auto& nx = tensors_[center_ + 1];
      nx[0] = r * nx[0];
      nx[1] = r * nx[1];
      ++center_;
    }
    while (center_ > p) {
      auto& t = tensors_[center_];
      const long cl = t[0].rows(), cr = t[0].cols();
      Mat m(cl, cr * 2);
      m.leftCols(cr) = t[0];
      m.rightCols(cr) = t[1];
      // m = l * q with orthonormal rows of q, via QR of the adjoint.
      Eigen::HouseholderQR<Mat> qr(m.adjoint());
      const long k = std::min(cl, cr * 2);
      Mat q = qr.householderQ() * Mat::Identity(cr * 2, k);
      Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
      Mat qrows = q.adjoint();  // k x (2 cr)
      t[0] = qrows.leftCols(cr);
      t[1] = qrows.rightCols(cr);
      auto& pv = tensors_[center_ - 1];
      const Mat l = r.adjoint();  // cl x k
      pv[0] = pv[0] * l;
      pv[1] = pv[1] * l;
      --center_;
    }
  }

  int n_;
  long max_bond_;
  double tol_;
  int center_ = 0;
  double truncated_weight_ = 0.0;
  std::vector<long> peak_bond_;
  std::vector<std::array<Mat, 2>> tensors_;
};

struct MpsRun {
  double value = 0.0;
  double truncated_weight = 0.0;
  std::vector<long> peak_bond;
};

inline MpsRun run_mps(const Synthesis& s, long max_bond, double tol) {
  const std::vector<Qubit> order = mps_order(s);
  const int n = static_cast<int>(order.size());
  auto site_of = [&](const Qubit& q) {
    for (int i = 0; i < n; ++i)
      if (order[i] == q) return i;
    throw std::runtime_error("gate acts outside the synthesis registers");
  };
  MpsState mps(n, max_bond, tol);
  for (const auto& layer : s.circuit.layers)
    for (const auto& g : layer) {
      if (g.arity() == 1)
        mps.apply_1q(site_of(g.support[0]), g.unitary);
      else
        mps.apply_gate(site_of(g.support[0]), site_of(g.support[1]), g.unitary);
    }
  std::vector<char> zero(n, 0);
  const Region z = s.zero_region();
  for (int i = 0; i < n; ++i) zero[i] = z.contains(order[i]);
  MpsRun r;
  r.value = s.value_scale * mps.expect_zeros(zero);
  r.truncated_weight = mps.truncated_weight();
  r.peak_bond = mps.peak_bond();
  return r;
}

}  // namespace detail

// Exact contraction: unlimited bond, numerical-noise cutoff only. The
// authoritative mode for verification.
inline double exact_contract(const SlabSynthesis& slab) {
  return detail::run_mps(slab.synthesis, 0, 1e-15).value;
}

struct EstimateDiagnostics {
  long bond_used = 0;
  double truncated_weight = 0.0;
  std::vector<long> peak_bond;
  int sweeps = 0;
};

// Additive-error estimate of <0_N| phi_S |0_N>. The bond dimension is grown
// until two successive runs agree to eps/2 or no truncation occurs; the
// result is clamped to [-eps, 1+eps] by construction of the contraction and
// to [0,1] by callers that need a probability.
inline double estimate(const SlabSynthesis& slab, double eps,
                       const MpsConfig& cfg,
                       EstimateDiagnostics* diag = nullptr) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  long bond = std::max(2, cfg.calibration_start);
  detail::MpsRun prev = detail::run_mps(slab.synthesis, bond, cfg.truncation_tol);
  int sweeps = 1;
  // In canonical form the discarded weight is global probability weight, so
  // 2*sqrt(weight) bounds its contribution to the estimate.
  const double weight_goal = (eps / 4) * (eps / 4);
  while (prev.truncated_weight > 0.0) {
    if (cfg.max_bond > 0 && bond >= cfg.max_bond) break;
    long next_bond = bond * 2;
    if (cfg.max_bond > 0) next_bond = std::min(next_bond, cfg.max_bond);
    detail::MpsRun next = detail::run_mps(slab.synthesis, next_bond, cfg.truncation_tol);
    ++sweeps;
    const bool settled = std::abs(next.value - prev.value) < eps / 2 &&
                         next.truncated_weight <= weight_goal;
    bond = next_bond;
    prev = next;
    if (settled) break;
  }
  if (diag) {
    diag->bond_used = bond;
    diag->truncated_weight = prev.truncated_weight;
    diag->peak_bond = prev.peak_bond;
    diag->sweeps = sweeps;
  }
  return prev.value;
}

}  // namespace qdac
