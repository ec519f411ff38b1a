#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "anyonkit/state.hpp"

namespace anyonkit {

// Qubit encodings in JK_4 anyons with fixed total charge 0.
// E1111: externals (1,1,1,1), logical label a in {0,2} at slot c_2.
// E1221: externals (1,2,2,1), logical label a in {1,3} at slot c_2.
// E122221: externals (1,2,2,2,2,1), labels (a,b) in {1,3}^2 at (c_2, c_4),
// middle line c_3 fixed to 1.
enum class EncodingKind { E1111, E1221, E122221 };

inline std::string encodingName(EncodingKind k) {
  switch (k) {
    case EncodingKind::E1111: return "1111";
    case EncodingKind::E1221: return "1221";
    default: return "122221";
  }
}

inline std::vector<int> encodingExternals(EncodingKind k) {
  switch (k) {
    case EncodingKind::E1111: return {1, 1, 1, 1};
    case EncodingKind::E1221: return {1, 2, 2, 1};
    default: return {1, 2, 2, 2, 2, 1};
  }
}

inline int encodingQubits(EncodingKind k) { return k == EncodingKind::E122221 ? 2 : 1; }

// Chain key of a logical basis state. Logical bit 0 maps to the smaller
// charge label, bit 1 to the larger.
inline ChainKey encodingKey(EncodingKind kind, const std::vector<int>& bits) {
  if (static_cast<int>(bits.size()) != encodingQubits(kind))
    throw std::invalid_argument("bitstring length mismatch");
  switch (kind) {
    case EncodingKind::E1111: return {1, bits[0] ? 2 : 0, 1, 0};
    case EncodingKind::E1221: return {1, bits[0] ? 3 : 1, 1, 0};
    default: return {1, bits[0] ? 3 : 1, 1, bits[1] ? 3 : 1, 1, 0};
  }
}

template <typename Real = double>
struct QubitRegister {
  EncodingKind kind;
  AnyonState<Real> state;
};

template <typename Real = double>
QubitRegister<Real> encode(const AnyonModel<Real>& model, EncodingKind kind,
                           const std::vector<int>& bits) {
  AnyonState<Real> st(model, encodingExternals(kind), 0);
  st.setAmplitude(encodingKey(kind, bits), std::complex<Real>(1, 0));
  return {kind, st};
}

template <typename Real = double>
QubitRegister<Real> encodeAmplitudes(const AnyonModel<Real>& model, EncodingKind kind,
                                     const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>& amps) {
  const int nq = encodingQubits(kind);
  if (amps.size() != (1 << nq)) throw std::invalid_argument("amplitude vector size mismatch");
  AnyonState<Real> st(model, encodingExternals(kind), 0);
  for (int idx = 0; idx < amps.size(); ++idx) {
    if (std::abs(amps[idx]) < 1e-15) continue;
    std::vector<int> bits;
    for (int q = nq - 1; q >= 0; --q) bits.push_back((idx >> q) & 1);
    st.setAmplitude(encodingKey(kind, bits), amps[idx]);
  }
  return {kind, st};
}

struct LeakageError : std::runtime_error {
  double leakedMass;
  explicit LeakageError(double mass)
      : std::runtime_error("state support outside logical subspace, leaked mass " + std::to_string(mass)),
        leakedMass(mass) {}
};

// Amplitudes over the logical basis, ordered |0..0>, |0..1>, ...
template <typename Real = double>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> decode(const QubitRegister<Real>& reg,
                                                            Real leakTol = Real(1e-10)) {
  const int nq = encodingQubits(reg.kind);
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> out(1 << nq);
  Real captured = 0;
  for (int idx = 0; idx < (1 << nq); ++idx) {
    std::vector<int> bits;
    for (int q = nq - 1; q >= 0; --q) bits.push_back((idx >> q) & 1);
    out[idx] = reg.state.amplitude(encodingKey(reg.kind, bits));
    captured += std::norm(out[idx]);
  }
  const Real leaked = reg.state.normSquared() - captured;
  if (reg.state.externals() != encodingExternals(reg.kind) || leaked > leakTol)
    throw LeakageError(static_cast<double>(leaked));
  return out;
}

// Unitary (or general linear) gate value together with its projective form.
template <typename Real = double>
struct GateMatrix {
  using Mat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
  Mat entries;

  Mat phaseCanonical(Real tol = Real(1e-9)) const {
    for (int r = 0; r < entries.rows(); ++r)
      for (int c = 0; c < entries.cols(); ++c)
        if (std::abs(entries(r, c)) > tol) {
          return entries * (std::abs(entries(r, c)) / entries(r, c));
        }
    return entries;
  }
};

template <typename Real>
Real phaseDistance(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& u,
                   const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& v) {
  GateMatrix<Real> a{u}, b{v};
  return (a.phaseCanonical() - b.phaseCanonical()).norm();
}

// Deterministic NOT on a 1221 register: insert a charge-4 vacuum pair between
// the two charge-2 quasiparticles and fuse it through (4 x 2 = 2 uniquely).
template <typename Real = double>
QubitRegister<Real> applyXViaFusion(const QubitRegister<Real>& reg) {
  if (reg.kind != EncodingKind::E1221) throw std::invalid_argument("X via fusion needs E1221");
  AnyonState<Real> st = reg.state.createVacuumPair(4, 3);
  st = st.fuseQuasiparticlesForced(2, 2).second;
  st = st.fuseQuasiparticlesForced(3, 2).second;
  return {EncodingKind::E1221, st};
}

// Extract the 2x2 matrix of a state-level operation on the logical basis.
template <typename Real, typename Op>
GateMatrix<Real> logicalMatrix(const AnyonModel<Real>& model, EncodingKind kind, Op&& op) {
  typename GateMatrix<Real>::Mat m(2, 2);
  for (int col = 0; col < 2; ++col) {
    QubitRegister<Real> reg = encode(model, kind, {col});
    reg = op(reg);
    auto amps = decode(reg);
    m(0, col) = amps[0];
    m(1, col) = amps[1];
  }
  return {m};
}

// Braid gates computed from model data by applying braid words to encoded
// basis states (exact global phases retained).
template <typename Real = double>
GateMatrix<Real> braidGate1111(const AnyonModel<Real>& model, char which) {
  const int pair = (which == 'R') ? 1 : 2;  // 'R' or 'G'
  return logicalMatrix(model, EncodingKind::E1111, [&](QubitRegister<Real> r) {
    r.state = r.state.applyBraid(pair, true);
    return r;
  });
}

template <typename Real = double>
GateMatrix<Real> braidGate1221(const AnyonModel<Real>& model, char which) {
  if (which == 'Z')
    return logicalMatrix(model, EncodingKind::E1221, [&](QubitRegister<Real> r) {
      r.state = r.state.applyBraid(1, true).applyBraid(1, true);
      return r;
    });
  return logicalMatrix(model, EncodingKind::E1221, [&](QubitRegister<Real> r) {
    r.state = r.state.applyBraid(2, true);  // 'B'
    return r;
  });
}

template <typename Real = double>
GateMatrix<Real> xGateMatrix(const AnyonModel<Real>& model) {
  return logicalMatrix(model, EncodingKind::E1221,
                       [&](QubitRegister<Real> r) { return applyXViaFusion(r); });
}

// Apply a 2x2 matrix on the logical labels {1,3} living at full-chain slot
// `slot` (0-indexed). Used for logical single-qubit gates on multi-qubit chains.
template <typename Real>
AnyonState<Real> applyLogicalAtSlot(const AnyonState<Real>& st,
                                    const Eigen::Matrix<std::complex<Real>, 2, 2>& m, int slot) {
  AnyonState<Real> out(st.model(), st.externals(), st.total());
  for (const auto& [fc, amp] : st.amplitudes()) {
    const int ib = (fc[slot] - 1) / 2;
    for (int ibp = 0; ibp < 2; ++ibp) {
      const std::complex<Real> coef = m(ibp, ib);
      if (std::abs(coef) < 1e-15) continue;
      ChainKey nk = fc;
      nk[slot] = ibp ? 3 : 1;
      out.setAmplitude(nk, out.amplitude(nk) + amp * coef);
    }
  }
  out.clean();
  return out;
}

}  // namespace anyonkit
