#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "anyonkit/encoding.hpp"
#include "anyonkit/rng.hpp"
#include "anyonkit/state.hpp"

namespace anyonkit {

template <typename Real = double>
struct StepRecord {
  std::string step;
  int outcome;
  Real probability;  // exact conditional Born probability of the outcome
};

// Outcome chooser shared by the stochastic executor and the exhaustive
// branch enumerator; `outcomes` lists (charge, conditional probability)
// pairs with positive probability, sorted by charge.
template <typename Real = double>
class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual int choose(const std::string& step,
                     const std::vector<std::pair<int, Real>>& outcomes) = 0;
};

template <typename Real = double>
class StochasticChooser : public Chooser<Real> {
 public:
  explicit StochasticChooser(RngStream rng) : rng_(rng) {}
  int choose(const std::string&, const std::vector<std::pair<int, Real>>& outcomes) override {
    std::vector<Real> w;
    for (const auto& [c, p] : outcomes) w.push_back(p);
    return outcomes[rng_.sampleIndex(w)].first;
  }

 private:
  RngStream rng_;
};

// Signal thrown by ScriptChooser when the replay script is exhausted;
// the branch enumerator catches it and forks on the listed outcomes.
template <typename Real = double>
struct BranchPoint {
  std::string step;
  std::vector<std::pair<int, Real>> outcomes;
};

template <typename Real = double>
class ScriptChooser : public Chooser<Real> {
 public:
  explicit ScriptChooser(std::vector<int> script) : script_(std::move(script)) {}
  int choose(const std::string& step, const std::vector<std::pair<int, Real>>& outcomes) override {
    if (pos_ >= script_.size()) throw BranchPoint<Real>{step, outcomes};
    const int want = script_[pos_++];
    for (const auto& [c, p] : outcomes)
      if (c == want) return c;
    throw std::logic_error("scripted outcome " + std::to_string(want) + " unavailable at " + step);
  }

 private:
  std::vector<int> script_;
  std::size_t pos_ = 0;
};

// Deterministic chooser that always demands one outcome (used for the
// unique-fusion steps where any other choice would be a bug).
template <typename Real = double>
class ForcedChooser : public Chooser<Real> {
 public:
  explicit ForcedChooser(std::vector<int> seq) : seq_(std::move(seq)) {}
  int choose(const std::string& step, const std::vector<std::pair<int, Real>>& outcomes) override {
    if (pos_ >= seq_.size()) throw std::logic_error("forced chooser exhausted at " + step);
    const int want = seq_[pos_++];
    for (const auto& [c, p] : outcomes)
      if (c == want) return c;
    throw std::logic_error("forced outcome unavailable at " + step);
  }

 private:
  std::vector<int> seq_;
  std::size_t pos_ = 0;
};

template <typename Real = double>
struct ProtocolOutcome {
  std::vector<StepRecord<Real>> record;
  int attempts = 0;
  bool success = false;
  std::optional<AnyonState<Real>> state;  // resulting register(s), when meaningful
  std::map<std::string, int> labels;      // named outcomes, e.g. {"z": 4}
};

namespace detail {

template <typename Real>
int measureStep(AnyonState<Real>& st, int i, int j, const std::string& name, Chooser<Real>& ch,
                std::vector<StepRecord<Real>>& rec) {
  auto probs = st.chargeProbabilities(i, j);
  std::vector<std::pair<int, Real>> outcomes;
  for (const auto& [c, p] : probs)
    if (p > Real(1e-14)) outcomes.emplace_back(c, p);
  if (outcomes.empty()) throw std::domain_error("degenerate measurement at " + name);
  const int out = ch.choose(name, outcomes);
  auto [p, projected] = st.projectCharge(i, j, out);
  st = projected.normalized();
  rec.push_back({name, out, probs.at(out)});
  return out;
}

// Fuse pair (i, i+1) with a chooser-selected channel.
template <typename Real>
int fuseStep(AnyonState<Real>& st, int i, const std::string& name, Chooser<Real>& ch,
             std::vector<StepRecord<Real>>& rec) {
  auto probs = st.chargeProbabilities(i, i + 1);
  std::vector<std::pair<int, Real>> outcomes;
  for (const auto& [c, p] : probs)
    if (p > Real(1e-14)) outcomes.emplace_back(c, p);
  const int out = ch.choose(name, outcomes);
  st = st.fuseQuasiparticlesForced(i, out).second;
  rec.push_back({name, out, probs.at(out)});
  return out;
}

// Product of two total-charge-0 chain states placed side by side.
template <typename Real>
AnyonState<Real> productState(const AnyonState<Real>& a, const AnyonState<Real>& b) {
  if (a.total() != 0) throw std::invalid_argument("left factor must have total charge 0");
  std::vector<int> ext = a.externals();
  ext.insert(ext.end(), b.externals().begin(), b.externals().end());
  AnyonState<Real> out(a.model(), ext, b.total());
  for (const auto& [ka, va] : a.amplitudes())
    for (const auto& [kb, vb] : b.amplitudes()) {
      ChainKey k = ka;
      k.insert(k.end(), kb.begin(), kb.end());
      out.setAmplitude(k, va * vb);
    }
  return out;
}

// Forced-measurement merge of two adjacent 1221 qubits at anyons off+1..off+8;
// returns true on success (x = 0 observed within maxAttempts).
template <typename Real>
bool mergeAt(AnyonState<Real>& st, int off, Chooser<Real>& ch, int maxAttempts,
             std::vector<StepRecord<Real>>& rec, int& attempts) {
  for (attempts = 1; attempts <= maxAttempts; ++attempts) {
    const int x = measureStep(st, off + 4, off + 5, "x", ch, rec);
    if (x == 0) {
      st = st.removeAncillaPair(off + 4);
      return true;
    }
    measureStep(st, off + 5, off + 8, "y", ch, rec);
  }
  attempts = maxAttempts;
  return false;
}

// Topological qubit fusion of the 122221 register at anyons off+1..off+6;
// returns z in {0, 4} on success, -1 on timeout.
template <typename Real>
int tqfAt(AnyonState<Real>& st, int off, Chooser<Real>& ch, int maxAttempts,
          std::vector<StepRecord<Real>>& rec, int& attempts) {
  for (attempts = 1; attempts <= maxAttempts; ++attempts) {
    const int z = measureStep(st, off + 3, off + 4, "z", ch, rec);
    if (z == 2) {
      measureStep(st, off + 4, off + 6, "v", ch, rec);
      continue;
    }
    if (z == 4) {
      st = st.createVacuumPair(4, off + 5);
      st = st.fuseQuasiparticlesForced(off + 4, 2).second;
      st = st.fuseQuasiparticlesForced(off + 5, 2).second;
    }
    st = st.removeAncillaPair(off + 3);
    return z;
  }
  return -1;
}

template <typename Real>
void zGateAt(AnyonState<Real>& st, int off) {
  st = st.applyBraid(off + 1, true).applyBraid(off + 1, true);
}

}  // namespace detail

// Closed-form target states used as ancilla inputs and test oracles.
template <typename Real = double>
struct AncillaLibrary {
  using Complex = std::complex<Real>;
  using Vec2 = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  static Vec2 rPhi(Real phi) {
    Vec2 v(2);
    v << std::polar(Real(1) / std::sqrt(Real(2)), -phi / 2),
        std::polar(Real(1) / std::sqrt(Real(2)), phi / 2);
    return v;
  }

  static Real alpha() { return std::arg(Complex(-1, 4 * std::sqrt(Real(3))) / Real(7)); }

  static Vec2 kState() { return rPhi(alpha()); }

  static Vec2 plus() {
    Vec2 v(2);
    v << Real(1) / std::sqrt(Real(2)), Real(1) / std::sqrt(Real(2));
    return v;
  }

  static Vec2 phiPlus1() {  // |Phi_{+1,1}>
    const Real c = std::sqrt(Real(3) / 10);
    Vec2 v(2);
    v << c * Complex(1, -2 * std::sqrt(Real(3)) / 3), Complex(c, 0);
    return v;
  }

  static Vec2 phiMinus3() {  // |Phi_{-1,3}>
    const Real c = std::sqrt(Real(3) / 10);
    Vec2 v(2);
    v << Complex(c, 0), c * Complex(1, 2 * std::sqrt(Real(3)) / 3);
    return v;
  }

  static Vec2 bellPhiPlus() {  // |Phi+> over |ab>, a,b in {1,3}
    Vec2 v(4);
    v << Real(1) / std::sqrt(Real(2)), 0, 0, Real(1) / std::sqrt(Real(2));
    return v;
  }

  static Vec2 phiH() {  // (1 x H)|Phi+>
    Vec2 v(4);
    v << Real(0.5), Real(0.5), Real(0.5), Real(-0.5);
    return v;
  }
};

// ---------------------------------------------------------------------------
// Protocols. Each takes a Chooser so one step definition serves both the
// seeded stochastic executor and the exact branch enumerator.
// ---------------------------------------------------------------------------

// 1111 -> 1221 encoding switch: create a charge-2 vacuum pair, fuse it
// through; success iff the second fusion gives y = 2.
template <typename Real = double>
ProtocolOutcome<Real> switchEncoding1111to1221(const QubitRegister<Real>& reg, Chooser<Real>& ch) {
  if (reg.kind != EncodingKind::E1111) throw std::invalid_argument("switch needs E1111");
  ProtocolOutcome<Real> out;
  AnyonState<Real> st = reg.state.createVacuumPair(2, 4);
  const int x = detail::fuseStep(st, 3, "x", ch, out.record);
  const int y = detail::fuseStep(st, 2, "y", ch, out.record);
  out.labels["x"] = x;
  out.labels["y"] = y;
  out.attempts = 1;
  out.success = (y == 2);
  out.state = st;
  return out;
}

// The (non-unitary) switch maps P^{(x)}_{ba} = (1/sqrt(d_2)) [F^{x21}_a]_{1b}
// [F^{11x}_b]_{a2}, computed from model data.
template <typename Real = double>
GateMatrix<Real> switchMapP(const AnyonModel<Real>& m, int x) {
  typename GateMatrix<Real>::Mat p(2, 2);
  const int as[2] = {0, 2}, bs[2] = {1, 3};
  for (int ia = 0; ia < 2; ++ia)
    for (int ib = 0; ib < 2; ++ib)
      p(ib, ia) = m.fSymbol(x, 2, 1, as[ia], 1, bs[ib]) * m.fSymbol(1, 1, x, bs[ib], as[ia], 2) /
                  std::sqrt(m.qdim(2));
  return {p};
}

// Forced-measurement merge of two 1221 qubits into one 122221 register.
template <typename Real = double>
ProtocolOutcome<Real> mergeTo122221(const QubitRegister<Real>& regA, const QubitRegister<Real>& regB,
                                    Chooser<Real>& ch, int maxAttempts = 64) {
  if (regA.kind != EncodingKind::E1221 || regB.kind != EncodingKind::E1221)
    throw std::invalid_argument("merge needs two E1221 registers");
  ProtocolOutcome<Real> out;
  AnyonState<Real> st = detail::productState(regA.state, regB.state);
  out.success = detail::mergeAt(st, 0, ch, maxAttempts, out.record, out.attempts);
  out.state = st;
  return out;
}

// Inverse change of encoding: 122221 -> two adjacent 1221 qubits.
template <typename Real = double>
ProtocolOutcome<Real> splitTo1221Pair(const QubitRegister<Real>& reg, Chooser<Real>& ch,
                                      int maxAttempts = 64) {
  if (reg.kind != EncodingKind::E122221) throw std::invalid_argument("split needs E122221");
  ProtocolOutcome<Real> out;
  AnyonState<Real> st = reg.state.createVacuumPair(1, 4);
  for (out.attempts = 1; out.attempts <= maxAttempts; ++out.attempts) {
    const int y = detail::measureStep(st, 5, 8, "y", ch, out.record);
    if (y == 0) {
      out.success = true;
      break;
    }
    detail::measureStep(st, 4, 5, "x", ch, out.record);
  }
  out.state = st;
  return out;
}

// Topological qubit fusion: 122221 -> 1221, applying Q^{(z)}.
template <typename Real = double>
ProtocolOutcome<Real> tqf(const QubitRegister<Real>& reg, Chooser<Real>& ch, int maxAttempts = 64) {
  if (reg.kind != EncodingKind::E122221) throw std::invalid_argument("tqf needs E122221");
  ProtocolOutcome<Real> out;
  AnyonState<Real> st = reg.state;
  const int z = detail::tqfAt(st, 0, ch, maxAttempts, out.record, out.attempts);
  out.success = (z >= 0);
  if (z >= 0) out.labels["z"] = z;
  out.state = st;
  return out;
}

// Consume an ancillary |R_{phi/2}> qubit to apply R_{+phi/2} (z = 0) or
// R_{-phi/2} (z = 4) to the computational register.
template <typename Real = double>
ProtocolOutcome<Real> convertStateToPhaseGate(const QubitRegister<Real>& comp,
                                              const QubitRegister<Real>& ancilla, Real phi,
                                              Chooser<Real>& ch, int maxAttempts = 64) {
  auto anc = decode(ancilla);
  auto want = AncillaLibrary<Real>::rPhi(phi);
  {
    GateMatrix<Real> a{anc}, b{want};
    if ((a.phaseCanonical() - b.phaseCanonical()).norm() > 1e-10)
      throw std::invalid_argument("malformed |R_phi> ancilla");
  }
  auto merged = mergeTo122221(comp, ancilla, ch, maxAttempts);
  if (!merged.success) return merged;
  auto fused = tqf<Real>({EncodingKind::E122221, *merged.state}, ch, maxAttempts);
  ProtocolOutcome<Real> out;
  out.record = merged.record;
  out.record.insert(out.record.end(), fused.record.begin(), fused.record.end());
  out.attempts = merged.attempts + fused.attempts;
  out.success = fused.success;
  out.state = fused.state;
  if (fused.success) out.labels["z"] = fused.labels.at("z");
  return out;
}

// Initialize an ancilla-grade 1111 qubit in |2> by forced measurement on four
// quasiparticles pair-created from vacuum (pair (2,3) nested inside (1,4)).
template <typename Real = double>
ProtocolOutcome<Real> prepareState2(const AnyonModel<Real>& model, Chooser<Real>& ch,
                                    int maxAttempts = 64) {
  ProtocolOutcome<Real> out;
  AnyonState<Real> st(model, {}, 0);
  st.setAmplitude({}, std::complex<Real>(1, 0));
  st = st.createVacuumPair(1, 1).createVacuumPair(1, 2);
  for (out.attempts = 1; out.attempts <= maxAttempts; ++out.attempts) {
    detail::measureStep(st, 2, 3, "u", ch, out.record);
    const int w = detail::measureStep(st, 1, 2, "w", ch, out.record);
    if (w == 2) {
      out.success = true;
      break;
    }
  }
  out.state = st;
  return out;
}

// Prepare |Phi_{s,x}> = P^{(x)} G^s |2> (normalized), X-corrected onto the
// canonical x for the requested chirality (s=+1 -> x=1, s=-1 -> x=3).
template <typename Real = double>
ProtocolOutcome<Real> preparePhi(const AnyonModel<Real>& model, int s, Chooser<Real>& ch,
                                 int maxAttempts = 64) {
  ProtocolOutcome<Real> out = prepareState2(model, ch, maxAttempts);
  if (!out.success) return out;
  AnyonState<Real> st = out.state->applyBraid(2, s > 0);
  auto sw = switchEncoding1111to1221<Real>({EncodingKind::E1111, st}, ch);
  out.record.insert(out.record.end(), sw.record.begin(), sw.record.end());
  out.labels = sw.labels;
  out.success = sw.success;
  out.state = sw.state;
  if (!sw.success) return out;
  const int wantX = (s > 0) ? 1 : 3;
  if (sw.labels.at("x") != wantX)
    out.state = applyXViaFusion<Real>({EncodingKind::E1221, *out.state}).state;
  return out;
}

// Prepare |K> = (1/sqrt2)(e^{-i a/2}|1> + e^{i a/2}|3>) by merging the two
// library Phi states and fusing; z = 0 succeeds, z = 4 flags a discard.
template <typename Real = double>
ProtocolOutcome<Real> prepareK(const AnyonModel<Real>& model, Chooser<Real>& ch,
                               int maxAttempts = 64) {
  auto regA = encodeAmplitudes(model, EncodingKind::E1221, AncillaLibrary<Real>::phiPlus1());
  auto regB = encodeAmplitudes(model, EncodingKind::E1221, AncillaLibrary<Real>::phiMinus3());
  auto merged = mergeTo122221(regA, regB, ch, maxAttempts);
  if (!merged.success) return merged;
  auto fused = tqf<Real>({EncodingKind::E122221, *merged.state}, ch, maxAttempts);
  ProtocolOutcome<Real> out;
  out.record = merged.record;
  out.record.insert(out.record.end(), fused.record.begin(), fused.record.end());
  out.attempts = merged.attempts + fused.attempts;
  out.state = fused.state;
  if (fused.success) out.labels["z"] = fused.labels.at("z");
  out.success = fused.success && fused.labels.at("z") == 0;
  return out;
}

// Prepare |+> on a 1221 qubit: measure the charge-2 pair, apply Z if b = 2.
template <typename Real = double>
ProtocolOutcome<Real> preparePlus(const AnyonModel<Real>& model, Chooser<Real>& ch) {
  ProtocolOutcome<Real> out;
  AnyonState<Real> st = encode(model, EncodingKind::E1221, {0}).state;
  const int b = detail::measureStep(st, 2, 3, "b", ch, out.record);
  if (b == 2) detail::zGateAt(st, 0);
  out.labels["b"] = b;
  out.attempts = 1;
  out.success = true;
  out.state = st;
  return out;
}

namespace detail {

// Steps 2-4 of the Bell preparation on |psi1>|psi2> (8 anyons): project the
// middle four onto collective charge 0, apply the opposite-chirality braid
// pair, then relabel the transported quasiparticles back to two adjacent
// 1221 qubits (transport is topologically trivial: identity on amplitudes).
template <typename Real>
void bellProjectAndRelabel(AnyonState<Real>& st) {
  st = st.applyBraid(3, true).applyBraid(5, false);
  auto reb = st.rebasedAmplitudes(3, 6);
  AnyonState<Real> out(st.model(), {1, 2, 2, 1, 1, 2, 2, 1}, 0);
  for (const auto& [fc, amp] : reb) {
    // fc = (1, c2, g4, g5, g6, c6, c7, 0) with g6 = 0, c6 = c2
    if (fc[4] != 0 || fc[5] != fc[1] || fc[7] != 0)
      throw std::logic_error("unexpected rebased support in bell relabel");
    ChainKey nk = {1, fc[1], fc[6], 0, 1, fc[2], fc[3], 0};
    out.setAmplitude(nk, out.amplitude(nk) + amp);
  }
  out.clean();
  st = out;
}

}  // namespace detail

// Steps 1-5: prepare |+>|+>, project the middle four anyons onto charge 0
// (retrying from scratch on r != 0), braid with opposite chiralities,
// transport-relabel, and apply the supplied Hadamard on qubit 2.
template <typename Real = double>
ProtocolOutcome<Real> prepareBellThenPhiH(const AnyonModel<Real>& model,
                                          const GateMatrix<Real>& hGate, Chooser<Real>& ch,
                                          int maxAttempts = 64) {
  ProtocolOutcome<Real> out;
  for (out.attempts = 1; out.attempts <= maxAttempts; ++out.attempts) {
    auto p1 = preparePlus(model, ch);
    auto p2 = preparePlus(model, ch);
    out.record.insert(out.record.end(), p1.record.begin(), p1.record.end());
    out.record.insert(out.record.end(), p2.record.begin(), p2.record.end());
    AnyonState<Real> st = detail::productState(*p1.state, *p2.state);
    const int r = detail::measureStep(st, 3, 6, "r", ch, out.record);
    if (r != 0) continue;
    detail::bellProjectAndRelabel(st);
    Eigen::Matrix<std::complex<Real>, 2, 2> h = hGate.entries;
    st = applyLogicalAtSlot(st, h, 5);
    out.success = true;
    out.state = st;
    return out;
  }
  return out;
}

// Consume an ancillary |Phi_H> pair to apply C(Z) on two 1221 qubits.
// Layout A, anc1, B, anc2 keeps the computational qubit first in each TQF
// register; each conditional Z correction lands on the other qubit's output.
template <typename Real = double>
ProtocolOutcome<Real> applyCZ(const QubitRegister<Real>& regA, const QubitRegister<Real>& regB,
                              const AnyonState<Real>& ancillaPhiH, Chooser<Real>& ch,
                              int maxAttempts = 64) {
  if (regA.kind != EncodingKind::E1221 || regB.kind != EncodingKind::E1221)
    throw std::invalid_argument("applyCZ needs two E1221 registers");
  // validate the entanglement resource
  {
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> amps(4);
    const int labels[2] = {1, 3};
    Real mass = 0;
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) {
        amps[2 * p + q] = ancillaPhiH.amplitude({1, labels[p], 1, 0, 1, labels[q], 1, 0});
        mass += std::norm(amps[2 * p + q]);
      }
    GateMatrix<Real> a{amps}, b{AncillaLibrary<Real>::phiH()};
    if (std::abs(mass - ancillaPhiH.normSquared()) > 1e-10 ||
        (a.phaseCanonical() - b.phaseCanonical()).norm() > 1e-8)
      throw std::invalid_argument("malformed |Phi_H> ancilla");
  }
  ProtocolOutcome<Real> out;
  AnyonState<Real> st = detail::productState(regA.state, ancillaPhiH);
  // interleave: move ancilla qubit 2 behind B by building the 16-anyon chain
  // directly as A x anc-q1 x B x anc-q2 (the ancilla segments stay entangled).
  {
    AnyonState<Real> joint(regA.state.model(),
                           {1, 2, 2, 1, 1, 2, 2, 1, 1, 2, 2, 1, 1, 2, 2, 1}, 0);
    for (const auto& [ka, va] : regA.state.amplitudes())
      for (const auto& [kanc, vanc] : ancillaPhiH.amplitudes())
        for (const auto& [kb, vb] : regB.state.amplitudes()) {
          ChainKey k = ka;
          k.insert(k.end(), kanc.begin(), kanc.begin() + 4);
          k.insert(k.end(), kb.begin(), kb.end());
          k.insert(k.end(), kanc.begin() + 4, kanc.end());
          joint.setAmplitude(k, joint.amplitude(k) + va * vanc * vb);
        }
    joint.clean();
    st = joint;
  }
  int attempts = 0;
  if (!detail::mergeAt(st, 0, ch, maxAttempts, out.record, attempts)) return out;
  out.attempts += attempts;
  const int z1 = detail::tqfAt(st, 0, ch, maxAttempts, out.record, attempts);
  out.attempts += attempts;
  if (z1 < 0) return out;
  if (!detail::mergeAt(st, 4, ch, maxAttempts, out.record, attempts)) return out;
  out.attempts += attempts;
  const int z2 = detail::tqfAt(st, 4, ch, maxAttempts, out.record, attempts);
  out.attempts += attempts;
  if (z2 < 0) return out;
  if (z1 == 4) detail::zGateAt(st, 4);
  if (z2 == 4) detail::zGateAt(st, 0);
  out.labels["z1"] = z1;
  out.labels["z2"] = z2;
  out.success = true;
  out.state = st;
  return out;
}

// K-gate random walk: each step consumes a fresh |K> ancilla; z = 0 advances
// the walk by +1 (gate K applied), z = 4 retreats by -1 (K^{-1}); success
// when the net applied gate is K. `fullSimulation` runs the complete
// merge+fusion state machinery per step; otherwise each step samples the
// (exactly state-independent) 1/2-1/2 law through the same chooser.
template <typename Real = double>
ProtocolOutcome<Real> kGateRandomWalk(const AnyonModel<Real>& model, int budget, Chooser<Real>& ch,
                                      bool fullSimulation = true, int maxAttempts = 64) {
  ProtocolOutcome<Real> out;
  int position = 0;
  QubitRegister<Real> comp = encode(model, EncodingKind::E1221, {0});
  const Real alpha = AncillaLibrary<Real>::alpha();
  for (int step = 1; step <= budget; ++step) {
    int z;
    if (fullSimulation) {
      auto anc = encodeAmplitudes(model, EncodingKind::E1221, AncillaLibrary<Real>::kState());
      auto conv = convertStateToPhaseGate(comp, anc, alpha, ch, maxAttempts);
      out.record.insert(out.record.end(), conv.record.begin(), conv.record.end());
      if (!conv.success) return out;
      z = conv.labels.at("z");
      comp = {EncodingKind::E1221, *conv.state};
    } else {
      z = ch.choose("z", {{0, Real(0.5)}, {4, Real(0.5)}});
      out.record.push_back({"z", z, Real(0.5)});
    }
    position += (z == 0) ? 1 : -1;
    ++out.attempts;
    if (position == 1) {
      out.success = true;
      break;
    }
  }
  out.labels["net_k_power"] = position;
  out.state = comp.state;
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive branch enumeration
// ---------------------------------------------------------------------------

template <typename Real = double>
struct BranchLeaf {
  std::vector<int> script;             // outcome sequence from the root
  std::vector<StepRecord<Real>> record;
  Real probability;                    // product of conditional probabilities
  ProtocolOutcome<Real> outcome;
};

template <typename Real = double>
struct BranchTree {
  std::vector<BranchLeaf<Real>> leaves;
  Real totalProbability() const {
    Real s = 0;
    for (const auto& l : leaves) s += l.probability;
    return s;
  }
};

// Depth-first enumeration of every outcome sequence of a protocol runner.
// The runner is re-executed per branch with a replay script; choice points
// past the script raise BranchPoint and fork the search.
template <typename Real = double>
BranchTree<Real> buildBranchTree(const std::function<ProtocolOutcome<Real>(Chooser<Real>&)>& runner,
                                 Real pruneBelow = Real(1e-14)) {
  BranchTree<Real> tree;
  std::function<void(std::vector<int>)> dfs = [&](std::vector<int> script) {
    ScriptChooser<Real> ch(script);
    try {
      ProtocolOutcome<Real> res = runner(ch);
      Real p = 1;
      for (const auto& r : res.record) p *= r.probability;
      tree.leaves.push_back({script, res.record, p, std::move(res)});
    } catch (const BranchPoint<Real>& bp) {
      for (const auto& [c, pc] : bp.outcomes) {
        Real prefix = pc;
        // conditional probabilities along the script are recomputed inside
        // the recursive run; prune only on the branch just taken
        if (prefix < pruneBelow) continue;
        std::vector<int> next = script;
        next.push_back(c);
        dfs(std::move(next));
      }
    }
  };
  dfs({});
  return tree;
}

}  // namespace anyonkit
