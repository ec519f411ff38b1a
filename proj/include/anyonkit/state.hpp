#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "anyonkit/model.hpp"
#include "anyonkit/rng.hpp"

namespace anyonkit {

// Full-chain basis label (c_1, ..., c_n) over a left-nested fusion tree:
// c_1 = a_1, c_n = total charge, N_{c_i a_{i+1}}^{c_{i+1}} = 1 chain-wise.
using ChainKey = std::vector<int>;

// State of n quasiparticles on the left-nested fusion-chain basis.
// Value type: operations return new states; a shared immutable model
// reference makes copies cheap to move between threads.
template <typename Real = double>
class AnyonState {
 public:
  using Complex = std::complex<Real>;
  using AmpMap = std::map<ChainKey, Complex>;

  AnyonState(const AnyonModel<Real>& model, std::vector<int> externals, int total)
      : model_(&model), ext_(std::move(externals)), total_(total) {}

  const AnyonModel<Real>& model() const { return *model_; }
  const std::vector<int>& externals() const { return ext_; }
  int total() const { return total_; }
  int size() const { return static_cast<int>(ext_.size()); }
  const AmpMap& amplitudes() const { return amps_; }

  void setAmplitude(const ChainKey& key, Complex v) {
    if (static_cast<int>(key.size()) != size()) throw std::invalid_argument("key length mismatch");
    amps_[key] = v;
  }
  Complex amplitude(const ChainKey& key) const {
    auto it = amps_.find(key);
    return it == amps_.end() ? Complex(0, 0) : it->second;
  }

  // All admissible chain labels for the external charges and total.
  std::vector<ChainKey> basis() const {
    std::vector<ChainKey> chains = {{ext_.at(0)}};
    for (std::size_t i = 1; i < ext_.size(); ++i) {
      std::vector<ChainKey> next;
      for (const auto& ch : chains)
        for (int c = 0; c < model_->numCharges(); ++c)
          if (model_->fusionMultiplicity(ch.back(), ext_[i], c)) {
            ChainKey nk = ch;
            nk.push_back(c);
            next.push_back(std::move(nk));
          }
      chains = std::move(next);
    }
    std::vector<ChainKey> out;
    for (auto& ch : chains)
      if (ch.back() == total_) out.push_back(std::move(ch));
    return out;
  }

  Real normSquared() const {
    Real s = 0;
    for (const auto& [k, v] : amps_) s += std::norm(v);
    return s;
  }

  AnyonState normalized() const {
    AnyonState out = *this;
    const Real nn = std::sqrt(normSquared());
    if (nn <= 0) throw std::domain_error("cannot normalize zero state");
    for (auto& [k, v] : out.amps_) v /= nn;
    return out;
  }

  // Exchange external quasiparticles at positions i, i+1 (1-based);
  // ccw applies R, cw its conjugate.
  AnyonState applyBraid(int i, bool ccw = true) const {
    const auto& m = *model_;
    const int n = size();
    if (i < 1 || i > n - 1) throw std::out_of_range("braid index");
    const int a = ext_[i - 1], b = ext_[i];
    auto Rv = [&](int x, int y, int c) {
      Complex v = m.rSymbol(x, y, c);
      return ccw ? v : std::conj(v);
    };
    AnyonState out = *this;
    out.amps_.clear();
    std::swap(out.ext_[i - 1], out.ext_[i]);
    if (i == 1) {
      for (const auto& [fc, amp] : amps_) {
        ChainKey nk = fc;
        nk[0] = b;
        out.amps_[nk] += amp * Rv(a, b, fc[1]);
      }
    } else {
      for (const auto& [fc, amp] : amps_) {
        const int cl = fc[i - 2], ci = fc[i - 1], cr = fc[i];
        for (int cip = 0; cip < m.numCharges(); ++cip) {
          if (!m.fusionMultiplicity(cl, b, cip) || !m.fusionMultiplicity(cip, a, cr)) continue;
          Complex coef(0, 0);
          for (int g = 0; g < m.numCharges(); ++g)
            if (m.fusionMultiplicity(a, b, g) && m.fusionMultiplicity(cl, g, cr))
              coef += m.fSymbol(cl, a, b, cr, ci, g) * Rv(a, b, g) * m.fSymbol(cl, b, a, cr, cip, g);
          if (std::abs(coef) < kDrop) continue;
          ChainKey nk = fc;
          nk[i - 1] = cip;
          out.amps_[nk] += amp * coef;
        }
      }
    }
    out.clean();
    return out;
  }

  // Local tree reassociation over internal slot c_i, 2 <= i <= n-1.
  AnyonState applyFMove(int i, bool forward = true) const {
    const auto& m = *model_;
    if (i < 2 || i > size() - 1) throw std::out_of_range("fmove index");
    AnyonState out = *this;
    out.amps_.clear();
    for (const auto& [fc, amp] : amps_) {
      const int cl = fc[i - 2], ci = fc[i - 1], cr = fc[i];
      const int a = ext_[i - 1], b = ext_[i];
      for (int f = 0; f < m.numCharges(); ++f) {
        Complex coef = forward ? m.fSymbol(cl, a, b, cr, ci, f) : m.fSymbol(cl, a, b, cr, f, ci);
        if (std::abs(coef) < kDrop) continue;
        ChainKey nk = fc;
        nk[i - 1] = f;
        out.amps_[nk] += amp * coef;
      }
    }
    out.clean();
    return out;
  }

  // Probabilities of the collective charge of quasiparticles [i..j], 1-based inclusive.
  std::map<int, Real> chargeProbabilities(int i, int j) const {
    checkRange(i, j);
    AmpMap reb = rebaseForward(i, j);
    std::map<int, Real> probs;
    for (const auto& [fc, amp] : reb) probs[fc[groupSlot(i, j)]] += std::norm(amp);
    return probs;
  }

  // omega_a projection onto collective charge a of [i..j]; returns the Born
  // probability and the unnormalized projected state.
  std::pair<Real, AnyonState> projectCharge(int i, int j, int a) const {
    checkRange(i, j);
    AmpMap reb = rebaseForward(i, j);
    const int slot = groupSlot(i, j);
    AmpMap sel;
    Real p = 0;
    for (const auto& [fc, amp] : reb)
      if (fc[slot] == a) {
        sel[fc] = amp;
        p += std::norm(amp);
      }
    AnyonState out = *this;
    out.amps_ = rebaseBackward(sel, i, j);
    return {p, out};
  }

  std::tuple<int, Real, AnyonState> measureCharge(int i, int j, RngStream& rng) const {
    auto probs = chargeProbabilities(i, j);
    std::vector<int> outcomes;
    std::vector<Real> weights;
    Real tot = 0;
    for (const auto& [c, p] : probs) {
      outcomes.push_back(c);
      weights.push_back(p);
      tot += p;
    }
    if (tot < 1e-14) throw std::domain_error("degenerate state: zero total probability");
    const int pick = rng.sampleIndex(weights);
    auto [p, st] = projectCharge(i, j, outcomes[pick]);
    return {outcomes[pick], p, st.normalized()};
  }

  // Insert a (q, q) pair created from vacuum at positions pos, pos+1.
  AnyonState createVacuumPair(int q, int pos) const {
    const auto& m = *model_;
    if (pos < 1 || pos > size() + 1) throw std::out_of_range("pair position");
    AnyonState out = *this;
    out.ext_.insert(out.ext_.begin() + (pos - 1), 2, q);
    out.amps_.clear();
    for (const auto& [fc, amp] : amps_) {
      const int cl = pos >= 2 ? fc[pos - 2] : 0;
      for (int cp = 0; cp < m.numCharges(); ++cp) {
        if (!m.fusionMultiplicity(cl, q, cp)) continue;
        const Real coef = std::sqrt(m.qdim(cp) / (m.qdim(cl) * m.qdim(q)));
        ChainKey nk = fc;
        nk.insert(nk.begin() + (pos - 1), {cp, cl});
        out.amps_[nk] += amp * coef;
      }
    }
    out.clean();
    return out;
  }

  // Fuse adjacent pair (i, i+1): measure the pair channel, then collapse the
  // pair into a single external quasiparticle carrying the outcome.
  std::tuple<int, Real, AnyonState> fuseQuasiparticles(int i, RngStream& rng) const {
    auto [out, p, st] = measureChargeInternal(i, rng);
    return {out, p, st.collapsePair(i, out)};
  }

  // Deterministic variant for protocol branch enumeration: fuse with a
  // prescribed outcome (probability returned).
  std::pair<Real, AnyonState> fuseQuasiparticlesForced(int i, int outcome) const {
    auto [p, st] = projectCharge(i, i + 1, outcome);
    if (p < 1e-14) throw std::domain_error("forced fusion outcome has zero probability");
    return {p, st.normalized().collapsePair(i, outcome)};
  }

  // Remove a pair (i, i+1) known to be in the vacuum channel.
  AnyonState removeAncillaPair(int i) const {
    auto probs = chargeProbabilities(i, i + 1);
    auto it = probs.find(0);
    if (it == probs.end() || std::abs(it->second - normSquared()) > 1e-8 * std::max(Real(1), normSquared()))
      throw std::domain_error("ancilla pair not in definite vacuum channel");
    AmpMap reb = rebaseForward(i, i + 1);
    AnyonState out = *this;
    out.amps_.clear();
    for (const auto& [fc, amp] : reb) {
      ChainKey nk;
      if (i == 1) {
        nk.assign(fc.begin() + 2, fc.end());
      } else {
        nk = fc;
        nk.erase(nk.begin() + (i - 1), nk.begin() + (i + 1));
      }
      out.amps_[nk] += amp;
    }
    out.ext_.erase(out.ext_.begin() + (i - 1), out.ext_.begin() + (i + 1));
    out.clean();
    return out;
  }

  // Amplitudes in the rebased frame exposing the collective charge of [i..j]
  // (slots i..j-1 hold the group's internal labels, slot j-2 its total for
  // i > 1). Used by protocol-level relabeling of transported quasiparticles.
  AmpMap rebasedAmplitudes(int i, int j) const {
    checkRange(i, j);
    return rebaseForward(i, j);
  }

  void clean(Real tol = Real(1e-13)) {
    for (auto it = amps_.begin(); it != amps_.end();)
      it = std::abs(it->second) <= tol ? amps_.erase(it) : std::next(it);
  }

 private:
  static constexpr Real kDrop = Real(1e-15);

  void checkRange(int i, int j) const {
    if (i < 1 || j > size() || i >= j) throw std::out_of_range("charge range");
  }

  int groupSlot(int i, int j) const { return i > 1 ? j - 2 : j - 1; }

  std::tuple<int, Real, AnyonState> measureChargeInternal(int i, RngStream& rng) const {
    auto [o, p, st] = measureCharge(i, i + 1, rng);
    return {o, p, st};
  }

  AnyonState collapsePair(int i, int outcome) const {
    AmpMap reb = rebaseForward(i, i + 1);
    AnyonState out = *this;
    out.amps_.clear();
    for (const auto& [fc, amp] : reb) {
      ChainKey nk;
      if (i == 1)
        nk.assign(fc.begin() + 1, fc.end());
      else {
        nk = fc;
        nk.erase(nk.begin() + (i - 1));
      }
      out.amps_[nk] += amp;
    }
    out.ext_.erase(out.ext_.begin() + (i - 1), out.ext_.begin() + (i + 1));
    out.ext_.insert(out.ext_.begin() + (i - 1), outcome);
    out.clean();
    return out;
  }

  // Rebase [i..j] so slots i..j-1 hold the group's own left-nested internal
  // labels; slot j-2 (0-indexed) ends up holding the group total (for i > 1;
  // for i == 1 the chain label c_j already is the group total).
  AmpMap rebaseForward(int i, int j) const {
    const auto& m = *model_;
    if (i == 1) return amps_;
    AmpMap cur = amps_;
    for (int step = i; step < j; ++step) {
      AmpMap next;
      for (const auto& [fc, amp] : cur) {
        const int cl = fc[i - 2];
        const int gm = (step == i) ? ext_[i - 1] : fc[step - 2];
        const int am1 = ext_[step];
        const int cm = fc[step - 1], cm1 = fc[step];
        for (int g = 0; g < m.numCharges(); ++g) {
          if (!m.fusionMultiplicity(gm, am1, g) || !m.fusionMultiplicity(cl, g, cm1)) continue;
          Complex coef = m.fSymbol(cl, gm, am1, cm1, cm, g);
          if (std::abs(coef) < kDrop) continue;
          ChainKey nk = fc;
          nk[step - 1] = g;
          next[nk] += amp * coef;
        }
      }
      cur = std::move(next);
    }
    for (auto it = cur.begin(); it != cur.end();)
      it = std::abs(it->second) <= Real(1e-13) ? cur.erase(it) : std::next(it);
    return cur;
  }

  AmpMap rebaseBackward(const AmpMap& rebased, int i, int j) const {
    const auto& m = *model_;
    if (i == 1) return rebased;
    AmpMap cur = rebased;
    for (int step = j - 1; step >= i; --step) {
      AmpMap next;
      for (const auto& [fc, amp] : cur) {
        const int cl = fc[i - 2];
        const int gm = (step == i) ? ext_[i - 1] : fc[step - 2];
        const int am1 = ext_[step];
        const int g = fc[step - 1], cm1 = fc[step];
        for (int cm = 0; cm < m.numCharges(); ++cm) {
          if (!m.fusionMultiplicity(cl, gm, cm) || !m.fusionMultiplicity(cm, am1, cm1)) continue;
          Complex coef = m.fSymbol(cl, gm, am1, cm1, cm, g);
          if (std::abs(coef) < kDrop) continue;
          ChainKey nk = fc;
          nk[step - 1] = cm;
          next[nk] += amp * coef;
        }
      }
      cur = std::move(next);
    }
    for (auto it = cur.begin(); it != cur.end();)
      it = std::abs(it->second) <= Real(1e-13) ? cur.erase(it) : std::next(it);
    return cur;
  }

  const AnyonModel<Real>* model_;
  std::vector<int> ext_;
  int total_;
  AmpMap amps_;
};

template <typename Real>
std::complex<Real> innerProduct(const AnyonState<Real>& x, const AnyonState<Real>& y) {
  if (x.externals() != y.externals() || x.total() != y.total())
    throw std::invalid_argument("innerProduct: shape mismatch");
  std::complex<Real> s(0, 0);
  for (const auto& [k, v] : x.amplitudes()) s += std::conj(v) * y.amplitude(k);
  return s;
}

// Global-phase canonical form: scale so the first (lexicographically by key)
// entry above tolerance is positive real.
template <typename Real>
AnyonState<Real> phaseCanonical(const AnyonState<Real>& st, Real tol = Real(1e-9)) {
  for (const auto& [k, v] : st.amplitudes())
    if (std::abs(v) > tol) {
      std::complex<Real> ph = v / std::abs(v);
      AnyonState<Real> res(st.model(), st.externals(), st.total());
      for (const auto& [kk, vv] : st.amplitudes()) res.setAmplitude(kk, vv / ph);
      return res;
    }
  return st;
}

// Free-function spellings over the member operations.
template <typename Real>
AnyonState<Real> braid(const AnyonState<Real>& st, int i, bool ccw = true) {
  return st.applyBraid(i, ccw);
}
template <typename Real>
AnyonState<Real> fMove(const AnyonState<Real>& st, int i, bool forward = true) {
  return st.applyFMove(i, forward);
}

}  // namespace anyonkit
