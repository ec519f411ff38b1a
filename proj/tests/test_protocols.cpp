#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "anyonkit/analysis.hpp"
#include "anyonkit/encoding.hpp"
#include "anyonkit/model.hpp"
#include "anyonkit/protocol.hpp"

using namespace anyonkit;
using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using M2 = Eigen::Matrix2cd;

namespace {

const AnyonModel<double>& jk4() {
  static AnyonModel<double> m({Family::JK, 4, false});
  return m;
}

double vecPhaseDist(const Vec& a, const Vec& b) {
  GateMatrix<double> ga{a}, gb{b};
  return (ga.phaseCanonical() - gb.phaseCanonical()).norm();
}

Vec decode1221(const AnyonState<double>& st) {
  return decode(QubitRegister<double>{EncodingKind::E1221, st});
}

// amplitudes of a two-adjacent-1221-qubit chain over |ab>, a,b in {1,3}
Vec decodePair(const AnyonState<double>& st) {
  Vec v(4);
  const int lab[2] = {1, 3};
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      v[2 * p + q] = st.amplitude({1, lab[p], 1, 0, 1, lab[q], 1, 0});
  return v;
}

Eigen::Matrix2cd printedP(int x) {
  Eigen::Matrix2cd p;
  const double s2 = std::sqrt(2.0);
  if (x == 1)
    p << 1, s2 / 4, 0, 3 * s2 / 4;
  else
    p << 0, 3 * s2 / 4, 1, s2 / 4;
  return p / std::sqrt(3.0);
}

}  // namespace

TEST_CASE("switch maps P^(1), P^(3) from model data") {
  for (int x : {1, 3}) {
    auto P = switchMapP(jk4(), x);
    CHECK((P.entries - printedP(x)).cwiseAbs().maxCoeff() < 1e-10);
  }
  Eigen::Matrix2cd X;
  X << 0, 1, 1, 0;
  CHECK((printedP(1) - X * printedP(3)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("encoding switch branch tree") {
  Vec in(2);
  in << Complex(0.6, 0), Complex(0.8, 0);
  auto reg = encodeAmplitudes(jk4(), EncodingKind::E1111, in);
  auto tree = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return switchEncoding1111to1221(reg, ch); });
  CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-12));
  int successes = 0;
  for (const auto& leaf : tree.leaves) {
    // step 1 (x) outcomes occur with probability 1/2 each
    CHECK(leaf.record[0].step == "x");
    CHECK(leaf.record[0].probability == doctest::Approx(0.5).epsilon(1e-12));
    if (!leaf.outcome.success) continue;
    ++successes;
    const int x = leaf.outcome.labels.at("x");
    Vec out = decode1221(*leaf.outcome.state);
    Vec want = printedP(x) * in;
    want.normalize();
    CHECK(vecPhaseDist(out, want) < 1e-10);
    // the leaf probability equals the collapse weight |P^(x) psi|^2
    const Vec raw = printedP(x) * in;
    CHECK(leaf.probability == doctest::Approx(raw.squaredNorm()).epsilon(1e-10));
  }
  CHECK(successes == 2);
}

TEST_CASE("merge: forced measurement with exact product amplitudes") {
  Vec a(2), b(2);
  a << Complex(0.6, 0), Complex(0, 0.8);
  b << Complex(0.28, -0.6), Complex(0.36, 0.66);
  b.normalize();
  auto regA = encodeAmplitudes(jk4(), EncodingKind::E1221, a);
  auto regB = encodeAmplitudes(jk4(), EncodingKind::E1221, b);
  Vec prod(4);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) prod[2 * p + q] = a[p] * b[q];

  for (int n = 1; n <= 8; ++n) {
    auto tree = buildBranchTree<double>(
        [&](Chooser<double>& ch) { return mergeTo122221(regA, regB, ch, n); });
    CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-10));
    double failMass = 0;
    for (const auto& leaf : tree.leaves) {
      if (!leaf.outcome.success) {
        failMass += leaf.probability;
        continue;
      }
      // per-attempt success probability is >= 1/3 at the final x measurement
      for (const auto& r : leaf.record)
        if (r.step == "x" && r.outcome == 0) CHECK(r.probability >= 1.0 / 3 - 1e-12);
      Vec out(4);
      const int lab[2] = {1, 3};
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          out[2 * p + q] = leaf.outcome.state->amplitude({1, lab[p], 1, lab[q], 1, 0});
      if (leaf.script == std::vector<int>{0}) {
        CHECK((out - prod).norm() < 1e-10);  // direct path is exact
      } else {
        CHECK(vecPhaseDist(out, prod) < 1e-10);
      }
    }
    CHECK(failMass <= std::pow(2.0 / 3.0, n) + 1e-12);
  }
}

TEST_CASE("split inverts merge") {
  Vec a(2), b(2);
  a << Complex(0.6, 0), Complex(0.8, 0);
  b << Complex(0.0, 1.0), Complex(0.0, 0.0);
  auto regA = encodeAmplitudes(jk4(), EncodingKind::E1221, a);
  auto regB = encodeAmplitudes(jk4(), EncodingKind::E1221, b);
  ForcedChooser<double> direct({0});
  auto merged = mergeTo122221(regA, regB, direct);
  REQUIRE(merged.success);
  auto tree = buildBranchTree<double>([&](Chooser<double>& ch) {
    return splitTo1221Pair(QubitRegister<double>{EncodingKind::E122221, *merged.state}, ch, 8);
  });
  CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-10));
  double successMass = 0;
  for (const auto& leaf : tree.leaves) {
    if (!leaf.outcome.success) continue;
    successMass += leaf.probability;
    Vec out = decodePair(*leaf.outcome.state);
    Vec prod(4);
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) prod[2 * p + q] = a[p] * b[q];
    CHECK(vecPhaseDist(out, prod) < 1e-10);
  }
  CHECK(successMass >= 1 - std::pow(2.0 / 3.0, 8) - 1e-12);
}

TEST_CASE("TQF applies Q^(z); z = 2 probability is state independent") {
  std::vector<Vec> inputs;
  {
    Vec v(4);
    v << 1, 0, 0, 0;
    inputs.push_back(v);
    v << 0, 1, 0, 0;
    inputs.push_back(v);
    v << 0.5, 0.5, 0.5, -0.5;
    inputs.push_back(v);
    v << Complex(0.1, 0.3), Complex(-0.4, 0.2), Complex(0.5, 0.5), Complex(0.2, -0.4);
    v.normalize();
    inputs.push_back(v);
  }
  double zmin = 1, zmax = 0;
  for (const Vec& psi : inputs) {
    // build the 122221 register directly
    AnyonState<double> st(jk4(), {1, 2, 2, 2, 2, 1}, 0);
    const int lab[2] = {1, 3};
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        st.setAmplitude({1, lab[p], 1, lab[q], 1, 0}, psi[2 * p + q]);
    auto tree = buildBranchTree<double>([&](Chooser<double>& ch) {
      return tqf(QubitRegister<double>{EncodingKind::E122221, st}, ch, 5);
    });
    CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-10));
    const double p0 = std::norm(psi[0]) + std::norm(psi[3]);
    const double p4 = std::norm(psi[1]) + std::norm(psi[2]);
    double m0 = 0, m4 = 0;
    for (const auto& leaf : tree.leaves) {
      CHECK(leaf.record[0].step == "z");
      zmin = std::min(zmin, leaf.record[0].probability);
      if (leaf.record[0].outcome == 2) zmax = std::max(zmax, leaf.record[0].probability);
      if (!leaf.outcome.success) continue;
      const int z = leaf.outcome.labels.at("z");
      (z == 0 ? m0 : m4) += leaf.probability;
      Vec out = decode1221(*leaf.outcome.state);
      Vec want(2);
      if (z == 0)
        want << psi[0], psi[3];
      else
        want << psi[1], psi[2];
      want.normalize();
      CHECK(vecPhaseDist(out, want) < 1e-10);
      // per-attempt conditionals: z = 0 with p0/2, z = 4 with p4/2
      const double firstZ = leaf.record[0].probability;
      if (leaf.record[0].outcome == 0) CHECK(firstZ == doctest::Approx(p0 / 2).epsilon(1e-10));
      if (leaf.record[0].outcome == 4) CHECK(firstZ == doctest::Approx(p4 / 2).epsilon(1e-10));
    }
    // eventual outcome probabilities: p0 vs p4 split is exact at any attempt
    // cap since each z = 2 excursion preserves the encoded ratios
    if (m0 + m4 > 0) {
      CHECK(m0 / (m0 + m4) == doctest::Approx(p0).epsilon(1e-9));
      CHECK(m4 / (m0 + m4) == doctest::Approx(p4).epsilon(1e-9));
    }
  }
  // the z = 2 conditional is exactly 1/2 regardless of the encoded state
  CHECK(std::abs(zmax - 0.5) < 1e-12);
  CHECK(zmax - 0.5 < 1e-12);
}

TEST_CASE("phase-gate conversion: R_{+phi/2} and R_{-phi/2} equally likely") {
  RngStream rng(2024);
  Vec psi(2);
  psi << Complex(0.48, 0.36), Complex(0.6, -0.52);
  psi.normalize();
  for (int trial = 0; trial < 5; ++trial) {
    const double phi = 2 * M_PI * rng.uniform() - M_PI;
    auto comp = encodeAmplitudes(jk4(), EncodingKind::E1221, psi);
    auto anc = encodeAmplitudes(jk4(), EncodingKind::E1221, AncillaLibrary<double>::rPhi(phi));
    // direct-path branches: merge succeeds immediately, then z in {0, 4}
    for (int z : {0, 4}) {
      ScriptChooser<double> ch({0, z});
      auto res = convertStateToPhaseGate(comp, anc, phi, ch);
      REQUIRE(res.success);
      CHECK(res.labels.at("z") == z);
      // both phase branches have equal per-attempt conditional p0/2 = 1/4
      // (the remaining 1/2 is the z = 2 retry channel), so the eventual
      // +phi/-phi split is 1/2 each
      for (const auto& r : res.record)
        if (r.step == "z") CHECK(r.probability == doctest::Approx(0.25).epsilon(1e-10));
      M2 rphi;
      rphi << 1, 0, 0, std::polar(1.0, z == 0 ? phi : -phi);
      Vec want = rphi * psi;
      CHECK(vecPhaseDist(decode1221(*res.state), want) < 1e-10);
    }
  }
  // malformed ancilla is rejected
  auto comp = encodeAmplitudes(jk4(), EncodingKind::E1221, psi);
  auto bad = encode(jk4(), EncodingKind::E1221, {0});
  ScriptChooser<double> ch({0, 0});
  CHECK_THROWS_AS(convertStateToPhaseGate(comp, bad, 0.7, ch), std::invalid_argument);
}

TEST_CASE("phase gates compose to the identity for opposite angles") {
  Vec psi(2);
  psi << Complex(0.6, 0.0), Complex(0.0, 0.8);
  const double phi = 1.234;
  auto comp = encodeAmplitudes(jk4(), EncodingKind::E1221, psi);
  ScriptChooser<double> ch1({0, 0});
  auto first = convertStateToPhaseGate(
      comp, encodeAmplitudes(jk4(), EncodingKind::E1221, AncillaLibrary<double>::rPhi(phi)), phi,
      ch1);
  REQUIRE(first.success);
  ScriptChooser<double> ch2({0, 0});
  auto second = convertStateToPhaseGate(
      QubitRegister<double>{EncodingKind::E1221, *first.state},
      encodeAmplitudes(jk4(), EncodingKind::E1221, AncillaLibrary<double>::rPhi(-phi)), -phi, ch2);
  REQUIRE(second.success);
  CHECK(vecPhaseDist(decode1221(*second.state), psi) < 1e-10);
}

TEST_CASE("prepare |2>: first-attempt success is exactly 2/3") {
  auto tree = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return prepareState2(jk4(), ch, 6); });
  CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-10));
  double successMass = 0, firstTry = 0;
  for (const auto& leaf : tree.leaves) {
    if (!leaf.outcome.success) continue;
    successMass += leaf.probability;
    if (leaf.outcome.attempts == 1) firstTry += leaf.probability;
    // the prepared state is |2> in the 1111 encoding
    Vec out = decode(QubitRegister<double>{EncodingKind::E1111, *leaf.outcome.state});
    Vec want(2);
    want << 0, 1;
    CHECK(vecPhaseDist(out, want) < 1e-10);
  }
  CHECK(firstTry == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(successMass >= 1 - std::pow(2.0 / 3.0, 3));
}

TEST_CASE("prepare |Phi_{s,x}> matches the closed forms") {
  for (int s : {+1, -1}) {
    auto tree = buildBranchTree<double>(
        [&](Chooser<double>& ch) { return preparePhi(jk4(), s, ch, 4); });
    CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-10));
    const Vec want =
        (s > 0) ? AncillaLibrary<double>::phiPlus1() : AncillaLibrary<double>::phiMinus3();
    int successes = 0;
    for (const auto& leaf : tree.leaves) {
      if (!leaf.outcome.success) continue;
      ++successes;
      CHECK(vecPhaseDist(decode1221(*leaf.outcome.state), want) < 1e-10);
    }
    CHECK(successes > 0);
  }
}

TEST_CASE("prepare |K>: success branches give the irrational state") {
  auto tree = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return prepareK(jk4(), ch, 3); });
  CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-10));
  const Vec want = AncillaLibrary<double>::kState();
  double pz0 = 0, pz4 = 0;
  bool sawFirstZ = false;
  for (const auto& leaf : tree.leaves) {
    for (std::size_t i = 0; i < leaf.record.size(); ++i)
      if (leaf.record[i].step == "z" && !sawFirstZ && leaf.script.size() >= 1 &&
          leaf.script[0] == 0 && leaf.record[i].outcome == 0) {
        // conditional probability of z = 0 on the direct path: p0/2 = 0.21
        CHECK(leaf.record[i].probability == doctest::Approx(0.21).epsilon(1e-10));
        sawFirstZ = true;
      }
    auto it = leaf.outcome.labels.find("z");
    if (it != leaf.outcome.labels.end()) (it->second == 0 ? pz0 : pz4) += leaf.probability;
    if (!leaf.outcome.success) continue;
    CHECK(leaf.outcome.labels.at("z") == 0);
    CHECK(vecPhaseDist(decode1221(*leaf.outcome.state), want) < 1e-10);
  }
  CHECK(sawFirstZ);
  // eventual z split: p(z = 0) = 0.42, p(z = 4) = 0.58
  CHECK(pz0 / (pz0 + pz4) == doctest::Approx(0.42).epsilon(1e-9));
  // |K> is also (1/sqrt2)(e^{-i alpha/2}|1> + e^{i alpha/2}|3>) with
  // e^{i alpha} = (-1 + i 4 sqrt(3))/7
  const Complex eia = std::polar(1.0, AncillaLibrary<double>::alpha());
  CHECK(std::abs(eia - Complex(-1.0 / 7, 4 * std::sqrt(3.0) / 7)) < 1e-12);
}

TEST_CASE("prepare |+>: both measurement branches land on |+>") {
  auto tree = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return preparePlus(jk4(), ch); });
  CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tree.leaves.size() == 2);
  for (const auto& leaf : tree.leaves) {
    CHECK(leaf.probability == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(vecPhaseDist(decode1221(*leaf.outcome.state), AncillaLibrary<double>::plus()) < 1e-10);
  }
}

TEST_CASE("Bell preparation: |+>|+> -> |Phi+> -> |Phi_H>") {
  GateMatrix<double> ident{M2::Identity()};
  auto treeBell = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return prepareBellThenPhiH(jk4(), ident, ch, 2); });
  CHECK(treeBell.totalProbability() == doctest::Approx(1.0).epsilon(1e-10));
  double successMass = 0;
  for (const auto& leaf : treeBell.leaves) {
    for (const auto& r : leaf.record)
      if (r.step == "r" && r.outcome == 0)
        CHECK(r.probability == doctest::Approx(1.0 / 6).epsilon(1e-10));
    if (!leaf.outcome.success) continue;
    successMass += leaf.probability;
    CHECK(vecPhaseDist(decodePair(*leaf.outcome.state), AncillaLibrary<double>::bellPhiPlus()) <
          1e-10);
  }
  CHECK(successMass == doctest::Approx(1 - std::pow(5.0 / 6, 2)).epsilon(1e-10));

  GateMatrix<double> h{GateSet<double>::fromModel(jk4()).H};
  auto treeH = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return prepareBellThenPhiH(jk4(), h, ch, 1); });
  for (const auto& leaf : treeH.leaves) {
    if (!leaf.outcome.success) continue;
    CHECK(vecPhaseDist(decodePair(*leaf.outcome.state), AncillaLibrary<double>::phiH()) < 1e-10);
  }
}

TEST_CASE("controlled-Z: every (z1, z2) branch acts as diag(1,1,1,-1)") {
  // build the ancilla |Phi_H> as an exact two-qubit chain state
  AnyonState<double> phiH(jk4(), {1, 2, 2, 1, 1, 2, 2, 1}, 0);
  {
    const Vec v = AncillaLibrary<double>::phiH();
    const int lab[2] = {1, 3};
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        phiH.setAmplitude({1, lab[p], 1, 0, 1, lab[q], 1, 0}, v[2 * p + q]);
  }
  Eigen::Matrix4cd cz = Eigen::Matrix4cd::Identity();
  cz(3, 3) = -1;
  for (int z1 : {0, 4})
    for (int z2 : {0, 4}) {
      Eigen::Matrix4cd got;
      for (int col = 0; col < 4; ++col) {
        Vec a = Vec::Zero(2), b = Vec::Zero(2);
        a[(col >> 1) & 1] = 1;
        b[col & 1] = 1;
        auto regA = encodeAmplitudes(jk4(), EncodingKind::E1221, a);
        auto regB = encodeAmplitudes(jk4(), EncodingKind::E1221, b);
        ScriptChooser<double> ch({0, z1, 0, z2});  // merge x=0, z1, merge x=0, z2
        auto res = applyCZ(regA, regB, phiH, ch);
        REQUIRE(res.success);
        CHECK(res.labels.at("z1") == z1);
        CHECK(res.labels.at("z2") == z2);
        got.col(col) = decodePair(*res.state);
      }
      GateMatrix<double> g{got}, w{cz};
      CHECK((g.phaseCanonical() - w.phaseCanonical()).norm() < 1e-10);
    }
  // superposition input through a full branch sample agrees with C(Z)
  Vec a(2), b(2);
  a << Complex(0.6, 0), Complex(0, 0.8);
  b << Complex(0.8, 0), Complex(-0.6, 0);
  auto regA = encodeAmplitudes(jk4(), EncodingKind::E1221, a);
  auto regB = encodeAmplitudes(jk4(), EncodingKind::E1221, b);
  StochasticChooser<double> ch(RngStream(5));
  auto res = applyCZ(regA, regB, phiH, ch);
  REQUIRE(res.success);
  Vec prod(4);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) prod[2 * p + q] = a[p] * b[q];
  CHECK(vecPhaseDist(decodePair(*res.state), (cz * prod).eval()) < 1e-10);
  // malformed ancilla rejected
  AnyonState<double> notPhiH(jk4(), {1, 2, 2, 1, 1, 2, 2, 1}, 0);
  notPhiH.setAmplitude({1, 1, 1, 0, 1, 1, 1, 0}, Complex(1, 0));
  StochasticChooser<double> ch2(RngStream(6));
  CHECK_THROWS_AS(applyCZ(regA, regB, notPhiH, ch2), std::invalid_argument);
}

TEST_CASE("K-gate random walk: success probability from the branch tree") {
  // full simulation, budget 1: conditional on the merge/fusion machinery
  // completing, z = 0 (success) and z = 4 are equally likely
  auto tree = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return kGateRandomWalk(jk4(), 1, ch, true, 3); });
  CHECK(tree.totalProbability() == doctest::Approx(1.0).epsilon(1e-10));
  double success = 0, retreat = 0;
  for (const auto& leaf : tree.leaves) {
    if (leaf.outcome.success) {
      success += leaf.probability;
      CHECK(leaf.outcome.labels.at("net_k_power") == 1);
    } else if (leaf.outcome.labels.count("net_k_power")) {
      CHECK(leaf.outcome.labels.at("net_k_power") == -1);
      retreat += leaf.probability;
    }
  }
  CHECK(success / (success + retreat) == doctest::Approx(0.5).epsilon(1e-10));
  // the fast path realizes the first-passage law exactly:
  // budget 3 succeeds with probability 1 - 3!!/4!! = 5/8
  auto fast = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return kGateRandomWalk(jk4(), 3, ch, false); });
  double fastSuccess = 0;
  for (const auto& leaf : fast.leaves)
    if (leaf.outcome.success) fastSuccess += leaf.probability;
  CHECK(fastSuccess == doctest::Approx(5.0 / 8).epsilon(1e-12));
}

TEST_CASE("stochastic execution matches the branch tree distribution") {
  Vec in(2);
  in << Complex(0.6, 0), Complex(0.8, 0);
  auto reg = encodeAmplitudes(jk4(), EncodingKind::E1111, in);
  auto tree = buildBranchTree<double>(
      [&](Chooser<double>& ch) { return switchEncoding1111to1221(reg, ch); });
  std::map<std::vector<int>, double> exact;
  for (const auto& leaf : tree.leaves) exact[leaf.script] = leaf.probability;
  const int shots = 20000;
  std::map<std::vector<int>, int> counts;
  for (int s = 0; s < shots; ++s) {
    StochasticChooser<double> ch(RngStream::substream(31, s));
    auto res = switchEncoding1111to1221(reg, ch);
    std::vector<int> sig;
    for (const auto& r : res.record) sig.push_back(r.outcome);
    counts[sig]++;
  }
  for (const auto& [sig, p] : exact) {
    const double sd = std::sqrt(p * (1 - p) * shots);
    CHECK(std::abs(counts[sig] - p * shots) < 4 * sd + 1);
  }
}
