#pragma once

#include <complex>
#include <nlohmann/json.hpp>
#include <string>

#include "anyonkit/analysis.hpp"
#include "anyonkit/encoding.hpp"
#include "anyonkit/model.hpp"
#include "anyonkit/protocol.hpp"
#include "anyonkit/state.hpp"

namespace anyonkit {

using nlohmann::json;

template <typename Real>
json complexToJson(const std::complex<Real>& z) {
  return json{{"re", z.real()}, {"im", z.imag()}};
}

template <typename Real>
json matrixToJson(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complexToJson(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline json specToJson(const TheorySpec& s) {
  return json{{"family", familyName(s.family)}, {"level", s.level}, {"conjugate", s.conjugate}};
}

template <typename Real>
json modelToJson(const AnyonModel<Real>& m) {
  const int n = m.numCharges();
  json j;
  j["spec"] = specToJson(m.spec());
  j["charges"] = json::array();
  for (int a = 0; a < n; ++a) j["charges"].push_back(a);
  json fusion = json::array();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (m.fusionMultiplicity(a, b, c)) fusion.push_back(json::array({a, b, c}));
  j["fusion"] = fusion;
  json fs = json::array();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          for (int e = 0; e < n; ++e)
            for (int f = 0; f < n; ++f) {
              auto v = m.fSymbol(a, b, c, d, e, f);
              if (std::abs(v) < 1e-15) continue;
              fs.push_back(json{{"idx", json::array({a, b, c, d, e, f})},
                                {"re", v.real()},
                                {"im", v.imag()}});
            }
  j["fSymbols"] = fs;
  json rs = json::array();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (m.fusionMultiplicity(a, b, c)) {
          auto v = m.rSymbol(a, b, c);
          rs.push_back(json{{"idx", json::array({a, b, c})}, {"re", v.real()}, {"im", v.imag()}});
        }
  j["rSymbols"] = rs;
  json qd = json::array();
  for (int a = 0; a < n; ++a) qd.push_back(m.qdim(a));
  j["qdims"] = qd;
  j["totalDim"] = m.totalDim();
  json tw = json::array();
  for (int a = 0; a < n; ++a) tw.push_back(complexToJson(m.twist(a)));
  j["twists"] = tw;
  j["sMatrix"] = matrixToJson<Real>(m.sMatrix());
  json fr = json::array();
  for (int a = 0; a < n; ++a) fr.push_back(m.frobSchur(a));
  j["frobSchur"] = fr;
  return j;
}

inline json reportToJson(const ConsistencyReport& rep) {
  json j;
  j["tol"] = rep.tol;
  j["pass"] = rep.pass();
  j["residuals"] = json::object();
  for (const auto& [name, r] : rep.residuals) j["residuals"][name] = r;
  j["violations"] = rep.violations;
  return j;
}

template <typename Real>
json stateToJson(const AnyonState<Real>& st) {
  json j;
  j["externals"] = st.externals();
  j["total"] = st.total();
  json terms = json::array();
  for (const auto& [k, v] : st.amplitudes()) {
    json t;
    // internal labels c_2..c_{n-1}
    t["internals"] = std::vector<int>(k.begin() + 1, k.end() - 1);
    t["re"] = v.real();
    t["im"] = v.imag();
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j;
}

template <typename Real>
json gateToJson(const GateMatrix<Real>& g) {
  json j;
  j["entries"] = matrixToJson<Real>(g.entries);
  typename GateMatrix<Real>::Mat pc = g.phaseCanonical();
  j["phaseCanonical"] = matrixToJson<Real>(pc);
  return j;
}

template <typename Real>
json recordToJson(const std::vector<StepRecord<Real>>& rec) {
  json arr = json::array();
  for (const auto& r : rec)
    arr.push_back(json{{"step", r.step}, {"outcome", r.outcome}, {"prob", r.probability}});
  return arr;
}

}  // namespace anyonkit
