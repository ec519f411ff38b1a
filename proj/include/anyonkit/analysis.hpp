#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "anyonkit/encoding.hpp"
#include "anyonkit/rng.hpp"

namespace anyonkit {

template <typename Real = double>
using Mat2 = Eigen::Matrix<std::complex<Real>, 2, 2>;

// Global-phase canonical form of a 2x2 unitary: first nonzero entry
// (row-major) positive real.
template <typename Real>
Mat2<Real> canon2(const Mat2<Real>& m, Real tol = Real(1e-8)) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (std::abs(m(r, c)) > tol) return m * (std::abs(m(r, c)) / m(r, c));
  return m;
}

template <typename Real>
Real projectiveDistance(const Mat2<Real>& u, const Mat2<Real>& v) {
  const std::complex<Real> tr = (u.adjoint() * v).trace();
  const std::complex<Real> ph = std::abs(tr) < 1e-15 ? std::complex<Real>(1, 0) : tr / std::abs(tr);
  return (u * ph - v).norm();
}

// The single-qubit gate set in the conventions of the 1111/1221
// encodings; braid gates derived from model data, K from the closed form.
template <typename Real = double>
struct GateSet {
  Mat2<Real> R, G, Z, B, X, K, H;

  static GateSet fromModel(const AnyonModel<Real>& m) {
    GateSet g;
    g.R = braidGate1111(m, 'R').entries;
    g.G = braidGate1111(m, 'G').entries;
    g.Z = braidGate1221(m, 'Z').entries;
    g.B = braidGate1221(m, 'B').entries;
    g.X = xGateMatrix(m).entries;
    const Real alpha = std::arg(std::complex<Real>(-1, 4 * std::sqrt(Real(3))) / Real(7));
    g.K << std::polar(Real(1), -alpha / 2), 0, 0, std::polar(Real(1), alpha / 2);
    g.H << Real(1) / std::sqrt(Real(2)), Real(1) / std::sqrt(Real(2)),
        Real(1) / std::sqrt(Real(2)), -Real(1) / std::sqrt(Real(2));
    return g;
  }
};

template <typename Real = double>
struct ClosureResult {
  std::vector<Mat2<Real>> elements;  // phase-canonical representatives
  bool closed = false;               // false when the cap was hit
  int cap = 10000;
};

// BFS closure of <generators> under multiplication with phase-canonical
// dedup; stops with closed = false once `cap` distinct elements appear.
template <typename Real = double>
ClosureResult<Real> closeGroup(const std::vector<Mat2<Real>>& generators, Real tol = Real(1e-8),
                               int cap = 10000) {
  ClosureResult<Real> res;
  res.cap = cap;
  auto find = [&](const Mat2<Real>& m) -> bool {
    for (const auto& e : res.elements)
      if ((canon2(m) - e).norm() < 10 * tol) return true;
    return false;
  };
  std::vector<Mat2<Real>> frontier = {Mat2<Real>::Identity()};
  res.elements.push_back(canon2(frontier[0]));
  while (!frontier.empty()) {
    std::vector<Mat2<Real>> next;
    for (const auto& e : frontier)
      for (const auto& g : generators) {
        Mat2<Real> p = e * g;
        if (find(p)) continue;
        res.elements.push_back(canon2(p));
        next.push_back(p);
        if (static_cast<int>(res.elements.size()) > cap) return res;  // closed = false
      }
    frontier = std::move(next);
  }
  res.closed = true;
  return res;
}

// Evidence that <B, K> generates a dense subgroup: the nested group
// commutator [[B, K^-1], [B, K]] is far from the identity, and alpha/2pi
// shows no terminating continued fraction at double precision.
template <typename Real = double>
struct DensityWitnessReport {
  double commutatorDistance = 0;
  double cosAlpha = 0;
  std::complex<double> expIAlpha;
  std::vector<long long> continuedFraction;
  bool terminated = false;  // continued fraction hit an exact rational
};

template <typename Real = double>
DensityWitnessReport<Real> densityWitness(const GateSet<Real>& g, int cfDepth = 20) {
  DensityWitnessReport<Real> rep;
  auto comm = [](const Mat2<Real>& a, const Mat2<Real>& b) -> Mat2<Real> {
    return a.inverse() * b.inverse() * a * b;
  };
  Mat2<Real> c = comm(comm(g.B, Mat2<Real>(g.K.inverse())), comm(g.B, g.K));
  rep.commutatorDistance = (c - Mat2<Real>::Identity()).norm();
  const Real alpha = std::arg(std::complex<Real>(-1, 4 * std::sqrt(Real(3))) / Real(7));
  rep.cosAlpha = std::cos(alpha);
  rep.expIAlpha = std::polar(1.0, static_cast<double>(alpha));
  double x = alpha / (2 * M_PI);
  x -= std::floor(x);
  for (int i = 0; i < cfDepth; ++i) {
    const double inv = 1.0 / x;
    const long long a0 = static_cast<long long>(std::floor(inv));
    rep.continuedFraction.push_back(a0);
    x = inv - a0;
    if (x < 1e-12) {
      rep.terminated = true;
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Random-walk mathematics
// ---------------------------------------------------------------------------

struct WalkStats {
  int n = 0;                                 // odd number of steps, n = 2m - 1
  int m = 0;
  double neverPositiveProb = 0;              // p_+^{(m)}: closed form, log-space
  double recurrenceProb = 0;                 // same from the N_x recurrence
  std::map<int, unsigned long long> pathCounts;  // N_x^{(m)}, exact for m <= 32
  unsigned long long neverPositiveCount = 0;     // N_+^{(m)}
  long double totalPathsLog2 = 0;            // log2 of 2^{2m-1}
  bool exactCounts = false;
};

// Closed form (2m-1)!!/(2m)!! evaluated in log space.
inline double walkClosedForm(int m) {
  return std::exp(std::lgamma(m + 0.5) - std::lgamma(m + 1.0)) / std::sqrt(M_PI);
}

inline WalkStats walkExact(int n) {
  if (n < 1 || n % 2 == 0) throw std::domain_error("walkExact needs odd n >= 1");
  WalkStats st;
  st.n = n;
  st.m = (n + 1) / 2;
  st.neverPositiveProb = walkClosedForm(st.m);
  st.totalPathsLog2 = 2 * st.m - 1;
  if (st.m <= 32) {
    // N_1^{(m+1)} = 2 N_1 + N_3; N_x^{(m+1)} = N_{x-2} + 2 N_x + N_{x+2}
    std::map<int, unsigned long long> N = {{1, 1}};
    for (int step = 1; step < st.m; ++step) {
      std::map<int, unsigned long long> next;
      const int xmax = N.rbegin()->first + 2;
      for (int x = 1; x <= xmax; x += 2) {
        unsigned long long v;
        auto get = [&](int y) -> unsigned long long {
          auto it = N.find(y);
          return it == N.end() ? 0ull : it->second;
        };
        if (x == 1)
          v = 2 * get(1) + get(3);
        else
          v = get(x - 2) + 2 * get(x) + get(x + 2);
        if (v) next[x] = v;
      }
      N = std::move(next);
    }
    st.pathCounts = N;
    for (const auto& [x, c] : N) st.neverPositiveCount += c;
    st.recurrenceProb = static_cast<double>(st.neverPositiveCount) / std::ldexp(1.0, 2 * st.m - 1);
    st.exactCounts = true;
  } else {
    st.recurrenceProb = st.neverPositiveProb;
  }
  return st;
}

// Fraction of symmetric +-1 walks never going positive within n steps.
inline double walkMonteCarlo(int n, long long trials, RngStream rng) {
  long long never = 0;
  for (long long t = 0; t < trials; ++t) {
    int pos = 0;
    bool ok = true;
    for (int s = 0; s < n; ++s) {
      pos += (rng.next() & 1) ? 1 : -1;
      if (pos > 0) {
        ok = false;
        break;
      }
    }
    if (ok) ++never;
  }
  return static_cast<double>(never) / static_cast<double>(trials);
}

// (1 - p_fail(k))^k with p_fail evaluated at the largest odd n <= k^2
// (the never-positive probability is constant across each even/odd pair).
struct BqpPoint {
  long long k;
  double pFail;
  double value;
};

inline std::vector<BqpPoint> bqpLimit(const std::vector<long long>& ks) {
  std::vector<BqpPoint> out;
  for (long long k : ks) {
    long long n = k * k;
    if (n % 2 == 0) --n;
    const long long m = (n + 1) / 2;
    const double logp = std::lgamma(m + 0.5) - std::lgamma(m + 1.0) - 0.5 * std::log(M_PI);
    const double pf = std::exp(logp);
    const double v = std::exp(static_cast<double>(k) * std::log1p(-pf));
    out.push_back({k, pf, v});
  }
  return out;
}

inline double bqpLimitConstant() { return std::exp(-std::sqrt(2.0 / M_PI)); }

// ---------------------------------------------------------------------------
// Gate-word synthesis (meet in the middle)
// ---------------------------------------------------------------------------

template <typename Real = double>
struct GateWord {
  std::string letters;  // Z B K plus lowercase b, k for inverses
  Mat2<Real> value;
  double distance = 0;  // projective distance to the target
  int kCount = 0;
};

namespace detail {

template <typename Real>
std::vector<std::pair<std::string, Mat2<Real>>> generatorTable(const GateSet<Real>& g,
                                                               const std::string& alphabet) {
  std::vector<std::pair<std::string, Mat2<Real>>> out;
  for (char c : alphabet) {
    switch (c) {
      case 'Z': out.push_back({"Z", g.Z}); break;
      case 'B': out.push_back({"B", g.B}); break;
      case 'b': out.push_back({"b", Mat2<Real>(g.B.inverse())}); break;
      case 'K': out.push_back({"K", g.K}); break;
      case 'k': out.push_back({"k", Mat2<Real>(g.K.inverse())}); break;
      case 'X': out.push_back({"X", g.X}); break;
      default: throw std::invalid_argument(std::string("unknown generator ") + c);
    }
  }
  return out;
}

inline bool cancels(char prev, char nxt) {
  return (prev == 'B' && nxt == 'b') || (prev == 'b' && nxt == 'B') ||
         (prev == 'K' && nxt == 'k') || (prev == 'k' && nxt == 'K') ||
         (prev == 'Z' && nxt == 'Z');
}

}  // namespace detail

// Breadth-first word list up to `depth` letters with free reduction of
// trivial backtracking.
template <typename Real>
std::vector<std::pair<std::string, Mat2<Real>>> enumerateWords(const GateSet<Real>& g,
                                                               const std::string& alphabet,
                                                               int depth) {
  auto gens = detail::generatorTable(g, alphabet);
  std::vector<std::pair<std::string, Mat2<Real>>> all = {{"", Mat2<Real>::Identity()}};
  std::vector<std::pair<std::string, Mat2<Real>>> level = all;
  for (int d = 0; d < depth; ++d) {
    std::vector<std::pair<std::string, Mat2<Real>>> next;
    for (const auto& [w, m] : level)
      for (const auto& [gn, gm] : gens) {
        if (!w.empty() && detail::cancels(w.back(), gn[0])) continue;
        next.push_back({w + gn, m * gm});
      }
    all.insert(all.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return all;
}

// Find a word over `alphabet` within eps of the target (projectively).
// Meet-in-the-middle: left half times right half, with the right halves
// bucketed on a coarse grid of phase-canonical entries.
template <typename Real = double>
std::optional<GateWord<Real>> synthesizeWord(const GateSet<Real>& g, const Mat2<Real>& target,
                                             const std::string& alphabet = "ZBbKk",
                                             int maxLength = 16, Real eps = Real(0.05)) {
  const int half = std::min(8, (maxLength + 1) / 2);
  auto words = enumerateWords(g, alphabet, half);
  GateWord<Real> best;
  best.distance = 1e18;

  auto consider = [&](const std::string& w, const Mat2<Real>& m) {
    if (static_cast<int>(w.size()) > maxLength) return;
    const Real d = projectiveDistance(m, target);
    if (d < best.distance) {
      best.letters = w;
      best.value = m;
      best.distance = static_cast<double>(d);
    }
  };

  for (const auto& [w, m] : words) consider(w, m);

  if (best.distance >= eps) {
    auto key = [&](const Mat2<Real>& m) {
      Mat2<Real> c = canon2(m);
      std::int64_t k = 0;
      for (int r = 0; r < 2; ++r)
        for (int cc = 0; cc < 2; ++cc) {
          k = k * 1315423911 + static_cast<std::int64_t>(std::llround(c(r, cc).real() * 10));
          k = k * 1315423911 + static_cast<std::int64_t>(std::llround(c(r, cc).imag() * 10));
        }
      return k;
    };
    std::unordered_map<std::int64_t, std::vector<int>> buckets;
    for (int i = 0; i < static_cast<int>(words.size()); ++i)
      buckets[key(words[i].second)].push_back(i);
    for (const auto& [wl, ml] : words) {
      const Mat2<Real> residual = ml.inverse() * target;
      auto it = buckets.find(key(residual));
      if (it == buckets.end()) continue;
      for (int idx : it->second) {
        const auto& [wr, mr] = words[idx];
        consider(wl + wr, ml * mr);
        if (best.distance < eps) break;
      }
      if (best.distance < eps) break;
    }
  }

  if (best.distance >= eps) return std::nullopt;
  for (char c : best.letters)
    if (c == 'K' || c == 'k') ++best.kCount;
  return best;
}

}  // namespace anyonkit
