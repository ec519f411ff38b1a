#pragma once

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "anyonkit/json_io.hpp"

namespace anyonkit::cli {

struct CliResult {
  int exitCode = 0;
  std::string out;
  std::string err;
};

inline double defaultTol() {
  if (const char* env = std::getenv("ANYONKIT_TOL")) return std::atof(env);
  return 1e-9;
}

inline Family parseFamily(const std::string& s) {
  if (s == "jk") return Family::JK;
  if (s == "su2") return Family::SU2;
  throw CLI::ValidationError("--family", "must be jk or su2");
}

// Fixed, documented inputs for the named protocol runs.
template <typename Real = double>
std::function<ProtocolOutcome<Real>(Chooser<Real>&)> makeProtocolRunner(
    const AnyonModel<Real>& model, const std::string& name, Real phi, int walkBudget,
    int maxAttempts) {
  using Vec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
  auto vec2 = [](Real a, Real b) {
    Vec v(2);
    v << a, b;
    return v;
  };
  if (name == "switch-encoding") {
    return [&model, vec2](Chooser<Real>& ch) {
      auto reg = encodeAmplitudes(model, EncodingKind::E1111, vec2(Real(0.6), Real(0.8)));
      return switchEncoding1111to1221(reg, ch);
    };
  }
  if (name == "merge") {
    return [&model, vec2, maxAttempts](Chooser<Real>& ch) {
      auto a = encodeAmplitudes(model, EncodingKind::E1221, AncillaLibrary<Real>::plus());
      auto b = encodeAmplitudes(model, EncodingKind::E1221, vec2(Real(0.6), Real(0.8)));
      return mergeTo122221(a, b, ch, maxAttempts);
    };
  }
  if (name == "split") {
    return [&model, vec2, maxAttempts](Chooser<Real>& ch) {
      Vec v(4);
      const Real r = Real(1) / std::sqrt(Real(2));
      v << r * Real(0.6), r * Real(0.8), r * Real(0.6), r * Real(0.8);
      auto reg = encodeAmplitudes(model, EncodingKind::E122221, v);
      return splitTo1221Pair(reg, ch, maxAttempts);
    };
  }
  if (name == "tqf") {
    return [&model, maxAttempts](Chooser<Real>& ch) {
      Vec v(4);
      v << Real(0.5), Real(0.5), Real(0.5), Real(-0.5);
      auto reg = encodeAmplitudes(model, EncodingKind::E122221, v);
      return tqf(reg, ch, maxAttempts);
    };
  }
  if (name == "phase-gate") {
    return [&model, phi, maxAttempts](Chooser<Real>& ch) {
      auto comp = encodeAmplitudes(model, EncodingKind::E1221, AncillaLibrary<Real>::plus());
      auto anc = encodeAmplitudes(model, EncodingKind::E1221, AncillaLibrary<Real>::rPhi(phi));
      return convertStateToPhaseGate(comp, anc, phi, ch, maxAttempts);
    };
  }
  if (name == "prepare-k") {
    return [&model, maxAttempts](Chooser<Real>& ch) { return prepareK(model, ch, maxAttempts); };
  }
  if (name == "k-walk") {
    return [&model, walkBudget, maxAttempts](Chooser<Real>& ch) {
      return kGateRandomWalk(model, walkBudget, ch, true, maxAttempts);
    };
  }
  if (name == "bell") {
    return [&model, maxAttempts](Chooser<Real>& ch) {
      GateSet<Real> g = GateSet<Real>::fromModel(model);
      GateMatrix<Real> h{g.H};
      return prepareBellThenPhiH(model, h, ch, maxAttempts);
    };
  }
  if (name == "cz") {
    return [&model, maxAttempts](Chooser<Real>& ch) {
      auto a = encodeAmplitudes(model, EncodingKind::E1221, AncillaLibrary<Real>::plus());
      auto b = encodeAmplitudes(model, EncodingKind::E1221, AncillaLibrary<Real>::plus());
      AnyonState<double> anc(model, {1, 2, 2, 1, 1, 2, 2, 1}, 0);
      const int labels[2] = {1, 3};
      auto target = AncillaLibrary<Real>::phiH();
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          anc.setAmplitude({1, labels[p], 1, 0, 1, labels[q], 1, 0}, target[2 * p + q]);
      return applyCZ(a, b, anc, ch, maxAttempts);
    };
  }
  throw CLI::ValidationError("--name", "unknown protocol " + name);
}

inline std::string branchSignature(const std::vector<StepRecord<double>>& rec) {
  std::string s;
  for (const auto& r : rec) {
    if (!s.empty()) s += ",";
    s += r.step + "=" + std::to_string(r.outcome);
  }
  return s;
}

inline CliResult run(const std::vector<std::string>& args) {
  CliResult result;
  std::ostringstream out, err;

  CLI::App app{"anyonkit: SU(2)_k / Jones-Kauffman anyon model simulator"};
  app.require_subcommand(1);

  // shared flag storage
  std::string family = "jk", format = "json", output, encodingName = "1221", protoName, setName,
              target = "H", kList = "1,2,10,100,500";
  int level = 4;
  bool conjugate = false;
  double tol = defaultTol();
  std::uint64_t seed = 0;
  long long shots = 1, trials = 0;
  double phi = M_PI / 4;
  int maxAttempts = 64, walkN = 7, threads = 1, cap = 10000, maxLen = 16;
  double eps = 0.05;

  auto* model = app.add_subcommand("model", "model data and verification");
  auto* modelDump = model->add_subcommand("dump", "emit full model data");
  modelDump->add_option("--family", family)->check(CLI::IsMember({"jk", "su2"}));
  modelDump->add_option("--level", level)->check(CLI::PositiveNumber);
  modelDump->add_flag("--conjugate", conjugate);
  modelDump->add_option("--format", format)->check(CLI::IsMember({"json"}));
  modelDump->add_option("--output", output);
  auto* modelVerify = model->add_subcommand("verify", "run the consistency checks");
  modelVerify->add_option("--family", family)->check(CLI::IsMember({"jk", "su2"}));
  modelVerify->add_option("--level", level)->check(CLI::PositiveNumber);
  modelVerify->add_flag("--conjugate", conjugate);
  modelVerify->add_option("--tol", tol);
  modelVerify->add_option("--format", format)->check(CLI::IsMember({"json"}));
  modelVerify->add_option("--output", output);

  auto* gates = app.add_subcommand("gates", "encoded gate matrices");
  auto* gatesDump = gates->add_subcommand("dump", "emit generated gate matrices");
  gatesDump->add_option("--encoding", encodingName)->check(CLI::IsMember({"1111", "1221"}));
  gatesDump->add_option("--format", format)->check(CLI::IsMember({"json"}));
  gatesDump->add_option("--output", output);

  auto* protocol = app.add_subcommand("protocol", "protocol execution");
  auto* protoRun = protocol->add_subcommand("run", "seeded stochastic shots");
  protoRun->add_option("--name", protoName)
      ->required()
      ->check(CLI::IsMember({"switch-encoding", "merge", "split", "tqf", "phase-gate", "prepare-k",
                             "k-walk", "bell", "cz"}));
  protoRun->add_option("--seed", seed);
  protoRun->add_option("--shots", shots)->check(CLI::PositiveNumber);
  protoRun->add_option("--phi", phi);
  protoRun->add_option("--n", walkN)->check(CLI::PositiveNumber);
  protoRun->add_option("--max-attempts", maxAttempts)->check(CLI::PositiveNumber);
  protoRun->add_option("--threads", threads)->check(CLI::PositiveNumber);
  protoRun->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  protoRun->add_option("--output", output);
  auto* protoBranches = protocol->add_subcommand("branches", "exact branch enumeration");
  protoBranches->add_option("--name", protoName)
      ->required()
      ->check(CLI::IsMember({"switch-encoding", "merge", "split", "tqf", "phase-gate", "prepare-k",
                             "k-walk", "bell", "cz"}));
  protoBranches->add_option("--phi", phi);
  protoBranches->add_option("--n", walkN)->check(CLI::PositiveNumber);
  maxAttempts = 64;
  int branchAttempts = 4;
  protoBranches->add_option("--max-attempts", branchAttempts)->check(CLI::PositiveNumber);
  protoBranches->add_option("--format", format)->check(CLI::IsMember({"json"}));
  protoBranches->add_option("--output", output);

  auto* analyze = app.add_subcommand("analyze", "closure / walk / bqp analyses");
  auto* anClosure = analyze->add_subcommand("closure", "gate group closure");
  anClosure->add_option("--set", setName)
      ->required()
      ->check(CLI::IsMember({"braid1111", "braid1221", "xzb", "zbk"}));
  anClosure->add_option("--cap", cap)->check(CLI::PositiveNumber);
  anClosure->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  anClosure->add_option("--output", output);
  auto* anWalk = analyze->add_subcommand("walk", "never-positive walk probability");
  anWalk->add_option("--n", walkN)->required()->check(CLI::PositiveNumber);
  anWalk->add_option("--trials", trials);
  anWalk->add_option("--seed", seed);
  anWalk->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  anWalk->add_option("--output", output);
  auto* anBqp = analyze->add_subcommand("bqp", "(1 - p_fail(k))^k convergence");
  anBqp->add_option("--k", kList);
  anBqp->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  anBqp->add_option("--output", output);

  auto* synth = app.add_subcommand("synth", "gate-word synthesis");
  synth->add_option("--target", target)->check(CLI::IsMember({"H", "Z", "X"}));
  synth->add_option("--eps", eps);
  synth->add_option("--max-len", maxLen)->check(CLI::PositiveNumber);
  synth->add_option("--format", format)->check(CLI::IsMember({"json"}));
  synth->add_option("--output", output);

  std::vector<std::string> argvRev(args.rbegin(), args.rend());
  try {
    app.parse(argvRev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help;
    if (e.get_exit_code() == 0) {
      // --help
      result.out = app.help();
      result.exitCode = 0;
      return result;
    }
    result.err = std::string(e.what()) + "\n" + app.help();
    result.exitCode = 2;
    return result;
  }

  int exitCode = 0;
  try {
    json payload;

    if (modelDump->parsed()) {
      AnyonModel<double> m({parseFamily(family), level, conjugate});
      payload = modelToJson(m);
    } else if (modelVerify->parsed()) {
      AnyonModel<double> m({parseFamily(family), level, conjugate});
      ConsistencyReport rep = m.verifyConsistency(tol);
      payload = reportToJson(rep);
      payload["spec"] = specToJson(m.spec());
      if (!rep.pass()) exitCode = 1;
    } else if (gatesDump->parsed()) {
      AnyonModel<double> m({Family::JK, 4, false});
      payload["encoding"] = encodingName;
      if (encodingName == "1111") {
        payload["gates"]["R"] = gateToJson(braidGate1111(m, 'R'));
        payload["gates"]["G"] = gateToJson(braidGate1111(m, 'G'));
      } else {
        payload["gates"]["Z"] = gateToJson(braidGate1221(m, 'Z'));
        payload["gates"]["B"] = gateToJson(braidGate1221(m, 'B'));
        payload["gates"]["X"] = gateToJson(xGateMatrix(m));
      }
    } else if (protoRun->parsed()) {
      AnyonModel<double> m({Family::JK, 4, false});
      auto runner = makeProtocolRunner(m, protoName, phi, walkN, maxAttempts);
      std::vector<ProtocolOutcome<double>> results(shots);
      auto work = [&](long long lo, long long hi) {
        for (long long s = lo; s < hi; ++s) {
          StochasticChooser<double> ch(RngStream::substream(seed, static_cast<std::uint64_t>(s)));
          results[s] = runner(ch);
        }
      };
      if (threads <= 1) {
        work(0, shots);
      } else {
        std::vector<std::thread> pool;
        const long long chunk = (shots + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
          const long long lo = t * chunk, hi = std::min<long long>(shots, lo + chunk);
          if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
      }
      std::map<std::string, long long> counts;
      long long successes = 0;
      for (const auto& r : results) {
        counts[branchSignature(r.record)]++;
        if (r.success) ++successes;
      }
      payload["protocol"] = protoName;
      payload["seed"] = seed;
      payload["shots"] = shots;
      payload["records"] = recordToJson(results.front().record);
      payload["aggregate"] = json::object();
      for (const auto& [sig, c] : counts)
        payload["aggregate"][sig] = static_cast<double>(c) / static_cast<double>(shots);
      payload["successRate"] = static_cast<double>(successes) / static_cast<double>(shots);
      if (format == "csv") {
        std::ostringstream csv;
        csv << "branch,frequency,count\n";
        for (const auto& [sig, c] : counts)
          csv << '"' << sig << "\"," << (static_cast<double>(c) / static_cast<double>(shots)) << ','
              << c << '\n';
        out << csv.str();
      }
    } else if (protoBranches->parsed()) {
      AnyonModel<double> m({Family::JK, 4, false});
      auto runner = makeProtocolRunner(m, protoName, phi, walkN, branchAttempts);
      BranchTree<double> tree = buildBranchTree<double>(runner);
      payload["protocol"] = protoName;
      payload["maxAttempts"] = branchAttempts;
      payload["totalProbability"] = tree.totalProbability();
      payload["leaves"] = json::array();
      for (const auto& leaf : tree.leaves) {
        json l;
        l["script"] = leaf.script;
        l["probability"] = leaf.probability;
        l["success"] = leaf.outcome.success;
        l["records"] = recordToJson(leaf.record);
        payload["leaves"].push_back(l);
      }
    } else if (anClosure->parsed()) {
      AnyonModel<double> m({Family::JK, 4, false});
      GateSet<double> g = GateSet<double>::fromModel(m);
      std::vector<Mat2<double>> gens;
      if (setName == "braid1111") gens = {g.R, g.G};
      else if (setName == "braid1221") gens = {g.Z, g.B};
      else if (setName == "xzb") gens = {g.X, g.Z, g.B};
      else gens = {g.Z, g.B, g.K};
      auto res = closeGroup(gens, 1e-8, cap);
      payload["set"] = setName;
      payload["closed"] = res.closed;
      payload["count"] = res.closed ? static_cast<int>(res.elements.size()) : -1;
      payload["cap"] = cap;
      payload["verdict"] = res.closed ? "finite" : "possibly-infinite";
      if (res.closed) {
        payload["elements"] = json::array();
        for (const auto& e : res.elements)
          payload["elements"].push_back(
              matrixToJson<double>(Eigen::MatrixXcd(e)));
      }
      if (format == "csv") {
        out << "set,closed,count,cap\n"
            << setName << ',' << (res.closed ? "true" : "false") << ','
            << (res.closed ? static_cast<int>(res.elements.size()) : -1) << ',' << cap << '\n';
      }
    } else if (anWalk->parsed()) {
      int n = walkN;
      if (n % 2 == 0) --n;  // probability identical for n and n+1; evaluate at odd n
      WalkStats st = walkExact(n);
      payload["nRequested"] = walkN;
      payload["n"] = st.n;
      payload["m"] = st.m;
      payload["neverPositiveProb"] = st.neverPositiveProb;
      payload["recurrenceProb"] = st.recurrenceProb;
      payload["exactCounts"] = st.exactCounts;
      if (st.exactCounts) {
        payload["neverPositiveCount"] = st.neverPositiveCount;
        payload["pathCounts"] = json::object();
        for (const auto& [x, c] : st.pathCounts) payload["pathCounts"][std::to_string(x)] = c;
      }
      if (trials > 0) {
        payload["trials"] = trials;
        payload["monteCarloProb"] = walkMonteCarlo(st.n, trials, RngStream::substream(seed, 0));
      }
      if (format == "csv") {
        out << "n,m,neverPositiveProb,monteCarloProb,trials\n"
            << st.n << ',' << st.m << ',' << st.neverPositiveProb << ',';
        if (trials > 0)
          out << payload["monteCarloProb"].get<double>() << ',' << trials << '\n';
        else
          out << "," << 0 << '\n';
      }
    } else if (anBqp->parsed()) {
      std::vector<long long> ks;
      std::stringstream ss(kList);
      std::string tok;
      while (std::getline(ss, tok, ',')) ks.push_back(std::stoll(tok));
      auto pts = bqpLimit(ks);
      payload["limit"] = bqpLimitConstant();
      payload["points"] = json::array();
      for (const auto& p : pts)
        payload["points"].push_back(json{{"k", p.k}, {"pFail", p.pFail}, {"value", p.value}});
      if (format == "csv") {
        out << "k,pFail,value,limit\n";
        for (const auto& p : pts)
          out << p.k << ',' << p.pFail << ',' << p.value << ',' << bqpLimitConstant() << '\n';
      }
    } else if (synth->parsed()) {
      AnyonModel<double> m({Family::JK, 4, false});
      GateSet<double> g = GateSet<double>::fromModel(m);
      Mat2<double> tgt;
      if (target == "H") tgt = g.H;
      else if (target == "Z") tgt = g.Z;
      else tgt = g.X;
      auto word = synthesizeWord(g, tgt, "ZBbKk", maxLen, eps);
      payload["target"] = target;
      payload["eps"] = eps;
      payload["maxLength"] = maxLen;
      payload["found"] = word.has_value();
      if (word) {
        payload["word"] = word->letters;
        payload["length"] = static_cast<int>(word->letters.size());
        payload["kCount"] = word->kCount;
        payload["distance"] = word->distance;
      } else {
        exitCode = 1;
      }
    }

    if (format != "csv") out << payload.dump(2) << '\n';

    if (!output.empty()) {
      std::ofstream f(output, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open output file " + output);
      f << out.str();
      result.out.clear();
    } else {
      result.out = out.str();
    }
    result.exitCode = exitCode;
  } catch (const std::exception& e) {
    if (format == "json")
      err << json{{"error", e.what()}}.dump() << '\n';
    else
      err << "error: " << e.what() << '\n';
    result.err = err.str();
    result.exitCode = 1;
    return result;
  }
  result.err = err.str();
  return result;
}

}  // namespace anyonkit::cli
