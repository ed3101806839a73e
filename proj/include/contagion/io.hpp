#pragma once

// File formats.
//
//   counts CSV       header `a_bits,b_bits,count`, one row per nonzero outcome,
//                    bits written first time step first; sidecar `<path>.json`
//                    holds {T, M, generator, seed, config}
//   frequency JSON   {T, generator, probabilities: [2^{2T} numbers], config}
//   certificate JSON {gamma, c, lambdas: [{exponents, value}],
//                    model: {T, delta, varset}, d_max, tolerances, lp}
//   observable JSON  array of 2^{2T} numbers

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contagion/equality.hpp"
#include "contagion/errors.hpp"
#include "contagion/exchangeability.hpp"
#include "contagion/handelman.hpp"
#include "contagion/model.hpp"
#include "contagion/simulate.hpp"
#include "contagion/stats.hpp"

namespace contagion {

using json = nlohmann::json;

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw UsageError("write failed for '" + path.string() + "'");
}

inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw UsageError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".json");
}

// ---------------------------------------------------------------------------
// Distributions

inline std::string counts_to_csv(const EmpiricalDistribution& emp) {
  std::ostringstream out;
  out << "a_bits,b_bits,count\n";
  for (std::size_t k = 0; k < emp.counts.size(); ++k) {
    if (emp.counts[k] == 0) continue;
    const auto o = OutcomeIndex::from_linear(k, emp.T);
    out << seq_to_string(o.a) << ',' << seq_to_string(o.b) << ',' << emp.counts[k] << '\n';
  }
  return out.str();
}

inline EmpiricalDistribution counts_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::optional<EmpiricalDistribution> emp;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("a_bits", 0) == 0)) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw UsageError("counts CSV line " + std::to_string(lineno) + ": expected a_bits,b_bits,count");
    }
    const BitSeq sa = parse_bits(a), sb = parse_bits(b);
    if (sa.size() != sb.size()) throw UsageError("counts CSV line " + std::to_string(lineno) + ": A and B lengths differ");
    if (!emp) {
      const int T = static_cast<int>(sa.size());
      if (T < 1 || T > 8) throw UsageError("counts CSV: sequence length must be in [1, 8]");
      emp.emplace(T);
    }
    if (static_cast<int>(sa.size()) != emp->T) throw UsageError("counts CSV line " + std::to_string(lineno) + ": inconsistent length");
    std::uint64_t n = 0;
    try {
      std::size_t used = 0;
      if (!c.empty() && c[0] == '-') throw std::invalid_argument("negative");
      n = std::stoull(c, &used);
      if (used != c.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("counts CSV line " + std::to_string(lineno) + ": bad count '" + c + "'");
    }
    emp->counts[OutcomeIndex{sa, sb}.linear()] += n;
  }
  if (!emp) throw UsageError("counts CSV has no data rows");
  return *emp;
}

inline void write_counts(const std::filesystem::path& path, const EmpiricalDistribution& emp,
                         const json& config = json::object()) {
  write_text(path, counts_to_csv(emp));
  write_json(sidecar_path(path),
             {{"T", emp.T}, {"M", emp.M()}, {"generator", emp.generator}, {"seed", emp.seed}, {"config", config}});
}

inline EmpiricalDistribution read_counts(const std::filesystem::path& path) {
  EmpiricalDistribution emp = counts_from_csv(read_text(path));
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const json meta = read_json(side);
    if (meta.contains("T") && meta["T"].get<int>() != emp.T) {
      throw UsageError("sidecar T does not match the CSV sequence length");
    }
    if (meta.contains("M") && meta["M"].get<std::uint64_t>() != emp.M()) {
      throw UsageError("sidecar M does not match the CSV total count");
    }
    emp.generator = meta.value("generator", std::string{});
    emp.seed = meta.value("seed", std::uint64_t{0});
  }
  return emp;
}

inline void write_frequencies(const std::filesystem::path& path, int T, const std::vector<double>& p,
                              const std::string& generator, const json& config = json::object()) {
  write_json(path, {{"T", T}, {"generator", generator}, {"probabilities", p}, {"config", config}});
}

/// Input to the testing commands: a frequency vector, plus counts when the
/// source was sampled data.
struct DataInput {
  int T = 4;
  std::vector<double> p;
  std::optional<EmpiricalDistribution> counts;
  std::string source;

  std::uint64_t M() const {
    if (!counts) throw UsageError("'" + source + "' holds exact probabilities, not counts");
    return counts->M();
  }
};

inline DataInput load_data(const std::filesystem::path& path) {
  DataInput in;
  in.source = path.string();
  if (path.extension() == ".json") {
    const json j = read_json(path);
    if (!j.contains("probabilities") || !j.contains("T")) {
      throw UsageError("frequency JSON needs fields T and probabilities");
    }
    in.T = j["T"].get<int>();
    in.p = j["probabilities"].get<std::vector<double>>();
    if (in.p.size() != outcome_count(in.T)) throw UsageError("frequency JSON: wrong number of probabilities");
    return in;
  }
  in.counts = read_counts(path);
  in.T = in.counts->T;
  in.p = in.counts->frequencies();
  return in;
}

// ---------------------------------------------------------------------------
// Certificates

inline json as_json(const Certificate& cert) {
  json lambdas = json::array();
  for (const auto& lt : cert.lambdas) lambdas.push_back({{"exponents", lt.exponents}, {"value", lt.value}});
  json delta = nullptr;
  if (cert.delta) delta = {{"lo", cert.delta->lo}, {"hi", cert.delta->hi}};
  return {
      {"gamma", cert.gamma},
      {"c", cert.c},
      {"lambdas", lambdas},
      {"model", {{"T", cert.T}, {"delta", delta}, {"varset", cert.varset}}},
      {"d_max", cert.d_max},
      {"tolerances",
       {{"solver", cert.tolerances.solver},
        {"symbolic", cert.tolerances.symbolic},
        {"pointwise", cert.tolerances.pointwise},
        {"spot_checks", cert.tolerances.spot_checks}}},
      {"lp",
       {{"status", cert.lp.status},
        {"rows", cert.lp.rows},
        {"cols", cert.lp.cols},
        {"iterations", cert.lp.iterations},
        {"residual", cert.lp.residual}}},
  };
}

inline Certificate certificate_from_json(const json& j) {
  try {
    Certificate cert;
    cert.gamma = j.at("gamma").get<double>();
    cert.c = j.at("c").get<std::vector<double>>();
    for (const auto& lt : j.at("lambdas")) {
      cert.lambdas.push_back({lt.at("exponents").get<std::vector<int>>(), lt.at("value").get<double>()});
    }
    const auto& m = j.at("model");
    cert.T = m.at("T").get<int>();
    if (!m.at("delta").is_null()) cert.delta = DeltaInterval{m["delta"].at("lo"), m["delta"].at("hi")};
    cert.varset = m.at("varset").get<std::vector<std::string>>();
    cert.d_max = j.at("d_max").get<int>();
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      cert.tolerances.solver = t.value("solver", cert.tolerances.solver);
      cert.tolerances.symbolic = t.value("symbolic", cert.tolerances.symbolic);
      cert.tolerances.pointwise = t.value("pointwise", cert.tolerances.pointwise);
      cert.tolerances.spot_checks = t.value("spot_checks", cert.tolerances.spot_checks);
    }
    if (j.contains("lp")) {
      const auto& l = j["lp"];
      cert.lp = {l.value("status", std::string{}), l.value("rows", std::size_t{0}), l.value("cols", std::size_t{0}),
                 l.value("iterations", std::size_t{0}), l.value("residual", 0.0)};
    }
    const ModelClass mc = cert.model();
    if (cert.varset != mc.vars()->names()) throw UsageError("certificate varset does not match its model class");
    if (cert.c.size() != mc.outcomes()) throw UsageError("certificate observable has the wrong length");
    const std::size_t s = build_generators<double>(mc).size();
    for (const auto& lt : cert.lambdas) {
      if (lt.exponents.size() != s) throw UsageError("certificate lambda exponent vector has the wrong length");
    }
    return cert;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed certificate: ") + e.what());
  }
}

inline json as_json(const BoundCertificate& cert) {
  json lambdas = json::array();
  for (const auto& lt : cert.lambdas) lambdas.push_back({{"exponents", lt.exponents}, {"value", lt.value}});
  return {{"gamma", cert.gamma}, {"d_max", cert.d_max}, {"lambdas", lambdas}};
}

inline json as_json(const ValidationReport& rep) {
  return {{"valid", rep.valid},
          {"signs_ok", rep.signs_ok},
          {"max_residual", rep.max_residual},
          {"min_slack", std::isfinite(rep.min_slack) ? json(rep.min_slack) : json(nullptr)},
          {"offending_monomials", rep.offending_monomials},
          {"offending_points", rep.offending_points},
          {"messages", rep.messages}};
}

// ---------------------------------------------------------------------------
// Reports

inline json as_json(const TestVerdict& v, const json& config = json::object()) {
  json j = {{"test", v.test}, {"model", v.model}, {"statistic", v.statistic},
            {"decision", v.reject ? "reject" : "fail-to-reject"}, {"config", config}};
  if (v.test == "distance") {
    j["ratio"] = v.ratio;
    j["threshold"] = v.threshold;
    j["multiple"] = v.multiple;
  } else {
    j["n_plus"] = v.n_plus;
    j["n_minus"] = v.n_minus;
    j["p_value_log10"] = v.log10_p;
    j["p_value"] = v.p_value;
    j["alternative"] = v.alternative;
    j["degenerate"] = v.degenerate;
  }
  return j;
}

inline json as_json(const JpeReport& rep, std::size_t max_pairs = 50) {
  json pairs = json::array();
  for (std::size_t i = 0; i < rep.pairs.size() && i < max_pairs; ++i) {
    const auto& pt = rep.pairs[i];
    const auto x = OutcomeIndex::from_linear(pt.first, rep.T);
    const auto y = OutcomeIndex::from_linear(pt.second, rep.T);
    pairs.push_back({{"indices", {pt.first, pt.second}},
                     {"outcomes",
                      {{{"a", seq_to_string(x.a)}, {"b", seq_to_string(x.b)}},
                       {{"a", seq_to_string(y.a)}, {"b", seq_to_string(y.b)}}}},
                     {"counts", {pt.count_first, pt.count_second}},
                     {"p_value", pt.p_value}});
  }
  return {{"variant", describe(rep.variant)},
          {"T", rep.T},
          {"M", rep.M},
          {"equalities", rep.pairs.size()},
          {"pairs", pairs},
          {"min_p_value", rep.min_p},
          {"bonferroni_min_p_value", rep.min_adjusted_p},
          {"alpha", rep.alpha},
          {"decision", rep.reject ? "reject" : "fail-to-reject"}};
}

inline Observable observable_from_json(const json& j, int T) {
  Observable c{T, {}};
  try {
    c.values = j.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("observable must be a JSON array of numbers: ") + e.what());
  }
  if (c.values.size() != outcome_count(T)) throw UsageError("observable has the wrong length for T");
  for (double v : c.values) {
    if (!(std::fabs(v) <= 1.0)) throw UsageError("observable entries must lie in [-1, 1]");
  }
  return c;
}

}  // namespace contagion
