// contagion: simulate dyad data, search for witnesses, and run the
// pre-registered and exchangeability tests.
//
// Exit codes: 0 ok, 1 invalid certificate, 2 usage, 3 resource limit,
// 4 solver failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contagion/contagion.hpp"

using namespace contagion;

namespace {

struct ClassOptions {
  std::string kind = "non-causal";
  double delta_lo = 0.0;
  double delta_hi = 0.0;

  ModelClass make(int T) const {
    if (kind == "non-causal") return ModelClass::non_causal(T);
    if (kind == "delta") return ModelClass::delta_causal(T, delta_lo, delta_hi);
    throw UsageError("--class must be non-causal or delta");
  }
  json as_json() const { return {{"class", kind}, {"delta_lo", delta_lo}, {"delta_hi", delta_hi}}; }
};

void add_class_options(CLI::App* cmd, ClassOptions& o) {
  cmd->add_option("--class", o.kind, "model class: non-causal or delta")->check(CLI::IsMember({"non-causal", "delta"}));
  cmd->add_option("--delta-lo", o.delta_lo, "lower bound on the treatment effect (delta class)");
  cmd->add_option("--delta-hi", o.delta_hi, "upper bound on the treatment effect (delta class)");
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") std::cout << j.dump(2) << "\n";
  else write_json(out, j);
}

// --------------------------------------------------------------------------

struct SimulateArgs {
  std::string model;
  int T = 4;
  double delta = 0.5;
  std::uint64_t M = 400'000;
  std::uint64_t seed = 1;
  bool exact = false;
  std::string out;
  std::size_t nodes = 0;
  std::size_t sweeps = 1;
};

int run_simulate(const SimulateArgs& a) {
  json config = {{"command", "simulate"}, {"model", a.model}, {"T", a.T}, {"M", a.M}, {"seed", a.seed},
                 {"exact", a.exact}, {"delta", a.delta}, {"nodes", a.nodes}, {"sweeps_per_epoch", a.sweeps}};
  if (a.out.empty()) throw UsageError("simulate: --out is required");
  if (a.model == "delayed" || a.model == "instant") {
    const InfluenceModel m{a.model == "delayed" ? InfluenceKind::Delayed : InfluenceKind::Instant, a.delta, a.T};
    const auto p = exact_distribution(m);
    if (a.exact) {
      write_frequencies(a.out, a.T, p, a.model, config);
      return 0;
    }
    auto emp = sample_counts(p, a.T, a.M, a.seed);
    emp.generator = a.model;
    write_counts(a.out, emp, config);
    return 0;
  }
  if (a.exact) throw UsageError("simulate: --exact applies only to delayed and instant models");
  EmpiricalDistribution emp;
  if (a.model == "copying") {
    CopyingConfig cfg;
    cfg.T = a.T;
    cfg.M = a.M;
    cfg.seed = a.seed;
    cfg.sweeps_per_epoch = a.sweeps;
    if (a.nodes) cfg.nodes = a.nodes;
    emp = simulate_copying(cfg);
  } else {
    LatentHomophilyConfig cfg;
    cfg.T = a.T;
    cfg.M = a.M;
    cfg.seed = a.seed;
    if (a.nodes) cfg.nodes = a.nodes;
    emp = simulate_latent_homophily(cfg);
  }
  write_counts(a.out, emp, config);
  return 0;
}

// --------------------------------------------------------------------------

struct FindArgs {
  std::string in;
  ClassOptions cls;
  int d_max = 3;
  bool sweep = false;
  double multiple = 3.0;
  std::uint64_t seed = 20130101;
  std::string cert_out;
  std::string out;
};

int run_find_test(const FindArgs& a) {
  const DataInput data = load_data(a.in);
  const ModelClass mc = a.cls.make(data.T);
  json config = {{"command", "find-test"}, {"in", a.in}, {"d_max", a.d_max}, {"sweep", a.sweep},
                 {"multiple", a.multiple}, {"seed", a.seed}};
  config.update(a.cls.as_json());

  json series = json::array();
  std::optional<Certificate> best;
  const int first = a.sweep ? 0 : a.d_max;
  for (int d = first; d <= a.d_max; ++d) {
    Certificate cert = find_witness(data.p, mc, d);
    const double ratio = cert.c_norm() > 0 ? cert.gamma / cert.c_norm() : 0.0;
    series.push_back({{"d_max", d}, {"gamma", cert.gamma}, {"ratio", ratio}, {"lp_iterations", cert.lp.iterations}});
    best = std::move(cert);
  }
  const ValidationReport rep = validate_certificate(*best, data.p, a.seed);
  json result = {{"config", config}, {"gamma_by_degree", series}, {"validation", as_json(rep)}};
  result["certificate_summary"] = {{"gamma", best->gamma}, {"c_norm", best->c_norm()}, {"d_max", best->d_max}};
  if (data.counts) {
    result["verdict"] = as_json(distance_verdict(*best, *data.counts, a.multiple), config);
  } else {
    result["verdict"] = nullptr;
    result["note"] = "exact probabilities carry no sample size; no distance verdict";
  }
  if (!a.cert_out.empty()) {
    json cj = as_json(*best);
    cj["config"] = config;
    write_json(a.cert_out, cj);
  }
  emit(result, a.out);
  return rep.valid ? 0 : 4;
}

// --------------------------------------------------------------------------

struct EqualityArgs {
  std::string in;
  std::string observable;
  std::string alternative = "two-sided";
  double alpha = 0.01;
  ClassOptions cls;
  int T = 4;
  bool exact_space = true;
  std::string out;
};

int run_check_equalities(const EqualityArgs& a) {
  json config = {{"command", "check-equalities"}, {"in", a.in}, {"observable", a.observable},
                 {"alternative", a.alternative}, {"alpha", a.alpha}, {"T", a.T}};
  config.update(a.cls.as_json());
  if (a.in.empty()) {
    // No data: report the equality space of the class.
    const ModelClass mc = a.cls.make(a.T);
    const auto space = a.exact_space ? equality_space<Rational>(mc).dimension()
                                     : equality_space<double>(mc).dimension();
    emit({{"config", config}, {"model", mc.describe()}, {"null_space_dimension", space},
          {"mode", a.exact_space ? "exact" : "float"}},
         a.out);
    return 0;
  }
  if (a.observable.empty()) throw UsageError("check-equalities: --observable is required with --in");
  const DataInput data = load_data(a.in);
  Observable c = (a.observable == "c1" || a.observable == "c2") ? canned_observable(a.observable)
                                                                 : observable_from_json(read_json(a.observable), data.T);
  if (c.size() != data.p.size()) throw UsageError("observable length does not match the data horizon");
  const double mean = expectation(c, data.p);
  const auto M = build_M<double>(ModelClass::non_causal(data.T));
  json result = {{"config", config}, {"expectation", mean},
                 {"null_space_residual", projection_residual(M, c.values)}};
  if (data.counts) {
    Alternative alt = Alternative::TwoSided;
    if (a.alternative == "greater") alt = Alternative::Greater;
    else if (a.alternative == "less") alt = Alternative::Less;
    bool signed_unit = true;
    for (double v : c.values) signed_unit = signed_unit && (v == 0.0 || v == 1.0 || v == -1.0);
    if (signed_unit) {
      result["verdict"] = as_json(binomial_sign_test(*data.counts, c.values, alt, a.alpha), config);
    }
    result["hoeffding_log10_p"] = hoeffding_log_p(mean, data.counts->M()) / std::log(10.0);
  }
  emit(result, a.out);
  return 0;
}

// --------------------------------------------------------------------------

struct JpeArgs {
  std::string in;
  int variant = 1;
  double alpha = 0.05;
  std::size_t scale = 1'000'000;
  std::size_t max_pairs = 50;
  std::string out;
};

int run_jpe(const JpeArgs& a) {
  const DataInput data = load_data(a.in);
  EmpiricalDistribution emp(data.T);
  if (data.counts) {
    emp = *data.counts;
  } else {
    // Exact probabilities are scaled to pseudo-counts.
    for (std::size_t i = 0; i < data.p.size(); ++i) {
      emp.counts[i] = static_cast<std::uint64_t>(std::llround(data.p[i] * static_cast<double>(a.scale)));
    }
  }
  const JpeReport rep = jpe_test(emp, variant_from_int(a.variant), a.alpha);
  json result = as_json(rep, a.max_pairs);
  result["config"] = {{"command", "jpe"}, {"in", a.in}, {"variant", a.variant}, {"alpha", a.alpha},
                      {"scale", data.counts ? json(nullptr) : json(a.scale)}};
  emit(result, a.out);
  return 0;
}

// --------------------------------------------------------------------------

struct CertifyArgs {
  std::string cert;
  std::string in;
  std::uint64_t seed = 20130101;
  std::string out;
};

int run_certify(const CertifyArgs& a) {
  const Certificate cert = certificate_from_json(read_json(a.cert));
  const DataInput data = load_data(a.in);
  if (data.T != cert.T) throw UsageError("certificate horizon does not match the data");
  const ValidationReport rep = validate_certificate(cert, data.p, a.seed);
  json result = {{"config", {{"command", "certify"}, {"cert", a.cert}, {"in", a.in}, {"seed", a.seed}}},
                 {"validation", as_json(rep)},
                 {"gamma", cert.gamma}};
  emit(result, a.out);
  return rep.valid ? 0 : 1;
}

// --------------------------------------------------------------------------

struct ThresholdArgs {
  std::vector<std::uint64_t> Ms{1000, 10000, 100000, 400000};
  int runs = 50;
  int T = 4;
  std::string reference;
  std::uint64_t seed = 1;
};

int run_threshold(const ThresholdArgs& a) {
  const std::vector<double> uniform(outcome_count(a.T), 1.0 / static_cast<double>(outcome_count(a.T)));
  std::optional<std::vector<double>> ref;
  if (!a.reference.empty()) {
    ref = load_data(a.reference).p;
    if (ref->size() != uniform.size()) throw UsageError("reference distribution has the wrong horizon");
  }
  std::cout << "M,inverse_sqrt_M,uniform" << (ref ? ",reference" : "") << "\n";
  for (auto M : a.Ms) {
    std::cout << M << ',' << sampling_threshold(M) << ',' << calibrate_threshold(uniform, M, a.runs, a.seed);
    if (ref) std::cout << ',' << calibrate_threshold(*ref, M, a.runs, a.seed);
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tests for social contagion against latent homophily"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "generate exact or sampled dyad data");
  s->add_option("--model", sim.model, "delayed, instant, copying or latent-homophily")
      ->required()
      ->check(CLI::IsMember({"delayed", "instant", "copying", "latent-homophily"}));
  s->add_option("--T", sim.T, "observation horizon");
  s->add_option("--delta", sim.delta, "influence strength (delayed/instant)");
  s->add_option("--M", sim.M, "number of dyad samples");
  s->add_option("--seed", sim.seed, "master RNG seed");
  s->add_flag("--exact", sim.exact, "write exact probabilities instead of samples");
  s->add_option("--nodes", sim.nodes, "nodes per graph realization");
  s->add_option("--sweeps", sim.sweeps, "copy sweeps between observations (copying)");
  s->add_option("--out", sim.out, "output path (.csv for counts, .json for exact)");

  FindArgs fa;
  auto* f = app.add_subcommand("find-test", "search for a witness and decide by distance");
  f->add_option("--in", fa.in, "counts CSV or frequency JSON")->required();
  add_class_options(f, fa.cls);
  f->add_option("--d-max", fa.d_max, "Handelman degree budget")->check(CLI::Range(0, 12));
  f->add_flag("--sweep", fa.sweep, "solve every degree from 0 to d-max and report gamma for each");
  f->add_option("--multiple", fa.multiple, "rejection multiple of the sampling threshold");
  f->add_option("--seed", fa.seed, "seed for validation spot checks");
  f->add_option("--cert", fa.cert_out, "write the certificate here");
  f->add_option("--out", fa.out, "write the report here (default stdout)");

  EqualityArgs ea;
  auto* e = app.add_subcommand("check-equalities", "pre-registered observables and equality spaces");
  e->add_option("--in", ea.in, "counts CSV or frequency JSON (omit to report the equality space)");
  e->add_option("--observable", ea.observable, "c1, c2, or a JSON array file");
  e->add_option("--alternative", ea.alternative, "two-sided, greater or less")
      ->check(CLI::IsMember({"two-sided", "greater", "less"}));
  e->add_option("--alpha", ea.alpha, "significance level for the sign test");
  e->add_option("--T", ea.T, "horizon when reporting the equality space");
  e->add_flag("--exact,!--float", ea.exact_space, "exact elimination (default) or SVD for the equality space");
  add_class_options(e, ea.cls);
  e->add_option("--out", ea.out, "write the report here (default stdout)");

  JpeArgs ja;
  auto* j = app.add_subcommand("jpe", "joint partial exchangeability tests");
  j->add_option("--in", ja.in, "counts CSV or frequency JSON")->required();
  j->add_option("--variant", ja.variant, "model variant 1-4")->check(CLI::Range(1, 4));
  j->add_option("--alpha", ja.alpha, "family-wise significance level");
  j->add_option("--scale", ja.scale, "pseudo-count total for exact inputs");
  j->add_option("--max-pairs", ja.max_pairs, "number of pairs listed in the report");
  j->add_option("--out", ja.out, "write the report here (default stdout)");

  CertifyArgs ca;
  auto* c = app.add_subcommand("certify", "validate a witness certificate");
  c->add_option("--cert", ca.cert, "certificate JSON")->required();
  c->add_option("--in", ca.in, "data the certificate was built for")->required();
  c->add_option("--seed", ca.seed, "seed for spot checks");
  c->add_option("--out", ca.out, "write the report here (default stdout)");

  ThresholdArgs ta;
  auto* t = app.add_subcommand("threshold", "sampling-noise curve as CSV");
  t->add_option("--M", ta.Ms, "sample sizes");
  t->add_option("--runs", ta.runs, "Monte Carlo draws per sample size");
  t->add_option("--T", ta.T, "horizon");
  t->add_option("--reference", ta.reference, "also calibrate against this distribution");
  t->add_option("--seed", ta.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return run_simulate(sim);
    if (*f) return run_find_test(fa);
    if (*e) return run_check_equalities(ea);
    if (*j) return run_jpe(ja);
    if (*c) return run_certify(ca);
    if (*t) return run_threshold(ta);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const GenerationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const ResourceError& err) {
    std::cerr << "resource limit: " << err.what() << "\n";
    return 3;
  } catch (const SolverError& err) {
    std::cerr << "solver failure: " << err.what() << "\n" << err.log();
    return 4;
  }
  return 2;
}
