#pragma once

// Witness search by linear programming over Handelman representations.
//
// For a model class with affine generators g_1..g_s and extreme-point
// polynomials f_AB, the witness LP is
//
//   maximize gamma  s.t.  -gamma + c.p_hat - c.f(x) = sum_k lambda_k prod_i g_i(x)^{k_i}
//                         gamma >= 0, lambda >= 0, c in [-1, 1], |k| <= d_max
//
// with one equality row per monomial. A feasible point is a certificate that
// <c>_P <= <c>_{p_hat} - gamma for every P in the class.
//
// The same machinery bounds a single polynomial from above on K
// (minimize gamma s.t. gamma - h(x) has a Handelman representation).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "contagion/errors.hpp"
#include "contagion/model.hpp"
#include "contagion/polynomial.hpp"
#include "contagion/simplex.hpp"

namespace contagion {

/// C(n, k) as a double; large enough for every basis size we care about.
inline double binomial_count(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

/// Byte budget for basis expansion. CONTAGION_MEMORY_BUDGET accepts a plain
/// byte count or a K/M/G suffix; default 8G.
inline std::size_t memory_budget_bytes() {
  const char* env = std::getenv("CONTAGION_MEMORY_BUDGET");
  constexpr std::size_t kDefault = std::size_t{8} << 30;
  if (!env || !*env) return kDefault;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || v <= 0) throw UsageError("CONTAGION_MEMORY_BUDGET: cannot parse '" + std::string(env) + "'");
  double scale = 1.0;
  switch (*end) {
    case 'k': case 'K': scale = 1024.0; break;
    case 'm': case 'M': scale = 1024.0 * 1024.0; break;
    case 'g': case 'G': scale = 1024.0 * 1024.0 * 1024.0; break;
    default: break;
  }
  return static_cast<std::size_t>(v * scale);
}

/// Every product prod_i g_i^{k_i} with sum k_i <= d_max, constant 1 first,
/// ordered by degree and then lexicographically by the generator multiset.
template <class Coeff = double>
class HandelmanBasis {
 public:
  struct Product {
    std::vector<int> exponents;
    Polynomial<Coeff> poly;
  };

  HandelmanBasis(std::vector<Polynomial<Coeff>> generators, int d_max,
                 std::size_t budget_bytes = memory_budget_bytes())
      : generators_(std::move(generators)), d_max_(d_max) {
    if (d_max < 0) throw UsageError("enumerate_basis: d_max must be >= 0");
    if (generators_.empty()) throw UsageError("enumerate_basis: no generators");
    for (const auto& g : generators_) {
      if (g.degree() > 1) throw UsageError("enumerate_basis: generators must be affine");
    }
    const std::size_t s = generators_.size();
    const double count = binomial_count(s + static_cast<std::size_t>(d_max), static_cast<std::size_t>(d_max));
    constexpr double kBytesPerProductFloor = 256.0;
    if (count * kBytesPerProductFloor > static_cast<double>(budget_bytes)) {
      throw ResourceError("Handelman basis with " + std::to_string(static_cast<long long>(count)) +
                          " products exceeds the memory budget of " + std::to_string(budget_bytes) +
                          " bytes");
    }
    const auto vars = generators_.front().vars();
    products_.push_back({std::vector<int>(s, 0), Polynomial<Coeff>::constant(vars, Coeff(1))});
    // last[p] = index of the largest generator used in product p.
    std::vector<std::size_t> last{0};
    std::size_t level_begin = 0;
    std::size_t bytes = 0;
    constexpr std::size_t kBytesPerTerm = 96;
    for (int d = 1; d <= d_max; ++d) {
      const std::size_t level_end = products_.size();
      for (std::size_t p = level_begin; p < level_end; ++p) {
        for (std::size_t i = (d == 1 ? 0 : last[p]); i < s; ++i) {
          Product next{products_[p].exponents, products_[p].poly * generators_[i]};
          ++next.exponents[i];
          bytes += next.poly.size() * kBytesPerTerm + kBytesPerProductFloor;
          if (bytes > budget_bytes) {
            throw ResourceError("Handelman basis with " + std::to_string(static_cast<long long>(count)) +
                                " products exceeded the memory budget during expansion");
          }
          products_.push_back(std::move(next));
          last.push_back(i);
        }
      }
      level_begin = level_end;
    }
  }

  const std::vector<Polynomial<Coeff>>& generators() const noexcept { return generators_; }
  const std::vector<Product>& products() const noexcept { return products_; }
  int d_max() const noexcept { return d_max_; }
  std::size_t size() const noexcept { return products_.size(); }

 private:
  std::vector<Polynomial<Coeff>> generators_;
  int d_max_;
  std::vector<Product> products_;
};

template <class Coeff = double>
HandelmanBasis<Coeff> enumerate_basis(const ModelClass& mc, int d_max) {
  return HandelmanBasis<Coeff>(build_generators<Coeff>(mc), d_max);
}

/// prod_i g_i^{k_i}, recomputed from an exponent vector.
template <class Coeff>
Polynomial<Coeff> handelman_product(const std::vector<Polynomial<Coeff>>& gens,
                                    const std::vector<int>& k) {
  if (k.size() != gens.size()) throw UsageError("handelman_product: exponent length mismatch");
  if (gens.empty()) throw UsageError("handelman_product: no generators");
  Polynomial<Coeff> p = Polynomial<Coeff>::constant(gens.front().vars(), Coeff(1));
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (k[i] < 0) throw UsageError("handelman_product: negative exponent");
    if (k[i] > 0) p *= gens[i].pow(static_cast<unsigned>(k[i]));
  }
  return p;
}

struct LambdaTerm {
  std::vector<int> exponents;
  double value = 0.0;
};

struct Tolerances {
  double solver = 1e-9;
  double symbolic = 1e-8;
  double pointwise = 1e-8;
  int spot_checks = 1000;
};

struct LpStats {
  std::string status;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Witness certificate: for every P in the model class,
/// <c>_P <= <c>_{p_hat} - gamma.
struct Certificate {
  double gamma = 0.0;
  std::vector<double> c;
  std::vector<LambdaTerm> lambdas;
  int T = 4;
  std::optional<DeltaInterval> delta;
  std::vector<std::string> varset;
  int d_max = 0;
  Tolerances tolerances;
  LpStats lp;

  ModelClass model() const {
    return delta ? ModelClass::delta_causal(T, delta->lo, delta->hi) : ModelClass::non_causal(T);
  }

  double c_norm() const {
    double s = 0.0;
    for (double v : c) s += v * v;
    return std::sqrt(s);
  }
};

struct WitnessProblem {
  ModelClass mc;
  int d_max = 0;
  std::vector<double> p_hat;
  double c_lo = -1.0;
  double c_hi = 1.0;
};

/// Column layout: gamma, then c split as c+ and c- (each in [0, c_hi] and
/// [0, -c_lo]), then one lambda per basis product.
struct WitnessLp {
  LinearProgram lp;
  std::vector<Monomial> row_monomials;
  std::size_t outcomes = 0;
  std::size_t gamma_col() const { return 0; }
  std::size_t c_plus_col(std::size_t i) const { return 1 + i; }
  std::size_t c_minus_col(std::size_t i) const { return 1 + outcomes + i; }
  std::size_t lambda_col(std::size_t k) const { return 1 + 2 * outcomes + k; }
};

inline void check_distribution(const std::vector<double>& p, std::size_t expected) {
  if (p.size() != expected) {
    throw UsageError("distribution has " + std::to_string(p.size()) + " entries, expected " +
                     std::to_string(expected));
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw UsageError("distribution has a negative or NaN entry");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw UsageError("distribution does not sum to 1");
}

inline WitnessLp assemble_lp(const WitnessProblem& wp, const std::vector<Poly>& fs,
                             const HandelmanBasis<double>& basis) {
  const std::size_t N = wp.mc.outcomes();
  check_distribution(wp.p_hat, N);
  if (fs.size() != N) throw UsageError("assemble_lp: f-vector size mismatch");
  if (!(wp.c_lo <= 0.0 && wp.c_hi >= 0.0 && wp.c_lo < wp.c_hi)) {
    throw UsageError("assemble_lp: observable bounds must straddle 0");
  }

  std::map<Monomial, std::size_t> rows;
  for (const auto& f : fs)
    for (const auto& [m, c] : f.terms()) rows.emplace(m, 0);
  for (const auto& prod : basis.products())
    for (const auto& [m, c] : prod.poly.terms()) rows.emplace(m, 0);
  rows.emplace(Monomial{}, 0);

  WitnessLp out;
  out.outcomes = N;
  std::size_t r = 0;
  for (auto& [m, idx] : rows) {
    idx = r++;
    out.row_monomials.push_back(m);
  }
  const std::size_t const_row = rows.at(Monomial{});

  auto& lp = out.lp;
  lp.rows = rows.size();
  lp.rhs.assign(lp.rows, 0.0);
  std::vector<std::pair<std::size_t, double>> entries;

  lp.add_column(-1.0, 0.0, kInf, {{const_row, -1.0}});

  // Column of c_AB: p_hat_AB at the constant row minus the coefficients of f_AB.
  std::vector<std::vector<std::pair<std::size_t, double>>> ccols(N);
  for (std::size_t i = 0; i < N; ++i) {
    std::map<std::size_t, double> col;
    col[const_row] += wp.p_hat[i];
    for (const auto& [m, c] : fs[i].terms()) col[rows.at(m)] -= c;
    for (const auto& [row, v] : col) ccols[i].emplace_back(row, v);
  }
  for (std::size_t i = 0; i < N; ++i) lp.add_column(0.0, 0.0, wp.c_hi, ccols[i]);
  for (std::size_t i = 0; i < N; ++i) {
    entries.clear();
    for (const auto& [row, v] : ccols[i]) entries.emplace_back(row, -v);
    lp.add_column(0.0, 0.0, -wp.c_lo, entries);
  }
  for (const auto& prod : basis.products()) {
    entries.clear();
    for (const auto& [m, c] : prod.poly.terms()) entries.emplace_back(rows.at(m), -c);
    lp.add_column(0.0, 0.0, kInf, entries);
  }
  return out;
}

inline Certificate extract_certificate(const WitnessProblem& wp, const WitnessLp& wlp,
                                       const HandelmanBasis<double>& basis, const LpSolution& sol) {
  Certificate cert;
  cert.T = wp.mc.horizon();
  cert.delta = wp.mc.delta();
  cert.varset = wp.mc.vars()->names();
  cert.d_max = wp.d_max;
  cert.gamma = std::max(0.0, sol.x[wlp.gamma_col()]);
  cert.c.resize(wlp.outcomes);
  for (std::size_t i = 0; i < wlp.outcomes; ++i) {
    const double v = sol.x[wlp.c_plus_col(i)] - sol.x[wlp.c_minus_col(i)];
    cert.c[i] = std::clamp(v, wp.c_lo, wp.c_hi);
  }
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const double v = sol.x[wlp.lambda_col(k)];
    if (v > 0.0) cert.lambdas.push_back({basis.products()[k].exponents, v});
  }
  cert.lp = {to_string(sol.status), wlp.lp.rows, wlp.lp.cols(), sol.iterations, sol.residual};
  return cert;
}

/// Maximal-gamma witness for `p_hat` against `mc` at Handelman degree `d_max`.
inline Certificate find_witness(const std::vector<double>& p_hat, const ModelClass& mc, int d_max,
                                SimplexOptions opts = {}) {
  WitnessProblem wp{mc, d_max, p_hat};
  const HandelmanBasis<double> basis(build_generators<double>(mc), d_max);
  const auto fs = f_vector<double>(mc);
  const WitnessLp wlp = assemble_lp(wp, fs, basis);
  const LpSolution sol = solve_lp(wlp.lp, opts);
  if (sol.status != LpStatus::Optimal) {
    // x = 0 is always feasible and gamma is bounded by |c|_1 * 2, so anything
    // other than optimal is a numerical failure.
    throw SolverError(std::string("witness LP ended with status ") + to_string(sol.status), sol.log);
  }
  Certificate cert = extract_certificate(wp, wlp, basis, sol);
  cert.tolerances.solver = opts.optimality_tol;
  return cert;
}

struct ValidationReport {
  bool valid = true;
  bool signs_ok = true;
  double max_residual = 0.0;
  double min_slack = kInf;  // min over sampled x of -gamma + c.p_hat - c.f(x)
  std::vector<std::string> offending_monomials;
  std::vector<std::vector<double>> offending_points;
  std::vector<std::string> messages;
};

/// Symbolic identity check, pointwise spot check on K, and sign checks.
inline ValidationReport validate_certificate(const Certificate& cert, const std::vector<double>& p_hat,
                                             std::uint64_t seed = 20130101) {
  ValidationReport rep;
  const ModelClass mc = cert.model();
  const std::size_t N = mc.outcomes();
  if (cert.c.size() != N || p_hat.size() != N) {
    throw UsageError("validate_certificate: observable/distribution size does not match model");
  }
  const auto gens = build_generators<double>(mc);
  const auto fs = f_vector<double>(mc);

  if (cert.gamma < 0.0) {
    rep.signs_ok = false;
    rep.messages.push_back("gamma is negative");
  }
  for (const auto& lt : cert.lambdas) {
    if (lt.value < 0.0) {
      rep.signs_ok = false;
      rep.messages.push_back("negative lambda weight " + std::to_string(lt.value));
    }
    int deg = 0;
    for (int k : lt.exponents) deg += k;
    if (deg > cert.d_max) rep.messages.push_back("lambda term exceeds d_max");
  }
  for (double v : cert.c) {
    if (std::fabs(v) > 1.0 + 1e-12) {
      rep.signs_ok = false;
      rep.messages.push_back("observable entry outside [-1, 1]");
      break;
    }
  }

  // Residual: -gamma + c.p_hat - c.f - sum lambda H, accumulated term-wise.
  std::map<Monomial, double> res;
  double cp = 0.0;
  for (std::size_t i = 0; i < N; ++i) cp += cert.c[i] * p_hat[i];
  res[Monomial{}] += cp - cert.gamma;
  for (std::size_t i = 0; i < N; ++i) {
    if (cert.c[i] == 0.0) continue;
    for (const auto& [m, v] : fs[i].terms()) res[m] -= cert.c[i] * v;
  }
  for (const auto& lt : cert.lambdas) {
    const auto h = handelman_product(gens, lt.exponents);
    for (const auto& [m, v] : h.terms()) res[m] -= lt.value * v;
  }
  for (const auto& [m, v] : res) {
    rep.max_residual = std::max(rep.max_residual, std::fabs(v));
    if (std::fabs(v) >= cert.tolerances.symbolic) {
      rep.offending_monomials.push_back(m.to_string(*mc.vars()) + " : " + std::to_string(v));
    }
  }

  std::mt19937_64 rng(seed);
  for (int k = 0; k < cert.tolerances.spot_checks; ++k) {
    const auto x = sample_in_domain(mc, rng);
    double cf = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (cert.c[i] != 0.0) cf += cert.c[i] * fs[i].evaluate(x);
    }
    const double slack = -cert.gamma + cp - cf;
    rep.min_slack = std::min(rep.min_slack, slack);
    if (slack < -cert.tolerances.pointwise && rep.offending_points.size() < 10) {
      rep.offending_points.push_back(x);
    }
  }

  if (!rep.offending_monomials.empty()) rep.messages.push_back("polynomial identity residual above tolerance");
  if (!rep.offending_points.empty()) rep.messages.push_back("separation inequality fails at sampled points");
  rep.valid = rep.signs_ok && rep.offending_monomials.empty() && rep.offending_points.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Upper bounds for a single polynomial on K.

struct BoundProblem {
  Poly target;
  std::vector<Poly> generators;
};

/// Bounding the probability of one sequence under the A-side Markov mixture.
/// Only variables that actually occur are kept, each with its two box
/// generators.
inline BoundProblem sequence_bound_problem(const BitSeq& seq) {
  const auto full = make_varset({"a0", "ap", "am"});
  const Poly q = marginal_poly<double>(seq, full, Side::A);
  std::vector<bool> used(full->arity(), false);
  for (const auto& [m, c] : q.terms())
    for (std::size_t i = 0; i < full->arity(); ++i) used[i] = used[i] || m[i] > 0;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < full->arity(); ++i)
    if (used[i]) names.push_back(full->name(i));
  const auto vars = make_varset(names);
  BoundProblem bp{q.rebase(vars), {}};
  for (std::size_t i = 0; i < vars->arity(); ++i) {
    bp.generators.push_back(Poly::variable(vars, i));
    bp.generators.push_back(Poly::one_minus(vars, i));
  }
  return bp;
}

struct BoundCertificate {
  double gamma = 0.0;
  std::vector<LambdaTerm> lambdas;
  Poly target;
  std::vector<Poly> generators;
  int d_max = 0;
  LpStats lp;
};

/// LP for min gamma s.t. gamma - h = sum lambda_k H_k. Columns: gamma, lambdas.
inline LinearProgram assemble_bound_lp(const BoundProblem& bp, const HandelmanBasis<double>& basis,
                                       std::vector<Monomial>* row_monomials = nullptr) {
  std::map<Monomial, std::size_t> rows;
  rows.emplace(Monomial{}, 0);
  for (const auto& [m, c] : bp.target.terms()) rows.emplace(m, 0);
  for (const auto& prod : basis.products())
    for (const auto& [m, c] : prod.poly.terms()) rows.emplace(m, 0);
  std::size_t r = 0;
  for (auto& [m, idx] : rows) {
    idx = r++;
    if (row_monomials) row_monomials->push_back(m);
  }
  LinearProgram lp;
  lp.rows = rows.size();
  lp.rhs.assign(lp.rows, 0.0);
  for (const auto& [m, c] : bp.target.terms()) lp.rhs[rows.at(m)] = c;
  lp.add_column(1.0, -kInf, kInf, {{rows.at(Monomial{}), 1.0}});
  std::vector<std::pair<std::size_t, double>> entries;
  for (const auto& prod : basis.products()) {
    entries.clear();
    for (const auto& [m, c] : prod.poly.terms()) entries.emplace_back(rows.at(m), -c);
    lp.add_column(0.0, 0.0, kInf, entries);
  }
  return lp;
}

inline BoundCertificate find_bound(const BoundProblem& bp, int d_max, SimplexOptions opts = {}) {
  const HandelmanBasis<double> basis(bp.generators, d_max);
  const LinearProgram lp = assemble_bound_lp(bp, basis);
  const LpSolution sol = solve_lp(lp, opts);
  if (sol.status != LpStatus::Optimal) {
    throw SolverError(std::string("bound LP ended with status ") + to_string(sol.status), sol.log);
  }
  BoundCertificate cert{sol.x[0], {}, bp.target, bp.generators, d_max, {}};
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (sol.x[1 + k] > 0.0) cert.lambdas.push_back({basis.products()[k].exponents, sol.x[1 + k]});
  }
  cert.lp = {to_string(sol.status), lp.rows, lp.cols(), sol.iterations, sol.residual};
  return cert;
}

/// gamma - h - sum lambda H with every number lifted to the nearest small-
/// denominator rational; the certificate is exact when this is identically 0.
inline ExactPoly exact_bound_residual(const BoundCertificate& cert, long max_den = 1'000'000) {
  const auto vars = cert.target.vars();
  std::vector<ExactPoly> gens;
  for (const auto& g : cert.generators) gens.push_back(convert<Rational>(g));
  ExactPoly r = ExactPoly::constant(vars, rationalize(cert.gamma, max_den)) -
                convert<Rational>(cert.target);
  for (const auto& lt : cert.lambdas) {
    r -= handelman_product(gens, lt.exponents) * rationalize(lt.value, max_den);
  }
  return r;
}

inline double bound_residual(const BoundCertificate& cert) {
  double worst = 0.0;
  std::map<Monomial, double> acc;
  acc[Monomial{}] += cert.gamma;
  for (const auto& [m, c] : cert.target.terms()) acc[m] -= c;
  for (const auto& lt : cert.lambdas) {
    const Poly prod = handelman_product(cert.generators, lt.exponents);
    for (const auto& [m, c] : prod.terms()) acc[m] -= lt.value * c;
  }
  for (const auto& [m, v] : acc) worst = std::max(worst, std::fabs(v));
  return worst;
}

}  // namespace contagion
