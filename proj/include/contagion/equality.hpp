#pragma once

// Linear equalities <c>_P = 0 that hold for every P in a model class.
//
// Every member of the class is a mixture of extreme-point distributions
// f_AB(x), so <c>_P = 0 for all members iff sum_AB c_AB f_AB(x) vanishes
// identically, i.e. M c = 0 where M[m][AB] is the coefficient of monomial m
// in f_AB.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <Eigen/Dense>

#include "contagion/errors.hpp"
#include "contagion/model.hpp"
#include "contagion/polynomial.hpp"

namespace contagion {

/// Values c(A, B) over all 2^{2T} outcomes, in linear-index order.
struct Observable {
  int T = 4;
  std::vector<double> values;

  double operator[](const OutcomeIndex& o) const { return values.at(o.linear()); }
  std::size_t size() const noexcept { return values.size(); }
};

/// Monomial-by-outcome coefficient matrix, rows in monomial order.
template <class Coeff>
struct MonomialMatrix {
  std::vector<Monomial> monomials;
  std::size_t outcomes = 0;
  std::vector<std::vector<Coeff>> rows;
};

template <class Coeff>
MonomialMatrix<Coeff> build_M(std::span<const Polynomial<Coeff>> fs) {
  std::map<Monomial, std::size_t> index;
  for (const auto& f : fs)
    for (const auto& [m, c] : f.terms()) index.emplace(m, 0);
  MonomialMatrix<Coeff> M;
  M.outcomes = fs.size();
  std::size_t r = 0;
  for (auto& [m, idx] : index) {
    idx = r++;
    M.monomials.push_back(m);
  }
  M.rows.assign(index.size(), std::vector<Coeff>(fs.size(), Coeff(0)));
  for (std::size_t j = 0; j < fs.size(); ++j)
    for (const auto& [m, c] : fs[j].terms()) M.rows[index.at(m)][j] = c;
  return M;
}

template <class Coeff>
MonomialMatrix<Coeff> build_M(const ModelClass& mc) {
  const auto fs = f_vector<Coeff>(mc);
  return build_M<Coeff>(std::span<const Polynomial<Coeff>>(fs));
}

template <class Coeff>
struct EqualitySpace {
  std::string model;
  std::size_t outcomes = 0;
  std::vector<std::vector<Coeff>> basis;
  std::size_t dimension() const noexcept { return basis.size(); }
};

namespace detail {

// In-place reduced row echelon form; returns pivot columns.
inline std::vector<std::size_t> rref(std::vector<std::vector<Rational>>& a, std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < a.size(); ++col) {
    std::size_t sel = row;
    while (sel < a.size() && a[sel][col] == 0) ++sel;
    if (sel == a.size()) continue;
    std::swap(a[sel], a[row]);
    const Rational inv = 1 / a[row][col];
    for (std::size_t k = col; k < cols; ++k) a[row][k] *= inv;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == row || a[i][col] == 0) continue;
      const Rational f = a[i][col];
      for (std::size_t k = col; k < cols; ++k) {
        if (a[row][k] != 0) a[i][k] -= f * a[row][k];
      }
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

// Scale to coprime integers with a positive leading entry.
inline void integerize(std::vector<Rational>& v) {
  mpz_class den = 1, num = 0;
  for (const auto& x : v) {
    if (x == 0) continue;
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
  }
  for (auto& x : v) x *= den;
  for (const auto& x : v) {
    if (x == 0) continue;
    mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), x.get_num_mpz_t());
  }
  const auto lead = std::find_if(v.begin(), v.end(), [](const Rational& x) { return x != 0; });
  if (lead == v.end()) return;
  if (*lead < 0) num = -num;
  for (auto& x : v) x /= num;
}

}  // namespace detail

/// Exact null space: integer vectors with gcd 1, one per free column of the
/// reduced echelon form, ordered by free column.
inline EqualitySpace<Rational> null_space(const MonomialMatrix<Rational>& M) {
  auto a = M.rows;
  const std::size_t n = M.outcomes;
  const auto pivots = detail::rref(a, n);
  std::vector<bool> is_pivot(n, false);
  for (auto p : pivots) is_pivot[p] = true;
  EqualitySpace<Rational> space;
  space.outcomes = n;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> v(n, Rational(0));
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][f];
    detail::integerize(v);
    space.basis.push_back(std::move(v));
  }
  return space;
}

/// Float null space by singular-value thresholding at `rel_cutoff * sigma_max`.
/// Basis vectors have unit Euclidean norm.
inline EqualitySpace<double> null_space(const MonomialMatrix<double>& M, double rel_cutoff = 1e-9) {
  const auto m = static_cast<Eigen::Index>(M.rows.size());
  const auto n = static_cast<Eigen::Index>(M.outcomes);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(m, 1), n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = M.rows[i][j];
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_cutoff * (s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  EqualitySpace<double> space;
  space.outcomes = M.outcomes;
  for (Eigen::Index k = rank; k < n; ++k) {
    const Eigen::VectorXd v = svd.matrixV().col(k);
    space.basis.emplace_back(v.data(), v.data() + n);
  }
  return space;
}

template <class Coeff>
EqualitySpace<Coeff> equality_space(const ModelClass& mc) {
  auto space = null_space(build_M<Coeff>(mc));
  space.model = mc.describe();
  return space;
}

/// Equalities shared by every delta-causal class at horizon T. The extreme
/// points do not depend on the delta interval (only K does), so this is the
/// null space of the delta-causal coefficient matrix.
template <class Coeff>
EqualitySpace<Coeff> shared_causal_equality_space(int T) {
  auto space = equality_space<Coeff>(ModelClass::delta_causal(T, -1.0, 1.0));
  space.model = "delta-causal T=" + std::to_string(T) + " (any delta)";
  return space;
}

/// Exact rank of a set of vectors.
inline std::size_t span_dimension(std::vector<std::vector<Rational>> vectors, std::size_t length) {
  return detail::rref(vectors, length).size();
}

/// max over rows of |M v|, evaluated in floating point.
template <class Coeff>
double projection_residual(const MonomialMatrix<Coeff>& M, std::span<const double> v) {
  double worst = 0.0;
  for (const auto& row : M.rows) {
    double s = 0.0;
    for (std::size_t j = 0; j < M.outcomes; ++j) {
      if constexpr (std::is_same_v<Coeff, Rational>) s += row[j].get_d() * v[j];
      else s += row[j] * v[j];
    }
    worst = std::max(worst, std::fabs(s));
  }
  return worst;
}

inline double expectation(std::span<const double> c, std::span<const double> p) {
  if (c.size() != p.size()) throw UsageError("expectation: observable and distribution sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * p[i];
  return s;
}

inline double expectation(const Observable& c, std::span<const double> p) {
  return expectation(std::span<const double>(c.values), p);
}

/// Alternation observable at T = 4:
/// (1{A2=B2 != A3=B3} - 1{A2=B3 != A3=B2}) * (1 - 1{A1 != A4} 1{B1 != B4}).
inline double c1_value(const OutcomeIndex& o) {
  const auto& a = o.a;
  const auto& b = o.b;
  const bool same = a[1] == b[1] && a[2] == b[2] && a[1] != a[2];
  const bool crossed = a[1] == b[2] && a[2] == b[1] && a[1] != a[2];
  const int alternation = int(same) - int(crossed);
  const int gate = 1 - int(a[0] != a[3]) * int(b[0] != b[3]);
  return alternation * gate;
}

inline Observable canned_c1() {
  Observable c{4, std::vector<double>(outcome_count(4))};
  for (std::size_t k = 0; k < c.values.size(); ++k) c.values[k] = c1_value(OutcomeIndex::from_linear(k, 4));
  return c;
}

// Rows indexed by A, columns by B. A sequence maps to its row/column as a
// binary number whose least significant bit is the first time step.
inline constexpr std::array<std::array<int, 16>, 16> kC2Table{{
    {0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0},
    {0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0},
    {1, 1, -1, -1, 1, 1, 1, 1, -1, -1, -1, -1, 1, 1, 1, -1},
    {0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0},
    {-1, -1, 1, 1, -1, -1, -1, -1, 1, 1, 1, 1, -1, -1, -1, 1},
    {0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0},
    {0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 1, 0, 0},
    {0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0},
    {0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0, -1, 0, 1, 0, 0},
    {0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0},
    {0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 1, 0, 0},
    {-1, 1, 1, 1, -1, 1, 1, 1, -1, -1, -1, 1, 1, -1, -1, 1},
    {0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0},
    {1, -1, 1, -1, -1, -1, -1, -1, 1, 1, 1, 1, -1, -1, 1, -1},
    {0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0, 1, 0, 0},
    {0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, -1, 0, 0},
}};

inline std::size_t table_index(std::span<const std::uint8_t> seq) {
  std::size_t v = 0;
  for (std::size_t t = 0; t < seq.size(); ++t) v |= std::size_t{seq[t]} << t;
  return v;
}

inline Observable canned_c2() {
  Observable c{4, std::vector<double>(outcome_count(4))};
  for (std::size_t k = 0; k < c.values.size(); ++k) {
    const auto o = OutcomeIndex::from_linear(k, 4);
    c.values[k] = kC2Table[table_index(o.a)][table_index(o.b)];
  }
  return c;
}

inline Observable canned_observable(std::string_view name) {
  if (name == "c1") return canned_c1();
  if (name == "c2") return canned_c2();
  throw UsageError("unknown observable '" + std::string(name) + "' (expected c1 or c2)");
}

}  // namespace contagion
