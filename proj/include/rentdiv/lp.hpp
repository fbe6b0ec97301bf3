#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rentdiv/error.hpp"
#include "rentdiv/rational.hpp"

namespace rentdiv {

using VarId = std::size_t;

struct Term {
  VarId var;
  Rational coef;
};

/// Sparse linear expression; repeated variables are summed when the program is solved.
using LinearExpr = std::vector<Term>;

enum class Relation { LessEq, GreaterEq, Equal };
enum class Sense { Maximize, Minimize };

struct Constraint {
  LinearExpr lhs;
  Relation relation;
  Rational rhs;
  std::string label;
};

/// Linear program over free (unbounded) real variables with exact rational data.
class LinearProgram {
 public:
  VarId add_variable(std::string name) {
    for (const auto& existing : names_)
      if (existing == name) throw Error(ErrorCode::InvalidInput, "duplicate LP variable", name);
    names_.push_back(std::move(name));
    return names_.size() - 1;
  }

  void set_objective(Sense sense, LinearExpr objective) {
    sense_ = sense;
    objective_ = std::move(objective);
  }

  void add_constraint(LinearExpr lhs, Relation rel, Rational rhs, std::string label = {}) {
    constraints_.push_back({std::move(lhs), rel, std::move(rhs), std::move(label)});
  }

  const std::vector<std::string>& variables() const { return names_; }
  Sense sense() const { return sense_; }
  const LinearExpr& objective() const { return objective_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  VarId variable(const std::string& name) const {
    for (VarId v = 0; v < names_.size(); ++v)
      if (names_[v] == name) return v;
    throw Error(ErrorCode::UnknownId, "unknown LP variable", name);
  }

  /// Throws InvalidInput if any expression references an undeclared variable.
  void validate() const {
    auto check = [&](const LinearExpr& expr) {
      for (const Term& t : expr)
        if (t.var >= names_.size())
          throw Error(ErrorCode::InvalidInput, "LP expression references an undeclared variable",
                      std::to_string(t.var));
    };
    check(objective_);
    for (const Constraint& c : constraints_) check(c.lhs);
  }

 private:
  std::vector<std::string> names_;
  Sense sense_ = Sense::Maximize;
  LinearExpr objective_;
  std::vector<Constraint> constraints_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<Rational> point;  // indexed by VarId when Optimal
  Rational value;

  bool optimal() const { return status == LpStatus::Optimal; }
  const Rational& operator[](VarId v) const { return point.at(v); }

  std::map<std::string, Rational> named(const LinearProgram& lp) const {
    std::map<std::string, Rational> out;
    for (VarId v = 0; v < point.size(); ++v) out.emplace(lp.variables()[v], point[v]);
    return out;
  }
};

inline Rational evaluate(const LinearExpr& expr, const std::vector<Rational>& point) {
  Rational sum = 0;
  for (const Term& t : expr) sum += t.coef * point.at(t.var);
  return sum;
}

inline bool satisfied(const Constraint& c, const std::vector<Rational>& point) {
  const Rational lhs = evaluate(c.lhs, point);
  switch (c.relation) {
    case Relation::LessEq: return lhs <= c.rhs;
    case Relation::GreaterEq: return lhs >= c.rhs;
    case Relation::Equal: return lhs == c.rhs;
  }
  return false;
}

namespace detail {

/// Dictionary simplex for  max c.x  s.t.  A x <= b, x >= 0, with Bland's rule in both
/// phases. Layout follows the classic (m+2) x (n+2) dictionary: rows 0..m-1 are
/// constraints, row m the objective, row m+1 the phase-one objective; column n holds
/// the auxiliary variable and column n+1 the right-hand side.
class DictionarySimplex {
 public:
  DictionarySimplex(const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b,
                    const std::vector<Rational>& c)
      : m_(b.size()), n_(c.size()), nonbasic_(n_ + 1), basic_(m_), D_(m_ + 2, std::vector<Rational>(n_ + 2)) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) D_[i][j] = A[i][j];
      basic_[i] = static_cast<long>(n_ + i);
      D_[i][n_] = -1;
      D_[i][n_ + 1] = b[i];
    }
    for (std::size_t j = 0; j < n_; ++j) {
      nonbasic_[j] = static_cast<long>(j);
      D_[m_][j] = -c[j];
    }
    nonbasic_[n_] = kAuxiliary;
    D_[m_ + 1][n_] = 1;
  }

  LpStatus solve(std::vector<Rational>& x, Rational& value) {
    if (m_ > 0) {
      std::size_t r = 0;
      for (std::size_t i = 1; i < m_; ++i)
        if (D_[i][n_ + 1] < D_[r][n_ + 1] || (D_[i][n_ + 1] == D_[r][n_ + 1] && basic_[i] < basic_[r])) r = i;
      if (D_[r][n_ + 1] < 0) {
        pivot(r, n_);
        if (!run(/*phase_one=*/true) || D_[m_ + 1][n_ + 1] < 0) return LpStatus::Infeasible;
        for (std::size_t i = 0; i < m_; ++i) {
          if (basic_[i] != kAuxiliary) continue;
          std::size_t s = n_ + 1;
          for (std::size_t j = 0; j <= n_; ++j)
            if (D_[i][j] != 0 && (s == n_ + 1 || nonbasic_[j] < nonbasic_[s])) s = j;
          if (s != n_ + 1) pivot(i, s);
        }
      }
    }
    if (!run(/*phase_one=*/false)) return LpStatus::Unbounded;
    x.assign(n_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basic_[i] >= 0 && static_cast<std::size_t>(basic_[i]) < n_) x[basic_[i]] = D_[i][n_ + 1];
    value = D_[m_][n_ + 1];
    return LpStatus::Optimal;
  }

 private:
  static constexpr long kAuxiliary = -1;

  void pivot(std::size_t r, std::size_t s) {
    const Rational inv = 1 / D_[r][s];
    for (std::size_t i = 0; i < m_ + 2; ++i) {
      if (i == r || D_[i][s] == 0) continue;
      const Rational factor = D_[i][s] * inv;
      for (std::size_t j = 0; j < n_ + 2; ++j)
        if (D_[r][j] != 0) D_[i][j] -= D_[r][j] * factor;
      D_[i][s] = D_[r][s] * factor;
    }
    for (std::size_t j = 0; j < n_ + 2; ++j)
      if (j != s) D_[r][j] *= inv;
    for (std::size_t i = 0; i < m_ + 2; ++i)
      if (i != r) D_[i][s] *= -inv;
    D_[r][s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  // Bland: entering = lowest-index improving variable; leaving = min ratio, lowest index.
  bool run(bool phase_one) {
    const std::size_t obj = phase_one ? m_ + 1 : m_;
    for (;;) {
      std::size_t s = n_ + 1;
      for (std::size_t j = 0; j <= n_; ++j) {
        if (!phase_one && nonbasic_[j] == kAuxiliary) continue;
        if (D_[obj][j] < 0 && (s == n_ + 1 || nonbasic_[j] < nonbasic_[s])) s = j;
      }
      if (s == n_ + 1) return true;
      std::size_t r = m_;
      Rational best;
      for (std::size_t i = 0; i < m_; ++i) {
        if (D_[i][s] <= 0) continue;
        Rational ratio = D_[i][n_ + 1] / D_[i][s];
        if (r == m_ || ratio < best || (ratio == best && basic_[i] < basic_[r])) {
          r = i;
          best = std::move(ratio);
        }
      }
      if (r == m_) return false;
      pivot(r, s);
    }
  }

  std::size_t m_, n_;
  std::vector<long> nonbasic_, basic_;
  std::vector<std::vector<Rational>> D_;
};

}  // namespace detail

/// Exact optimum of `lp` by two-phase simplex with Bland's rule. Free variables are split
/// as x = x+ - x-; equalities become two inequalities. Deterministic for a given program.
inline LpSolution solve_lp(const LinearProgram& lp) {
  lp.validate();
  const std::size_t nv = lp.variables().size();
  const std::size_t cols = 2 * nv;
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  auto push_row = [&](const LinearExpr& expr, const Rational& rhs, bool negate) {
    std::vector<Rational> row(cols);
    for (const Term& t : expr) {
      row[2 * t.var] += t.coef;
      row[2 * t.var + 1] -= t.coef;
    }
    if (negate)
      for (Rational& x : row) x = -x;
    A.push_back(std::move(row));
    b.push_back(negate ? Rational(-rhs) : rhs);
  };
  for (const Constraint& c : lp.constraints()) {
    if (c.relation != Relation::GreaterEq) push_row(c.lhs, c.rhs, false);
    if (c.relation != Relation::LessEq) push_row(c.lhs, c.rhs, true);
  }
  std::vector<Rational> cost(cols);
  const bool maximize = lp.sense() == Sense::Maximize;
  for (const Term& t : lp.objective()) {
    Rational coef = maximize ? t.coef : Rational(-t.coef);
    cost[2 * t.var] += coef;
    cost[2 * t.var + 1] -= coef;
  }

  detail::DictionarySimplex simplex(A, b, cost);
  std::vector<Rational> x;
  Rational value;
  LpSolution out;
  out.status = simplex.solve(x, value);
  if (out.status != LpStatus::Optimal) return out;
  out.point.resize(nv);
  for (VarId v = 0; v < nv; ++v) out.point[v] = x[2 * v] - x[2 * v + 1];
  out.value = evaluate(lp.objective(), out.point);
  return out;
}

/// Textual dump of a program; rationals as "p/q".
inline std::string to_lp_format(const LinearProgram& lp) {
  std::ostringstream os;
  auto write_expr = [&](const LinearExpr& expr) {
    if (expr.empty()) {
      os << "0";
      return;
    }
    bool first = true;
    for (const Term& t : expr) {
      if (t.coef < 0) os << (first ? "-" : " - ");
      else if (!first) os << " + ";
      os << to_string(abs_value(t.coef)) << " " << lp.variables()[t.var];
      first = false;
    }
  };
  os << (lp.sense() == Sense::Maximize ? "maximize" : "minimize") << "\n  obj: ";
  write_expr(lp.objective());
  os << "\nsubject to\n";
  std::size_t k = 0;
  for (const Constraint& c : lp.constraints()) {
    os << "  " << (c.label.empty() ? "c" + std::to_string(k) : c.label) << ": ";
    write_expr(c.lhs);
    os << (c.relation == Relation::LessEq ? " <= " : c.relation == Relation::GreaterEq ? " >= " : " = ")
       << to_string(c.rhs) << "\n";
    ++k;
  }
  os << "free\n ";
  for (const auto& name : lp.variables()) os << " " << name;
  os << "\nend\n";
  return os.str();
}

}  // namespace rentdiv
