#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace binfwd::fme {

using Rat = boost::multiprecision::cpp_rational;

// Linear expression over named symbols with exact rational coefficients.
// Symbols are either rate variables (plain identifiers) or information atoms
// in canonical "I(...)"/"H(...)" spelling; both range over the nonnegative
// reals, which redundancy removal and equivalence checks may assume.
struct LinExpr {
    std::map<std::string, Rat> terms;
    Rat constant = 0;

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(const Rat& k);
    void prune();  // drop zero coefficients
    bool is_constant() const { return terms.empty(); }
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(const Rat& k, LinExpr e);

inline bool is_atom(std::string_view sym) {
    return sym.rfind("I(", 0) == 0 || sym.rfind("H(", 0) == 0;
}

// expr >= 0 (strict variants only arise internally when negating goals)
struct Ineq {
    LinExpr e;
    bool strict = false;
};

struct Subst {
    std::string var;
    LinExpr rhs;
};

// lhs == rhs identity over atoms, applied as an exact substitution
struct Rewrite {
    LinExpr lhs, rhs;
};

struct IneqSystem {
    std::vector<std::string> vars;  // declared rate variables
    std::vector<Ineq> ineqs;
    std::vector<Subst> substs;
    std::vector<Rewrite> rewrites;

    bool declared(std::string_view v) const;
};

// canonical spelling: argument groups sorted, I's two sides sorted
std::string canonical_atom(std::string_view spelled);

IneqSystem parse_system(std::string_view text);
std::string format_expr(const LinExpr& e);
std::string format_ineq(const Ineq& q);
std::string format_system(const IneqSystem& s);

// One classical Fourier-Motzkin step on the inequality list (no implicit
// nonnegativity): pair every positive occurrence of var against every
// negative one, keep var-free inequalities.
IneqSystem eliminate(const IneqSystem& sys, const std::string& var);

// Apply substitutions, eliminate all variables outside `keep` (adding the
// eliminated variables' nonnegativity first), apply rewrites, then remove
// duplicates, dominated and provably implied inequalities.
IneqSystem project(const IneqSystem& sys, const std::vector<std::string>& keep);

// Exact emptiness test of {context, ambient nonnegativity, not(candidate)}.
bool implied(const std::vector<Ineq>& context, const Ineq& candidate);

bool system_implies(const IneqSystem& a, const IneqSystem& b);
bool equivalent(const IneqSystem& a, const IneqSystem& b);

}  // namespace binfwd::fme
