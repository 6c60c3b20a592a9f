#include "binfwd/fme.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "binfwd/errors.hpp"

namespace binfwd::fme {

namespace {

using boost::multiprecision::cpp_int;

constexpr std::size_t kBlowupCap = 200000;

cpp_int igcd(cpp_int a, cpp_int b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        cpp_int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// scale so that all coefficients are coprime integers
void normalize(LinExpr& e) {
    e.prune();
    cpp_int lcm = 1;
    auto fold_den = [&](const Rat& r) {
        cpp_int d = denominator(r);
        lcm = lcm / igcd(lcm, d) * d;
    };
    for (const auto& [_, c] : e.terms) fold_den(c);
    fold_den(e.constant);
    if (lcm != 1) e *= Rat(lcm);

    cpp_int g = 0;
    for (const auto& [_, c] : e.terms) g = igcd(g, numerator(c));
    g = igcd(g, numerator(e.constant));
    if (g > 1) e *= Rat(1, g);
}

std::string expr_key(const LinExpr& e) {
    std::ostringstream os;
    for (const auto& [s, c] : e.terms) os << s << ':' << c << ';';
    os << '#' << e.constant;
    return os.str();
}

Rat coeff(const LinExpr& e, const std::string& sym) {
    auto it = e.terms.find(sym);
    return it == e.terms.end() ? Rat(0) : it->second;
}

std::set<std::string> symbols_of(const std::vector<Ineq>& qs) {
    std::set<std::string> out;
    for (const auto& q : qs)
        for (const auto& [s, _] : q.e.terms) out.insert(s);
    return out;
}

// substitute sym := repl exactly in every inequality
void substitute(std::vector<Ineq>& qs, const std::string& sym, const LinExpr& repl) {
    for (auto& q : qs) {
        Rat c = coeff(q.e, sym);
        if (c == 0) continue;
        q.e.terms.erase(sym);
        q.e += c * LinExpr(repl);
        normalize(q.e);
    }
}

std::vector<Ineq> fm_step(const std::vector<Ineq>& in, const std::string& sym) {
    std::vector<const Ineq*> pos, neg;
    std::vector<Ineq> out;
    for (const auto& q : in) {
        Rat c = coeff(q.e, sym);
        if (c > 0)
            pos.push_back(&q);
        else if (c < 0)
            neg.push_back(&q);
        else
            out.push_back(q);
    }
    if (out.size() + pos.size() * neg.size() > kBlowupCap)
        throw BudgetError("fourier-motzkin blowup cap exceeded while eliminating " + sym);
    for (const Ineq* p : pos) {
        Rat cp = coeff(p->e, sym);
        for (const Ineq* n : neg) {
            Rat cn = coeff(n->e, sym);
            Ineq q;
            q.e = (-cn) * LinExpr(p->e) + cp * LinExpr(n->e);
            q.e.terms.erase(sym);
            q.strict = p->strict || n->strict;
            normalize(q.e);
            out.push_back(std::move(q));
        }
    }
    // drop trivially true constants, dedupe
    std::vector<Ineq> dedup;
    std::set<std::string> seen;
    for (auto& q : out) {
        if (q.e.is_constant()) {
            bool holds = q.strict ? q.e.constant > 0 : q.e.constant >= 0;
            if (holds) continue;  // keep failures so infeasibility is visible
        }
        std::string key = expr_key(q.e) + (q.strict ? "!" : "");
        if (seen.insert(key).second) dedup.push_back(std::move(q));
    }
    return dedup;
}

// heuristic: eliminate the symbol with the fewest positive*negative pairings
std::string cheapest_symbol(const std::vector<Ineq>& qs, const std::set<std::string>& candidates) {
    std::string best;
    std::size_t best_cost = SIZE_MAX;
    for (const auto& sym : candidates) {
        std::size_t p = 0, n = 0;
        for (const auto& q : qs) {
            Rat c = coeff(q.e, sym);
            if (c > 0)
                ++p;
            else if (c < 0)
                ++n;
        }
        std::size_t cost = p * n;
        if (cost < best_cost) {
            best_cost = cost;
            best = sym;
        }
    }
    return best;
}

bool infeasible(std::vector<Ineq> qs) {
    auto syms = symbols_of(qs);
    while (!syms.empty()) {
        std::string sym = cheapest_symbol(qs, syms);
        qs = fm_step(qs, sym);
        syms = symbols_of(qs);
    }
    for (const auto& q : qs) {
        bool holds = q.strict ? q.e.constant > 0 : q.e.constant >= 0;
        if (!holds) return true;
    }
    return false;
}

Ineq nonneg(const std::string& sym) {
    Ineq q;
    q.e.terms[sym] = 1;
    return q;
}

// apply one identity as a substitution: pick the first symbol of (lhs - rhs)
// as pivot and replace it everywhere
void apply_rewrite(std::vector<Ineq>& qs, const Rewrite& rw) {
    LinExpr diff = rw.lhs - rw.rhs;
    diff.prune();
    if (diff.terms.empty()) return;
    auto pivot = diff.terms.begin();
    std::string sym = pivot->first;
    Rat c = pivot->second;
    LinExpr repl = Rat(-1) / c * diff;
    repl.terms.erase(sym);
    substitute(qs, sym, repl);
}

std::vector<Ineq> dominance_filter(std::vector<Ineq> qs) {
    // same coefficient vector: keep the tightest constant
    std::map<std::string, std::size_t> best;
    std::vector<Ineq> out;
    for (auto& q : qs) {
        LinExpr t = q.e;
        Rat c = t.constant;
        t.constant = 0;
        std::string key = expr_key(t) + (q.strict ? "!" : "");
        auto it = best.find(key);
        if (it == best.end()) {
            best[key] = out.size();
            out.push_back(std::move(q));
        } else if (c < out[it->second].e.constant) {
            out[it->second] = std::move(q);
        }
    }
    return out;
}

}  // namespace

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    for (const auto& [s, c] : o.terms) terms[s] += c;
    constant += o.constant;
    prune();
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    for (const auto& [s, c] : o.terms) terms[s] -= c;
    constant -= o.constant;
    prune();
    return *this;
}

LinExpr& LinExpr::operator*=(const Rat& k) {
    for (auto& [_, c] : terms) c *= k;
    constant *= k;
    prune();
    return *this;
}

void LinExpr::prune() {
    for (auto it = terms.begin(); it != terms.end();)
        it = (it->second == 0) ? terms.erase(it) : std::next(it);
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(const Rat& k, LinExpr e) { return e *= k; }

bool IneqSystem::declared(std::string_view v) const {
    return std::find(vars.begin(), vars.end(), v) != vars.end();
}

std::string canonical_atom(std::string_view spelled) {
    auto fail = [&](const std::string& why) -> std::string {
        throw ValidationError("bad information atom '" + std::string(spelled) + "': " + why);
    };
    if (spelled.size() < 4 || (spelled[0] != 'I' && spelled[0] != 'H') || spelled[1] != '(' ||
        spelled.back() != ')')
        return fail("expected I(...) or H(...)");
    char kind = spelled[0];
    std::string body(spelled.substr(2, spelled.size() - 3));

    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : s) {
            if (ch == sep) {
                parts.push_back(cur);
                cur.clear();
            } else if (!std::isspace(static_cast<unsigned char>(ch))) {
                cur += ch;
            }
        }
        parts.push_back(cur);
        return parts;
    };
    auto group = [&](const std::string& g) {
        auto names = split(g, ',');
        for (const auto& n : names)
            if (n.empty()) fail("empty variable name");
        std::sort(names.begin(), names.end());
        std::string out;
        for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
        return out;
    };

    auto bar = split(body, '|');
    if (bar.size() > 2) fail("more than one conditioning bar");
    std::string cond = bar.size() == 2 ? group(bar[1]) : "";

    if (kind == 'H') {
        if (bar[0].find(';') != std::string::npos) fail("H takes a single group");
        std::string g = group(bar[0]);
        return cond.empty() ? "H(" + g + ")" : "H(" + g + "|" + cond + ")";
    }
    auto semi = split(bar[0], ';');
    if (semi.size() != 2) fail("I takes exactly two ;-separated groups");
    std::string a = group(semi[0]), b = group(semi[1]);
    if (b < a) std::swap(a, b);
    return cond.empty() ? "I(" + a + ";" + b + ")" : "I(" + a + ";" + b + "|" + cond + ")";
}

namespace {

struct Parser {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1, col = 1;

    [[noreturn]] void fail(const std::string& why) const {
        throw ValidationError("fme parse error at line " + std::to_string(line) + ", col " +
                              std::to_string(col) + ": " + why);
    }
    bool eof() const { return pos >= text.size(); }
    char peek() const { return eof() ? '\0' : text[pos]; }
    char get() {
        char c = text[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }
    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
    }
    bool consume(std::string_view s) {
        skip_ws();
        if (text.substr(pos, s.size()) == s) {
            for (std::size_t i = 0; i < s.size(); ++i) get();
            return true;
        }
        return false;
    }
    std::string ident() {
        skip_ws();
        if (eof() || (!std::isalpha(static_cast<unsigned char>(peek())) && peek() != '_'))
            fail("expected identifier");
        std::string out;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            out += get();
        return out;
    }

    std::string atom() {
        // called with peek() at 'I' or 'H' and an immediate '('
        std::string out;
        out += get();
        if (peek() != '(') fail("expected ( after atom letter");
        int depth = 0;
        do {
            char c = get();
            out += c;
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (eof() && depth > 0) fail("unterminated atom");
        } while (depth > 0);
        return canonical_atom(out);
    }

    Rat number() {
        skip_ws();
        std::string digits;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) digits += get();
        if (digits.empty()) fail("expected number");
        cpp_int num(digits);
        if (peek() == '/') {
            get();
            std::string den;
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) den += get();
            if (den.empty()) fail("expected denominator");
            cpp_int d(den);
            if (d == 0) fail("zero denominator");
            return Rat(num, d);
        }
        return Rat(num);
    }

    bool at_symbol_start() {
        skip_ws();
        return !eof() && (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_');
    }

    // one signed term appended into e
    void term(LinExpr& e, int sign) {
        skip_ws();
        Rat k = sign;
        bool have_coef = false;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            k *= number();
            have_coef = true;
            skip_ws();
            if (peek() == '*') get();
            skip_ws();
        }
        if (!eof() && (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')) {
            std::string sym;
            if ((peek() == 'I' || peek() == 'H') && pos + 1 < text.size() && text[pos + 1] == '(')
                sym = atom();
            else
                sym = ident();
            e.terms[sym] += k;
        } else if (have_coef) {
            e.constant += k;
        } else {
            fail("expected term");
        }
    }

    LinExpr expr() {
        LinExpr e;
        skip_ws();
        int sign = 1;
        if (peek() == '-') {
            get();
            sign = -1;
        } else if (peek() == '+') {
            get();
        }
        term(e, sign);
        while (true) {
            skip_ws();
            if (peek() == '+') {
                get();
                term(e, 1);
            } else if (peek() == '-' && text.substr(pos, 2) != "->") {
                get();
                term(e, -1);
            } else {
                break;
            }
        }
        e.prune();
        return e;
    }

    void end_of_line() {
        skip_ws();
        if (peek() == '#') {
            while (!eof() && peek() != '\n') get();
        }
        if (!eof()) {
            if (peek() != '\n') fail("unexpected trailing input");
            get();
        }
    }
};

}  // namespace

IneqSystem parse_system(std::string_view text) {
    IneqSystem sys;
    Parser p{text};
    std::set<std::string> declared;
    auto declare = [&](const std::string& v) {
        if (declared.insert(v).second) sys.vars.push_back(v);
    };
    auto declare_expr_vars = [&](const LinExpr& e) {
        for (const auto& [s, _] : e.terms)
            if (!is_atom(s)) declare(s);
    };

    while (!p.eof()) {
        p.skip_ws();
        if (p.peek() == '\n') {
            p.get();
            continue;
        }
        if (p.peek() == '#') {
            p.end_of_line();
            continue;
        }
        if (p.consume("vars")) {
            while (p.at_symbol_start()) declare(p.ident());
            p.end_of_line();
            continue;
        }
        if (p.consume("let")) {
            Subst sub;
            sub.var = p.ident();
            declare(sub.var);
            if (!p.consume("=")) p.fail("expected = in let");
            sub.rhs = p.expr();
            declare_expr_vars(sub.rhs);
            sys.substs.push_back(std::move(sub));
            p.end_of_line();
            continue;
        }
        if (p.consume("rewrite")) {
            Rewrite rw;
            rw.lhs = p.expr();
            if (!p.consume("->")) p.fail("expected -> in rewrite");
            rw.rhs = p.expr();
            for (const auto& [s, _] : rw.lhs.terms)
                if (!is_atom(s)) p.fail("rewrite must involve atoms only");
            for (const auto& [s, _] : rw.rhs.terms)
                if (!is_atom(s)) p.fail("rewrite must involve atoms only");
            sys.rewrites.push_back(std::move(rw));
            p.end_of_line();
            continue;
        }
        LinExpr lhs = p.expr();
        Ineq q;
        if (p.consume("<=") || p.consume("<")) {
            LinExpr rhs = p.expr();
            q.e = rhs - lhs;
        } else if (p.consume(">=") || p.consume(">")) {
            LinExpr rhs = p.expr();
            q.e = lhs - rhs;
        } else {
            p.fail("expected comparison operator");
        }
        normalize(q.e);
        declare_expr_vars(q.e);
        sys.ineqs.push_back(std::move(q));
        p.end_of_line();
    }
    return sys;
}

std::string format_expr(const LinExpr& e) {
    std::ostringstream os;
    bool first = true;
    auto put = [&](const std::string& sym, const Rat& c) {
        if (c == 0) return;
        if (!first) os << (c > 0 ? " + " : " - ");
        else if (c < 0)
            os << "-";
        Rat a = c > 0 ? c : Rat(-c);
        if (a != 1) os << a << "*";
        os << sym;
        first = false;
    };
    for (const auto& [s, c] : e.terms)
        if (!is_atom(s)) put(s, c);
    for (const auto& [s, c] : e.terms)
        if (is_atom(s)) put(s, c);
    if (e.constant != 0 || first) {
        if (!first) os << (e.constant >= 0 ? " + " : " - ");
        os << (e.constant >= 0 ? e.constant : Rat(-e.constant));
    }
    return os.str();
}

std::string format_ineq(const Ineq& q) {
    LinExpr lhs, rhs;
    for (const auto& [s, c] : q.e.terms) {
        if (c < 0)
            lhs.terms[s] = -c;
        else
            rhs.terms[s] = c;
    }
    if (q.e.constant < 0)
        lhs.constant = -q.e.constant;
    else
        rhs.constant = q.e.constant;
    return format_expr(lhs) + (q.strict ? " < " : " <= ") + format_expr(rhs);
}

std::string format_system(const IneqSystem& s) {
    std::ostringstream os;
    if (!s.vars.empty()) {
        os << "vars";
        for (const auto& v : s.vars) os << ' ' << v;
        os << '\n';
    }
    for (const auto& q : s.ineqs) os << format_ineq(q) << '\n';
    return os.str();
}

IneqSystem eliminate(const IneqSystem& sys, const std::string& var) {
    if (!sys.declared(var)) throw ValidationError("eliminate: variable not declared: " + var);
    IneqSystem out = sys;
    out.ineqs = fm_step(sys.ineqs, var);
    out.vars.erase(std::remove(out.vars.begin(), out.vars.end(), var), out.vars.end());
    return out;
}

bool implied(const std::vector<Ineq>& context, const Ineq& candidate) {
    std::vector<Ineq> sys = context;
    for (const auto& sym : symbols_of({candidate})) sys.push_back(nonneg(sym));
    for (const auto& sym : symbols_of(context)) sys.push_back(nonneg(sym));
    Ineq neg;
    neg.e = Rat(-1) * LinExpr(candidate.e);
    neg.strict = !candidate.strict;
    sys.push_back(std::move(neg));
    try {
        return infeasible(std::move(sys));
    } catch (const BudgetError&) {
        return false;  // conservatively keep the inequality
    }
}

IneqSystem project(const IneqSystem& sys, const std::vector<std::string>& keep) {
    for (const auto& k : keep)
        if (!sys.declared(k)) throw ValidationError("project: variable not declared: " + k);

    std::vector<Ineq> qs = sys.ineqs;

    // substitutions: solve each equality for a non-kept variable and apply
    for (const auto& sub : sys.substs) {
        LinExpr eq = sub.rhs;  // var - rhs == 0
        eq -= [&] {
            LinExpr v;
            v.terms[sub.var] = 1;
            return v;
        }();
        eq.prune();
        std::string pivot;
        for (const auto& [s, _] : eq.terms) {
            if (is_atom(s)) continue;
            if (std::find(keep.begin(), keep.end(), s) == keep.end()) {
                pivot = s;
                break;
            }
        }
        if (pivot.empty()) throw ValidationError("substitution has no eliminable variable: " + sub.var);
        Rat c = eq.terms.at(pivot);
        LinExpr repl = Rat(-1) / c * eq;
        repl.terms.erase(pivot);
        // the pivot variable was constrained nonnegative; keep that fact
        Ineq piv_nonneg;
        piv_nonneg.e = repl;
        qs.push_back(std::move(piv_nonneg));
        substitute(qs, pivot, repl);
    }

    // eliminate everything outside keep, nonnegativity included
    std::set<std::string> to_drop;
    for (const auto& s : symbols_of(qs))
        if (!is_atom(s) && std::find(keep.begin(), keep.end(), s) == keep.end()) to_drop.insert(s);
    for (const auto& v : to_drop) {
        bool present = false;
        for (const auto& q : qs) present |= coeff(q.e, v) != 0;
        if (present) qs.push_back(nonneg(v));
    }
    while (!to_drop.empty()) {
        std::string sym = cheapest_symbol(qs, to_drop);
        qs = fm_step(qs, sym);
        to_drop.erase(sym);
    }

    for (const auto& rw : sys.rewrites) apply_rewrite(qs, rw);
    for (auto& q : qs) normalize(q.e);

    qs = dominance_filter(std::move(qs));

    // drop anything provably implied by the rest (ambient nonnegativity holds)
    std::sort(qs.begin(), qs.end(),
              [](const Ineq& a, const Ineq& b) { return expr_key(a.e) < expr_key(b.e); });
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < qs.size(); ++i) {
            std::vector<Ineq> rest;
            for (std::size_t j = 0; j < qs.size(); ++j)
                if (j != i) rest.push_back(qs[j]);
            if (implied(rest, qs[i])) {
                qs.erase(qs.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }

    IneqSystem out;
    for (const auto& v : sys.vars)
        if (std::find(keep.begin(), keep.end(), v) != keep.end()) out.vars.push_back(v);
    out.ineqs = std::move(qs);
    return out;
}

bool system_implies(const IneqSystem& a, const IneqSystem& b) {
    for (const auto& q : b.ineqs)
        if (!implied(a.ineqs, q)) return false;
    return true;
}

bool equivalent(const IneqSystem& a, const IneqSystem& b) {
    return system_implies(a, b) && system_implies(b, a);
}

}  // namespace binfwd::fme
