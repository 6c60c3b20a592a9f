#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "binfwd/errors.hpp"
#include "binfwd/fme.hpp"
#include "binfwd/fme_presets.hpp"
#include "binfwd/rng.hpp"

using namespace binfwd;
using namespace binfwd::fme;

namespace {

// plug exact values for some symbols into a system
IneqSystem plug(const IneqSystem& sys, const std::map<std::string, Rat>& values) {
    IneqSystem out = sys;
    for (auto& q : out.ineqs) {
        for (const auto& [sym, val] : values) {
            auto it = q.e.terms.find(sym);
            if (it == q.e.terms.end()) continue;
            q.e.constant += it->second * val;
            q.e.terms.erase(it);
        }
    }
    out.substs.clear();
    out.rewrites.clear();
    return out;
}

bool holds_at(const IneqSystem& sys, const std::map<std::string, Rat>& values) {
    for (const auto& q : sys.ineqs) {
        Rat v = q.e.constant;
        for (const auto& [sym, c] : q.e.terms) {
            auto it = values.find(sym);
            REQUIRE(it != values.end());
            v += c * it->second;
        }
        if (q.strict ? v <= 0 : v < 0) return false;
    }
    return true;
}

Ineq impossible() {
    Ineq q;
    q.e.constant = -1;
    return q;
}

std::vector<std::string> rate_vars(const IneqSystem& sys) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    for (const auto& q : sys.ineqs)
        for (const auto& [s, c] : q.e.terms)
            if (!is_atom(s) && seen.insert(s).second) out.push_back(s);
    return out;
}

}  // namespace

TEST_CASE("atom canonicalization") {
    CHECK(canonical_atom("I(X;Y|Z,X_r,U,S)") == "I(X;Y|S,U,X_r,Z)");
    CHECK(canonical_atom("I(Y;X)") == "I(X;Y)");
    CHECK(canonical_atom("H(Z , X | B,A)") == "H(X,Z|A,B)");
    CHECK_THROWS_AS(canonical_atom("I(X)"), ValidationError);
    CHECK_THROWS_AS(canonical_atom("H(X;Y)"), ValidationError);
}

TEST_CASE("parser round trip and errors") {
    auto sys = parse_system("vars x\nx <= I(U;S)\n2*x >= 1/3\n");
    CHECK(sys.vars == std::vector<std::string>{"x"});
    CHECK(sys.ineqs.size() == 2);
    CHECK_THROWS_AS(parse_system("x <= "), ValidationError);
    CHECK_THROWS_AS(parse_system("x ?? y"), ValidationError);
}

TEST_CASE("eliminate: classical single steps") {
    // a variable absent from every inequality leaves the system unchanged
    auto sys = parse_system("vars x y\ny <= I(U;S)\n");
    auto out = eliminate(sys, "x");
    CHECK(out.ineqs.size() == 1);
    CHECK(format_ineq(out.ineqs[0]) == format_ineq(sys.ineqs[0]));

    // {x <= a, x >= b} projects to {b <= a}
    auto sys2 = parse_system("vars x\nx <= I(A;B)\nx >= H(C)\n");
    auto out2 = eliminate(sys2, "x");
    REQUIRE(out2.ineqs.size() == 1);
    CHECK(format_ineq(out2.ineqs[0]) == "H(C) <= I(A;B)");

    CHECK_THROWS_AS(eliminate(sys2, "zz"), ValidationError);
}

TEST_CASE("eq17 projects to the two rate bounds plus the slack inequality") {
    auto sys = parse_system(preset_text("eq17"));
    auto projected = project(sys, {"R"});

    auto expected = parse_system(
        "vars R\n"
        "I(U;S) <= H(Z|S,U,X_r)\n"
        "R <= I(X,X_r;Y|S)\n"
        "R <= I(X;Y|S,U,X_r,Z) + H(Z|S,U,X_r) - I(U;S)\n");
    CHECK(equivalent(projected, expected));
    CHECK(projected.ineqs.size() == 3);
}

TEST_CASE("eq21 projects to the five-inequality one-state region") {
    auto sys = parse_system(preset_text("eq21"));
    auto projected = project(sys, {"R1", "R2"});

    auto expected = parse_system(
        "vars R1 R2\n"
        "I(U;S) <= H(Z|S,U)\n"
        "R2 <= I(X2;Y|S,U,X1,Z)\n"
        "R1 <= I(X1;Y|S,U,X2,Z) + H(Z|S,U) - I(U;S)\n"
        "R1 + R2 <= I(X1,X2;Y|S)\n"
        "R1 + R2 <= I(X1;Y|S,U,Z) + I(X2;Y|S,U,X1,Z) + H(Z|S,U) - I(U;S)\n");
    CHECK(equivalent(projected, expected));
    CHECK(projected.ineqs.size() == 5);
}

TEST_CASE("eq41 projects to the two-state bounds via the conditional-information rewrite") {
    auto sys = parse_system(preset_text("eq41"));
    auto projected = project(sys, {"R1", "R2"});

    auto expected = parse_system(
        "vars R1 R2\n"
        "I(U;S1|S2) <= H(Z|S1,U)\n"
        "R2 <= I(X2;Y|S1,S2,U,X1,Z)\n"
        "R1 <= I(X1;Y|S1,S2,U,X2,Z) + H(Z|S1,U) - I(U;S1|S2)\n"
        "R1 + R2 <= I(X1,X2;Y|S1,S2)\n"
        "R1 + R2 <= I(X1;Y|S1,S2,U,Z) + I(X2;Y|S1,S2,U,X1,Z) + H(Z|S1,U) - I(U;S1|S2)\n");
    CHECK(equivalent(projected, expected));
    CHECK(projected.ineqs.size() == 5);
}

TEST_CASE("projection onto all variables is an equivalent redundancy-reduced system") {
    auto sys = parse_system(
        "vars x y\n"
        "x <= I(A;B)\n"
        "x <= I(A;B)\n"         // duplicate
        "x <= I(A;B) + H(C)\n"  // implied: H(C) >= 0
        "y <= x\n");
    auto projected = project(sys, {"x", "y"});
    CHECK(equivalent(projected, sys));
    CHECK(projected.ineqs.size() == 2);
}

TEST_CASE("idempotence of projection") {
    auto sys = parse_system(preset_text("eq21"));
    auto p1 = project(sys, {"R1", "R2"});
    auto p2 = project(p1, {"R1", "R2"});
    CHECK(equivalent(p1, p2));
    CHECK(p1.ineqs.size() == p2.ineqs.size());
}

TEST_CASE("soundness by sampling: projection membership equals extension existence") {
    auto sys = parse_system(preset_text("eq21"));
    auto projected = project(sys, {"R1", "R2"});

    // original system with the rate-split equality materialized and
    // nonnegativity of every auxiliary rate variable made explicit
    IneqSystem original = sys;
    for (const auto& sub : sys.substs) {
        LinExpr var;
        var.terms[sub.var] = 1;
        Ineq a, b;
        a.e = var - sub.rhs;
        b.e = sub.rhs - var;
        original.ineqs.push_back(a);
        original.ineqs.push_back(b);
    }
    original.substs.clear();
    for (const auto& v : rate_vars(original)) {
        Ineq q;
        q.e.terms[v] = 1;
        original.ineqs.push_back(q);
    }
    // move to the same atom basis the projection uses
    for (const auto& rw : sys.rewrites) {
        LinExpr diff = rw.lhs - rw.rhs;
        auto pivot = diff.terms.begin();
        Rat c = pivot->second;
        LinExpr repl = Rat(-1) / c * diff;
        std::string sym = pivot->first;
        repl.terms.erase(sym);
        for (auto& q : original.ineqs) {
            auto it = q.e.terms.find(sym);
            if (it == q.e.terms.end()) continue;
            Rat k = it->second;
            q.e.terms.erase(it);
            q.e += k * repl;
        }
    }
    original.rewrites.clear();

    std::set<std::string> atoms;
    for (const auto& q : original.ineqs)
        for (const auto& [s, c] : q.e.terms)
            if (is_atom(s)) atoms.insert(s);
    std::vector<std::string> elim;
    for (const auto& v : rate_vars(original))
        if (v != "R1" && v != "R2") elim.push_back(v);

    Rng rng(424242);
    int agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::map<std::string, Rat> values;
        for (const auto& a : atoms)
            values[a] = Rat(static_cast<long>(rng.below(12)), static_cast<long>(1 + rng.below(3)));
        values["R1"] = Rat(static_cast<long>(rng.below(10)), static_cast<long>(1 + rng.below(3)));
        values["R2"] = Rat(static_cast<long>(rng.below(10)), static_cast<long>(1 + rng.below(3)));

        bool member = holds_at(projected, values);

        auto plugged = plug(original, values);
        plugged.vars = elim;
        bool extendable = !implied(plugged.ineqs, impossible());

        if (member == extendable) ++agree;

        // when an extension exists, construct one by exact interval intersection
        if (extendable) {
            std::vector<IneqSystem> chain{plugged};
            for (const auto& v : elim) chain.push_back(eliminate(chain.back(), v));
            std::map<std::string, Rat> ext = values;
            for (std::size_t i = elim.size(); i-- > 0;) {
                const auto& sysi = chain[i];  // still contains elim[i..]
                const std::string& v = elim[i];
                bool has_lo = false, has_hi = false;
                Rat lo = 0, hi = 0;
                for (const auto& q : sysi.ineqs) {
                    auto it = q.e.terms.find(v);
                    if (it == q.e.terms.end()) continue;
                    Rat c = it->second;
                    Rat rest = q.e.constant;
                    for (const auto& [s, k] : q.e.terms)
                        if (s != v) rest += k * ext.at(s);
                    Rat bound = -rest / c;
                    if (c > 0) {
                        if (!has_lo || bound > lo) lo = bound;
                        has_lo = true;
                    } else {
                        if (!has_hi || bound < hi) hi = bound;
                        has_hi = true;
                    }
                }
                if (!has_lo || lo < 0) lo = 0;
                REQUIRE((!has_hi || lo <= hi));
                ext[v] = has_hi ? (lo + hi) / 2 : lo;
            }
            CHECK(holds_at(plugged, ext));
        }
    }
    CHECK(agree == 100);
}
