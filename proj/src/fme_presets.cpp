#include "binfwd/fme_presets.hpp"

#include "binfwd/errors.hpp"

namespace binfwd::fme {

namespace {

// Relay channel, block-Markov rate system. Rate split R = Rp + Rpp; Rt is the
// covering rate, Rb the bin rate. The identity collapses the two packing
// terms of the sum-rate bound.
constexpr std::string_view kEq17 = R"(# relay channel rate system (slack terms at zero)
vars R Rp Rpp Rt Rb
let R = Rp + Rpp
Rp + Rt <= Rb
Rp + Rt <= H(Z|X_r,U,S)
I(U;S) <= Rt
R <= I(X,Z;Y|X_r,U,S) + I(U,X_r;Y|S)
Rpp <= I(X;Y|X_r,Z,U,S)
rewrite I(X,Z;Y|X_r,U,S) + I(U,X_r;Y|S) -> I(X,X_r;Y|S)
)";

// One-state cribbing MAC. The two rewrites record that Z is a function of
// (X1, S) and split the joint packing term along the chain rule; without
// them the projection carries a face the compact bound set absorbs.
constexpr std::string_view kEq21 = R"(# one-state cribbing MAC rate system (slack terms at zero)
vars R1 R2 R1p R1pp Rt1 Rb
let R1 = R1p + R1pp
Rt1 <= H(Z|S,U)
Rt1 <= Rb
I(U;S) <= Rt1
R1p + Rt1 <= H(Z|S,U)
R1p + Rt1 <= Rb
Rb + R1pp + R2 <= I(X1,X2;Y|S) + I(U;S)
R1pp + R2 <= I(X1,X2;Y|S,U,Z)
R2 <= I(X2;Y|S,U,X1)
R1pp <= I(X1;Y|S,U,X2,Z)
rewrite I(X2;Y|S,U,X1) -> I(X2;Y|S,U,X1,Z)
rewrite I(X1,X2;Y|S,U,Z) -> I(X1;Y|S,U,Z) + I(X2;Y|S,U,X1,Z)
)";

// Two-state superbin MAC. The cooperation codeword is found inside a superbin
// coordinated with S2, so the covering budget and the sum-rate packing term
// both carry I(U;S1) - I(U;S2); the first rewrite names that difference.
constexpr std::string_view kEq41 = R"(# two-state superbin MAC rate system (slack terms at zero)
vars R1 R2 R1p R1pp Rt Rbp Rbpp
let R1 = R1p + R1pp
R1p + Rt <= H(Z|S1,U)
R1p + Rt <= Rbp
Rbp + R1pp + R2 <= I(X1,X2;Y|S1,S2) + I(U;S1) - I(U;S2)
R1pp + R2 <= I(X1,X2;Y|S1,S2,U,Z)
R2 <= I(X2;Y|S1,S2,U,X1)
R1pp <= I(X1;Y|S1,S2,U,X2,Z)
I(U;S1) <= Rt + Rbpp
Rt <= H(Z|S1,U)
Rt <= Rbp
Rbpp <= I(U;S2)
rewrite I(U;S1) - I(U;S2) -> I(U;S1|S2)
rewrite I(X2;Y|S1,S2,U,X1) -> I(X2;Y|S1,S2,U,X1,Z)
rewrite I(X1,X2;Y|S1,S2,U,Z) -> I(X1;Y|S1,S2,U,Z) + I(X2;Y|S1,S2,U,X1,Z)
)";

}  // namespace

std::vector<std::string> preset_names() { return {"eq17", "eq21", "eq41"}; }

std::string_view preset_text(std::string_view name) {
    if (name == "eq17" || name == "eq17.sys") return kEq17;
    if (name == "eq21" || name == "eq21.sys") return kEq21;
    if (name == "eq41" || name == "eq41.sys") return kEq41;
    throw ValidationError("unknown preset: " + std::string(name));
}

}  // namespace binfwd::fme
