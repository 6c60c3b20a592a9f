#pragma once

#include <span>
#include <string>
#include <vector>

#include "binfwd/prob.hpp"

namespace binfwd {

// Total deterministic map from a tuple of input alphabets onto an output
// alphabet, stored as an explicit lookup table (row-major over inputs).
struct DetLink {
    std::vector<Alphabet> inputs;
    Alphabet output;
    std::vector<int> table;

    int operator()(std::span<const int> in) const {
        std::size_t flat = 0;
        for (std::size_t d = 0; d < inputs.size(); ++d)
            flat = flat * static_cast<std::size_t>(inputs[d].size) + static_cast<std::size_t>(in[d]);
        return table[flat];
    }
    void validate() const;
    CondPmf as_kernel() const;  // 1_{output | inputs}
};

// --- relay channel with state, relay observation deterministic -------------

struct SdRcSpec {
    Alphabet S, X, Xr, Z, Y;
    std::vector<double> p_state;  // p_S
    DetLink link;                 // z(x, x_r, s), inputs ordered (X, Xr, S)
    CondPmf out;                  // p_{Y | X, Xr, Z, S}
    void validate() const;
};

struct SdRcDecision {
    enum class Mode { noncausal, causal, nostate };
    Mode mode = Mode::noncausal;
    Alphabet U;
    CondPmf u_given_s;   // p_{U|S}
    CondPmf xr_given_u;  // p_{Xr|U}
    CondPmf x_given;     // p_{X | Xr, U, S}

    static SdRcDecision noncausal(const SdRcSpec& spec, Alphabet u, CondPmf u_given_s,
                                  CondPmf xr_given_u, CondPmf x_given_xr_u_s);
    // p_{Xr} and p_{X|Xr,S}; stored with a singleton U inserted
    static SdRcDecision causal(const SdRcSpec& spec, CondPmf xr, CondPmf x_given_xr_s);
    // joint p_{Xr,X} on a stateless channel; stored with U == Xr
    static SdRcDecision nostate(const SdRcSpec& spec, const CondPmf& xr_x_joint);
};

JointPmf assemble_sdrc(const SdRcSpec& spec, const SdRcDecision& d);

// --- multiple access channel, encoder 2 cribbing z(x1, s1) -----------------

struct MacSpec {
    Alphabet S1, S2, X1, X2, Z, Y;
    std::vector<double> p_state;  // p_{S1,S2}, row-major (s1, s2)
    DetLink link;                 // z(x1, s1)
    CondPmf out;                  // p_{Y | X1, X2, S1, S2}
    void validate() const;
};

struct MacDecision {
    enum class Cribbing { strictly_causal, causal };
    Cribbing mode = Cribbing::strictly_causal;
    Alphabet U;
    CondPmf ux1_given_s1;  // p_{U,X1 | S1}
    CondPmf x2_given;      // strictly causal: p_{X2|U,S2}; causal: p_{X2|Z,U,S2}

    static MacDecision strictly_causal(const MacSpec& spec, Alphabet u, CondPmf ux1_given_s1,
                                       CondPmf x2_given_u_s2);
    static MacDecision causal(const MacSpec& spec, Alphabet u, CondPmf ux1_given_s1,
                              CondPmf x2_given_z_u_s2);
};

JointPmf assemble_mac(const MacSpec& spec, const MacDecision& d);

// --- point-to-point channel fed by a state encoder --------------------------

struct PtpSeSpec {
    Alphabet S, X1, X2, Y;        // X1 enters only through the budget log2|X1|
    std::vector<double> p_state;  // p_S
    CondPmf out;                  // p_{Y | X2, S}
    void validate() const;
};

// Three-state example family: Z-channel for s=0 (input 1 flips to 0 w.p.
// alpha), the mirrored S-channel for s=1, a noiseless channel for s=2;
// p_S = (p/2, p/2, 1-p), binary X1, X2, Y.
PtpSeSpec example_channel(double alpha, double p);

// Embed the state-encoder channel as a MAC with cribbing z(x1, s) = x1 and an
// output kernel that ignores x1 (degenerate S2).
MacSpec ptp_se_as_mac(const PtpSeSpec& spec);

}  // namespace binfwd
