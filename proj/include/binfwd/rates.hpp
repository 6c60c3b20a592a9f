#pragma once

#include <vector>

#include "binfwd/channels.hpp"

namespace binfwd {

constexpr double kSlackTol = 1e-9;

struct SdRcValue {
    double rate_bound_1 = 0;  // I(X,Xr;Y|S)
    double rate_bound_2 = 0;  // I(X;Y|Xr,Z,S,U) + H(Z|Xr,S,U) - I(U;S)
    double value = 0;         // min of the two
    double slack = 0;         // H(Z|Xr,S,U) - I(U;S)
    bool feasible = false;    // slack >= -1e-9
};

SdRcValue sdrc_value(const SdRcSpec& spec, const SdRcDecision& d);

// causal factorization p_{Xr} p_{X|Xr,S}; the binning constraint is vacuous
SdRcValue sdrc_causal_value(const SdRcSpec& spec, const SdRcDecision& causal);

// stateless channel, factor p_{Xr,X} (slack vacuous)
SdRcValue sdrc_nostate_value(const SdRcSpec& spec, const CondPmf& xr_x_joint);

struct MacRateBounds {
    double b_r1 = 0;     // I(X1;Y|X2,Z,S1,S2,U) + H(Z|S1,U) - I(U;S1|S2)
    double b_r2 = 0;     // I(X2;Y|X1,S1,S2,U)
    double b_sum_a = 0;  // I(X1,X2;Y|Z,S1,S2,U) + H(Z|S1,U) - I(U;S1|S2)
    double b_sum_b = 0;  // I(X1,X2;Y|S1,S2)
    double slack = 0;    // H(Z|S1,U) - I(U;S1|S2)
    bool feasible = false;
};

MacRateBounds mac_bounds(const MacSpec& spec, const MacDecision& d);

struct RatePoint {
    double r1 = 0, r2 = 0;
};

// MAC without cribbing, CSI at encoder 1 only: the three bounds over
// p_{X1|S} p_{X2}
struct CaseABounds {
    double r1 = 0, r2 = 0, sum = 0;
};
CaseABounds mac_case_a_bounds(const MacSpec& spec, const CondPmf& x1_given_s1, const CondPmf& x2);

// conferencing reduction: X1 = X1c x X1p, z(x1, s) = x1p, kernel ignores x1p
struct ConferencingBounds {
    double r1 = 0, r2 = 0, sum_a = 0, sum_b = 0;
    double r12 = 0;  // log2 |X1p|
    double slack = 0;
    bool feasible = false;
};
MacSpec make_conferencing_mac(int x1c_size, int x1p_size, const std::vector<double>& p_state,
                              const CondPmf& out_y_given_x1c_x2_s);
ConferencingBounds conferencing_region_bounds(const MacSpec& spec, const MacDecision& d,
                                              int x1c_size, int x1p_size);

// point-to-point with full CSI at the encoder (no state encoder in the loop)
double ptp_csi_value(const PtpSeSpec& spec, const CondPmf& x2_given_s);

struct PtpSeValue {
    double value = 0;             // I(X2;Y|U,S)
    double constraint_slack = 0;  // log2|X1| - I(U;S)
    bool feasible = false;
};
PtpSeValue ptp_se_noncausal(const PtpSeSpec& spec, const CondPmf& u_given_s,
                            const CondPmf& x2_given_u);

// deterministic state-encoder map f: S -> X1 and p_{X2|X1}
double ptp_se_causal(const PtpSeSpec& spec, const std::vector<int>& f, const CondPmf& x2_given_x1);

struct ClosedFormExample {
    double c_nc = 0, c_c = 0, c_nocsi = 0;
};

// Closed forms for the three-state example family (all in bits).
double z_channel_capacity(double alpha);
ClosedFormExample closed_form_example(double alpha, double p);

}  // namespace binfwd
