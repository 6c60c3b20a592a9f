#include "binfwd/rates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace binfwd {

namespace {

using Names = std::vector<std::string>;

double golden_max(double lo, double hi, double tol, const std::function<double(double)>& f,
                  double* arg = nullptr) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    double x = (a + b) / 2.0;
    if (arg) *arg = x;
    return f(x);
}

}  // namespace

SdRcValue sdrc_value(const SdRcSpec& spec, const SdRcDecision& d) {
    auto j = assemble_sdrc(spec, d);
    const std::string S = spec.S.name, X = spec.X.name, Xr = spec.Xr.name, Z = spec.Z.name,
                      Y = spec.Y.name, U = d.U.name;
    SdRcValue v;
    v.rate_bound_1 = mutual_information(j, {X, Xr}, {Y}, {S});
    double i_u_s = mutual_information(j, {U}, {S});
    double h_z = entropy(j, {Z}, {Xr, S, U});
    v.slack = h_z - i_u_s;
    v.rate_bound_2 = mutual_information(j, {X}, {Y}, {Xr, Z, S, U}) + v.slack;
    v.value = std::min(v.rate_bound_1, v.rate_bound_2);
    v.feasible = v.slack >= -kSlackTol;
    return v;
}

SdRcValue sdrc_causal_value(const SdRcSpec& spec, const SdRcDecision& causal) {
    if (causal.mode != SdRcDecision::Mode::causal)
        throw ValidationError("sdrc_causal_value: decision is not in causal mode");
    SdRcValue v = sdrc_value(spec, causal);
    // no binning constraint in the causal scheme
    v.slack = std::numeric_limits<double>::infinity();
    v.feasible = true;
    return v;
}

SdRcValue sdrc_nostate_value(const SdRcSpec& spec, const CondPmf& xr_x_joint) {
    auto d = SdRcDecision::nostate(spec, xr_x_joint);
    auto j = assemble_sdrc(spec, d);
    const std::string X = spec.X.name, Xr = spec.Xr.name, Z = spec.Z.name, Y = spec.Y.name;
    SdRcValue v;
    v.rate_bound_1 = mutual_information(j, {X, Xr}, {Y});
    v.rate_bound_2 = mutual_information(j, {X}, {Y}, {Xr, Z}) + entropy(j, {Z}, {Xr});
    v.value = std::min(v.rate_bound_1, v.rate_bound_2);
    v.slack = std::numeric_limits<double>::infinity();
    v.feasible = true;
    return v;
}

MacRateBounds mac_bounds(const MacSpec& spec, const MacDecision& d) {
    auto j = assemble_mac(spec, d);
    const std::string S1 = spec.S1.name, S2 = spec.S2.name, X1 = spec.X1.name, X2 = spec.X2.name,
                      Z = spec.Z.name, Y = spec.Y.name, U = d.U.name;
    MacRateBounds b;
    double i_u_s1_g_s2 = mutual_information(j, {U}, {S1}, {S2});
    double h_z = entropy(j, {Z}, {S1, U});
    b.slack = h_z - i_u_s1_g_s2;
    b.b_r1 = mutual_information(j, {X1}, {Y}, {X2, Z, S1, S2, U}) + b.slack;
    b.b_r2 = mutual_information(j, {X2}, {Y}, {X1, S1, S2, U});
    b.b_sum_a = mutual_information(j, {X1, X2}, {Y}, {Z, S1, S2, U}) + b.slack;
    b.b_sum_b = mutual_information(j, {X1, X2}, {Y}, {S1, S2});
    b.feasible = b.slack >= -kSlackTol;
    return b;
}

CaseABounds mac_case_a_bounds(const MacSpec& spec, const CondPmf& x1_given_s1, const CondPmf& x2) {
    spec.validate();
    std::vector<CondPmf> factors;
    factors.push_back(CondPmf::marginal({spec.S1, spec.S2}, std::vector<double>(spec.p_state)));
    factors.push_back(x1_given_s1);
    factors.push_back(x2);
    factors.push_back(spec.out);
    auto j = compose(factors);
    const std::string S1 = spec.S1.name, S2 = spec.S2.name, X1 = spec.X1.name, X2 = spec.X2.name,
                      Y = spec.Y.name;
    CaseABounds b;
    b.r1 = mutual_information(j, {X1}, {Y}, {X2, S1, S2});
    b.r2 = mutual_information(j, {X2}, {Y}, {X1, S1, S2});
    b.sum = mutual_information(j, {X1, X2}, {Y}, {S1, S2});
    return b;
}

MacSpec make_conferencing_mac(int x1c_size, int x1p_size, const std::vector<double>& p_state,
                              const CondPmf& out_y_given_x1c_x2_s) {
    if (out_y_given_x1c_x2_s.given().size() != 3)
        throw ValidationError("conferencing: base kernel must be p_{Y|X1c,X2,S}");
    const Alphabet& x1c = out_y_given_x1c_x2_s.given()[0];
    const Alphabet& x2 = out_y_given_x1c_x2_s.given()[1];
    const Alphabet& s = out_y_given_x1c_x2_s.given()[2];
    const Alphabet& y = out_y_given_x1c_x2_s.targets()[0];
    if (x1c.size != x1c_size)
        throw ValidationError("conferencing: X1c size mismatch against base kernel");

    MacSpec mac;
    mac.S1 = {"S1", s.size};
    mac.S2 = {"S2", 1};
    mac.X1 = {"X1", x1c_size * x1p_size};  // x1 = x1c * |X1p| + x1p
    mac.X2 = {"X2", x2.size};
    mac.Z = {"Z", x1p_size};
    mac.Y = {"Y", y.size};
    mac.p_state = p_state;

    mac.link.inputs = {mac.X1, mac.S1};
    mac.link.output = mac.Z;
    mac.link.table.resize(static_cast<std::size_t>(mac.X1.size) * mac.S1.size);
    for (int x1 = 0; x1 < mac.X1.size; ++x1)
        for (int si = 0; si < mac.S1.size; ++si)
            mac.link.table[static_cast<std::size_t>(x1 * mac.S1.size + si)] = x1 % x1p_size;

    std::vector<double> k;
    k.reserve(static_cast<std::size_t>(mac.X1.size) * mac.X2.size * mac.S1.size * mac.Y.size);
    for (int x1 = 0; x1 < mac.X1.size; ++x1) {
        int c = x1 / x1p_size;
        for (int ix2 = 0; ix2 < mac.X2.size; ++ix2) {
            for (int si = 0; si < mac.S1.size; ++si) {
                auto row = out_y_given_x1c_x2_s.row(
                    static_cast<std::size_t>((c * mac.X2.size + ix2) * mac.S1.size + si));
                k.insert(k.end(), row.begin(), row.end());
            }
        }
    }
    mac.out = CondPmf({mac.Y}, {mac.X1, mac.X2, mac.S1, mac.S2}, std::move(k));
    mac.validate();
    return mac;
}

ConferencingBounds conferencing_region_bounds(const MacSpec& spec, const MacDecision& d,
                                              int x1c_size, int x1p_size) {
    if (spec.X1.size != x1c_size * x1p_size)
        throw ValidationError("conferencing: |X1| != |X1c| * |X1p|");
    // structure checks: z must be the x1p projection and the kernel constant in x1p
    for (int x1 = 0; x1 < spec.X1.size; ++x1)
        for (int si = 0; si < spec.S1.size; ++si)
            if (spec.link.table[static_cast<std::size_t>(x1 * spec.S1.size + si)] != x1 % x1p_size)
                throw ValidationError("conferencing: link is not the x1p projection");
    std::size_t inner = static_cast<std::size_t>(spec.X2.size) * spec.S1.size * spec.S2.size;
    for (int c = 0; c < x1c_size; ++c) {
        for (int ip = 1; ip < x1p_size; ++ip) {
            for (std::size_t r = 0; r < inner; ++r) {
                auto a = spec.out.row((static_cast<std::size_t>(c * x1p_size + ip)) * inner + r);
                auto b = spec.out.row(static_cast<std::size_t>(c * x1p_size) * inner + r);
                for (std::size_t yy = 0; yy < a.size(); ++yy)
                    if (std::abs(a[yy] - b[yy]) > 1e-12)
                        throw ValidationError("conferencing: kernel depends on x1p");
            }
        }
    }

    // Case-B substitution needs p_{X1|U,S} = p_{X1c|U,S} * Uniform(X1p):
    // p(u, (x1c, ip) | s) must not depend on ip.
    const CondPmf& ux1 = d.ux1_given_s1;
    for (std::size_t s = 0; s < ux1.rows(); ++s) {
        auto row = ux1.row(s);
        for (int u = 0; u < d.U.size; ++u) {
            for (int c = 0; c < x1c_size; ++c) {
                std::size_t base = static_cast<std::size_t>(u) * spec.X1.size +
                                   static_cast<std::size_t>(c) * x1p_size;
                for (int ip = 1; ip < x1p_size; ++ip)
                    if (std::abs(row[base + static_cast<std::size_t>(ip)] - row[base]) > 1e-9)
                        throw ValidationError(
                            "conferencing: p_{X1p|U,S} is not uniform/independent of X1c");
            }
        }
    }

    double r12 = std::log2(static_cast<double>(x1p_size));
    auto b = mac_bounds(spec, d);
    ConferencingBounds out;
    out.r1 = b.b_r1;
    out.r2 = b.b_r2;
    out.sum_a = b.b_sum_a;
    out.sum_b = b.b_sum_b;
    out.r12 = r12;
    out.slack = b.slack;
    out.feasible = b.feasible;
    return out;
}

double ptp_csi_value(const PtpSeSpec& spec, const CondPmf& x2_given_s) {
    spec.validate();
    std::vector<CondPmf> factors;
    factors.push_back(CondPmf::marginal({spec.S}, std::vector<double>(spec.p_state)));
    factors.push_back(x2_given_s);
    factors.push_back(spec.out);
    auto j = compose(factors);
    return mutual_information(j, {spec.X2.name}, {spec.Y.name}, {spec.S.name});
}

PtpSeValue ptp_se_noncausal(const PtpSeSpec& spec, const CondPmf& u_given_s,
                            const CondPmf& x2_given_u) {
    spec.validate();
    const Alphabet& u = u_given_s.targets()[0];
    int cap = spec.S.size * spec.X2.size + 1;
    if (u.size > cap)
        throw ValidationError("ptp_se decision: |U|=" + std::to_string(u.size) +
                              " exceeds cardinality cap " + std::to_string(cap));
    std::vector<CondPmf> factors;
    factors.push_back(CondPmf::marginal({spec.S}, std::vector<double>(spec.p_state)));
    factors.push_back(u_given_s);
    factors.push_back(x2_given_u);
    factors.push_back(spec.out);
    auto j = compose(factors);
    PtpSeValue v;
    v.value = mutual_information(j, {spec.X2.name}, {spec.Y.name}, {u.name, spec.S.name});
    v.constraint_slack =
        std::log2(static_cast<double>(spec.X1.size)) - mutual_information(j, {u.name}, {spec.S.name});
    v.feasible = v.constraint_slack >= -kSlackTol;
    return v;
}

double ptp_se_causal(const PtpSeSpec& spec, const std::vector<int>& f,
                     const CondPmf& x2_given_x1) {
    spec.validate();
    if (f.size() != static_cast<std::size_t>(spec.S.size))
        throw ValidationError("ptp_se_causal: map must be total on S");
    for (int v : f)
        if (v < 0 || v >= spec.X1.size)
            throw ValidationError("ptp_se_causal: map value out of range");
    auto x1_of_s =
        CondPmf::deterministic(spec.X1, {spec.S}, [&](std::span<const int> g) { return f[static_cast<std::size_t>(g[0])]; });
    std::vector<CondPmf> factors;
    factors.push_back(CondPmf::marginal({spec.S}, std::vector<double>(spec.p_state)));
    factors.push_back(x1_of_s);
    factors.push_back(x2_given_x1);
    factors.push_back(spec.out);
    auto j = compose(factors);
    return mutual_information(j, {spec.X2.name}, {spec.Y.name}, {spec.S.name, spec.X1.name});
}

double z_channel_capacity(double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("z_channel_capacity: alpha outside [0,1]");
    if (alpha == 0.0) return 1.0;
    if (alpha == 1.0) return 0.0;
    double e = binary_entropy(alpha) / (1.0 - alpha);
    double t = std::exp2(e);
    return binary_entropy(t / (1.0 + t)) - e / (1.0 + t);
}

ClosedFormExample closed_form_example(double alpha, double p) {
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("closed_form_example: alpha outside [0,1]");
    if (p <= 0.0 || p >= 1.0) throw ValidationError("closed_form_example: p outside (0,1)");
    ClosedFormExample r;
    double cz = z_channel_capacity(alpha);
    r.c_nc = (p / 2.0) * (cz + cz) + (1.0 - p);
    r.c_nocsi = p * (binary_entropy((1.0 + alpha) / 2.0) - 0.5 * binary_entropy(alpha)) + (1.0 - p);

    auto causal = [&](double beta) {
        return (p / 2.0) * cz +
               (p / 2.0) * (binary_entropy(beta + (1.0 - beta) * alpha) -
                            (1.0 - beta) * binary_entropy(alpha)) +
               (1.0 - p) * binary_entropy(beta);
    };
    // coarse 1e-3 grid, then golden-section refinement around the best point
    double best = 0.0, best_b = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        double b = i / 1000.0;
        double v = causal(b);
        if (v > best) {
            best = v;
            best_b = b;
        }
    }
    double lo = std::max(0.0, best_b - 1e-3), hi = std::min(1.0, best_b + 1e-3);
    r.c_c = std::max(best, golden_max(lo, hi, 1e-6, causal));
    return r;
}

}  // namespace binfwd
