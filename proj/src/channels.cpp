#include "binfwd/channels.hpp"

#include <algorithm>
#include <cmath>

namespace binfwd {

namespace {

void check_state_law(const std::vector<double>& p, std::size_t want, const std::string& who) {
    if (p.size() != want)
        throw ValidationError(who + ": state law has " + std::to_string(p.size()) +
                              " entries, expected " + std::to_string(want));
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0)
            throw ValidationError(who + ": negative state probability at index " + std::to_string(i));
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ValidationError(who + ": state law sums to " + std::to_string(sum));
}

void check_axis_names(std::initializer_list<const Alphabet*> axes) {
    for (const Alphabet* a : axes)
        if (a->name.empty() || a->size < 1)
            throw ValidationError("alphabet " + a->name + " has invalid size");
}

Alphabet singleton(const std::string& name) { return Alphabet{name, 1}; }

}  // namespace

void DetLink::validate() const {
    std::size_t want = 1;
    for (const auto& a : inputs) want *= static_cast<std::size_t>(a.size);
    if (table.size() != want)
        throw ValidationError("deterministic link table has " + std::to_string(table.size()) +
                              " entries, expected " + std::to_string(want));
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table[i] < 0 || table[i] >= output.size)
            throw ValidationError("deterministic link value out of range at flat index " +
                                  std::to_string(i));
}

CondPmf DetLink::as_kernel() const {
    const auto& t = table;
    std::vector<Alphabet> given = inputs;
    return CondPmf::deterministic(output, given, [&t, this](std::span<const int> in) {
        std::size_t flat = 0;
        for (std::size_t d = 0; d < inputs.size(); ++d)
            flat = flat * static_cast<std::size_t>(inputs[d].size) + static_cast<std::size_t>(in[d]);
        return t[flat];
    });
}

void SdRcSpec::validate() const {
    check_axis_names({&S, &X, &Xr, &Z, &Y});
    check_state_law(p_state, static_cast<std::size_t>(S.size), "sdrc");
    link.validate();
    if (link.inputs.size() != 3 || link.inputs[0].name != X.name ||
        link.inputs[1].name != Xr.name || link.inputs[2].name != S.name ||
        link.output.name != Z.name)
        throw ValidationError("sdrc: link must map (X, Xr, S) -> Z");
    if (out.targets().size() != 1 || out.targets()[0].name != Y.name || out.given().size() != 4 ||
        out.given()[0].name != X.name || out.given()[1].name != Xr.name ||
        out.given()[2].name != Z.name || out.given()[3].name != S.name)
        throw ValidationError("sdrc: output kernel must be p_{Y|X,Xr,Z,S} in that order");
}

void MacSpec::validate() const {
    check_axis_names({&S1, &S2, &X1, &X2, &Z, &Y});
    check_state_law(p_state, static_cast<std::size_t>(S1.size) * static_cast<std::size_t>(S2.size),
                    "mac");
    link.validate();
    if (link.inputs.size() != 2 || link.inputs[0].name != X1.name ||
        link.inputs[1].name != S1.name || link.output.name != Z.name)
        throw ValidationError("mac: link must map (X1, S1) -> Z");
    if (out.targets().size() != 1 || out.targets()[0].name != Y.name || out.given().size() != 4 ||
        out.given()[0].name != X1.name || out.given()[1].name != X2.name ||
        out.given()[2].name != S1.name || out.given()[3].name != S2.name)
        throw ValidationError("mac: output kernel must be p_{Y|X1,X2,S1,S2} in that order");
}

void PtpSeSpec::validate() const {
    check_axis_names({&S, &X1, &X2, &Y});
    check_state_law(p_state, static_cast<std::size_t>(S.size), "ptp_se");
    if (out.targets().size() != 1 || out.targets()[0].name != Y.name || out.given().size() != 2 ||
        out.given()[0].name != X2.name || out.given()[1].name != S.name)
        throw ValidationError("ptp_se: output kernel must be p_{Y|X2,S} in that order");
}

SdRcDecision SdRcDecision::noncausal(const SdRcSpec& spec, Alphabet u, CondPmf u_given_s,
                                     CondPmf xr_given_u, CondPmf x_given_xr_u_s) {
    spec.validate();
    long cap = std::min(static_cast<long>(spec.S.size) * spec.X.size * spec.Xr.size,
                        static_cast<long>(spec.S.size) * spec.Y.size + 1);
    if (u.size < 1 || u.size > cap)
        throw ValidationError("sdrc decision: |U|=" + std::to_string(u.size) +
                              " outside cardinality cap " + std::to_string(cap));
    SdRcDecision d;
    d.mode = Mode::noncausal;
    d.U = std::move(u);
    d.u_given_s = std::move(u_given_s);
    d.xr_given_u = std::move(xr_given_u);
    d.x_given = std::move(x_given_xr_u_s);
    return d;
}

SdRcDecision SdRcDecision::causal(const SdRcSpec& spec, CondPmf xr, CondPmf x_given_xr_s) {
    spec.validate();
    Alphabet u = singleton("U");
    if (xr.targets().size() != 1 || !xr.given().empty())
        throw ValidationError("sdrc causal decision: first factor must be an unconditional p_{Xr}");

    CondPmf u_given_s({u}, {spec.S}, std::vector<double>(static_cast<std::size_t>(spec.S.size), 1.0));
    CondPmf xr_given_u(xr.targets(), {u}, std::vector<double>(xr.probs()));

    // widen p_{X|Xr,S} to p_{X|Xr,U,S} over the singleton U
    const auto& src = x_given_xr_s;
    if (src.given().size() != 2)
        throw ValidationError("sdrc causal decision: second factor must be p_{X|Xr,S}");
    std::vector<Alphabet> given{src.given()[0], u, src.given()[1]};
    std::size_t rows = static_cast<std::size_t>(src.given()[0].size) *
                       static_cast<std::size_t>(src.given()[1].size);
    std::vector<double> k;
    k.reserve(rows * src.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = src.row(r);
        k.insert(k.end(), row.begin(), row.end());
    }
    CondPmf x_given(src.targets(), given, std::move(k));

    SdRcDecision d;
    d.mode = Mode::causal;
    d.U = u;
    d.u_given_s = std::move(u_given_s);
    d.xr_given_u = std::move(xr_given_u);
    d.x_given = std::move(x_given);
    return d;
}

SdRcDecision SdRcDecision::nostate(const SdRcSpec& spec, const CondPmf& xr_x_joint) {
    spec.validate();
    if (spec.S.size != 1)
        throw ValidationError("sdrc nostate decision requires a singleton state alphabet");
    if (!xr_x_joint.given().empty() || xr_x_joint.targets().size() != 2)
        throw ValidationError("sdrc nostate decision: factor must be an unconditional p_{Xr,X}");
    const Alphabet& xr = xr_x_joint.targets()[0];
    const Alphabet& x = xr_x_joint.targets()[1];

    // U == Xr: p_U = marginal of Xr, p_{Xr|U} identity, p_{X|Xr,U,S} = p_{X|Xr}
    Alphabet u{"U", xr.size};
    JointPmf joint(xr_x_joint.targets(), std::vector<double>(xr_x_joint.probs()));
    auto p_xr = joint.marginalize({xr.name});
    CondPmf u_given_s({u}, {spec.S}, std::vector<double>(p_xr.probs()));
    CondPmf xr_given_u = CondPmf::deterministic(xr, {u}, [](std::span<const int> g) { return g[0]; });

    auto x_given_xr = conditional_from_joint(joint, {x.name}, {xr.name});
    std::vector<double> k;
    k.reserve(static_cast<std::size_t>(xr.size) * u.size * static_cast<std::size_t>(x.size));
    for (int ixr = 0; ixr < xr.size; ++ixr) {
        for (int iu = 0; iu < u.size; ++iu) {
            auto row = x_given_xr.row(static_cast<std::size_t>(ixr));
            k.insert(k.end(), row.begin(), row.end());
        }
    }
    CondPmf x_given({x}, {xr, u, spec.S}, std::move(k));

    SdRcDecision d;
    d.mode = Mode::nostate;
    d.U = u;
    d.u_given_s = std::move(u_given_s);
    d.xr_given_u = std::move(xr_given_u);
    d.x_given = std::move(x_given);
    return d;
}

JointPmf assemble_sdrc(const SdRcSpec& spec, const SdRcDecision& d) {
    spec.validate();
    if (d.u_given_s.given().size() != 1 || d.u_given_s.given()[0].name != spec.S.name ||
        d.u_given_s.given()[0].size != spec.S.size)
        throw ValidationError("sdrc decision does not match spec alphabets");
    std::vector<CondPmf> factors;
    factors.push_back(CondPmf::marginal({spec.S}, std::vector<double>(spec.p_state)));
    factors.push_back(d.u_given_s);
    factors.push_back(d.xr_given_u);
    factors.push_back(d.x_given);
    factors.push_back(spec.link.as_kernel());
    factors.push_back(spec.out);
    return compose(factors);
}

MacDecision MacDecision::strictly_causal(const MacSpec& spec, Alphabet u, CondPmf ux1_given_s1,
                                         CondPmf x2_given_u_s2) {
    spec.validate();
    long cap = std::min(
        static_cast<long>(spec.S2.size) * spec.S1.size * spec.X1.size * spec.X2.size + 2,
        static_cast<long>(spec.S1.size) * spec.S2.size * spec.Y.size + 3);
    if (u.size < 1 || u.size > cap)
        throw ValidationError("mac decision: |U|=" + std::to_string(u.size) +
                              " outside cardinality cap " + std::to_string(cap));
    for (const auto& g : x2_given_u_s2.given())
        if (g.name == spec.Z.name)
            throw ValidationError("strictly causal cribbing: p_{X2|...} must not reference Z");
    MacDecision d;
    d.mode = Cribbing::strictly_causal;
    d.U = std::move(u);
    d.ux1_given_s1 = std::move(ux1_given_s1);
    d.x2_given = std::move(x2_given_u_s2);
    return d;
}

MacDecision MacDecision::causal(const MacSpec& spec, Alphabet u, CondPmf ux1_given_s1,
                                CondPmf x2_given_z_u_s2) {
    spec.validate();
    long cap = std::min(
        static_cast<long>(spec.S2.size) * spec.S1.size * spec.X1.size * spec.X2.size + 2,
        static_cast<long>(spec.S1.size) * spec.S2.size * spec.Y.size + 3);
    if (u.size < 1 || u.size > cap)
        throw ValidationError("mac decision: |U|=" + std::to_string(u.size) +
                              " outside cardinality cap " + std::to_string(cap));
    bool sees_z = false;
    for (const auto& g : x2_given_z_u_s2.given()) sees_z |= (g.name == spec.Z.name);
    if (!sees_z)
        throw ValidationError("causal cribbing: p_{X2|Z,U,S2} must reference Z");
    MacDecision d;
    d.mode = Cribbing::causal;
    d.U = std::move(u);
    d.ux1_given_s1 = std::move(ux1_given_s1);
    d.x2_given = std::move(x2_given_z_u_s2);
    return d;
}

JointPmf assemble_mac(const MacSpec& spec, const MacDecision& d) {
    spec.validate();
    std::vector<CondPmf> factors;
    factors.push_back(CondPmf::marginal({spec.S1, spec.S2}, std::vector<double>(spec.p_state)));
    factors.push_back(d.ux1_given_s1);
    factors.push_back(spec.link.as_kernel());
    factors.push_back(d.x2_given);
    factors.push_back(spec.out);
    return compose(factors);
}

PtpSeSpec example_channel(double alpha, double p) {
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("example_channel: alpha outside [0,1]");
    if (p <= 0.0 || p >= 1.0) throw ValidationError("example_channel: p outside (0,1)");

    PtpSeSpec spec;
    spec.S = {"S", 3};
    spec.X1 = {"X1", 2};
    spec.X2 = {"X2", 2};
    spec.Y = {"Y", 2};
    spec.p_state = {p / 2.0, p / 2.0, 1.0 - p};

    // kernel rows ordered (x2, s); columns y = 0, 1
    std::vector<double> k(2 * 3 * 2, 0.0);
    auto set = [&](int x2, int s, double py1) {
        k[static_cast<std::size_t>((x2 * 3 + s) * 2)] = 1.0 - py1;
        k[static_cast<std::size_t>((x2 * 3 + s) * 2 + 1)] = py1;
    };
    // s = 0: Z-channel, input 1 flips to 0 with probability alpha
    set(0, 0, 0.0);
    set(1, 0, 1.0 - alpha);
    // s = 1: S-channel, input 0 flips to 1 with probability alpha
    set(0, 1, alpha);
    set(1, 1, 1.0);
    // s = 2: noiseless
    set(0, 2, 0.0);
    set(1, 2, 1.0);
    spec.out = CondPmf({spec.Y}, {spec.X2, spec.S}, std::move(k));
    spec.validate();
    return spec;
}

MacSpec ptp_se_as_mac(const PtpSeSpec& spec) {
    spec.validate();
    MacSpec mac;
    mac.S1 = {"S1", spec.S.size};
    mac.S2 = {"S2", 1};
    mac.X1 = {"X1", spec.X1.size};
    mac.X2 = {"X2", spec.X2.size};
    mac.Z = {"Z", spec.X1.size};
    mac.Y = {"Y", spec.Y.size};
    mac.p_state = spec.p_state;

    mac.link.inputs = {mac.X1, mac.S1};
    mac.link.output = mac.Z;
    mac.link.table.resize(static_cast<std::size_t>(mac.X1.size) * mac.S1.size);
    for (int x1 = 0; x1 < mac.X1.size; ++x1)
        for (int s = 0; s < mac.S1.size; ++s)
            mac.link.table[static_cast<std::size_t>(x1 * mac.S1.size + s)] = x1;

    // p_{Y|X1,X2,S1,S2}(y|...) = spec.out(y|x2,s1), constant in x1 and s2
    std::size_t rows = static_cast<std::size_t>(mac.X1.size) * mac.X2.size * mac.S1.size;
    std::vector<double> k;
    k.reserve(rows * static_cast<std::size_t>(mac.Y.size));
    for (int x1 = 0; x1 < mac.X1.size; ++x1) {
        for (int x2 = 0; x2 < mac.X2.size; ++x2) {
            for (int s = 0; s < mac.S1.size; ++s) {
                auto row = spec.out.row(static_cast<std::size_t>(x2 * mac.S1.size + s));
                k.insert(k.end(), row.begin(), row.end());
            }
        }
    }
    mac.out = CondPmf({mac.Y}, {mac.X1, mac.X2, mac.S1, mac.S2}, std::move(k));
    mac.validate();
    return mac;
}

}  // namespace binfwd
