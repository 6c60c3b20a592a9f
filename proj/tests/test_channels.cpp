#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "binfwd/channels.hpp"
#include "binfwd/json_io.hpp"
#include "binfwd/rng.hpp"

using namespace binfwd;

namespace {

// 2-ary relay spec with a state-dependent link and an output driven by (z, x)
SdRcSpec toy_sdrc() {
    SdRcSpec spec;
    spec.S = {"S", 2};
    spec.X = {"X", 2};
    spec.Xr = {"Xr", 2};
    spec.Z = {"Z", 2};
    spec.Y = {"Y", 2};
    spec.p_state = {0.6, 0.4};
    spec.link.inputs = {spec.X, spec.Xr, spec.S};
    spec.link.output = spec.Z;
    spec.link.table.resize(8);
    for (int x = 0; x < 2; ++x)
        for (int xr = 0; xr < 2; ++xr)
            for (int s = 0; s < 2; ++s)
                spec.link.table[static_cast<std::size_t>((x * 2 + xr) * 2 + s)] = x ^ (xr & s);
    std::vector<double> k;
    for (int x = 0; x < 2; ++x)
        for (int xr = 0; xr < 2; ++xr)
            for (int z = 0; z < 2; ++z)
                for (int s = 0; s < 2; ++s) {
                    double p1 = 0.05 + 0.8 * z + 0.1 * x * s;
                    (void)xr;
                    k.push_back(1.0 - p1);
                    k.push_back(p1);
                }
    spec.out = CondPmf({spec.Y}, {spec.X, spec.Xr, spec.Z, spec.S}, std::move(k));
    spec.validate();
    return spec;
}

SdRcDecision toy_decision(const SdRcSpec& spec) {
    Alphabet U{"U", 2};
    CondPmf pu({U}, {spec.S}, {0.7, 0.3, 0.2, 0.8});
    CondPmf pxr({spec.Xr}, {U}, {0.9, 0.1, 0.5, 0.5});
    std::vector<double> px;
    for (int xr = 0; xr < 2; ++xr)
        for (int u = 0; u < 2; ++u)
            for (int s = 0; s < 2; ++s) {
                double p1 = 0.1 + 0.4 * xr + 0.2 * u + 0.25 * s;
                px.push_back(1.0 - p1);
                px.push_back(p1);
            }
    return SdRcDecision::noncausal(spec, U, pu, pxr, CondPmf({spec.X}, {spec.Xr, U, spec.S}, px));
}

MacSpec toy_mac(int s2_size = 2) {
    MacSpec spec;
    spec.S1 = {"S1", 2};
    spec.S2 = {"S2", s2_size};
    spec.X1 = {"X1", 2};
    spec.X2 = {"X2", 2};
    spec.Z = {"Z", 2};
    spec.Y = {"Y", 2};
    spec.p_state.assign(static_cast<std::size_t>(2 * s2_size), 1.0 / (2.0 * s2_size));
    spec.link.inputs = {spec.X1, spec.S1};
    spec.link.output = spec.Z;
    spec.link.table = {0, 0, 1, 1};  // z = x1
    std::vector<double> k;
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < s2_size; ++s2) {
                    double p1 = 0.1 + 0.3 * x1 + 0.3 * x2 + 0.2 * (s1 ^ (s2 % 2));
                    k.push_back(1.0 - p1);
                    k.push_back(p1);
                }
    spec.out = CondPmf({spec.Y}, {spec.X1, spec.X2, spec.S1, spec.S2}, std::move(k));
    spec.validate();
    return spec;
}

}  // namespace

TEST_CASE("example channel pins the stated kernel family") {
    SUBCASE("alpha = 0 gives identity subchannels") {
        auto spec = example_channel(0.0, 0.2);
        for (int s = 0; s < 3; ++s)
            for (int x = 0; x < 2; ++x)
                CHECK(spec.out.at(std::vector<int>{x, s}, std::vector<int>{x}) == doctest::Approx(1.0));
    }
    SUBCASE("alpha = 1 is stuck at 0 / stuck at 1 / noiseless") {
        auto spec = example_channel(1.0, 0.2);
        for (int x = 0; x < 2; ++x) {
            CHECK(spec.out.at(std::vector<int>{x, 0}, std::vector<int>{0}) == doctest::Approx(1.0));
            CHECK(spec.out.at(std::vector<int>{x, 1}, std::vector<int>{1}) == doctest::Approx(1.0));
        }
        CHECK(spec.out.at(std::vector<int>{0, 2}, std::vector<int>{0}) == doctest::Approx(1.0));
        CHECK(spec.out.at(std::vector<int>{1, 2}, std::vector<int>{1}) == doctest::Approx(1.0));
    }
    SUBCASE("state law by substitution") {
        auto spec = example_channel(0.3, 0.2);
        CHECK(spec.p_state[0] == doctest::Approx(0.1));
        CHECK(spec.p_state[1] == doctest::Approx(0.1));
        CHECK(spec.p_state[2] == doctest::Approx(0.8));
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(example_channel(-0.1, 0.2), ValidationError);
        CHECK_THROWS_AS(example_channel(0.5, 0.0), ValidationError);
        CHECK_THROWS_AS(example_channel(0.5, 1.0), ValidationError);
    }
}

TEST_CASE("assemble_sdrc") {
    auto spec = toy_sdrc();
    auto d = toy_decision(spec);
    auto j = assemble_sdrc(spec, d);

    SUBCASE("unit mass") { CHECK(std::abs(j.total() - 1.0) < 1e-12); }

    SUBCASE("hand multiplication on sampled cells") {
        // direct product of the factor tables, bypassing the tensor machinery
        auto expected = [&](int s, int u, int xr, int x, int y) {
            double ps = spec.p_state[static_cast<std::size_t>(s)];
            double pu = d.u_given_s.at(std::vector<int>{s}, std::vector<int>{u});
            double pxr = d.xr_given_u.at(std::vector<int>{u}, std::vector<int>{xr});
            double px = d.x_given.at(std::vector<int>{xr, u, s}, std::vector<int>{x});
            int z = spec.link(std::vector<int>{x, xr, s});
            double py = spec.out.at(std::vector<int>{x, xr, z, s}, std::vector<int>{y});
            return ps * pu * pxr * px * py;
        };
        // joint axes are sorted: S, U, X, Xr, Y, Z
        auto at = [&](int s, int u, int x, int xr, int y, int z) {
            return j.at(std::vector<int>{s, u, x, xr, y, z});
        };
        for (auto [s, u, xr, x, y] : std::vector<std::array<int, 5>>{
                 {{0, 1, 0, 1, 1}}, {{1, 0, 1, 0, 0}}, {{1, 1, 1, 1, 1}}}) {
            int z = spec.link(std::vector<int>{x, xr, s});
            CHECK(at(s, u, x, xr, y, z) == doctest::Approx(expected(s, u, xr, x, y)).epsilon(1e-12));
        }
    }

    SUBCASE("deterministic link holds on every positive-mass cell") {
        auto axes = j.axes();
        std::vector<int> idx(axes.size(), 0);
        int is = j.axis_index("S"), ix = j.axis_index("X"), ixr = j.axis_index("Xr"),
            iz = j.axis_index("Z");
        for (std::size_t flat = 0; flat < j.cells(); ++flat) {
            if (j.probs()[flat] > 0) {
                int z = spec.link(std::vector<int>{idx[static_cast<std::size_t>(ix)],
                                                   idx[static_cast<std::size_t>(ixr)],
                                                   idx[static_cast<std::size_t>(is)]});
                CHECK(idx[static_cast<std::size_t>(iz)] == z);
            }
            for (int dd = static_cast<int>(axes.size()) - 1; dd >= 0; --dd) {
                if (++idx[static_cast<std::size_t>(dd)] < axes[static_cast<std::size_t>(dd)].size) break;
                idx[static_cast<std::size_t>(dd)] = 0;
            }
        }
    }

    SUBCASE("marginal onto S returns the state law") {
        auto ms = j.marginalize({"S"});
        CHECK(ms.at(std::vector<int>{0}) == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(ms.at(std::vector<int>{1}) == doctest::Approx(0.4).epsilon(1e-12));
    }

    SUBCASE("causal assembly equals singleton-U noncausal assembly") {
        std::vector<double> px;
        for (int xr = 0; xr < 2; ++xr)
            for (int s = 0; s < 2; ++s) {
                double p1 = 0.2 + 0.3 * xr + 0.35 * s;
                px.push_back(1.0 - p1);
                px.push_back(p1);
            }
        auto causal = SdRcDecision::causal(spec, CondPmf({spec.Xr}, {}, {0.55, 0.45}),
                                           CondPmf({spec.X}, {spec.Xr, spec.S}, px));
        auto jc = assemble_sdrc(spec, causal);

        Alphabet U1{"U", 1};
        auto nc = SdRcDecision::noncausal(spec, U1, CondPmf({U1}, {spec.S}, {1.0, 1.0}),
                                          CondPmf({spec.Xr}, {U1}, {0.55, 0.45}),
                                          CondPmf({spec.X}, {spec.Xr, U1, spec.S}, px));
        auto jn = assemble_sdrc(spec, nc);
        REQUIRE(jc.cells() == jn.cells());
        for (std::size_t i = 0; i < jc.cells(); ++i)
            CHECK(jc.probs()[i] == doctest::Approx(jn.probs()[i]).epsilon(1e-14));
    }
}

TEST_CASE("sdrc decision cardinality cap") {
    auto spec = toy_sdrc();
    Alphabet U{"U", 6};  // cap is min{2*2*2, 2*2+1} = 5
    CHECK_THROWS_AS(
        SdRcDecision::noncausal(spec, U, CondPmf({U}, {spec.S}, std::vector<double>(12, 1.0 / 6)),
                                CondPmf({spec.Xr}, {U}, std::vector<double>(12, 0.5)),
                                CondPmf({spec.X}, {spec.Xr, U, spec.S}, std::vector<double>(48, 0.5))),
        ValidationError);
}

TEST_CASE("assemble_mac") {
    auto spec = toy_mac();
    Alphabet U{"U", 2};
    std::vector<double> ux1;
    for (int s1 = 0; s1 < 2; ++s1) {
        double base = s1 == 0 ? 0.4 : 0.1;
        ux1.insert(ux1.end(), {base, 0.5 - base, 0.3, 0.2});
    }
    CondPmf pux1({U, spec.X1}, {spec.S1}, ux1);
    CondPmf px2({spec.X2}, {U, spec.S2}, {0.8, 0.2, 0.6, 0.4, 0.3, 0.7, 0.1, 0.9});
    auto d = MacDecision::strictly_causal(spec, U, pux1, px2);
    auto j = assemble_mac(spec, d);

    SUBCASE("unit mass") { CHECK(std::abs(j.total() - 1.0) < 1e-12); }

    SUBCASE("hand multiplication on sampled cells") {
        // axes sorted: S1, S2, U, X1, X2, Y, Z
        auto expected = [&](int s1, int s2, int u, int x1, int x2, int y) {
            double ps = spec.p_state[static_cast<std::size_t>(s1 * 2 + s2)];
            double pu = pux1.at(std::vector<int>{s1}, std::vector<int>{u, x1});
            double p2 = px2.at(std::vector<int>{u, s2}, std::vector<int>{x2});
            double py = spec.out.at(std::vector<int>{x1, x2, s1, s2}, std::vector<int>{y});
            return ps * pu * p2 * py;
        };
        for (auto [s1, s2, u, x1, x2, y] :
             std::vector<std::array<int, 6>>{{{0, 1, 1, 0, 1, 0}}, {{1, 0, 0, 1, 0, 1}}}) {
            int z = spec.link(std::vector<int>{x1, s1});
            CHECK(j.at(std::vector<int>{s1, s2, u, x1, x2, y, z}) ==
                  doctest::Approx(expected(s1, s2, u, x1, x2, y)).epsilon(1e-12));
        }
    }

    SUBCASE("strictly causal: p(x2|u,s2,z) constant in z wherever defined") {
        for (int u = 0; u < 2; ++u)
            for (int s2 = 0; s2 < 2; ++s2) {
                std::vector<double> per_z(2, -1.0);
                for (int z = 0; z < 2; ++z) {
                    try {
                        auto cond = j.condition({{"U", u}, {"S2", s2}, {"Z", z}});
                        per_z[static_cast<std::size_t>(z)] =
                            cond.marginalize({"X2"}).at(std::vector<int>{1});
                    } catch (const ValidationError&) {
                        // zero-probability slice; skip
                    }
                }
                if (per_z[0] >= 0 && per_z[1] >= 0)
                    CHECK(per_z[0] == doctest::Approx(per_z[1]).epsilon(1e-10));
            }
    }

    SUBCASE("strictly causal decisions must not reference Z") {
        CondPmf bad({spec.X2}, {spec.Z, U, spec.S2}, std::vector<double>(16, 0.5));
        CHECK_THROWS_AS(MacDecision::strictly_causal(spec, U, pux1, bad), ValidationError);
    }

    SUBCASE("causal decisions must reference Z") {
        CHECK_THROWS_AS(MacDecision::causal(spec, U, pux1, px2), ValidationError);
    }
}

TEST_CASE("ptp_se_as_mac embedding") {
    auto spec = example_channel(0.5, 0.2);
    auto mac = ptp_se_as_mac(spec);

    SUBCASE("link is the projection (x1, s) -> x1") {
        for (int x1 = 0; x1 < 2; ++x1)
            for (int s = 0; s < 3; ++s) CHECK(mac.link(std::vector<int>{x1, s}) == x1);
    }
    SUBCASE("output kernel is constant in x1") {
        for (int x2 = 0; x2 < 2; ++x2)
            for (int s = 0; s < 3; ++s)
                for (int y = 0; y < 2; ++y)
                    CHECK(mac.out.at(std::vector<int>{0, x2, s, 0}, std::vector<int>{y}) ==
                          doctest::Approx(
                              mac.out.at(std::vector<int>{1, x2, s, 0}, std::vector<int>{y})));
    }
    SUBCASE("degenerate second state") { CHECK(mac.S2.size == 1); }
}

TEST_CASE("channel file loader") {
    auto spec = toy_sdrc();
    auto j = channel_to_json(spec);
    auto loaded = load_channel_json(j);
    REQUIRE(loaded.sdrc.has_value());
    CHECK(loaded.sdrc->p_state == spec.p_state);
    CHECK(loaded.sdrc->link.table == spec.link.table);
    CHECK(loaded.sdrc->out.probs() == spec.out.probs());

    SUBCASE("offending index is reported") {
        auto bad = j;
        bad["kernel"][0][0][0][0][0] = 0.9;  // row no longer sums to one
        try {
            load_channel_json(bad);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("slice") != std::string::npos);
        }
    }
    SUBCASE("totality violations are rejected") {
        auto bad = j;
        bad["z_table"][0][0][0] = 7;
        CHECK_THROWS_AS(load_channel_json(bad), ValidationError);
    }
    SUBCASE("unknown model") {
        auto bad = j;
        bad["model"] = "wat";
        CHECK_THROWS_AS(load_channel_json(bad), ValidationError);
    }
}

TEST_CASE("mac and ptp channel files round trip") {
    auto mac = toy_mac();
    auto loaded = load_channel_json(channel_to_json(mac));
    REQUIRE(loaded.mac.has_value());
    CHECK(loaded.mac->out.probs() == mac.out.probs());

    auto ptp = example_channel(0.5, 0.2);
    auto loaded2 = load_channel_json(channel_to_json(ptp));
    REQUIRE(loaded2.ptp_se.has_value());
    CHECK(loaded2.ptp_se->out.probs() == ptp.out.probs());
    CHECK(loaded2.ptp_se->X1.size == 2);
}
