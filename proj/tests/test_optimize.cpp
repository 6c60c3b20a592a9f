#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "binfwd/json_io.hpp"
#include "binfwd/optimize.hpp"

using namespace binfwd;

namespace {

PtpSeSpec noiseless_ptp() {
    PtpSeSpec spec;
    spec.S = {"S", 1};
    spec.X1 = {"X1", 2};
    spec.X2 = {"X2", 2};
    spec.Y = {"Y", 2};
    spec.p_state = {1.0};
    spec.out = CondPmf({spec.Y}, {spec.X2, spec.S}, {1, 0, 0, 1});
    return spec;
}

SdRcSpec grid_sdrc() {
    SdRcSpec spec;
    spec.S = {"S", 2};
    spec.X = {"X", 2};
    spec.Xr = {"Xr", 2};
    spec.Z = {"Z", 2};
    spec.Y = {"Y", 2};
    spec.p_state = {0.5, 0.5};
    spec.link.inputs = {spec.X, spec.Xr, spec.S};
    spec.link.output = spec.Z;
    spec.link.table.resize(8);
    for (int x = 0; x < 2; ++x)
        for (int xr = 0; xr < 2; ++xr)
            for (int s = 0; s < 2; ++s)
                spec.link.table[static_cast<std::size_t>((x * 2 + xr) * 2 + s)] = x & s;
    std::vector<double> k;
    for (int x = 0; x < 2; ++x)
        for (int xr = 0; xr < 2; ++xr)
            for (int z = 0; z < 2; ++z)
                for (int s = 0; s < 2; ++s) {
                    double p1 = 0.08 + 0.55 * x + 0.25 * (xr ^ s);
                    (void)z;
                    k.push_back(1.0 - p1);
                    k.push_back(p1);
                }
    spec.out = CondPmf({spec.Y}, {spec.X, spec.Xr, spec.Z, spec.S}, std::move(k));
    return spec;
}

MacSpec one_state_mac(bool constant_z) {
    MacSpec spec;
    spec.S1 = {"S1", 2};
    spec.S2 = {"S2", 1};
    spec.X1 = {"X1", 2};
    spec.X2 = {"X2", 2};
    spec.Z = {"Z", 2};
    spec.Y = {"Y", 2};
    spec.p_state = {0.5, 0.5};
    spec.link.inputs = {spec.X1, spec.S1};
    spec.link.output = spec.Z;
    spec.link.table = constant_z ? std::vector<int>{0, 0, 0, 0} : std::vector<int>{0, 0, 1, 1};
    std::vector<double> k;
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            for (int s1 = 0; s1 < 2; ++s1) {
                double p1 = 0.1 + 0.35 * x1 + 0.35 * x2 + 0.1 * s1;
                k.push_back(1.0 - p1);
                k.push_back(p1);
            }
    spec.out = CondPmf({spec.Y}, {spec.X1, spec.X2, spec.S1, spec.S2}, std::move(k));
    return spec;
}

}  // namespace

TEST_CASE("noiseless binary channel maximizes to one bit") {
    auto spec = noiseless_ptp();
    MaximizeOptions opts;
    opts.restarts = 4;
    opts.seed = 3;
    auto rep = maximize(make_ptp_se_space(spec, 1), make_ptp_se_objective(spec, 1), opts);
    CHECK(rep.any_feasible);
    CHECK(rep.best_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("example channel with |U|=3 reaches the closed-form optimum") {
    auto spec = example_channel(0.5, 0.2);
    MaximizeOptions opts;
    opts.restarts = 8;
    opts.seed = 1;
    opts.threads = 2;
    auto rep = maximize(make_ptp_se_space(spec, 3), make_ptp_se_objective(spec, 3), opts);
    CHECK(rep.any_feasible);
    CHECK(rep.best_value >= 0.8644 - 1e-3);
    // the argmax re-evaluates to the reported value and respects the budget
    auto v = kernels_to_ptp_se_value(spec, 3, rep.argmax);
    CHECK(v.value == doctest::Approx(rep.best_value).epsilon(1e-9));
    CHECK(v.constraint_slack >= -1e-9);
}

TEST_CASE("deterministic in seed and options, including threads") {
    auto spec = example_channel(0.25, 0.2);
    MaximizeOptions opts;
    opts.restarts = 6;
    opts.seed = 42;
    auto a = maximize(make_ptp_se_space(spec, 2), make_ptp_se_objective(spec, 2), opts);
    opts.threads = 2;
    auto b = maximize(make_ptp_se_space(spec, 2), make_ptp_se_objective(spec, 2), opts);
    CHECK(a.best_value == b.best_value);
    REQUIRE(a.argmax.size() == b.argmax.size());
    for (std::size_t f = 0; f < a.argmax.size(); ++f) CHECK(a.argmax[f] == b.argmax[f]);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
        CHECK(a.trajectories[i].final_value == b.trajectories[i].final_value);
        CHECK(a.trajectories[i].iters == b.trajectories[i].iters);
    }
}

TEST_CASE("value is non-decreasing in the auxiliary alphabet size") {
    auto spec = example_channel(0.5, 0.2);
    MaximizeOptions opts;
    opts.restarts = 8;
    opts.seed = 5;
    opts.threads = 2;
    double prev = -1;
    for (int u = 1; u <= 3; ++u) {
        auto rep = maximize(make_ptp_se_space(spec, u), make_ptp_se_objective(spec, u), opts);
        CHECK(rep.best_value >= prev - 1e-6);
        prev = rep.best_value;
    }
}

TEST_CASE("grid pass floors the gradient result on a causal relay space") {
    auto spec = grid_sdrc();
    MaximizeOptions opts;
    opts.restarts = 6;
    opts.seed = 9;
    opts.grid_levels = 8;
    opts.threads = 2;
    auto space = make_sdrc_space(spec, 1, SdRcDecision::Mode::causal);
    CHECK(space.free_params() == 5);
    auto rep = maximize(space, make_sdrc_objective(spec, 1, SdRcDecision::Mode::causal), opts);
    CHECK(rep.any_feasible);
    CHECK(rep.grid_ran);
    CHECK(rep.best_value >= rep.grid_value - 1e-6);
}

TEST_CASE("grid pass refuses oversized spaces") {
    auto spec = grid_sdrc();
    MaximizeOptions opts;
    opts.restarts = 1;
    opts.grid_levels = 8;
    auto space = make_sdrc_space(spec, 2, SdRcDecision::Mode::noncausal);  // 14 free parameters
    CHECK_THROWS_AS(maximize(space, make_sdrc_objective(spec, 2, SdRcDecision::Mode::noncausal), opts),
                    BudgetError);
}

TEST_CASE("all-infeasible spaces are reported, not silent") {
    DecisionSpace space;
    space.factors = {{"p", 1, 2}};
    space.constraint = ConstraintKind::mac_slack;
    Objective impossible = [](const Kernels&) {
        ObjectiveEval e;
        e.branches = {0.0};
        e.slack = -1.0;
        return e;
    };
    MaximizeOptions opts;
    opts.restarts = 3;
    auto rep = maximize(space, impossible, opts);
    CHECK(!rep.any_feasible);
}

TEST_CASE("trace_region") {
    MaximizeOptions opts;
    opts.restarts = 8;
    opts.seed = 17;
    opts.threads = 2;

    SUBCASE("axis weights bracket the corner rates and the frontier is monotone") {
        auto spec = one_state_mac(false);
        auto pts = trace_region(spec, 2, MacDecision::Cribbing::strictly_causal,
                                {{1, 0}, {1, 1}, {0, 1}}, opts);
        REQUIRE(pts.size() == 3);
        // sorted by r1; r2 must not increase along the frontier
        for (std::size_t i = 1; i < pts.size(); ++i) {
            CHECK(pts[i].point.r1 >= pts[i - 1].point.r1 - 1e-9);
            CHECK(pts[i].point.r2 <= pts[i - 1].point.r2 + 1e-6);
        }
        double max_r1 = 0, max_r2 = 0;
        for (const auto& p : pts) {
            max_r1 = std::max(max_r1, p.point.r1);
            max_r2 = std::max(max_r2, p.point.r2);
        }
        // the (1,0) run attains the largest r1, the (0,1) run the largest r2
        CHECK(pts.back().point.r1 == doctest::Approx(max_r1));
        CHECK(pts.front().point.r2 == doctest::Approx(max_r2));
    }

    SUBCASE("constant-z channel traces the no-cribbing region") {
        auto spec = one_state_mac(true);
        std::vector<std::pair<double, double>> ws{{1, 0}, {1, 1}, {0, 1}};
        auto with_u = trace_region(spec, 2, MacDecision::Cribbing::strictly_causal, ws, opts);
        auto singleton = trace_region(spec, 1, MacDecision::Cribbing::strictly_causal, ws, opts);
        REQUIRE(with_u.size() == singleton.size());
        for (std::size_t i = 0; i < ws.size(); ++i)
            CHECK(std::abs(with_u[i].support - singleton[i].support) < 2e-3);
    }

    SUBCASE("weight validation") {
        auto spec = one_state_mac(false);
        CHECK_THROWS_AS(
            trace_region(spec, 2, MacDecision::Cribbing::strictly_causal, {{0, 0}}, opts),
            ValidationError);
    }
}

TEST_CASE("mac support point solves the inner LP") {
    MacRateBounds b;
    b.b_r1 = 0.6;
    b.b_r2 = 0.5;
    b.b_sum_a = 0.8;
    b.b_sum_b = 0.9;
    auto p = mac_support_point(b, 1.0, 1.0);
    CHECK(p.r1 + p.r2 == doctest::Approx(0.8));
    auto p1 = mac_support_point(b, 1.0, 0.0);
    CHECK(p1.r1 == doctest::Approx(0.6));
    auto p2 = mac_support_point(b, 0.0, 1.0);
    CHECK(p2.r2 == doctest::Approx(0.5));
    // negative bounds clamp to the origin
    MacRateBounds neg;
    neg.b_r1 = -0.2;
    neg.b_r2 = 0.4;
    neg.b_sum_a = 0.4;
    neg.b_sum_b = 0.4;
    auto p3 = mac_support_point(neg, 1.0, 0.0);
    CHECK(p3.r1 == doctest::Approx(0.0));
}
