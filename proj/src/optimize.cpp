#include "binfwd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <thread>

#include "binfwd/rng.hpp"

namespace binfwd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void project_simplex(std::span<double> v) {
    // Euclidean projection by sort-and-threshold
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    double sum = 0.0;
    for (auto& x : v) {
        x = std::max(0.0, x - theta);
        sum += x;
    }
    if (sum <= 0.0) {
        for (auto& x : v) x = 1.0 / static_cast<double>(v.size());
    } else if (std::abs(sum - 1.0) > 1e-15 && sum > 0.0) {
        for (auto& x : v) x /= sum;
    }
}

void project_kernels(const DecisionSpace& space, Kernels& k) {
    for (std::size_t f = 0; f < space.factors.size(); ++f) {
        auto& m = k[f];
        std::size_t cols = space.factors[f].cols;
        for (std::size_t r = 0; r < space.factors[f].rows; ++r)
            project_simplex(std::span<double>(m.data() + r * cols, cols));
    }
}

Kernels dirichlet_init(const DecisionSpace& space, Rng& rng) {
    Kernels k;
    for (const auto& f : space.factors) {
        std::vector<double> m(f.rows * f.cols);
        for (std::size_t r = 0; r < f.rows; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < f.cols; ++c) {
                double e = -std::log(1.0 - rng.u01());
                m[r * f.cols + c] = e;
                sum += e;
            }
            for (std::size_t c = 0; c < f.cols; ++c) m[r * f.cols + c] /= sum;
        }
        k.push_back(std::move(m));
    }
    return k;
}

double penalized(const ObjectiveEval& e, double w) {
    double pen = 0.0;
    if (std::isfinite(e.slack) && e.slack < 0.0) pen = w * (-e.slack);
    return e.value() - pen;
}

struct AscentResult {
    Kernels k;
    ObjectiveEval eval;
    int iters = 0;
};

bool repair_feasibility(const DecisionSpace& space, const Objective& obj, Kernels& k,
                        ObjectiveEval& eval);

AscentResult ascend(const DecisionSpace& space, const Objective& obj, Kernels k, double tol,
                    int max_iters) {
    project_kernels(space, k);
    double w_pen = 10.0;
    const double h = 1e-6;
    ObjectiveEval cur = obj(k);
    int total_iters = 0;

    for (int doubling = 0; doubling < 12; ++doubling) {
        double best_phi = penalized(cur, w_pen);
        int stall = 0;
        while (total_iters < max_iters && stall < 50) {
            ++total_iters;
            int a = cur.active_branch();
            // forward-difference gradient of the active branch's penalized value
            double base = cur.branches[static_cast<std::size_t>(a)] -
                          (std::isfinite(cur.slack) && cur.slack < 0 ? w_pen * -cur.slack : 0.0);
            Kernels g = k;
            for (std::size_t f = 0; f < k.size(); ++f) {
                for (std::size_t i = 0; i < k[f].size(); ++i) {
                    double saved = k[f][i];
                    k[f][i] = saved + h;
                    ObjectiveEval e = obj(k);
                    k[f][i] = saved;
                    double phi = e.branches[static_cast<std::size_t>(a)] -
                                 (std::isfinite(e.slack) && e.slack < 0 ? w_pen * -e.slack : 0.0);
                    g[f][i] = (phi - base) / h;
                }
            }
            double gmax = 0.0;
            for (const auto& m : g)
                for (double v : m) gmax = std::max(gmax, std::abs(v));
            if (gmax <= 0.0) {
                stall += 50;
                continue;
            }

            bool improved = false;
            for (double step = 0.25; step >= 1e-6; step /= 2.0) {
                Kernels k2 = k;
                for (std::size_t f = 0; f < k.size(); ++f)
                    for (std::size_t i = 0; i < k[f].size(); ++i)
                        k2[f][i] += step * g[f][i] / gmax;
                project_kernels(space, k2);
                ObjectiveEval e2 = obj(k2);
                if (penalized(e2, w_pen) > best_phi + 1e-15) {
                    k = std::move(k2);
                    cur = e2;
                    improved = true;
                    break;
                }
            }
            double phi = penalized(cur, w_pen);
            if (improved && phi > best_phi + tol) {
                best_phi = phi;
                stall = 0;
            } else {
                if (improved) best_phi = std::max(best_phi, phi);
                ++stall;
            }
        }
        bool violated = space.constraint != ConstraintKind::none && std::isfinite(cur.slack) &&
                        cur.slack < -kSlackTol;
        if (!violated || total_iters >= max_iters) break;
        w_pen *= 2.0;
    }
    if (space.constraint != ConstraintKind::none && std::isfinite(cur.slack) &&
        cur.slack < -kSlackTol)
        repair_feasibility(space, obj, k, cur);
    return {std::move(k), std::move(cur), total_iters};
}

// Mix the coupling factor's U-marginal toward its row-average: at lam = 1 the
// auxiliary variable is independent of the conditioning state, which makes
// every supported constraint kind feasible. The conditional beyond U is kept.
Kernels mix_toward_independence(const DecisionSpace& space, const Kernels& k, double lam) {
    Kernels out = k;
    auto f = static_cast<std::size_t>(space.coupling_factor);
    const auto& shape = space.factors[f];
    std::size_t nu = space.coupling_cols;
    std::size_t inner = shape.cols / nu;

    std::vector<double> q(shape.rows * nu, 0.0);
    for (std::size_t r = 0; r < shape.rows; ++r)
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t i = 0; i < inner; ++i)
                q[r * nu + u] += k[f][(r * nu + u) * inner + i];
    std::vector<double> qbar(nu, 0.0);
    for (std::size_t r = 0; r < shape.rows; ++r)
        for (std::size_t u = 0; u < nu; ++u) qbar[u] += q[r * nu + u] / static_cast<double>(shape.rows);

    for (std::size_t r = 0; r < shape.rows; ++r) {
        for (std::size_t u = 0; u < nu; ++u) {
            double qu = q[r * nu + u];
            double qmix = (1.0 - lam) * qu + lam * qbar[u];
            for (std::size_t i = 0; i < inner; ++i) {
                double c = qu > 0 ? k[f][(r * nu + u) * inner + i] / qu : 1.0 / static_cast<double>(inner);
                out[f][(r * nu + u) * inner + i] = qmix * c;
            }
        }
    }
    return out;
}

// smallest mixing weight that restores feasibility, by bisection
bool repair_feasibility(const DecisionSpace& space, const Objective& obj, Kernels& k,
                        ObjectiveEval& eval) {
    if (space.coupling_factor < 0 || space.coupling_cols == 0) return false;
    ObjectiveEval full = obj(mix_toward_independence(space, k, 1.0));
    if (std::isfinite(full.slack) && full.slack < -kSlackTol) return false;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = (lo + hi) / 2.0;
        ObjectiveEval e = obj(mix_toward_independence(space, k, mid));
        if (std::isfinite(e.slack) && e.slack < -kSlackTol)
            lo = mid;
        else
            hi = mid;
    }
    k = mix_toward_independence(space, k, hi);
    eval = obj(k);
    return !(std::isfinite(eval.slack) && eval.slack < -kSlackTol);
}

// all compositions of `levels` into `cols` parts, as probability rows
std::vector<std::vector<double>> grid_rows(std::size_t cols, int levels) {
    std::vector<std::vector<double>> out;
    std::vector<int> parts(cols, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == cols) {
            parts[i] = left;
            std::vector<double> row(cols);
            for (std::size_t c = 0; c < cols; ++c)
                row[c] = static_cast<double>(parts[c]) / static_cast<double>(levels);
            out.push_back(std::move(row));
            return;
        }
        for (int v = 0; v <= left; ++v) {
            parts[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, levels);
    return out;
}

}  // namespace

std::size_t DecisionSpace::free_params() const {
    std::size_t n = 0;
    for (const auto& f : factors) n += f.rows * (f.cols - 1);
    return n;
}

double ObjectiveEval::value() const {
    double v = kInf;
    for (double b : branches) v = std::min(v, b);
    return v;
}

int ObjectiveEval::active_branch() const {
    int a = 0;
    for (std::size_t i = 0; i < branches.size(); ++i)
        if (branches[i] <= branches[static_cast<std::size_t>(a)]) a = static_cast<int>(i);
    return a;
}

OptReport maximize(const DecisionSpace& space, const Objective& objective,
                   const MaximizeOptions& opts) {
    OptReport report;
    report.restarts_used = opts.restarts;
    report.best_value = -kInf;

    std::vector<AscentResult> results(static_cast<std::size_t>(opts.restarts));
    auto run_range = [&](int lo, int hi) {
        for (int r = lo; r < hi; ++r) {
            Rng rng(key_hash({opts.seed, 0x7265737461727453ull, static_cast<std::uint64_t>(r)}));
            Kernels k0 = dirichlet_init(space, rng);
            results[static_cast<std::size_t>(r)] =
                ascend(space, objective, std::move(k0), opts.tol, opts.max_iters);
        }
    };
    int threads = std::max(1, opts.threads);
    if (threads == 1 || opts.restarts <= 1) {
        run_range(0, opts.restarts);
    } else {
        std::vector<std::thread> pool;
        int chunk = (opts.restarts + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            int lo = t * chunk, hi = std::min(opts.restarts, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // deterministic merge by restart index
    for (int r = 0; r < opts.restarts; ++r) {
        const auto& res = results[static_cast<std::size_t>(r)];
        bool feasible = !std::isfinite(res.eval.slack) || res.eval.slack >= -kSlackTol;
        report.trajectories.push_back(
            {r, res.eval.value(), res.eval.slack, res.iters, feasible});
        if (feasible) {
            report.any_feasible = true;
            if (res.eval.value() > report.best_value) {
                report.best_value = res.eval.value();
                report.argmax = res.k;
                report.feasibility_margin = res.eval.slack;
            }
        }
    }

    if (opts.grid_levels > 0) {
        if (space.free_params() > 12)
            throw BudgetError("grid pass limited to spaces with <= 12 free parameters (got " +
                              std::to_string(space.free_params()) + ")");
        std::vector<std::vector<std::vector<double>>> per_row;  // (factor,row) -> candidates
        double combos = 1.0;
        for (const auto& f : space.factors) {
            auto rows = grid_rows(f.cols, opts.grid_levels);
            for (std::size_t r = 0; r < f.rows; ++r) {
                per_row.push_back(rows);
                combos *= static_cast<double>(rows.size());
            }
        }
        if (combos > 2e6)
            throw BudgetError("grid pass would evaluate " + std::to_string(combos) +
                              " points; required budget <= 2e6");

        std::vector<std::size_t> idx(per_row.size(), 0);
        Kernels k;
        for (const auto& f : space.factors) k.emplace_back(f.rows * f.cols, 0.0);
        double grid_best = -kInf;
        bool done = false;
        while (!done) {
            std::size_t slot = 0;
            for (std::size_t f = 0; f < space.factors.size(); ++f) {
                std::size_t cols = space.factors[f].cols;
                for (std::size_t r = 0; r < space.factors[f].rows; ++r, ++slot) {
                    const auto& row = per_row[slot][idx[slot]];
                    std::copy(row.begin(), row.end(), k[f].begin() + static_cast<std::ptrdiff_t>(r * cols));
                }
            }
            ObjectiveEval e = objective(k);
            bool feasible = !std::isfinite(e.slack) || e.slack >= -kSlackTol;
            if (feasible) grid_best = std::max(grid_best, e.value());
            // odometer
            done = true;
            for (std::size_t s = idx.size(); s-- > 0;) {
                if (++idx[s] < per_row[s].size()) {
                    done = false;
                    break;
                }
                idx[s] = 0;
            }
        }
        report.grid_ran = true;
        report.grid_value = grid_best;
        report.sandwich_gap = grid_best - report.best_value;
    }
    return report;
}

// ---- model adapters --------------------------------------------------------

namespace {

CondPmf kernel_cond(std::vector<Alphabet> targets, std::vector<Alphabet> given,
                    std::vector<double> k) {
    // optimizer iterates live on the simplex up to fp dust; renormalize rows
    std::size_t cols = 1, rows = 1;
    for (const auto& t : targets) cols *= static_cast<std::size_t>(t.size);
    for (const auto& g : given) rows *= static_cast<std::size_t>(g.size);
    for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) sum += std::max(0.0, k[r * cols + c]);
        for (std::size_t c = 0; c < cols; ++c)
            k[r * cols + c] = sum > 0 ? std::max(0.0, k[r * cols + c]) / sum
                                      : 1.0 / static_cast<double>(cols);
    }
    return CondPmf(std::move(targets), std::move(given), std::move(k));
}

}  // namespace

DecisionSpace make_sdrc_space(const SdRcSpec& spec, int u_size, SdRcDecision::Mode mode) {
    DecisionSpace sp;
    sp.u_size = u_size;
    std::size_t S = static_cast<std::size_t>(spec.S.size), X = static_cast<std::size_t>(spec.X.size),
                Xr = static_cast<std::size_t>(spec.Xr.size), U = static_cast<std::size_t>(u_size);
    switch (mode) {
        case SdRcDecision::Mode::noncausal:
            sp.factors = {{"p_u_given_s", S, U}, {"p_xr_given_u", U, Xr}, {"p_x_given_xr_u_s", Xr * U * S, X}};
            sp.constraint = ConstraintKind::sdrc_slack;
            sp.coupling_factor = 0;
            sp.coupling_cols = U;
            break;
        case SdRcDecision::Mode::causal:
            sp.factors = {{"p_xr", 1, Xr}, {"p_x_given_xr_s", Xr * S, X}};
            sp.constraint = ConstraintKind::none;
            break;
        case SdRcDecision::Mode::nostate:
            sp.factors = {{"p_xr_x", 1, Xr * X}};
            sp.constraint = ConstraintKind::none;
            break;
    }
    return sp;
}

SdRcDecision kernels_to_sdrc_decision(const SdRcSpec& spec, int u_size, SdRcDecision::Mode mode,
                                      const Kernels& k) {
    Alphabet U{"U", u_size};
    switch (mode) {
        case SdRcDecision::Mode::noncausal:
            return SdRcDecision::noncausal(
                spec, U, kernel_cond({U}, {spec.S}, k[0]), kernel_cond({spec.Xr}, {U}, k[1]),
                kernel_cond({spec.X}, {spec.Xr, U, spec.S}, k[2]));
        case SdRcDecision::Mode::causal:
            return SdRcDecision::causal(spec, kernel_cond({spec.Xr}, {}, k[0]),
                                        kernel_cond({spec.X}, {spec.Xr, spec.S}, k[1]));
        case SdRcDecision::Mode::nostate:
            return SdRcDecision::nostate(spec, kernel_cond({spec.Xr, spec.X}, {}, k[0]));
    }
    throw ValidationError("unknown sdrc mode");
}

Objective make_sdrc_objective(const SdRcSpec& spec, int u_size, SdRcDecision::Mode mode) {
    return [spec, u_size, mode](const Kernels& k) {
        auto d = kernels_to_sdrc_decision(spec, u_size, mode, k);
        SdRcValue v = mode == SdRcDecision::Mode::causal ? sdrc_causal_value(spec, d)
                                                         : sdrc_value(spec, d);
        ObjectiveEval e;
        e.branches = {v.rate_bound_1, v.rate_bound_2};
        e.slack = v.slack;
        return e;
    };
}

DecisionSpace make_mac_space(const MacSpec& spec, int u_size, MacDecision::Cribbing mode) {
    DecisionSpace sp;
    sp.u_size = u_size;
    std::size_t S1 = static_cast<std::size_t>(spec.S1.size),
                S2 = static_cast<std::size_t>(spec.S2.size),
                X1 = static_cast<std::size_t>(spec.X1.size),
                X2 = static_cast<std::size_t>(spec.X2.size),
                Z = static_cast<std::size_t>(spec.Z.size), U = static_cast<std::size_t>(u_size);
    sp.factors = {{"p_u_x1_given_s1", S1, U * X1}};
    if (mode == MacDecision::Cribbing::strictly_causal)
        sp.factors.push_back({"p_x2_given_u_s2", U * S2, X2});
    else
        sp.factors.push_back({"p_x2_given_z_u_s2", Z * U * S2, X2});
    sp.constraint = ConstraintKind::mac_slack;
    sp.coupling_factor = 0;
    sp.coupling_cols = U;
    return sp;
}

MacDecision kernels_to_mac_decision(const MacSpec& spec, int u_size, MacDecision::Cribbing mode,
                                    const Kernels& k) {
    Alphabet U{"U", u_size};
    auto ux1 = kernel_cond({U, spec.X1}, {spec.S1}, k[0]);
    if (mode == MacDecision::Cribbing::strictly_causal)
        return MacDecision::strictly_causal(spec, U, std::move(ux1),
                                            kernel_cond({spec.X2}, {U, spec.S2}, k[1]));
    return MacDecision::causal(spec, U, std::move(ux1),
                               kernel_cond({spec.X2}, {spec.Z, U, spec.S2}, k[1]));
}

RatePoint mac_support_point(const MacRateBounds& b, double w1, double w2) {
    double b1 = std::max(0.0, b.b_r1);
    double b2 = std::max(0.0, b.b_r2);
    double bs = std::max(0.0, std::min(b.b_sum_a, b.b_sum_b));
    std::vector<RatePoint> verts = {{0, 0}, {std::min(b1, bs), 0}, {0, std::min(b2, bs)}};
    if (bs - b1 >= 0 && bs - b1 <= b2) verts.push_back({b1, bs - b1});
    if (bs - b2 >= 0 && bs - b2 <= b1) verts.push_back({bs - b2, b2});
    if (b1 + b2 <= bs) verts.push_back({b1, b2});
    RatePoint best = verts[0];
    double best_v = -kInf;
    for (const auto& v : verts) {
        double val = w1 * v.r1 + w2 * v.r2;
        if (val > best_v + 1e-15) {
            best_v = val;
            best = v;
        }
    }
    return best;
}

Objective make_mac_objective(const MacSpec& spec, int u_size, MacDecision::Cribbing mode,
                             double w1, double w2) {
    return [spec, u_size, mode, w1, w2](const Kernels& k) {
        auto d = kernels_to_mac_decision(spec, u_size, mode, k);
        MacRateBounds b = mac_bounds(spec, d);
        RatePoint p = mac_support_point(b, w1, w2);
        ObjectiveEval e;
        e.branches = {w1 * p.r1 + w2 * p.r2};
        e.slack = b.slack;
        return e;
    };
}

DecisionSpace make_ptp_se_space(const PtpSeSpec& spec, int u_size) {
    DecisionSpace sp;
    sp.u_size = u_size;
    sp.factors = {{"p_u_given_s", static_cast<std::size_t>(spec.S.size), static_cast<std::size_t>(u_size)},
                  {"p_x2_given_u", static_cast<std::size_t>(u_size), static_cast<std::size_t>(spec.X2.size)}};
    sp.constraint = ConstraintKind::ptp_budget;
    sp.coupling_factor = 0;
    sp.coupling_cols = static_cast<std::size_t>(u_size);
    return sp;
}

PtpSeValue kernels_to_ptp_se_value(const PtpSeSpec& spec, int u_size, const Kernels& k) {
    Alphabet U{"U", u_size};
    return ptp_se_noncausal(spec, kernel_cond({U}, {spec.S}, k[0]),
                            kernel_cond({spec.X2}, {U}, k[1]));
}

Objective make_ptp_se_objective(const PtpSeSpec& spec, int u_size) {
    return [spec, u_size](const Kernels& k) {
        PtpSeValue v = kernels_to_ptp_se_value(spec, u_size, k);
        ObjectiveEval e;
        e.branches = {v.value};
        e.slack = v.constraint_slack;
        return e;
    };
}

std::vector<TracedPoint> trace_region(const MacSpec& spec, int u_size, MacDecision::Cribbing mode,
                                      const std::vector<std::pair<double, double>>& weights,
                                      const MaximizeOptions& opts) {
    std::vector<TracedPoint> out;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        auto [w1, w2] = weights[i];
        if (w1 < 0 || w2 < 0 || (w1 == 0 && w2 == 0))
            throw ValidationError("trace_region: weights must be nonnegative and not both zero");
        MaximizeOptions o = opts;  // same seed per weight: the axis sweeps
                                   // reproduce cmd_capacity runs exactly
        auto space = make_mac_space(spec, u_size, mode);
        auto report = maximize(space, make_mac_objective(spec, u_size, mode, w1, w2), o);
        if (!report.any_feasible)
            throw InfeasibleError("trace_region: no feasible decision found for weight pair " +
                                  std::to_string(w1) + "," + std::to_string(w2));
        auto d = kernels_to_mac_decision(spec, u_size, mode, report.argmax);
        MacRateBounds b = mac_bounds(spec, d);
        RatePoint p = mac_support_point(b, w1, w2);
        out.push_back({w1, w2, p, w1 * p.r1 + w2 * p.r2, b.slack});
    }
    std::sort(out.begin(), out.end(),
              [](const TracedPoint& a, const TracedPoint& b) { return a.point.r1 < b.point.r1; });
    return out;
}

std::vector<TracedPoint> trace_region_r2_grid(const MacSpec& spec, int u_size,
                                              MacDecision::Cribbing mode, int levels,
                                              const MaximizeOptions& opts) {
    if (levels < 1) throw ValidationError("trace_region_r2_grid: levels must be positive");
    auto space = make_mac_space(spec, u_size, mode);

    auto r2_corner = maximize(space, make_mac_objective(spec, u_size, mode, 0.0, 1.0), opts);
    if (!r2_corner.any_feasible)
        throw InfeasibleError("trace_region_r2_grid: no feasible decision found");
    double r2_max = r2_corner.best_value;

    std::vector<TracedPoint> out;
    {
        auto d = kernels_to_mac_decision(spec, u_size, mode, r2_corner.argmax);
        auto b = mac_bounds(spec, d);
        auto p = mac_support_point(b, 0.0, 1.0);
        out.push_back({0.0, 1.0, p, p.r2, b.slack});
    }
    for (int i = 0; i < levels; ++i) {
        double tau = r2_max * static_cast<double>(i) / static_cast<double>(levels);
        // max r1 with r2 pinned at tau; the level constraint joins the slack
        Objective obj = [spec, u_size, mode, tau](const Kernels& k) {
            auto d = kernels_to_mac_decision(spec, u_size, mode, k);
            MacRateBounds b = mac_bounds(spec, d);
            double bs = std::min(b.b_sum_a, b.b_sum_b);
            ObjectiveEval e;
            e.branches = {std::max(0.0, std::min(b.b_r1, bs - tau))};
            e.slack = std::min({b.slack, b.b_r2 - tau, bs - tau});
            return e;
        };
        auto rep = maximize(space, obj, opts);
        if (!rep.any_feasible)
            throw InfeasibleError("trace_region_r2_grid: level " + std::to_string(i) +
                                  " is infeasible");
        out.push_back({1.0, 0.0, {rep.best_value, tau}, rep.best_value, rep.feasibility_margin});
    }
    std::sort(out.begin(), out.end(),
              [](const TracedPoint& a, const TracedPoint& b) { return a.point.r1 < b.point.r1; });
    return out;
}

}  // namespace binfwd
