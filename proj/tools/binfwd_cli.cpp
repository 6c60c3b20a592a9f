#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binfwd/fme.hpp"
#include "binfwd/fme_presets.hpp"
#include "binfwd/json_io.hpp"

using namespace binfwd;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::fwrite(content.data(), 1, content.size(), stdout);
    else
        write_text_file(out_path, content);
}

std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t seed_flag) {
    if (seed_opt->count() > 0) return seed_flag;
    if (const char* env = std::getenv("BINFWD_SEED")) return std::strtoull(env, nullptr, 10);
    return 1;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    auto push = [&] {
        if (!cur.empty()) {
            out.push_back(std::stod(cur));
            cur.clear();
        }
    };
    for (char c : csv) {
        if (c == ',')
            push();
        else if (!std::isspace(static_cast<unsigned char>(c)))
            cur += c;
    }
    push();
    return out;
}

std::vector<std::pair<double, double>> parse_weights(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    std::string chunk;
    auto push = [&] {
        if (chunk.empty()) return;
        auto vals = parse_list(chunk);
        if (vals.size() != 2) throw ValidationError("weights must be w1,w2 pairs separated by ';'");
        out.push_back({vals[0], vals[1]});
        chunk.clear();
    };
    for (char c : s) {
        if (c == ';')
            push();
        else
            chunk += c;
    }
    push();
    return out;
}

int cmd_table1(double p, const std::string& alphas_csv, bool optimizer_check, int u_size,
               int restarts, std::uint64_t seed, int threads, const std::string& format,
               const std::string& out_path) {
    auto alphas = parse_list(alphas_csv);
    RunManifest man;
    man.subcommand = "table1";
    man.seed = seed;
    man.options = {{"p", p},
                   {"alphas", alphas},
                   {"optimizer_check", optimizer_check},
                   {"u_size", u_size},
                   {"restarts", restarts},
                   {"format", format}};

    struct Row {
        double alpha, nocsi, causal, noncausal, opt;
    };
    std::vector<Row> rows;
    for (double a : alphas) {
        auto cf = closed_form_example(a, p);
        Row r{a, cf.c_nocsi, cf.c_c, cf.c_nc, 0.0};
        if (optimizer_check) {
            auto spec = example_channel(a, p);
            MaximizeOptions opts;
            opts.restarts = restarts;
            opts.seed = seed;
            opts.threads = threads;
            auto rep = maximize(make_ptp_se_space(spec, u_size), make_ptp_se_objective(spec, u_size),
                                opts);
            r.opt = rep.best_value;
        }
        rows.push_back(r);
    }

    std::string out;
    if (format == "json") {
        Json j;
        j["manifest"] = man.to_json();
        Json arr = Json::array();
        for (const auto& r : rows) {
            Json row = {{"alpha", r.alpha},
                        {"c_no_csi", r.nocsi},
                        {"c_causal", r.causal},
                        {"c_noncausal", r.noncausal}};
            if (optimizer_check) row["c_noncausal_optimizer"] = r.opt;
            arr.push_back(row);
        }
        j["rows"] = arr;
        out = j.dump(2) + "\n";
    } else {
        out = "# manifest: " + man.to_json().dump() + "\n";
        out += "alpha,c_no_csi,c_causal,c_noncausal";
        if (optimizer_check) out += ",c_noncausal_optimizer";
        out += "\n";
        for (const auto& r : rows) {
            out += fmt(r.alpha) + "," + fmt(r.nocsi) + "," + fmt(r.causal) + "," + fmt(r.noncausal);
            if (optimizer_check) out += "," + fmt(r.opt);
            out += "\n";
        }
    }
    emit(out_path, out);
    return 0;
}

int cmd_capacity(const std::string& model, const std::string& channel_path, int u_size,
                 int restarts, int grid_levels, std::uint64_t seed, int threads,
                 const std::string& weights_csv, const std::string& out_path) {
    auto channel = load_channel_file(channel_path);
    RunManifest man;
    man.subcommand = "capacity";
    man.seed = seed;
    man.options = {{"model", model},
                   {"channel", channel_path},
                   {"u_size", u_size},
                   {"restarts", restarts},
                   {"grid_levels", grid_levels},
                   {"weights", weights_csv}};
    man.input_digests[channel_path] = file_digest_hex(channel_path);

    MaximizeOptions opts;
    opts.restarts = restarts;
    opts.grid_levels = grid_levels;
    opts.seed = seed;
    opts.threads = threads;

    Json j;
    j["manifest"] = man.to_json();
    j["model"] = model;

    OptReport rep;
    if (model == "sdrc" || model == "sdrc-causal") {
        if (!channel.sdrc) throw ValidationError("capacity: channel file is not an sdrc model");
        auto mode = model == "sdrc" ? SdRcDecision::Mode::noncausal : SdRcDecision::Mode::causal;
        rep = maximize(make_sdrc_space(*channel.sdrc, u_size, mode),
                       make_sdrc_objective(*channel.sdrc, u_size, mode), opts);
        if (rep.any_feasible) {
            auto d = kernels_to_sdrc_decision(*channel.sdrc, u_size, mode, rep.argmax);
            auto v = mode == SdRcDecision::Mode::causal ? sdrc_causal_value(*channel.sdrc, d)
                                                        : sdrc_value(*channel.sdrc, d);
            j["bounds"] = {{"rate_bound_1", v.rate_bound_1},
                           {"rate_bound_2", v.rate_bound_2},
                           {"slack", v.slack}};
        }
    } else if (model == "mac" || model == "mac-causal") {
        if (!channel.mac) throw ValidationError("capacity: channel file is not a mac model");
        auto mode = model == "mac" ? MacDecision::Cribbing::strictly_causal
                                   : MacDecision::Cribbing::causal;
        auto w = weights_csv.empty() ? std::pair<double, double>{1.0, 1.0}
                                     : parse_weights(weights_csv).at(0);
        rep = maximize(make_mac_space(*channel.mac, u_size, mode),
                       make_mac_objective(*channel.mac, u_size, mode, w.first, w.second), opts);
        if (rep.any_feasible) {
            auto d = kernels_to_mac_decision(*channel.mac, u_size, mode, rep.argmax);
            auto b = mac_bounds(*channel.mac, d);
            auto pt = mac_support_point(b, w.first, w.second);
            j["bounds"] = {{"b_r1", b.b_r1},
                           {"b_r2", b.b_r2},
                           {"b_sum_a", b.b_sum_a},
                           {"b_sum_b", b.b_sum_b},
                           {"slack", b.slack}};
            j["support_point"] = {{"r1", pt.r1}, {"r2", pt.r2}};
            j["weights"] = {{"w1", w.first}, {"w2", w.second}};
        }
    } else if (model == "ptp-se") {
        if (!channel.ptp_se) throw ValidationError("capacity: channel file is not a ptp_se model");
        rep = maximize(make_ptp_se_space(*channel.ptp_se, u_size),
                       make_ptp_se_objective(*channel.ptp_se, u_size), opts);
        if (rep.any_feasible) {
            auto v = kernels_to_ptp_se_value(*channel.ptp_se, u_size, rep.argmax);
            j["bounds"] = {{"value", v.value}, {"constraint_slack", v.constraint_slack}};
        }
    } else {
        throw ValidationError("capacity: unknown model '" + model + "'");
    }

    if (!rep.any_feasible)
        throw InfeasibleError("capacity: every restart ended infeasible");

    j["report"] = opt_report_to_json(rep);
    emit(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_region(const std::string& channel_path, const std::string& weights_csv, int weights_grid,
               int r2_grid, int u_size, int restarts, std::uint64_t seed, int threads, bool causal,
               const std::string& out_path) {
    auto channel = load_channel_file(channel_path);
    if (!channel.mac) throw ValidationError("region: channel file is not a mac model");

    RunManifest man;
    man.subcommand = "region";
    man.seed = seed;
    man.options = {{"channel", channel_path},
                   {"weights", weights_csv},
                   {"weights_grid", weights_grid},
                   {"r2_grid", r2_grid},
                   {"u_size", u_size},
                   {"restarts", restarts},
                   {"causal", causal}};
    man.input_digests[channel_path] = file_digest_hex(channel_path);

    MaximizeOptions opts;
    opts.restarts = restarts;
    opts.seed = seed;
    opts.threads = threads;
    auto mode = causal ? MacDecision::Cribbing::causal : MacDecision::Cribbing::strictly_causal;

    std::vector<TracedPoint> pts;
    if (r2_grid > 0) {
        if (!weights_csv.empty())
            throw ValidationError("region: pass either --weights or --r2-grid, not both");
        pts = trace_region_r2_grid(*channel.mac, u_size, mode, r2_grid, opts);
    } else {
        std::vector<std::pair<double, double>> weights;
        if (!weights_csv.empty()) {
            weights = parse_weights(weights_csv);
        } else {
            int g = std::max(1, weights_grid);
            for (int i = 0; i <= g; ++i)
                weights.push_back({static_cast<double>(i) / g, 1.0 - static_cast<double>(i) / g});
        }
        pts = trace_region(*channel.mac, u_size, mode, weights, opts);
    }

    std::string out = "# manifest: " + man.to_json().dump() + "\n";
    out += "w1,w2,r1,r2,support,slack\n";
    for (const auto& p : pts)
        out += fmt(p.w1) + "," + fmt(p.w2) + "," + fmt(p.point.r1) + "," + fmt(p.point.r2) + "," +
               fmt(p.support) + "," + fmt(p.slack) + "\n";
    emit(out_path, out);
    return 0;
}

int cmd_fme(const std::string& system_path, const std::string& preset, const std::string& keep_csv,
            const std::string& out_path) {
    std::string text;
    RunManifest man;
    man.subcommand = "fme";
    man.options = {{"system", system_path}, {"preset", preset}, {"keep", keep_csv}};
    if (!preset.empty()) {
        text = std::string(fme::preset_text(preset));
    } else {
        text = read_text_file(system_path);
        man.input_digests[system_path] = file_digest_hex(system_path);
    }
    auto sys = fme::parse_system(text);

    std::vector<std::string> keep;
    if (!keep_csv.empty()) {
        std::string cur;
        for (char c : keep_csv + ",") {
            if (c == ',') {
                if (!cur.empty()) keep.push_back(cur);
                cur.clear();
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                cur += c;
            }
        }
    } else {
        keep = sys.vars;
    }

    auto projected = fme::project(sys, keep);
    std::string out = "# manifest: " + man.to_json().dump() + "\n" + fme::format_system(projected);
    emit(out_path, out);
    return 0;
}

int cmd_sim(const std::string& config_path, int threads, const std::string& out_path) {
    auto cfg = load_sim_config_file(config_path);
    auto channel = load_channel_file(cfg.channel_file);
    if (!channel.sdrc) throw ValidationError("sim: channel file is not an sdrc model");
    Json dj;
    try {
        dj = Json::parse(read_text_file(cfg.decision_file));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("decision file " + cfg.decision_file + ": " + e.what());
    }
    auto d = load_sdrc_decision_json(dj, *channel.sdrc);

    RunManifest man;
    man.subcommand = "sim";
    man.seed = cfg.seed;
    man.options = {{"config", config_path}};
    man.input_digests[config_path] = file_digest_hex(config_path);
    man.input_digests[cfg.channel_file] = file_digest_hex(cfg.channel_file);
    man.input_digests[cfg.decision_file] = file_digest_hex(cfg.decision_file);

    auto rep = sim::simulate_sdrc(*channel.sdrc, d, cfg.n, cfg.B, cfg.rates, cfg.eps, cfg.trials,
                                  cfg.seed, threads);
    Json j;
    j["manifest"] = man.to_json();
    j["report"] = sim_report_to_json(rep);
    emit(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_covering(const std::string& kernel_path, int n, double r, double rb, double delta,
                 int trials, std::uint64_t seed, int threads, const std::string& out_path) {
    std::vector<double> p_v;
    CondPmf z_given_v;
    load_covering_kernel_file(kernel_path, p_v, z_given_v);

    RunManifest man;
    man.subcommand = "covering";
    man.seed = seed;
    man.options = {{"kernel_file", kernel_path}, {"n", n},           {"r", r},
                   {"rb", rb},                   {"delta", delta},   {"trials", trials}};
    man.input_digests[kernel_path] = file_digest_hex(kernel_path);

    auto rep = sim::covering_experiment(z_given_v, p_v, n, r, rb, delta, trials, seed, threads);
    Json j;
    j["manifest"] = man.to_json();
    j["report"] = covering_report_to_json(rep);
    emit(out_path, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capacity, rate-region, Fourier-Motzkin and bin-forward simulation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 1;
    app.add_option("--threads", threads, "worker threads (results are thread-count invariant)")
        ->capture_default_str();

    // table1
    auto* t1 = app.add_subcommand("table1", "closed-form capacities of the three-state example");
    double t1_p = 0.2;
    std::string t1_alphas = "0,0.5,1";
    bool t1_opt = false;
    int t1_u = 3, t1_restarts = 64;
    std::uint64_t t1_seed = 1;
    std::string t1_format = "csv", t1_out;
    t1->add_option("--p", t1_p, "state parameter p")->capture_default_str();
    t1->add_option("--alphas", t1_alphas, "comma-separated alpha grid")->capture_default_str();
    t1->add_flag("--optimizer-check", t1_opt, "append an optimizer cross-check column");
    t1->add_option("--u-size", t1_u, "auxiliary alphabet size for the cross-check");
    t1->add_option("--restarts", t1_restarts, "optimizer restarts for the cross-check");
    auto* t1_seed_opt = t1->add_option("--seed", t1_seed, "rng seed");
    t1->add_option("--format", t1_format, "csv or json")->capture_default_str();
    t1->add_option("--out", t1_out, "output file (stdout if omitted)");

    // capacity
    auto* cap = app.add_subcommand("capacity", "maximize a capacity expression over decision PMFs");
    std::string cap_model, cap_channel, cap_weights, cap_out;
    int cap_u = 2, cap_restarts = 64, cap_grid = 0;
    std::uint64_t cap_seed = 1;
    cap->add_option("--model", cap_model, "sdrc | sdrc-causal | mac | mac-causal | ptp-se")
        ->required();
    cap->add_option("--channel", cap_channel, "channel spec JSON file")->required();
    cap->add_option("--u-size", cap_u, "auxiliary alphabet size")->capture_default_str();
    cap->add_option("--restarts", cap_restarts, "optimizer restarts")->capture_default_str();
    cap->add_option("--grid-levels", cap_grid, "exhaustive grid resolution (0 = off)");
    auto* cap_seed_opt = cap->add_option("--seed", cap_seed, "rng seed");
    cap->add_option("--weights", cap_weights, "mac objective weights w1,w2 (default 1,1)");
    cap->add_option("--out", cap_out, "output file (stdout if omitted)");

    // region
    auto* reg = app.add_subcommand("region", "trace a mac rate-region boundary");
    std::string reg_channel, reg_weights, reg_out;
    int reg_grid = 8, reg_r2_grid = 0, reg_u = 2, reg_restarts = 16;
    bool reg_causal = false;
    std::uint64_t reg_seed = 1;
    reg->add_option("--channel", reg_channel, "channel spec JSON file")->required();
    reg->add_option("--weights", reg_weights, "weight pairs 'w1,w2;w1,w2;...'");
    reg->add_option("--weights-grid", reg_grid, "number of weight steps when --weights omitted");
    reg->add_option("--r2-grid", reg_r2_grid, "sweep r2 levels instead of weights");
    reg->add_option("--u-size", reg_u, "auxiliary alphabet size")->capture_default_str();
    reg->add_option("--restarts", reg_restarts, "optimizer restarts per weight")->capture_default_str();
    reg->add_flag("--causal", reg_causal, "causal cribbing factorization");
    auto* reg_seed_opt = reg->add_option("--seed", reg_seed, "rng seed");
    reg->add_option("--out", reg_out, "output CSV file (stdout if omitted)");

    // fme
    auto* fm = app.add_subcommand("fme", "project a rate inequality system exactly");
    std::string fm_system, fm_preset, fm_keep, fm_out;
    fm->add_option("--system", fm_system, "system file");
    fm->add_option("--preset", fm_preset, "built-in system: eq17 | eq21 | eq41");
    fm->add_option("--keep", fm_keep, "comma-separated variables to keep (default: all)");
    fm->add_option("--out", fm_out, "output file (stdout if omitted)");

    // sim
    auto* sm = app.add_subcommand("sim", "run the bin-forward block simulation");
    std::string sm_config, sm_out;
    sm->add_option("--config", sm_config, "simulation config JSON")->required();
    sm->add_option("--out", sm_out, "output file (stdout if omitted)");

    // covering
    auto* cov = app.add_subcommand("covering", "indirect covering experiment");
    std::string cov_kernel, cov_out;
    int cov_n = 12, cov_trials = 200;
    double cov_r = 0.6, cov_rb = 0.8, cov_delta = 0.1;
    std::uint64_t cov_seed = 1;
    cov->add_option("--kernel-file", cov_kernel, "JSON with p_v and p_z_given_v")->required();
    cov->add_option("--n", cov_n, "blocklength")->capture_default_str();
    cov->add_option("--r", cov_r, "sequence rate R")->capture_default_str();
    cov->add_option("--rb", cov_rb, "bin rate R_B")->capture_default_str();
    cov->add_option("--delta", cov_delta, "threshold slack delta")->capture_default_str();
    cov->add_option("--trials", cov_trials, "number of trials")->capture_default_str();
    auto* cov_seed_opt = cov->add_option("--seed", cov_seed, "rng seed");
    cov->add_option("--out", cov_out, "output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (t1->parsed())
            return cmd_table1(t1_p, t1_alphas, t1_opt, t1_u, t1_restarts,
                              resolve_seed(t1_seed_opt, t1_seed), threads, t1_format, t1_out);
        if (cap->parsed())
            return cmd_capacity(cap_model, cap_channel, cap_u, cap_restarts, cap_grid,
                                resolve_seed(cap_seed_opt, cap_seed), threads, cap_weights, cap_out);
        if (reg->parsed())
            return cmd_region(reg_channel, reg_weights, reg_grid, reg_r2_grid, reg_u, reg_restarts,
                              resolve_seed(reg_seed_opt, reg_seed), threads, reg_causal, reg_out);
        if (fm->parsed()) {
            if (fm_system.empty() == fm_preset.empty())
                throw ValidationError("fme: pass exactly one of --system or --preset");
            return cmd_fme(fm_system, fm_preset, fm_keep, fm_out);
        }
        if (sm->parsed()) return cmd_sim(sm_config, threads, sm_out);
        if (cov->parsed())
            return cmd_covering(cov_kernel, cov_n, cov_r, cov_rb, cov_delta, cov_trials,
                                resolve_seed(cov_seed_opt, cov_seed), threads, cov_out);
    } catch (const BudgetError& e) {
        std::cerr << "budget refusal: " << e.what() << "\n";
        return 3;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
