#include "binfwd/json_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace binfwd {

namespace {

int get_size(const Json& alphabets, const std::string& name) {
    if (!alphabets.contains(name))
        throw ValidationError("channel file: missing alphabet '" + name + "'");
    int s = alphabets.at(name).get<int>();
    if (s < 1) throw ValidationError("channel file: alphabet '" + name + "' must be >= 1");
    return s;
}

std::vector<double> get_state(const Json& j, std::size_t want) {
    auto p = j.at("p_state").get<std::vector<double>>();
    if (p.size() != want)
        throw ValidationError("channel file: p_state has " + std::to_string(p.size()) +
                              " entries, expected " + std::to_string(want));
    return p;
}

// flatten a nested kernel array with the given dimension sizes
void flatten(const Json& node, std::span<const int> dims, std::vector<double>& out,
             const std::string& path) {
    if (dims.empty()) {
        if (!node.is_number())
            throw ValidationError("channel file: expected number at kernel" + path);
        out.push_back(node.get<double>());
        return;
    }
    if (!node.is_array() || node.size() != static_cast<std::size_t>(dims[0]))
        throw ValidationError("channel file: expected array of length " + std::to_string(dims[0]) +
                              " at kernel" + path);
    for (std::size_t i = 0; i < node.size(); ++i)
        flatten(node[i], dims.subspan(1), out, path + "[" + std::to_string(i) + "]");
}

std::vector<int> flatten_ints(const Json& node, std::span<const int> dims, const std::string& path) {
    std::vector<double> tmp;
    flatten(node, dims, tmp, path);
    std::vector<int> out;
    out.reserve(tmp.size());
    for (double v : tmp) {
        int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw ValidationError("channel file: z_table entries must be integers");
        out.push_back(i);
    }
    return out;
}

Json nest(const std::vector<double>& flat, std::span<const int> dims, std::size_t& pos) {
    if (dims.empty()) return flat[pos++];
    Json arr = Json::array();
    for (int i = 0; i < dims[0]; ++i) arr.push_back(nest(flat, dims.subspan(1), pos));
    return arr;
}

Json nest_ints(const std::vector<int>& flat, std::span<const int> dims, std::size_t& pos) {
    if (dims.empty()) return flat[pos++];
    Json arr = Json::array();
    for (int i = 0; i < dims[0]; ++i) arr.push_back(nest_ints(flat, dims.subspan(1), pos));
    return arr;
}

}  // namespace

ChannelFile load_channel_json(const Json& j) {
    ChannelFile out;
    out.model = j.at("model").get<std::string>();
    const Json& al = j.at("alphabets");

    if (out.model == "sdrc") {
        SdRcSpec spec;
        spec.S = {"S", get_size(al, "S")};
        spec.X = {"X", get_size(al, "X")};
        spec.Xr = {"Xr", get_size(al, "Xr")};
        spec.Z = {"Z", get_size(al, "Z")};
        spec.Y = {"Y", get_size(al, "Y")};
        spec.p_state = get_state(j, static_cast<std::size_t>(spec.S.size));
        int zdims[] = {spec.X.size, spec.Xr.size, spec.S.size};
        spec.link.inputs = {spec.X, spec.Xr, spec.S};
        spec.link.output = spec.Z;
        spec.link.table = flatten_ints(j.at("z_table"), zdims, "");
        int kdims[] = {spec.X.size, spec.Xr.size, spec.Z.size, spec.S.size, spec.Y.size};
        std::vector<double> k;
        flatten(j.at("kernel"), kdims, k, "");
        spec.out = CondPmf({spec.Y}, {spec.X, spec.Xr, spec.Z, spec.S}, std::move(k));
        spec.validate();
        out.sdrc = std::move(spec);
    } else if (out.model == "mac") {
        MacSpec spec;
        spec.S1 = {"S1", get_size(al, "S1")};
        spec.S2 = {"S2", get_size(al, "S2")};
        spec.X1 = {"X1", get_size(al, "X1")};
        spec.X2 = {"X2", get_size(al, "X2")};
        spec.Z = {"Z", get_size(al, "Z")};
        spec.Y = {"Y", get_size(al, "Y")};
        spec.p_state =
            get_state(j, static_cast<std::size_t>(spec.S1.size) * static_cast<std::size_t>(spec.S2.size));
        int zdims[] = {spec.X1.size, spec.S1.size};
        spec.link.inputs = {spec.X1, spec.S1};
        spec.link.output = spec.Z;
        spec.link.table = flatten_ints(j.at("z_table"), zdims, "");
        int kdims[] = {spec.X1.size, spec.X2.size, spec.S1.size, spec.S2.size, spec.Y.size};
        std::vector<double> k;
        flatten(j.at("kernel"), kdims, k, "");
        spec.out = CondPmf({spec.Y}, {spec.X1, spec.X2, spec.S1, spec.S2}, std::move(k));
        spec.validate();
        out.mac = std::move(spec);
    } else if (out.model == "ptp_se") {
        PtpSeSpec spec;
        spec.S = {"S", get_size(al, "S")};
        spec.X1 = {"X1", get_size(al, "X1")};
        spec.X2 = {"X2", get_size(al, "X2")};
        spec.Y = {"Y", get_size(al, "Y")};
        spec.p_state = get_state(j, static_cast<std::size_t>(spec.S.size));
        int kdims[] = {spec.X2.size, spec.S.size, spec.Y.size};
        std::vector<double> k;
        flatten(j.at("kernel"), kdims, k, "");
        spec.out = CondPmf({spec.Y}, {spec.X2, spec.S}, std::move(k));
        spec.validate();
        out.ptp_se = std::move(spec);
    } else {
        throw ValidationError("channel file: unknown model '" + out.model + "'");
    }
    return out;
}

ChannelFile load_channel_file(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("channel file " + path + ": " + e.what());
    }
    return load_channel_json(j);
}

Json channel_to_json(const SdRcSpec& spec) {
    Json j;
    j["model"] = "sdrc";
    j["alphabets"] = {{"S", spec.S.size}, {"X", spec.X.size}, {"Xr", spec.Xr.size},
                      {"Z", spec.Z.size}, {"Y", spec.Y.size}};
    j["p_state"] = spec.p_state;
    std::size_t pos = 0;
    int zdims[] = {spec.X.size, spec.Xr.size, spec.S.size};
    j["z_table"] = nest_ints(spec.link.table, zdims, pos);
    pos = 0;
    int kdims[] = {spec.X.size, spec.Xr.size, spec.Z.size, spec.S.size, spec.Y.size};
    j["kernel"] = nest(spec.out.probs(), kdims, pos);
    return j;
}

Json channel_to_json(const MacSpec& spec) {
    Json j;
    j["model"] = "mac";
    j["alphabets"] = {{"S1", spec.S1.size}, {"S2", spec.S2.size}, {"X1", spec.X1.size},
                      {"X2", spec.X2.size}, {"Z", spec.Z.size},   {"Y", spec.Y.size}};
    j["p_state"] = spec.p_state;
    std::size_t pos = 0;
    int zdims[] = {spec.X1.size, spec.S1.size};
    j["z_table"] = nest_ints(spec.link.table, zdims, pos);
    pos = 0;
    int kdims[] = {spec.X1.size, spec.X2.size, spec.S1.size, spec.S2.size, spec.Y.size};
    j["kernel"] = nest(spec.out.probs(), kdims, pos);
    return j;
}

Json channel_to_json(const PtpSeSpec& spec) {
    Json j;
    j["model"] = "ptp_se";
    j["alphabets"] = {{"S", spec.S.size}, {"X1", spec.X1.size}, {"X2", spec.X2.size}, {"Y", spec.Y.size}};
    j["p_state"] = spec.p_state;
    std::size_t pos = 0;
    int kdims[] = {spec.X2.size, spec.S.size, spec.Y.size};
    j["kernel"] = nest(spec.out.probs(), kdims, pos);
    return j;
}

SdRcDecision load_sdrc_decision_json(const Json& j, const SdRcSpec& spec) {
    int u_size = j.at("u_size").get<int>();
    Alphabet U{"U", u_size};
    int udims[] = {spec.S.size, u_size};
    int xrdims[] = {u_size, spec.Xr.size};
    int xdims[] = {spec.Xr.size, u_size, spec.S.size, spec.X.size};
    std::vector<double> pu, pxr, px;
    flatten(j.at("p_u_given_s"), udims, pu, "");
    flatten(j.at("p_xr_given_u"), xrdims, pxr, "");
    flatten(j.at("p_x_given_xr_u_s"), xdims, px, "");
    return SdRcDecision::noncausal(spec, U, CondPmf({U}, {spec.S}, std::move(pu)),
                                   CondPmf({spec.Xr}, {U}, std::move(pxr)),
                                   CondPmf({spec.X}, {spec.Xr, U, spec.S}, std::move(px)));
}

SimConfig load_sim_config_file(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("sim config " + path + ": " + e.what());
    }
    SimConfig c;
    c.model = j.value("model", "sdrc");
    if (c.model != "sdrc")
        throw ValidationError("sim config: only the sdrc scheme is simulated");
    c.n = j.at("n").get<int>();
    c.B = j.at("B").get<int>();
    const Json& r = j.at("rates");
    c.rates.Rp = r.at("Rp").get<double>();
    c.rates.Rpp = r.at("Rpp").get<double>();
    c.rates.Rtilde = r.at("Rtilde").get<double>();
    c.rates.Rb = r.at("Rb").get<double>();
    c.eps = j.value("eps", 0.2);
    c.trials = j.at("trials").get<int>();
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
    } else if (const char* env = std::getenv("BINFWD_SEED")) {
        c.seed = std::strtoull(env, nullptr, 10);
    } else {
        c.seed = 1;
    }
    c.channel_file = j.at("channel_file").get<std::string>();
    c.decision_file = j.at("decision_file").get<std::string>();
    return c;
}

void load_covering_kernel_file(const std::string& path, std::vector<double>& p_v,
                               CondPmf& z_given_v) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("kernel file " + path + ": " + e.what());
    }
    p_v = j.at("p_v").get<std::vector<double>>();
    auto rows = j.at("p_z_given_v").get<std::vector<std::vector<double>>>();
    if (rows.empty() || rows.size() != p_v.size())
        throw ValidationError("kernel file: p_z_given_v must have one row per letter of p_v");
    Alphabet V{"V", static_cast<int>(p_v.size())};
    Alphabet Z{"Z", static_cast<int>(rows[0].size())};
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows[0].size())
            throw ValidationError("kernel file: ragged p_z_given_v rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    z_given_v = CondPmf({Z}, {V}, std::move(flat));
}

Json RunManifest::to_json() const {
    Json j;
    j["subcommand"] = subcommand;
    j["options"] = options;
    j["seed"] = seed;
    j["input_digests"] = input_digests;
    j["version"] = version;
    return j;
}

std::string file_digest_hex(const std::string& path) {
    std::string bytes = read_text_file(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ull;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json sim_report_to_json(const sim::SimReport& r) {
    Json j;
    j["trials"] = r.trials;
    j["n"] = r.n;
    j["B"] = r.B;
    j["rates"] = {{"Rp", r.rates.Rp}, {"Rpp", r.rates.Rpp}, {"Rtilde", r.rates.Rtilde}, {"Rb", r.rates.Rb}};
    j["eps"] = r.eps;
    j["seed"] = r.seed;
    j["decoded_blocks"] = r.decoded_blocks;
    j["total_errors"] = r.total_errors;
    j["errors_per_block"] = r.errors_per_block;
    j["block_error_rate"] = r.block_error_rate;
    j["rate_defined"] = r.rate_defined;
    j["covering_failures"] = r.covering_failures;
    j["bin_confusions"] = r.bin_confusions;
    j["typicality_miss"] = r.typicality_miss;
    j["wrong_candidate"] = r.wrong_candidate;
    j["relay_bin_mismatch"] = r.relay_bin_mismatch;
    return j;
}

Json covering_report_to_json(const sim::CoveringReport& r) {
    Json j;
    j["trials"] = r.trials;
    j["n"] = r.n;
    j["r"] = r.r;
    j["rb"] = r.rb;
    j["delta"] = r.delta;
    j["seed"] = r.seed;
    j["threshold"] = r.threshold;
    j["pass_fraction"] = r.pass_fraction;
    j["rate_defined"] = r.rate_defined;
    j["distinct_bins_quantiles"] = {{"min", r.q_min}, {"q25", r.q25}, {"q50", r.q50},
                                    {"q75", r.q75},   {"max", r.q_max}};
    j["distinct_bins"] = r.distinct_bins;
    return j;
}

Json opt_report_to_json(const OptReport& r) {
    Json j;
    j["best_value"] = r.best_value;
    j["feasibility_margin"] = r.feasibility_margin;
    j["any_feasible"] = r.any_feasible;
    j["restarts_used"] = r.restarts_used;
    j["argmax"] = r.argmax;
    Json tr = Json::array();
    for (const auto& t : r.trajectories)
        tr.push_back({{"restart", t.restart},
                      {"final_value", t.final_value},
                      {"slack", t.slack},
                      {"iters", t.iters},
                      {"feasible", t.feasible}});
    j["restart_summaries"] = tr;
    if (r.grid_ran) {
        j["grid_value"] = r.grid_value;
        j["sandwich_gap"] = r.sandwich_gap;
    }
    return j;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << content;
}

}  // namespace binfwd
