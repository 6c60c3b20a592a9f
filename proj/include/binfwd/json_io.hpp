#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "binfwd/channels.hpp"
#include "binfwd/optimize.hpp"
#include "binfwd/sim.hpp"

namespace binfwd {

inline constexpr const char* kToolVersion = "binfwd 0.1.0";

using Json = nlohmann::ordered_json;

// Channel-spec file: {"model": sdrc|mac|ptp_se, "alphabets": {...},
// "p_state": [...], "z_table": [...], "kernel": [...]}. Kernel nesting is
// sdrc [x][xr][z][s]->[y], mac [x1][x2][s1][s2]->[y], ptp_se [x2][s]->[y].
struct ChannelFile {
    std::string model;
    std::optional<SdRcSpec> sdrc;
    std::optional<MacSpec> mac;
    std::optional<PtpSeSpec> ptp_se;
};

ChannelFile load_channel_json(const Json& j);
ChannelFile load_channel_file(const std::string& path);

Json channel_to_json(const SdRcSpec& spec);
Json channel_to_json(const MacSpec& spec);
Json channel_to_json(const PtpSeSpec& spec);

SdRcDecision load_sdrc_decision_json(const Json& j, const SdRcSpec& spec);

struct SimConfig {
    std::string model = "sdrc";
    int n = 0, B = 0;
    sim::BlockRates rates;
    double eps = 0.2;
    int trials = 0;
    std::uint64_t seed = 1;
    std::string channel_file, decision_file;
};
SimConfig load_sim_config_file(const std::string& path);

// {"p_v": [...], "p_z_given_v": [[...]]}
void load_covering_kernel_file(const std::string& path, std::vector<double>& p_v,
                               CondPmf& z_given_v);

// Reproducibility stamp embedded in every CLI output.
struct RunManifest {
    std::string subcommand;
    Json options = Json::object();
    std::uint64_t seed = 0;
    Json input_digests = Json::object();
    std::string version = kToolVersion;

    Json to_json() const;
};

std::string file_digest_hex(const std::string& path);

Json sim_report_to_json(const sim::SimReport& r);
Json covering_report_to_json(const sim::CoveringReport& r);
Json opt_report_to_json(const OptReport& r);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace binfwd
