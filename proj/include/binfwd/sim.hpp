#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "binfwd/channels.hpp"
#include "binfwd/rng.hpp"

namespace binfwd::sim {

// ceil(2^{nR}) message/bin counts, with a guard against runaway budgets
std::uint64_t pow2_count(double n_times_rate);

// Strong eps-typicality against a fixed tuple pmf: every letter's empirical
// frequency within relative eps, letters of probability zero absent.
class Typicality {
  public:
    Typicality(const JointPmf& joint, const std::vector<std::string>& axis_order);
    bool check(std::span<const std::vector<int>* const> seqs, double eps) const;

  private:
    std::vector<double> pmf_;
    std::vector<std::size_t> strides_;
};

// Seeded pseudorandom partition of Z^n into bins; uniform and independent
// across distinct sequences for a fixed seed, never materialized.
struct BinMap {
    std::uint64_t key = 0;
    std::uint64_t nbins = 1;
    std::uint64_t bin(std::span<const int> z) const;
};

struct BlockRates {
    double Rp = 0, Rpp = 0, Rtilde = 0, Rb = 0;
};

struct CodebookSizes {
    std::uint64_t Np = 1, Npp = 1, Nt = 1, Nb = 1;
};

// Everything derived once from (spec, decision): factor kernels in the order
// the codebook draws them and the typicality tests the decoder runs.
struct SchemeContext {
    SdRcSpec spec;
    SdRcDecision d;
    JointPmf joint;          // assembled (S,U,Xr,X,Z,Y)
    std::vector<double> p_u;
    CondPmf xr_given_u;
    CondPmf z_given_xr_u_s;  // deterministic link pushed through p_{X|Xr,U,S}
    CondPmf x_given_z_xr_u_s;
    Typicality t_su;         // (S, U)
    Typicality t_su_xr_y;    // (S, U, Xr, Y)
    Typicality t_full;       // (S, U, Xr, X, Z, Y)

    SchemeContext(const SdRcSpec& spec, const SdRcDecision& d);
};

// Lazily generated per-block codebook: every codeword is a deterministic
// seeded function of (seed, block, role, indices, conditioning sequences).
class BlockCodebook {
  public:
    BlockCodebook(const SchemeContext& ctx, int n, const BlockRates& rates, int block,
                  std::uint64_t seed);

    const CodebookSizes& sizes() const { return sizes_; }
    int block_index() const { return block_; }
    BlockCodebook next() const;  // codebook of block + 1 (independent draws)

    std::vector<int> u_codeword(std::uint64_t l) const;
    std::vector<int> xr_codeword(const std::vector<int>& u) const;
    std::vector<int> z_codeword(std::uint64_t mp, std::uint64_t k, const std::vector<int>& xr,
                                const std::vector<int>& u, const std::vector<int>& s) const;
    std::vector<int> x_codeword(std::uint64_t mpp, const std::vector<int>& z,
                                const std::vector<int>& xr, const std::vector<int>& u,
                                const std::vector<int>& s) const;
    std::uint64_t bin(std::span<const int> z) const;
    // shared uniform fallback when the covering scan finds no index
    std::uint64_t fallback_k(std::uint64_t mp, std::uint64_t l_prev) const;

    const SchemeContext& ctx() const { return *ctx_; }
    int n() const { return n_; }

  private:
    const SchemeContext* ctx_;
    int n_;
    BlockRates rates_;
    int block_;
    std::uint64_t seed_;
    CodebookSizes sizes_;
    BinMap bins_;
};

struct EncodeResult {
    bool covering_ok = false;
    std::uint64_t k = 0;
    std::uint64_t l_new = 0;
    std::vector<int> z, x;
};

// Scan k in increasing order for the first index whose pointed next-block
// cooperation codeword is jointly typical with the next state block; on
// failure fall back to the shared uniform index.
EncodeResult encode_block(const BlockCodebook& cb, std::uint64_t mp, std::uint64_t mpp,
                          std::uint64_t l_prev, const std::vector<int>& s_cur,
                          const std::vector<int>& s_next, double eps);

std::vector<int> relay_step(const BlockCodebook& cb, std::uint64_t l_prev);
std::uint64_t relay_update(const BlockCodebook& cb, std::span<const int> z_observed);

struct DecodedBlock {
    std::uint64_t mp = 0, mpp = 0;
    bool any_candidate = false;
    bool unique = false;
    std::uint64_t l_next = 0;  // bin index the decoder carries forward
};

struct DecodeResult {
    std::vector<DecodedBlock> blocks;                    // blocks 2..B-1
    std::vector<std::vector<std::uint64_t>> lhat;        // per block, per candidate m'
    std::uint64_t l1 = 0;                                // reconstructed first bin index
};

// Sliding-window decoder over blocks 2..B-1; block 1 carries fixed messages
// and is imitated to recover the first cooperation index.
DecodeResult sliding_window_decode(const std::vector<BlockCodebook>& cbs,
                                   const std::vector<std::vector<int>>& y_blocks,
                                   const std::vector<std::vector<int>>& s_blocks, double eps);

struct SimReport {
    int trials = 0, n = 0, B = 0;
    BlockRates rates;
    double eps = 0;
    std::uint64_t seed = 0;
    std::uint64_t decoded_blocks = 0;
    std::uint64_t total_errors = 0;
    std::vector<std::uint64_t> errors_per_block;  // indices 2..B-1
    double block_error_rate = 0;
    bool rate_defined = false;
    // decomposed causes (may overlap; sum >= total errors)
    std::uint64_t covering_failures = 0;  // encoder found no coordinated index
    std::uint64_t bin_confusions = 0;     // wrong message mapped to the true bin
    std::uint64_t typicality_miss = 0;    // true tuple failed the decoding tests
    std::uint64_t wrong_candidate = 0;    // an impostor tuple passed the tests
    std::uint64_t relay_bin_mismatch = 0; // exact invariant; must stay zero
};

SimReport simulate_sdrc(const SdRcSpec& spec, const SdRcDecision& d, int n, int B,
                        const BlockRates& rates, double eps, int trials, std::uint64_t seed,
                        int threads = 1);

struct CoveringReport {
    int trials = 0, n = 0;
    double r = 0, rb = 0, delta = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> distinct_bins;  // per trial
    double threshold = 0;                      // 2^{n(R-delta)}
    double pass_fraction = 0;
    bool rate_defined = false;
    std::uint64_t q_min = 0, q25 = 0, q50 = 0, q75 = 0, q_max = 0;
};

// Indirect-covering experiment: draw 2^{ceil nR} sequences i.i.d. from
// p_{Z|V} along a fresh v^n, hash-bin them, count distinct bins, and compare
// against 2^{n(R-delta)}.
CoveringReport covering_experiment(const CondPmf& z_given_v, const std::vector<double>& p_v, int n,
                                   double r, double rb, double delta, int trials,
                                   std::uint64_t seed, int threads = 1);

}  // namespace binfwd::sim
