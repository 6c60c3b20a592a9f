#include "binfwd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_set>

namespace binfwd::sim {

namespace {

constexpr std::uint64_t kMaxSequences = 1ull << 24;
constexpr std::uint64_t kMaxBins = 1ull << 48;

std::vector<int> draw_codeword(std::uint64_t key, int n, const CondPmf& kernel,
                               const std::vector<std::span<const int>>& cond) {
    // kernel's given axes line up with cond (per-position conditioning)
    Rng rng(key);
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::size_t row = 0;
        for (std::size_t d = 0; d < cond.size(); ++d)
            row = row * static_cast<std::size_t>(kernel.given()[d].size) +
                  static_cast<std::size_t>(cond[d][static_cast<std::size_t>(i)]);
        out[static_cast<std::size_t>(i)] = rng.sample(kernel.row(row));
    }
    return out;
}

std::uint64_t absorb_seq(Absorber a, std::span<const int> s) {
    for (int v : s) a.absorb(static_cast<std::uint64_t>(v));
    return a.digest();
}

}  // namespace

std::uint64_t pow2_count(double n_times_rate) {
    if (n_times_rate < 0) throw ValidationError("rates must be nonnegative");
    double v = std::exp2(n_times_rate);
    if (v > static_cast<double>(kMaxBins))
        throw BudgetError("2^" + std::to_string(n_times_rate) + " exceeds the index budget 2^48");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(v - 1e-9)));
}

Typicality::Typicality(const JointPmf& joint, const std::vector<std::string>& axis_order) {
    auto m = joint.marginalize(axis_order);
    std::vector<std::size_t> sizes;
    for (const auto& name : axis_order)
        sizes.push_back(static_cast<std::size_t>(m.axis(name).size));
    strides_.assign(axis_order.size(), 1);
    for (std::size_t d = axis_order.size() - 1; d-- > 0;)
        strides_[d] = strides_[d + 1] * sizes[d + 1];
    std::size_t cells = strides_[0] * sizes[0];

    pmf_.assign(cells, 0.0);
    std::vector<int> idx(m.axes().size(), 0);
    std::vector<std::size_t> pos;
    for (const auto& name : axis_order) pos.push_back(static_cast<std::size_t>(m.axis_index(name)));
    const auto& probs = m.probs();
    for (std::size_t flat = 0; flat < probs.size(); ++flat) {
        std::size_t cell = 0;
        for (std::size_t d = 0; d < pos.size(); ++d)
            cell += strides_[d] * static_cast<std::size_t>(idx[pos[d]]);
        pmf_[cell] += probs[flat];
        for (int d = static_cast<int>(m.axes().size()) - 1; d >= 0; --d) {
            if (++idx[static_cast<std::size_t>(d)] < m.axes()[static_cast<std::size_t>(d)].size) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
    }
}

bool Typicality::check(std::span<const std::vector<int>* const> seqs, double eps) const {
    const std::size_t n = seqs.empty() ? 0 : seqs[0]->size();
    std::vector<std::uint32_t> counts(pmf_.size(), 0);  // local: trials run in parallel
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t cell = 0;
        for (std::size_t d = 0; d < seqs.size(); ++d)
            cell += strides_[d] * static_cast<std::size_t>((*seqs[d])[i]);
        ++counts[cell];
    }
    const double dn = static_cast<double>(n);
    for (std::size_t c = 0; c < pmf_.size(); ++c) {
        if (pmf_[c] <= 0.0) {
            if (counts[c] != 0) return false;
            continue;
        }
        if (std::abs(static_cast<double>(counts[c]) / dn - pmf_[c]) >= eps * pmf_[c]) return false;
    }
    return true;
}

std::uint64_t BinMap::bin(std::span<const int> z) const {
    Absorber a(key);
    for (int v : z) a.absorb(static_cast<std::uint64_t>(v));
    return a.digest() % nbins;
}

SchemeContext::SchemeContext(const SdRcSpec& spec_in, const SdRcDecision& d_in)
    : spec(spec_in),
      d(d_in),
      joint(assemble_sdrc(spec_in, d_in)),
      xr_given_u(d_in.xr_given_u),
      z_given_xr_u_s(conditional_from_joint(joint, {spec_in.Z.name},
                                            {spec_in.Xr.name, d_in.U.name, spec_in.S.name})),
      x_given_z_xr_u_s(conditional_from_joint(
          joint, {spec_in.X.name},
          {spec_in.Z.name, spec_in.Xr.name, d_in.U.name, spec_in.S.name})),
      t_su(joint, {spec_in.S.name, d_in.U.name}),
      t_su_xr_y(joint, {spec_in.S.name, d_in.U.name, spec_in.Xr.name, spec_in.Y.name}),
      t_full(joint, {spec_in.S.name, d_in.U.name, spec_in.Xr.name, spec_in.X.name, spec_in.Z.name,
                     spec_in.Y.name}) {
    p_u = joint.marginalize({d.U.name}).probs();
}

BlockCodebook::BlockCodebook(const SchemeContext& ctx, int n, const BlockRates& rates, int block,
                             std::uint64_t seed)
    : ctx_(&ctx), n_(n), rates_(rates), block_(block), seed_(seed) {
    if (n < 1 || n > 64) throw ValidationError("blocklength must be in [1, 64]");
    sizes_.Np = pow2_count(n * rates.Rp);
    sizes_.Npp = pow2_count(n * rates.Rpp);
    sizes_.Nt = pow2_count(n * rates.Rtilde);
    sizes_.Nb = pow2_count(n * rates.Rb);
    if (sizes_.Np * sizes_.Nt > (1ull << 20) || sizes_.Npp > (1ull << 16))
        throw BudgetError("codebook scan budget exceeded: keep 2^{n(R'+Rt)} <= 2^20 and 2^{nR''} <= 2^16");
    bins_.key = key_hash({seed_, 0x62696e6dull, static_cast<std::uint64_t>(block_)});
    bins_.nbins = sizes_.Nb;
}

BlockCodebook BlockCodebook::next() const {
    return BlockCodebook(*ctx_, n_, rates_, block_ + 1, seed_);
}

std::vector<int> BlockCodebook::u_codeword(std::uint64_t l) const {
    std::uint64_t key = key_hash({seed_, 0x75ull, static_cast<std::uint64_t>(block_), l});
    Rng rng(key);
    std::vector<int> out(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = rng.sample(ctx_->p_u);
    return out;
}

std::vector<int> BlockCodebook::xr_codeword(const std::vector<int>& u) const {
    Absorber a(key_hash({seed_, 0x7872ull, static_cast<std::uint64_t>(block_)}));
    std::uint64_t key = absorb_seq(a, u);
    return draw_codeword(key, n_, ctx_->xr_given_u, {u});
}

std::vector<int> BlockCodebook::z_codeword(std::uint64_t mp, std::uint64_t k,
                                           const std::vector<int>& xr, const std::vector<int>& u,
                                           const std::vector<int>& s) const {
    Absorber a(key_hash({seed_, 0x7aull, static_cast<std::uint64_t>(block_), mp, k}));
    a.absorb(absorb_seq(Absorber(1), xr));
    a.absorb(absorb_seq(Absorber(2), u));
    a.absorb(absorb_seq(Absorber(3), s));
    return draw_codeword(a.digest(), n_, ctx_->z_given_xr_u_s, {xr, u, s});
}

std::vector<int> BlockCodebook::x_codeword(std::uint64_t mpp, const std::vector<int>& z,
                                           const std::vector<int>& xr, const std::vector<int>& u,
                                           const std::vector<int>& s) const {
    Absorber a(key_hash({seed_, 0x78ull, static_cast<std::uint64_t>(block_), mpp}));
    a.absorb(absorb_seq(Absorber(1), z));
    a.absorb(absorb_seq(Absorber(2), xr));
    a.absorb(absorb_seq(Absorber(3), u));
    a.absorb(absorb_seq(Absorber(4), s));
    return draw_codeword(a.digest(), n_, ctx_->x_given_z_xr_u_s, {z, xr, u, s});
}

std::uint64_t BlockCodebook::bin(std::span<const int> z) const { return bins_.bin(z); }

std::uint64_t BlockCodebook::fallback_k(std::uint64_t mp, std::uint64_t l_prev) const {
    return key_hash({seed_, 0x6b6662ull, static_cast<std::uint64_t>(block_), mp, l_prev}) % sizes_.Nt;
}

EncodeResult encode_block(const BlockCodebook& cb, std::uint64_t mp, std::uint64_t mpp,
                          std::uint64_t l_prev, const std::vector<int>& s_cur,
                          const std::vector<int>& s_next, double eps) {
    const auto& ctx = cb.ctx();
    auto u = cb.u_codeword(l_prev);
    auto xr = cb.xr_codeword(u);
    BlockCodebook nb = cb.next();

    EncodeResult res;
    for (std::uint64_t k = 0; k < cb.sizes().Nt; ++k) {
        auto z = cb.z_codeword(mp, k, xr, u, s_cur);
        std::uint64_t l = cb.bin(z);
        auto u_next = nb.u_codeword(l);
        const std::vector<int>* args[] = {&s_next, &u_next};
        if (ctx.t_su.check(args, eps)) {
            res.covering_ok = true;
            res.k = k;
            res.l_new = l;
            res.z = std::move(z);
            res.x = cb.x_codeword(mpp, res.z, xr, u, s_cur);
            return res;
        }
    }
    res.covering_ok = false;
    res.k = cb.fallback_k(mp, l_prev);
    res.z = cb.z_codeword(mp, res.k, xr, u, s_cur);
    res.l_new = cb.bin(res.z);
    res.x = cb.x_codeword(mpp, res.z, xr, u, s_cur);
    return res;
}

std::vector<int> relay_step(const BlockCodebook& cb, std::uint64_t l_prev) {
    auto u = cb.u_codeword(l_prev);
    return cb.xr_codeword(u);
}

std::uint64_t relay_update(const BlockCodebook& cb, std::span<const int> z_observed) {
    return cb.bin(z_observed);
}

DecodeResult sliding_window_decode(const std::vector<BlockCodebook>& cbs,
                                   const std::vector<std::vector<int>>& y_blocks,
                                   const std::vector<std::vector<int>>& s_blocks, double eps) {
    const std::size_t B = cbs.size();
    if (B < 3) throw ValidationError("decoding needs at least 3 blocks");
    const auto& ctx = cbs[0].ctx();

    DecodeResult out;

    // block 1 carries fixed messages; imitate the encoder to recover l^(1)
    auto first = encode_block(cbs[0], 0, 0, 0, s_blocks[0], s_blocks[1], eps);
    out.l1 = first.l_new;

    std::uint64_t l_prev = out.l1;
    for (std::size_t b = 1; b + 1 < B; ++b) {  // decode blocks 2..B-1 (0-based b)
        const auto& cb = cbs[b];
        BlockCodebook nb = cb.next();
        auto u = cb.u_codeword(l_prev);
        auto xr = cb.xr_codeword(u);

        const std::uint64_t Np = cb.sizes().Np;
        std::vector<std::uint64_t> khat(Np), lhat(Np);
        std::vector<std::vector<int>> zhat(Np);
        for (std::uint64_t mp = 0; mp < Np; ++mp) {
            auto r = encode_block(cb, mp, 0, l_prev, s_blocks[b], s_blocks[b + 1], eps);
            khat[mp] = r.k;
            lhat[mp] = r.l_new;
            zhat[mp] = std::move(r.z);
        }

        DecodedBlock dec;
        std::uint64_t found = 0;
        for (std::uint64_t mp = 0; mp < Np; ++mp) {
            auto u_next = nb.u_codeword(lhat[mp]);
            auto xr_next = nb.xr_codeword(u_next);
            const std::vector<int>* args_next[] = {&s_blocks[b + 1], &u_next, &xr_next,
                                                   &y_blocks[b + 1]};
            bool next_ok = ctx.t_su_xr_y.check(args_next, eps);
            if (!next_ok) continue;
            for (std::uint64_t mpp = 0; mpp < cb.sizes().Npp; ++mpp) {
                auto x = cb.x_codeword(mpp, zhat[mp], xr, u, s_blocks[b]);
                const std::vector<int>* args_cur[] = {&s_blocks[b], &u,        &xr,
                                                      &x,           &zhat[mp], &y_blocks[b]};
                if (!ctx.t_full.check(args_cur, eps)) continue;
                ++found;
                if (found == 1) {
                    dec.mp = mp;
                    dec.mpp = mpp;
                }
            }
        }
        dec.any_candidate = found > 0;
        dec.unique = found == 1;
        dec.l_next = lhat[dec.mp];
        l_prev = dec.l_next;
        out.blocks.push_back(dec);
        out.lhat.push_back(std::move(lhat));
    }
    return out;
}

SimReport simulate_sdrc(const SdRcSpec& spec, const SdRcDecision& d, int n, int B,
                        const BlockRates& rates, double eps, int trials, std::uint64_t seed,
                        int threads) {
    if (B < 3) throw ValidationError("simulate_sdrc: B must be at least 3");
    if (trials < 0) throw ValidationError("simulate_sdrc: negative trial count");
    SchemeContext ctx(spec, d);

    SimReport rep;
    rep.trials = trials;
    rep.n = n;
    rep.B = B;
    rep.rates = rates;
    rep.eps = eps;
    rep.seed = seed;
    rep.errors_per_block.assign(static_cast<std::size_t>(B - 2), 0);
    if (trials == 0) {
        rep.rate_defined = false;  // error rate undefined on an empty run
        return rep;
    }

    struct TrialStats {
        std::vector<std::uint64_t> errors_per_block;
        std::uint64_t covering = 0, bin_conf = 0, typ_miss = 0, wrong = 0, relay_mismatch = 0;
    };
    std::vector<TrialStats> stats(static_cast<std::size_t>(trials));

    auto run_trial = [&](int t) {
        TrialStats st;
        st.errors_per_block.assign(static_cast<std::size_t>(B - 2), 0);
        std::uint64_t cb_seed = key_hash({seed, 0x747269616cull, static_cast<std::uint64_t>(t)});
        Rng rng(key_hash({seed, 0x6368616eull, static_cast<std::uint64_t>(t)}));

        std::vector<BlockCodebook> cbs;
        cbs.reserve(static_cast<std::size_t>(B));
        for (int b = 0; b < B; ++b) cbs.emplace_back(ctx, n, rates, b, cb_seed);

        // states and messages
        std::vector<std::vector<int>> s(static_cast<std::size_t>(B));
        for (auto& blk : s) {
            blk.resize(static_cast<std::size_t>(n));
            for (auto& v : blk) v = rng.sample(spec.p_state);
        }
        std::vector<std::uint64_t> mp(static_cast<std::size_t>(B), 0), mpp(static_cast<std::size_t>(B), 0);
        for (int b = 1; b + 1 < B; ++b) {
            mp[static_cast<std::size_t>(b)] = rng.below(cbs[0].sizes().Np);
            mpp[static_cast<std::size_t>(b)] = rng.below(cbs[0].sizes().Npp);
        }

        // encoder + relay chain
        std::vector<std::vector<int>> x(static_cast<std::size_t>(B)), z(static_cast<std::size_t>(B)),
            xr(static_cast<std::size_t>(B)), y(static_cast<std::size_t>(B));
        std::vector<std::uint64_t> l_true(static_cast<std::size_t>(B), 0);
        std::uint64_t l_cur = 0;
        for (int b = 0; b < B; ++b) {
            auto bi = static_cast<std::size_t>(b);
            xr[bi] = relay_step(cbs[bi], l_cur);
            if (b + 1 < B) {
                auto res = encode_block(cbs[bi], mp[bi], mpp[bi], l_cur, s[bi],
                                        s[static_cast<std::size_t>(b + 1)], eps);
                if (!res.covering_ok) ++st.covering;
                z[bi] = std::move(res.z);
                x[bi] = std::move(res.x);
                std::uint64_t l_relay = relay_update(cbs[bi], z[bi]);
                if (l_relay != res.l_new) ++st.relay_mismatch;
                l_cur = res.l_new;
            } else {
                auto u = cbs[bi].u_codeword(l_cur);
                z[bi] = cbs[bi].z_codeword(0, 0, xr[bi], u, s[bi]);
                x[bi] = cbs[bi].x_codeword(0, z[bi], xr[bi], u, s[bi]);
            }
            l_true[bi] = l_cur;

            // memoryless channel
            y[bi].resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                auto ii = static_cast<std::size_t>(i);
                int gidx[4] = {x[bi][ii], xr[bi][ii], z[bi][ii], s[bi][ii]};
                std::size_t row = 0;
                const auto& given = spec.out.given();
                for (std::size_t dd = 0; dd < 4; ++dd)
                    row = row * static_cast<std::size_t>(given[dd].size) +
                          static_cast<std::size_t>(gidx[dd]);
                y[bi][ii] = rng.sample(spec.out.row(row));
            }
        }

        auto dec = sliding_window_decode(cbs, y, s, eps);
        for (int b = 1; b + 1 < B; ++b) {
            auto bi = static_cast<std::size_t>(b);
            const auto& blk = dec.blocks[static_cast<std::size_t>(b - 1)];
            bool err = !blk.unique || blk.mp != mp[bi] || blk.mpp != mpp[bi];
            if (err) ++st.errors_per_block[static_cast<std::size_t>(b - 1)];
            if (!blk.any_candidate) ++st.typ_miss;
            if (blk.any_candidate &&
                (!blk.unique || blk.mp != mp[bi] || blk.mpp != mpp[bi]))
                ++st.wrong;
            const auto& lh = dec.lhat[static_cast<std::size_t>(b - 1)];
            for (std::uint64_t m = 0; m < lh.size(); ++m)
                if (m != mp[bi] && lh[m] == l_true[bi]) {
                    ++st.bin_conf;
                    break;
                }
        }
        stats[static_cast<std::size_t>(t)] = std::move(st);
    };

    int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        for (int t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        int chunk = (trials + nthreads - 1) / nthreads;
        for (int th = 0; th < nthreads; ++th) {
            int lo = th * chunk, hi = std::min(trials, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (int t = lo; t < hi; ++t) run_trial(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& st : stats) {
        for (std::size_t b = 0; b < st.errors_per_block.size(); ++b) {
            rep.errors_per_block[b] += st.errors_per_block[b];
            rep.total_errors += st.errors_per_block[b];
        }
        rep.covering_failures += st.covering;
        rep.bin_confusions += st.bin_conf;
        rep.typicality_miss += st.typ_miss;
        rep.wrong_candidate += st.wrong;
        rep.relay_bin_mismatch += st.relay_mismatch;
    }
    rep.decoded_blocks = static_cast<std::uint64_t>(trials) * static_cast<std::uint64_t>(B - 2);
    rep.rate_defined = rep.decoded_blocks > 0;
    rep.block_error_rate =
        rep.rate_defined ? static_cast<double>(rep.total_errors) / static_cast<double>(rep.decoded_blocks)
                         : 0.0;
    return rep;
}

CoveringReport covering_experiment(const CondPmf& z_given_v, const std::vector<double>& p_v, int n,
                                   double r, double rb, double delta, int trials,
                                   std::uint64_t seed, int threads) {
    if (n < 1 || n > 64) throw ValidationError("covering_experiment: n must be in [1, 64]");
    if (r <= 0 || rb <= 0) throw ValidationError("covering_experiment: rates must be positive");
    if (trials < 0) throw ValidationError("covering_experiment: negative trial count");
    if (z_given_v.given().size() != 1)
        throw ValidationError("covering_experiment: kernel must be p_{Z|V}");
    if (p_v.size() != static_cast<std::size_t>(z_given_v.given()[0].size))
        throw ValidationError("covering_experiment: p_V size mismatch");

    double k_count = std::exp2(n * r);
    if (k_count > static_cast<double>(kMaxSequences))
        throw BudgetError("covering budget exceeded: 2^{nR} = " + std::to_string(k_count) +
                          " sequences; required budget <= 2^24");
    std::uint64_t K = pow2_count(n * r);
    std::uint64_t M = pow2_count(n * rb);
    if (M > kMaxBins) throw BudgetError("covering budget exceeded: too many bins");

    CoveringReport rep;
    rep.trials = trials;
    rep.n = n;
    rep.r = r;
    rep.rb = rb;
    rep.delta = delta;
    rep.seed = seed;
    rep.threshold = std::exp2(n * (r - delta));
    rep.distinct_bins.assign(static_cast<std::size_t>(trials), 0);
    if (trials == 0) {
        rep.rate_defined = false;
        return rep;
    }

    auto run_trial = [&](int t) {
        Rng rng(key_hash({seed, 0x636f76ull, static_cast<std::uint64_t>(t)}));
        std::vector<int> v(static_cast<std::size_t>(n));
        for (auto& s : v) s = rng.sample(p_v);
        BinMap bins{key_hash({seed, 0x62696eull, static_cast<std::uint64_t>(t)}), M};

        std::unordered_set<std::uint64_t> seen;
        seen.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(K, 1u << 20)));
        std::vector<int> z(static_cast<std::size_t>(n));
        for (std::uint64_t k = 0; k < K; ++k) {
            for (int i = 0; i < n; ++i)
                z[static_cast<std::size_t>(i)] =
                    rng.sample(z_given_v.row(static_cast<std::size_t>(v[static_cast<std::size_t>(i)])));
            seen.insert(bins.bin(z));
        }
        rep.distinct_bins[static_cast<std::size_t>(t)] = seen.size();
    };

    int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        for (int t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        int chunk = (trials + nthreads - 1) / nthreads;
        for (int th = 0; th < nthreads; ++th) {
            int lo = th * chunk, hi = std::min(trials, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (int t = lo; t < hi; ++t) run_trial(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::uint64_t pass = 0;
    for (auto c : rep.distinct_bins)
        if (static_cast<double>(c) >= rep.threshold) ++pass;
    rep.pass_fraction = static_cast<double>(pass) / static_cast<double>(trials);
    rep.rate_defined = true;

    auto sorted = rep.distinct_bins;
    std::sort(sorted.begin(), sorted.end());
    auto q = [&](double f) {
        return sorted[static_cast<std::size_t>(f * static_cast<double>(sorted.size() - 1))];
    };
    rep.q_min = sorted.front();
    rep.q25 = q(0.25);
    rep.q50 = q(0.5);
    rep.q75 = q(0.75);
    rep.q_max = sorted.back();
    return rep;
}

}  // namespace binfwd::sim
