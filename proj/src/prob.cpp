#include "binfwd/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace binfwd {

namespace {

constexpr double kNormTol = 1e-12;

void check_axes(const std::vector<Alphabet>& axes) {
    std::set<std::string> seen;
    for (const auto& a : axes) {
        if (a.size < 1) throw ValidationError("alphabet " + a.name + " must have size >= 1");
        if (!seen.insert(a.name).second)
            throw ValidationError("duplicate axis name: " + a.name);
    }
}

std::vector<std::size_t> row_major_strides(const std::vector<Alphabet>& axes) {
    std::vector<std::size_t> s(axes.size(), 1);
    for (int i = static_cast<int>(axes.size()) - 2; i >= 0; --i)
        s[i] = s[i + 1] * static_cast<std::size_t>(axes[i + 1].size);
    return s;
}

std::size_t cell_count(const std::vector<Alphabet>& axes) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.size);
    return n;
}

double plogp_sum(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

JointPmf::JointPmf(std::vector<Alphabet> axes, std::vector<double> probs) {
    check_axes(axes);
    if (cell_count(axes) != probs.size())
        throw ValidationError("probability tensor size does not match alphabet sizes");

    // permute to canonical (name-sorted) axis order
    std::vector<int> perm(axes.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(),
              [&](int i, int j) { return axes[i].name < axes[j].name; });
    bool sorted = std::is_sorted(perm.begin(), perm.end());

    axes_.reserve(axes.size());
    for (int i : perm) axes_.push_back(axes[i]);
    strides_ = row_major_strides(axes_);

    if (sorted) {
        p_ = std::move(probs);
    } else {
        p_.assign(probs.size(), 0.0);
        std::vector<int> idx(axes.size(), 0);
        for (std::size_t flat = 0; flat < probs.size(); ++flat) {
            std::size_t out = 0;
            for (std::size_t d = 0; d < perm.size(); ++d) out += strides_[d] * idx[perm[d]];
            p_[out] = probs[flat];
            for (int d = static_cast<int>(axes.size()) - 1; d >= 0; --d) {
                if (++idx[d] < axes[d].size) break;
                idx[d] = 0;
            }
        }
    }

    double sum = 0.0;
    for (double& v : p_) {
        if (v < 0.0) {
            if (v < -1e-12) throw ValidationError("negative probability entry");
            v = 0.0;
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kNormTol)
        throw ValidationError("joint distribution does not sum to 1 (sum=" + std::to_string(sum) + ")");
    if (sum != 1.0) {
        for (double& v : p_) v /= sum;
    }
}

bool JointPmf::has_axis(std::string_view name) const {
    for (const auto& a : axes_)
        if (a.name == name) return true;
    return false;
}

int JointPmf::axis_index(std::string_view name) const {
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (axes_[i].name == name) return static_cast<int>(i);
    throw AxisNotFound(std::string(name));
}

const Alphabet& JointPmf::axis(std::string_view name) const {
    return axes_[static_cast<std::size_t>(axis_index(name))];
}

double JointPmf::at(std::span<const int> index) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) flat += strides_[d] * static_cast<std::size_t>(index[d]);
    return p_[flat];
}

double JointPmf::total() const {
    return std::accumulate(p_.begin(), p_.end(), 0.0);
}

JointPmf JointPmf::marginalize(const std::vector<std::string>& keep) const {
    if (keep.empty()) throw ValidationError("marginalize: keep set must be nonempty");
    std::vector<Alphabet> out_axes;
    std::vector<int> kept_dims;
    for (const auto& name : keep) {
        int d = axis_index(name);
        out_axes.push_back(axes_[static_cast<std::size_t>(d)]);
        kept_dims.push_back(d);
    }
    std::sort(kept_dims.begin(), kept_dims.end());
    if (std::adjacent_find(kept_dims.begin(), kept_dims.end()) != kept_dims.end())
        throw ValidationError("marginalize: duplicate axis in keep set");

    std::sort(out_axes.begin(), out_axes.end(),
              [](const Alphabet& a, const Alphabet& b) { return a.name < b.name; });
    auto out_strides = row_major_strides(out_axes);
    std::vector<std::size_t> scatter(axes_.size(), 0);  // stride in output per input dim
    for (std::size_t i = 0; i < out_axes.size(); ++i)
        scatter[static_cast<std::size_t>(axis_index(out_axes[i].name))] = out_strides[i];
    std::vector<bool> kept(axes_.size(), false);
    for (int d : kept_dims) kept[static_cast<std::size_t>(d)] = true;

    std::vector<double> out(cell_count(out_axes), 0.0);
    std::vector<int> idx(axes_.size(), 0);
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
        std::size_t o = 0;
        for (std::size_t d = 0; d < axes_.size(); ++d)
            if (kept[d]) o += scatter[d] * static_cast<std::size_t>(idx[d]);
        out[o] += p_[flat];
        for (int d = static_cast<int>(axes_.size()) - 1; d >= 0; --d) {
            if (++idx[static_cast<std::size_t>(d)] < axes_[static_cast<std::size_t>(d)].size) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
    }
    return JointPmf(std::move(out_axes), std::move(out));
}

JointPmf JointPmf::condition(const std::vector<std::pair<std::string, int>>& on) const {
    if (on.empty()) throw ValidationError("condition: empty assignment");
    std::vector<int> fixed_dim;
    std::vector<int> fixed_val;
    for (const auto& [name, v] : on) {
        int d = axis_index(name);
        if (v < 0 || v >= axes_[static_cast<std::size_t>(d)].size)
            throw ValidationError("condition: letter out of range for axis " + name);
        fixed_dim.push_back(d);
        fixed_val.push_back(v);
    }
    if (fixed_dim.size() >= axes_.size())
        throw ValidationError("condition: at least one axis must remain free");

    std::vector<Alphabet> out_axes;
    std::vector<int> free_dims;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        if (std::find(fixed_dim.begin(), fixed_dim.end(), static_cast<int>(d)) == fixed_dim.end()) {
            out_axes.push_back(axes_[d]);
            free_dims.push_back(static_cast<int>(d));
        }
    }
    std::vector<double> out(cell_count(out_axes), 0.0);
    auto out_strides = row_major_strides(out_axes);

    std::vector<int> idx(axes_.size(), 0);
    for (std::size_t i = 0; i < fixed_dim.size(); ++i)
        idx[static_cast<std::size_t>(fixed_dim[i])] = fixed_val[i];

    double mass = 0.0;
    std::size_t free_cells = out.size();
    for (std::size_t c = 0; c < free_cells; ++c) {
        std::size_t rem = c;
        for (std::size_t i = 0; i < free_dims.size(); ++i) {
            idx[static_cast<std::size_t>(free_dims[i])] = static_cast<int>(rem / out_strides[i]);
            rem %= out_strides[i];
        }
        double v = at(idx);
        out[c] = v;
        mass += v;
    }
    if (mass <= 0.0) throw ValidationError("condition: zero-probability conditioning event");
    for (double& v : out) v /= mass;
    return JointPmf(std::move(out_axes), std::move(out));
}

CondPmf::CondPmf(std::vector<Alphabet> targets, std::vector<Alphabet> given, std::vector<double> probs)
    : targets_(std::move(targets)), given_(std::move(given)), p_(std::move(probs)) {
    if (targets_.empty()) throw ValidationError("conditional pmf needs at least one target axis");
    std::vector<Alphabet> all = given_;
    all.insert(all.end(), targets_.begin(), targets_.end());
    check_axes(all);
    for (const auto& g : given_) rows_ *= static_cast<std::size_t>(g.size);
    for (const auto& t : targets_) cols_ *= static_cast<std::size_t>(t.size);
    if (p_.size() != rows_ * cols_)
        throw ValidationError("conditional tensor size does not match alphabet sizes");
    for (std::size_t r = 0; r < rows_; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) {
            double v = p_[r * cols_ + c];
            if (v < -1e-12) throw ValidationError("negative conditional probability entry");
            if (v < 0.0) p_[r * cols_ + c] = 0.0;
            sum += std::max(v, 0.0);
        }
        if (std::abs(sum - 1.0) > kNormTol)
            throw ValidationError("conditional slice " + std::to_string(r) +
                                  " sums to " + std::to_string(sum));
    }
}

CondPmf CondPmf::marginal(std::vector<Alphabet> targets, std::vector<double> probs) {
    return CondPmf(std::move(targets), {}, std::move(probs));
}

std::span<const double> CondPmf::row(std::size_t given_flat) const {
    return {p_.data() + given_flat * cols_, cols_};
}

double CondPmf::at(std::span<const int> given_idx, std::span<const int> target_idx) const {
    std::size_t r = 0;
    for (std::size_t d = 0; d < given_.size(); ++d)
        r = r * static_cast<std::size_t>(given_[d].size) + static_cast<std::size_t>(given_idx[d]);
    std::size_t c = 0;
    for (std::size_t d = 0; d < targets_.size(); ++d)
        c = c * static_cast<std::size_t>(targets_[d].size) + static_cast<std::size_t>(target_idx[d]);
    return p_[r * cols_ + c];
}

bool CondPmf::is_deterministic() const {
    for (double v : p_)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

double binary_entropy(double a) {
    if (a < 0.0 || a > 1.0) throw ValidationError("binary_entropy: argument outside [0,1]");
    if (a == 0.0 || a == 1.0) return 0.0;
    return -a * std::log2(a) - (1.0 - a) * std::log2(1.0 - a);
}

double entropy(const JointPmf& joint, const std::vector<std::string>& targets,
               const std::vector<std::string>& given) {
    if (targets.empty()) throw ValidationError("entropy: empty target set");
    for (const auto& t : targets)
        if (std::find(given.begin(), given.end(), t) != given.end())
            throw ValidationError("entropy: targets and given must be disjoint");
    double h_tg = plogp_sum(joint.marginalize(concat(targets, given)).probs());
    double h_g = given.empty() ? 0.0 : plogp_sum(joint.marginalize(given).probs());
    double h = h_tg - h_g;
    return h < 0.0 ? 0.0 : h;
}

double mutual_information(const JointPmf& joint, const std::vector<std::string>& a,
                          const std::vector<std::string>& b, const std::vector<std::string>& given) {
    for (const auto& x : a)
        if (std::find(b.begin(), b.end(), x) != b.end())
            throw ValidationError("mutual_information: argument sets must be disjoint");
    double i = entropy(joint, a, given) - entropy(joint, a, concat(b, given));
    if (i < 0.0 && i > -1e-10) return 0.0;
    return i;
}

JointPmf compose(const std::vector<CondPmf>& factors) {
    if (factors.empty()) throw ValidationError("compose: no factors");

    std::vector<Alphabet> produced;
    for (const auto& f : factors) {
        for (const auto& g : f.given()) {
            auto it = std::find_if(produced.begin(), produced.end(),
                                   [&](const Alphabet& a) { return a.name == g.name; });
            if (it == produced.end())
                throw ValidationError("compose: conditioning axis " + g.name +
                                      " is not produced by an earlier factor");
            if (it->size != g.size)
                throw ValidationError("compose: size mismatch on axis " + g.name);
        }
        for (const auto& t : f.targets()) {
            if (std::any_of(produced.begin(), produced.end(),
                            [&](const Alphabet& a) { return a.name == t.name; }))
                throw ValidationError("compose: axis " + t.name + " produced twice");
            produced.push_back(t);
        }
    }

    std::vector<Alphabet> out_axes = produced;
    std::sort(out_axes.begin(), out_axes.end(),
              [](const Alphabet& a, const Alphabet& b) { return a.name < b.name; });
    auto pos_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < out_axes.size(); ++i)
            if (out_axes[i].name == name) return i;
        throw AxisNotFound(name);
    };

    // per factor, the output-axis position of each of its (given..., targets...) axes
    struct FactorMap {
        const CondPmf* f;
        std::vector<std::size_t> given_pos, target_pos;
    };
    std::vector<FactorMap> maps;
    for (const auto& f : factors) {
        FactorMap m{&f, {}, {}};
        for (const auto& g : f.given()) m.given_pos.push_back(pos_of(g.name));
        for (const auto& t : f.targets()) m.target_pos.push_back(pos_of(t.name));
        maps.push_back(std::move(m));
    }

    std::vector<double> out(cell_count(out_axes), 0.0);
    std::vector<int> idx(out_axes.size(), 0);
    std::vector<int> gi, ti;
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        double v = 1.0;
        for (const auto& m : maps) {
            gi.clear();
            ti.clear();
            for (auto p : m.given_pos) gi.push_back(idx[p]);
            for (auto p : m.target_pos) ti.push_back(idx[p]);
            v *= m.f->at(gi, ti);
            if (v == 0.0) break;
        }
        out[flat] = v;
        for (int d = static_cast<int>(out_axes.size()) - 1; d >= 0; --d) {
            if (++idx[static_cast<std::size_t>(d)] < out_axes[static_cast<std::size_t>(d)].size) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
    }
    return JointPmf(std::move(out_axes), std::move(out));
}

CondPmf conditional_from_joint(const JointPmf& joint, const std::vector<std::string>& targets,
                               const std::vector<std::string>& given) {
    auto m = joint.marginalize(concat(targets, given));
    std::vector<Alphabet> gax, tax;
    for (const auto& g : given) gax.push_back(m.axis(g));
    for (const auto& t : targets) tax.push_back(m.axis(t));

    std::size_t rows = 1, cols = 1;
    for (const auto& g : gax) rows *= static_cast<std::size_t>(g.size);
    for (const auto& t : tax) cols *= static_cast<std::size_t>(t.size);

    std::vector<double> k(rows * cols, 0.0);
    std::vector<int> full(m.axes().size(), 0);
    std::vector<int> gpos, tpos;
    for (const auto& g : gax) gpos.push_back(m.axis_index(g.name));
    for (const auto& t : tax) tpos.push_back(m.axis_index(t.name));

    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t rem = r;
        for (int d = static_cast<int>(gax.size()) - 1; d >= 0; --d) {
            full[static_cast<std::size_t>(gpos[static_cast<std::size_t>(d)])] =
                static_cast<int>(rem % static_cast<std::size_t>(gax[static_cast<std::size_t>(d)].size));
            rem /= static_cast<std::size_t>(gax[static_cast<std::size_t>(d)].size);
        }
        double mass = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            std::size_t crem = c;
            for (int d = static_cast<int>(tax.size()) - 1; d >= 0; --d) {
                full[static_cast<std::size_t>(tpos[static_cast<std::size_t>(d)])] =
                    static_cast<int>(crem % static_cast<std::size_t>(tax[static_cast<std::size_t>(d)].size));
                crem /= static_cast<std::size_t>(tax[static_cast<std::size_t>(d)].size);
            }
            double v = m.at(full);
            k[r * cols + c] = v;
            mass += v;
        }
        if (mass > 0.0) {
            for (std::size_t c = 0; c < cols; ++c) k[r * cols + c] /= mass;
        } else {
            for (std::size_t c = 0; c < cols; ++c) k[r * cols + c] = 1.0 / static_cast<double>(cols);
        }
    }
    return CondPmf(tax, gax, std::move(k));
}

}  // namespace binfwd
