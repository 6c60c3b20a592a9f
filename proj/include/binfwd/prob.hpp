#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "binfwd/errors.hpp"

namespace binfwd {

struct Alphabet {
    std::string name;
    int size = 0;
    bool operator==(const Alphabet&) const = default;
};

// Dense joint distribution over named finite alphabets. Axes are kept sorted
// by name so that structurally equal joints compare equal; the tensor is
// row-major over the sorted axis order.
class JointPmf {
  public:
    JointPmf(std::vector<Alphabet> axes, std::vector<double> probs);

    const std::vector<Alphabet>& axes() const { return axes_; }
    const std::vector<double>& probs() const { return p_; }
    std::size_t cells() const { return p_.size(); }

    bool has_axis(std::string_view name) const;
    int axis_index(std::string_view name) const;  // throws AxisNotFound
    const Alphabet& axis(std::string_view name) const;

    double at(std::span<const int> index) const;
    double total() const;

    JointPmf marginalize(const std::vector<std::string>& keep) const;
    JointPmf condition(const std::vector<std::pair<std::string, int>>& on) const;

  private:
    std::vector<Alphabet> axes_;
    std::vector<std::size_t> strides_;
    std::vector<double> p_;
};

// Conditional kernel p_{targets | given}. The tensor is row-major over
// (given..., targets...) in the declared order; every conditional slice sums
// to one.
class CondPmf {
  public:
    // placeholder kernel over a singleton axis; overwritten during two-phase
    // construction of spec/decision structs
    CondPmf() : targets_{Alphabet{"_", 1}}, p_{1.0} {}

    CondPmf(std::vector<Alphabet> targets, std::vector<Alphabet> given, std::vector<double> probs);

    // unconditional factor (a joint used as the head of a chain)
    static CondPmf marginal(std::vector<Alphabet> targets, std::vector<double> probs);
    // 1_{target | given} from a total map
    template <typename F>
    static CondPmf deterministic(Alphabet target, std::vector<Alphabet> given, F&& map);

    const std::vector<Alphabet>& targets() const { return targets_; }
    const std::vector<Alphabet>& given() const { return given_; }
    const std::vector<double>& probs() const { return p_; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> row(std::size_t given_flat) const;
    double at(std::span<const int> given_idx, std::span<const int> target_idx) const;
    bool is_deterministic() const;

  private:
    std::vector<Alphabet> targets_;
    std::vector<Alphabet> given_;
    std::vector<double> p_;
    std::size_t rows_ = 1, cols_ = 1;
};

// -a log2 a - (1-a) log2 (1-a); endpoints evaluate to 0
double binary_entropy(double a);

// H(targets | given) in bits, evaluated on the joint's marginal
double entropy(const JointPmf& joint, const std::vector<std::string>& targets,
               const std::vector<std::string>& given = {});

// I(A ; B | given) in bits; values within 1e-10 below zero are clamped to 0
double mutual_information(const JointPmf& joint, const std::vector<std::string>& a,
                          const std::vector<std::string>& b,
                          const std::vector<std::string>& given = {});

// Chain a list of factors into the joint they define. Every factor's
// conditioning axes must be produced by earlier factors and no axis may be
// produced twice.
JointPmf compose(const std::vector<CondPmf>& factors);

// p_{targets | given} read off a joint; conditioning rows of probability zero
// are filled uniformly
CondPmf conditional_from_joint(const JointPmf& joint, const std::vector<std::string>& targets,
                               const std::vector<std::string>& given);

template <typename F>
CondPmf CondPmf::deterministic(Alphabet target, std::vector<Alphabet> given, F&& map) {
    std::size_t rows = 1;
    for (const auto& g : given) rows *= static_cast<std::size_t>(g.size);
    std::vector<double> probs(rows * static_cast<std::size_t>(target.size), 0.0);
    std::vector<int> idx(given.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
        int z = map(std::span<const int>(idx));
        if (z < 0 || z >= target.size)
            throw ValidationError("deterministic map value out of range for axis " + target.name);
        probs[r * target.size + z] = 1.0;
        for (int d = static_cast<int>(given.size()) - 1; d >= 0; --d) {
            if (++idx[d] < given[d].size) break;
            idx[d] = 0;
        }
    }
    return CondPmf({std::move(target)}, std::move(given), std::move(probs));
}

}  // namespace binfwd
