#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qic/matrix.hpp"

namespace qic {

inline constexpr double kEigClamp = 1e-14; // eigenvalues below this are treated as exact zeros

inline double binary_entropy(double p) {
    if (p < -kPsdTol || p > 1.0 + kPsdTol)
        throw input_error("binary_entropy: probability outside [0,1]");
    if (p <= kEigClamp || p >= 1.0 - kEigClamp) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double entropy_of_spectrum(const RVec& ev) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double l = ev(i);
        if (l < -kPsdTol)
            throw input_error("entropy: negative eigenvalue beyond tolerance");
        if (l > kEigClamp) h -= l * std::log2(l);
    }
    return h;
}

inline double von_neumann_entropy(const Mat& rho) { return entropy_of_spectrum(eigvals_h(rho)); }
inline double von_neumann_entropy(const DensityOperator& rho) { return von_neumann_entropy(rho.mat()); }

inline double min_entropy(const Mat& rho) {
    double lmax = eigvals_h(rho).maxCoeff();
    if (lmax <= 0.0) throw input_error("min_entropy: operator has no positive eigenvalue");
    return -std::log2(lmax);
}
inline double min_entropy(const DensityOperator& rho) { return min_entropy(rho.mat()); }

// Classical-quantum ensemble over independent classical registers. Classical
// registers are never materialized as quantum systems; every conditional
// quantity below is an ensemble average over register assignments.
class CqEnsemble {
public:
    struct Register {
        std::string name;
        std::vector<double> probs;
    };

    CqEnsemble(std::vector<Register> regs, std::vector<Mat> states)
        : regs_(std::move(regs)), states_(std::move(states)) {
        radix_.reserve(regs_.size());
        for (const auto& r : regs_) {
            if (r.probs.empty()) throw input_error("CqEnsemble: empty alphabet");
            double s = 0.0;
            for (double p : r.probs) {
                if (p < -kPsdTol) throw input_error("CqEnsemble: negative probability");
                s += p;
            }
            if (std::abs(s - 1.0) > 1e-9)
                throw input_error("CqEnsemble: distribution not normalized");
            radix_.push_back(static_cast<int>(r.probs.size()));
        }
        if (states_.size() != radix_size(radix_))
            throw input_error("CqEnsemble: state count does not match alphabet product");
        dim_ = states_.empty() ? 0 : static_cast<int>(states_[0].rows());
        for (const auto& m : states_) {
            if (m.rows() != dim_ || m.cols() != dim_)
                throw input_error("CqEnsemble: inconsistent state dimensions");
            assert((DensityOperator(m), true)); // PSD/trace invariants, debug builds
        }
    }

    int dim() const { return dim_; }
    int register_count() const { return static_cast<int>(regs_.size()); }
    const std::vector<Register>& registers() const { return regs_; }
    const std::vector<int>& radix() const { return radix_; }
    const Mat& state(std::size_t flat) const { return states_[flat]; }

    int position(const std::string& name) const {
        for (std::size_t i = 0; i < regs_.size(); ++i)
            if (regs_[i].name == name) return static_cast<int>(i);
        throw input_error("CqEnsemble: unknown register " + name);
    }

    std::vector<int> positions(const std::vector<std::string>& names) const {
        std::vector<int> out;
        out.reserve(names.size());
        for (const auto& n : names) out.push_back(position(n));
        return out;
    }

    double tuple_probability(const std::vector<int>& tuple) const {
        double p = 1.0;
        for (std::size_t i = 0; i < regs_.size(); ++i) p *= regs_[i].probs[tuple[i]];
        return p;
    }

    // Average state with the registers at `fixed_pos` pinned to `fixed_val`;
    // all other registers are averaged under their own distributions.
    Mat averaged_state(const std::vector<int>& fixed_pos, const std::vector<int>& fixed_val) const {
        Mat acc = Mat::Zero(dim_, dim_);
        std::size_t total = states_.size();
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::vector<int> tuple = unflatten_index(flat, radix_);
            bool match = true;
            double w = 1.0;
            for (std::size_t i = 0; i < regs_.size() && match; ++i) {
                auto it = std::find(fixed_pos.begin(), fixed_pos.end(), static_cast<int>(i));
                if (it != fixed_pos.end()) {
                    if (tuple[i] != fixed_val[it - fixed_pos.begin()]) match = false;
                } else {
                    w *= regs_[i].probs[tuple[i]];
                }
            }
            if (match) acc += w * states_[flat];
        }
        return acc;
    }

private:
    std::vector<Register> regs_;
    std::vector<Mat> states_;
    std::vector<int> radix_;
    int dim_ = 0;
};

namespace detail {

template <typename Fn>
void for_each_assignment(const CqEnsemble& ens, const std::vector<int>& pos, Fn&& fn) {
    std::vector<int> sub_radix;
    sub_radix.reserve(pos.size());
    for (int p : pos) sub_radix.push_back(ens.radix()[p]);
    std::size_t total = radix_size(sub_radix);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::vector<int> vals = unflatten_index(flat, sub_radix);
        double w = 1.0;
        for (std::size_t i = 0; i < pos.size(); ++i)
            w *= ens.registers()[pos[i]].probs[vals[i]];
        fn(vals, w);
    }
}

inline void require_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
    for (int x : a)
        for (int y : b)
            if (x == y) throw input_error("entropy: subject and conditioning registers overlap");
}

} // namespace detail

// H(B|C) = sum_c p(c) H(rho_c) over the named conditioning registers.
// Empty conditioning reduces to the entropy of the fully averaged state
// through the same code path.
inline double cond_entropy(const CqEnsemble& ens, const std::vector<std::string>& conditioning) {
    std::vector<int> pos = ens.positions(conditioning);
    double h = 0.0;
    detail::for_each_assignment(ens, pos, [&](const std::vector<int>& vals, double w) {
        if (w <= 0.0) return;
        h += w * von_neumann_entropy(ens.averaged_state(pos, vals));
    });
    return h;
}

// I(S;B|C) = H(B|C) - H(B|SC).
inline double mutual_info(const CqEnsemble& ens, const std::vector<std::string>& subject,
                          const std::vector<std::string>& conditioning) {
    std::vector<int> spos = ens.positions(subject);
    std::vector<int> cpos = ens.positions(conditioning);
    detail::require_disjoint(spos, cpos);
    std::vector<std::string> both = conditioning;
    both.insert(both.end(), subject.begin(), subject.end());
    return cond_entropy(ens, conditioning) - cond_entropy(ens, both);
}

// H_min(B|C) = min over assignments of H_min of the conditioned state; the
// minimum ranges over the full alphabet, including zero-probability values,
// so the operator bound rho_c <= 2^{-H_min} I holds for every assignment.
inline double cond_min_entropy(const CqEnsemble& ens, const std::vector<std::string>& conditioning) {
    std::vector<int> pos = ens.positions(conditioning);
    double lmax = 0.0;
    detail::for_each_assignment(ens, pos, [&](const std::vector<int>& vals, double) {
        lmax = std::max(lmax, eigvals_h(ens.averaged_state(pos, vals)).maxCoeff());
    });
    if (lmax <= 0.0) throw input_error("cond_min_entropy: no positive eigenvalue");
    return -std::log2(lmax);
}

} // namespace qic
