#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qic/channels.hpp"
#include "qic/entropy.hpp"
#include "qic/matrix.hpp"
#include "qic/parallel.hpp"
#include "qic/rng.hpp"

namespace qic {

inline constexpr std::size_t kSeqBudget = 4096;  // d^n cap for index-set representations
inline constexpr std::size_t kDenseBudget = 256; // d^n cap for dense operator work

namespace detail {

inline std::size_t checked_seq_size(int dim, int n, std::size_t cap, const char* who) {
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= static_cast<std::size_t>(dim);
        if (total > cap) throw budget_error(std::string(who) + ": sequence space exceeds budget");
    }
    return total;
}

} // namespace detail

// Weakly typical projector for a product of site states, stored as per-site
// eigenbases plus the retained multi-index set. An index is retained when the
// sample entropy of its eigenvalue product is within delta of hbar.
class TypicalProjector {
public:
    TypicalProjector(const std::vector<Mat>& site_states, double hbar, double delta)
        : n_(static_cast<int>(site_states.size())), hbar_(hbar), delta_(delta) {
        if (n_ < 1) throw input_error("TypicalProjector: needs at least one site");
        if (delta_ <= 0.0) throw input_error("TypicalProjector: delta must be positive");
        dim_ = static_cast<int>(site_states[0].rows());
        total_ = detail::checked_seq_size(dim_, n_, kSeqBudget, "TypicalProjector");
        bases_.reserve(n_);
        site_eigs_.reserve(n_);
        site_logs_.reserve(n_);
        for (const Mat& m : site_states) {
            if (m.rows() != dim_ || m.cols() != dim_)
                throw input_error("TypicalProjector: inconsistent site dimensions");
            EigH e = eig_h(m);
            RVec lg(dim_);
            for (int i = 0; i < dim_; ++i)
                lg(i) = e.values(i) > kEigClamp ? -std::log2(e.values(i))
                                                : std::numeric_limits<double>::infinity();
            bases_.push_back(e.vectors);
            site_eigs_.push_back(e.values);
            site_logs_.push_back(lg);
        }
        std::vector<int> radix(n_, dim_);
        for (std::size_t flat = 0; flat < total_; ++flat) {
            std::vector<int> digits = unflatten_index(flat, radix);
            double s = 0.0, prob = 1.0;
            for (int i = 0; i < n_; ++i) {
                s += site_logs_[i](digits[i]);
                prob *= std::max(site_eigs_[i](digits[i]), 0.0);
            }
            if (std::isfinite(s) && std::abs(s / n_ - hbar_) <= delta_) {
                selected_.push_back(flat);
                selected_sum_.push_back(s);
                selected_prob_.push_back(prob);
            }
        }
        assert((verify_invariants(), true));
    }

    int n() const { return n_; }
    int site_dim() const { return dim_; }
    double hbar() const { return hbar_; }
    double delta() const { return delta_; }
    std::size_t rank() const { return selected_.size(); }
    const std::vector<std::size_t>& selected() const { return selected_; }
    const std::vector<Mat>& site_bases() const { return bases_; }

    // Tr{Pi rho_1 x ... x rho_n} for the defining site states: the sum of the
    // retained eigenvalue products. Kahan compensation keeps the tail oracle
    // comparison tight.
    double prob_mass() const {
        double sum = 0.0, c = 0.0;
        for (double p : selected_prob_) {
            double y = p - c;
            double t = sum + y;
            c = (t - sum) - y;
            sum = t;
        }
        return sum;
    }

    // Rank bound and eigenvalue sandwich; both hold by construction, so any
    // violation is an implementation bug.
    void verify_invariants() const {
        if (!selected_.empty()) {
            double log_rank = std::log2(static_cast<double>(selected_.size()));
            if (log_rank > n_ * (hbar_ + delta_) + 1e-9)
                throw property_error("TypicalProjector: rank bound violated");
        }
        for (double s : selected_sum_) {
            if (s < n_ * (hbar_ - delta_) - 1e-9 || s > n_ * (hbar_ + delta_) + 1e-9)
                throw property_error("TypicalProjector: eigenvalue sandwich violated");
        }
    }

    Mat materialize() const {
        if (total_ > kDenseBudget)
            throw budget_error("TypicalProjector: materialized dimension exceeds budget");
        std::vector<int> radix(n_, dim_);
        Mat v(total_, static_cast<Eigen::Index>(selected_.size()));
        for (std::size_t k = 0; k < selected_.size(); ++k) {
            std::vector<int> digits = unflatten_index(selected_[k], radix);
            CVec col = CVec::Ones(1);
            for (int i = 0; i < n_; ++i) col = tensor(col, CVec(bases_[i].col(digits[i]))).eval();
            v.col(static_cast<Eigen::Index>(k)) = col;
        }
        return v * v.adjoint();
    }

private:
    int n_;
    int dim_ = 0;
    std::size_t total_ = 0;
    double hbar_;
    double delta_;
    std::vector<Mat> bases_;
    std::vector<RVec> site_eigs_;
    std::vector<RVec> site_logs_;
    std::vector<std::size_t> selected_;
    std::vector<double> selected_sum_;
    std::vector<double> selected_prob_;
};

inline TypicalProjector typical_projector(const Mat& rho, int n, double delta) {
    if (n < 1) throw input_error("typical_projector: n must be positive");
    double h = von_neumann_entropy(rho);
    return TypicalProjector(std::vector<Mat>(static_cast<std::size_t>(n), rho), h, delta);
}

inline TypicalProjector typical_projector(const DensityOperator& rho, int n, double delta) {
    return typical_projector(rho.mat(), n, delta);
}

// hbar is the ensemble-average conditional entropy of the generating
// distribution, not a per-sequence quantity; the caller supplies it.
inline TypicalProjector cond_typical_projector(const std::vector<Mat>& site_states, double hbar,
                                               double delta) {
    return TypicalProjector(site_states, hbar, delta);
}

// --- random codebooks ---

struct Codebook {
    int n = 0;
    std::vector<std::vector<int>> words;

    int size() const { return static_cast<int>(words.size()); }
    const std::vector<int>& word(int i) const { return words[i]; }
};

inline Codebook random_codebook(int count, int n, const std::vector<double>& dist, Rng& rng) {
    if (count < 1) throw input_error("random_codebook: size must be positive");
    if (n < 1) throw input_error("random_codebook: blocklength must be positive");
    Codebook c;
    c.n = n;
    c.words.resize(count);
    for (auto& w : c.words) {
        w.resize(n);
        for (int i = 0; i < n; ++i) w[i] = rng.sample(dist);
    }
    return c;
}

// --- common eigenbasis detection ---

// Returns a unitary diagonalizing every operator simultaneously, or nullopt
// if they fail to commute. Degeneracies are resolved by diagonalizing a
// random positive combination and verifying the result.
inline std::optional<Mat> common_eigenbasis(const std::vector<Mat>& ops, double tol = 1e-9) {
    if (ops.empty()) return std::nullopt;
    int d = static_cast<int>(ops[0].rows());
    for (const Mat& a : ops)
        if (a.rows() != d || a.cols() != d) throw input_error("common_eigenbasis: dimension mismatch");
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.size(); ++j) {
            Mat comm = ops[i] * ops[j] - ops[j] * ops[i];
            if (comm.cwiseAbs().maxCoeff() > tol) return std::nullopt;
        }
    for (int attempt = 0; attempt < 4; ++attempt) {
        Rng r = Rng::derived(0xba515, static_cast<std::uint64_t>(attempt));
        Mat mix = Mat::Zero(d, d);
        for (const Mat& a : ops) mix += (0.5 + r.uniform()) * a;
        mix = 0.5 * (mix + mix.adjoint().eval());
        Mat u = eig_h(mix).vectors;
        bool ok = true;
        for (const Mat& a : ops) {
            Mat rot = u.adjoint() * a * u;
            double off = 0.0;
            for (int i = 0; i < d && ok; ++i)
                for (int j = 0; j < d; ++j)
                    if (i != j) off = std::max(off, std::abs(rot(i, j)));
            if (off > tol) {
                ok = false;
            }
        }
        if (ok) return u;
    }
    return std::nullopt;
}

// --- square-root simultaneous decoder, two senders ---

namespace detail {

inline bool window_hit(double sum, int n, double hbar, double delta) {
    return std::isfinite(sum) && std::abs(sum / n - hbar) <= delta;
}

inline RVec log2_vec(const RVec& probs) {
    RVec out(probs.size());
    for (Eigen::Index i = 0; i < probs.size(); ++i)
        out(i) = probs(i) > kEigClamp ? -std::log2(probs(i))
                                      : std::numeric_limits<double>::infinity();
    return out;
}

inline double spectrum_entropy_clamped(const RVec& probs) {
    RVec clamped = probs.cwiseMax(0.0);
    return entropy_of_spectrum(clamped);
}

} // namespace detail

// Decoder for one codebook pair. States that commute run through a diagonal
// index-set path; otherwise everything is materialized, which confines the
// dense path to small blocklengths.
class SqrtDecoder {
public:
    // force_dense routes even commuting inputs through the materialized POVM,
    // which lets tests cross-check the two paths on one channel.
    SqrtDecoder(const CcqMac& mac, const std::vector<double>& p1, const std::vector<double>& p2,
                Codebook c1, Codebook c2, double delta, bool force_dense = false)
        : mac_(mac), p1_(p1), p2_(p2), c1_(std::move(c1)), c2_(std::move(c2)), delta_(delta) {
        if (mac_.senders() != 2) throw input_error("SqrtDecoder: MAC must have two senders");
        if (static_cast<int>(p1_.size()) != mac_.alphabets()[0] ||
            static_cast<int>(p2_.size()) != mac_.alphabets()[1])
            throw input_error("SqrtDecoder: distribution arity mismatch");
        if (c1_.n != c2_.n) throw input_error("SqrtDecoder: codebook blocklengths differ");
        n_ = c1_.n;
        dim_ = mac_.dim();
        for (const auto& w : c1_.words)
            for (int x : w)
                if (x < 0 || x >= mac_.alphabets()[0]) throw input_error("SqrtDecoder: codeword letter out of range");
        for (const auto& w : c2_.words)
            for (int x : w)
                if (x < 0 || x >= mac_.alphabets()[1]) throw input_error("SqrtDecoder: codeword letter out of range");

        int n1 = mac_.alphabets()[0], n2 = mac_.alphabets()[1];
        pair_states_.reserve(static_cast<std::size_t>(n1) * n2);
        for (int x1 = 0; x1 < n1; ++x1)
            for (int x2 = 0; x2 < n2; ++x2) pair_states_.push_back(mac_.state({x1, x2}));
        cond_states_.reserve(n1);
        for (int x1 = 0; x1 < n1; ++x1) {
            Mat acc = Mat::Zero(dim_, dim_);
            for (int x2 = 0; x2 < n2; ++x2) acc += p2_[x2] * pair_states_[idx(x1, x2)];
            cond_states_.push_back(acc);
        }
        avg_state_ = Mat::Zero(dim_, dim_);
        for (int x1 = 0; x1 < n1; ++x1) avg_state_ += p1_[x1] * cond_states_[x1];

        std::vector<Mat> all = pair_states_;
        all.insert(all.end(), cond_states_.begin(), cond_states_.end());
        all.push_back(avg_state_);
        basis_ = force_dense ? std::nullopt : common_eigenbasis(all);
        if (basis_) {
            total_ = detail::checked_seq_size(dim_, n_, kSeqBudget, "SqrtDecoder");
            init_diagonal();
        } else {
            total_ = detail::checked_seq_size(dim_, n_, kDenseBudget, "SqrtDecoder");
            init_dense();
        }
    }

    int n() const { return n_; }
    int codebook1_size() const { return c1_.size(); }
    int codebook2_size() const { return c2_.size(); }
    bool diagonal_path() const { return basis_.has_value(); }

    // Tr{Lambda_{l,m} rho_{X(l),Y(m)}}.
    double pair_success(int l, int m) const {
        if (l < 0 || l >= c1_.size() || m < 0 || m >= c2_.size())
            throw input_error("SqrtDecoder: message index out of range");
        if (basis_) return diag_success(l, m);
        return dense_success(l, m);
    }

    // Mean over message pairs; the abstain outcome is charged as an error.
    double avg_error() const {
        double sum = 0.0;
        for (int l = 0; l < c1_.size(); ++l)
            for (int m = 0; m < c2_.size(); ++m) sum += 1.0 - pair_success(l, m);
        return sum / (static_cast<double>(c1_.size()) * c2_.size());
    }

    struct PovmCheck {
        double min_eig_element;    // smallest eigenvalue over all POVM elements
        double max_eig_sum;        // largest eigenvalue of the element sum
        double completeness;      // norm of (sum + clipped abstain - I)
    };

    // POVM sanity quantities. On the diagonal path every element is diagonal
    // with entries member/count, so the sum is the support indicator of the
    // count vector and the clipped abstain completes it exactly.
    PovmCheck validate_povm() const {
        if (basis_) {
            bool any = false;
            for (std::size_t k = 0; k < total_; ++k)
                if (counts_[k] > 0) any = true;
            return PovmCheck{0.0, any ? 1.0 : 0.0, 0.0};
        }
        Mat sum = Mat::Zero(total_, total_);
        double min_eig = std::numeric_limits<double>::infinity();
        for (int l = 0; l < c1_.size(); ++l)
            for (int m = 0; m < c2_.size(); ++m) {
                Mat lam = dense_lambda(l, m);
                min_eig = std::min(min_eig, eigvals_h(lam).minCoeff());
                sum += lam;
            }
        double max_sum = eigvals_h(sum).maxCoeff();
        EigH e = eig_h(Mat(Mat::Identity(total_, total_) - sum));
        CVec clipped = e.values.cwiseMax(0.0).cast<cx>();
        Mat abstain = e.vectors * clipped.asDiagonal() * e.vectors.adjoint();
        double comp = (sum + abstain - Mat::Identity(total_, total_)).cwiseAbs().maxCoeff();
        return PovmCheck{min_eig, max_sum, comp};
    }

private:
    std::size_t idx(int x1, int x2) const {
        return static_cast<std::size_t>(x1) * mac_.alphabets()[1] + x2;
    }

    void init_diagonal() {
        const Mat& u = *basis_;
        auto diag_probs = [&](const Mat& m) {
            RVec v(dim_);
            Mat rot = u.adjoint() * m * u;
            for (int i = 0; i < dim_; ++i) v(i) = std::max(rot(i, i).real(), 0.0);
            return v;
        };
        int n1 = mac_.alphabets()[0], n2 = mac_.alphabets()[1];
        q_pair_.reserve(pair_states_.size());
        for (const Mat& m : pair_states_) q_pair_.push_back(diag_probs(m));
        q_cond_.reserve(cond_states_.size());
        for (const Mat& m : cond_states_) q_cond_.push_back(diag_probs(m));
        q_avg_ = diag_probs(avg_state_);
        lg_pair_.reserve(q_pair_.size());
        for (const RVec& q : q_pair_) lg_pair_.push_back(detail::log2_vec(q));
        lg_cond_.reserve(q_cond_.size());
        for (const RVec& q : q_cond_) lg_cond_.push_back(detail::log2_vec(q));
        lg_avg_ = detail::log2_vec(q_avg_);

        h_pair_ = 0.0;
        for (int x1 = 0; x1 < n1; ++x1)
            for (int x2 = 0; x2 < n2; ++x2)
                h_pair_ += p1_[x1] * p2_[x2] * detail::spectrum_entropy_clamped(q_pair_[idx(x1, x2)]);
        h_cond_ = 0.0;
        for (int x1 = 0; x1 < n1; ++x1) h_cond_ += p1_[x1] * detail::spectrum_entropy_clamped(q_cond_[x1]);
        h_avg_ = detail::spectrum_entropy_clamped(q_avg_);

        // Digit table shared by all membership scans.
        std::vector<int> radix(n_, dim_);
        digits_.resize(total_);
        for (std::size_t flat = 0; flat < total_; ++flat) digits_[flat] = unflatten_index(flat, radix);

        // Pass 1: per-sequence membership counts over all message pairs.
        counts_.assign(total_, 0);
        members_.resize(static_cast<std::size_t>(c1_.size()) * c2_.size());
        for (int l = 0; l < c1_.size(); ++l)
            for (int m = 0; m < c2_.size(); ++m) {
                auto& mem = members_[static_cast<std::size_t>(l) * c2_.size() + m];
                const auto& w1 = c1_.word(l);
                const auto& w2 = c2_.word(m);
                for (std::size_t flat = 0; flat < total_; ++flat) {
                    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
                    for (int i = 0; i < n_; ++i) {
                        int y = digits_[flat][i];
                        s0 += lg_avg_(y);
                        s1 += lg_cond_[w1[i]](y);
                        s2 += lg_pair_[idx(w1[i], w2[i])](y);
                    }
                    if (detail::window_hit(s0, n_, h_avg_, delta_) &&
                        detail::window_hit(s1, n_, h_cond_, delta_) &&
                        detail::window_hit(s2, n_, h_pair_, delta_)) {
                        mem.push_back(flat);
                        counts_[flat] += 1;
                    }
                }
            }
    }

    double diag_success(int l, int m) const {
        const auto& mem = members_[static_cast<std::size_t>(l) * c2_.size() + m];
        if (mem.empty()) return 0.0;
        const auto& w1 = c1_.word(l);
        const auto& w2 = c2_.word(m);
        double sum = 0.0;
        for (std::size_t flat : mem) {
            double prob = 1.0;
            for (int i = 0; i < n_; ++i) prob *= q_pair_[idx(w1[i], w2[i])](digits_[flat][i]);
            sum += prob / counts_[flat];
        }
        return sum;
    }

    void init_dense() {
        big_pi_ = typical_projector(avg_state_, n_, delta_).materialize();
        double h1 = 0.0;
        for (int x1 = 0; x1 < mac_.alphabets()[0]; ++x1)
            h1 += p1_[x1] * von_neumann_entropy(cond_states_[x1]);
        double h2 = 0.0;
        for (int x1 = 0; x1 < mac_.alphabets()[0]; ++x1)
            for (int x2 = 0; x2 < mac_.alphabets()[1]; ++x2)
                h2 += p1_[x1] * p2_[x2] * von_neumann_entropy(pair_states_[idx(x1, x2)]);
        Mat nsum = Mat::Zero(total_, total_);
        dense_pp_.resize(static_cast<std::size_t>(c1_.size()) * c2_.size());
        for (int l = 0; l < c1_.size(); ++l) {
            std::vector<Mat> sites1(n_);
            for (int i = 0; i < n_; ++i) sites1[i] = cond_states_[c1_.word(l)[i]];
            Mat pi_x = cond_typical_projector(sites1, h1, delta_).materialize();
            for (int m = 0; m < c2_.size(); ++m) {
                std::vector<Mat> sites2(n_);
                for (int i = 0; i < n_; ++i)
                    sites2[i] = pair_states_[idx(c1_.word(l)[i], c2_.word(m)[i])];
                Mat pi_xy = cond_typical_projector(sites2, h2, delta_).materialize();
                Mat pp = big_pi_ * pi_x * pi_xy * pi_x * big_pi_;
                pp = 0.5 * (pp + pp.adjoint().eval());
                dense_pp_[static_cast<std::size_t>(l) * c2_.size() + m] = pp;
                nsum += pp;
            }
        }
        dense_root_ = psd_sqrt_pinv(nsum);
    }

    Mat dense_lambda(int l, int m) const {
        return dense_root_ * dense_pp_[static_cast<std::size_t>(l) * c2_.size() + m] * dense_root_;
    }

    double dense_success(int l, int m) const {
        Mat rho = Mat::Identity(1, 1);
        for (int i = 0; i < n_; ++i)
            rho = tensor(rho, pair_states_[idx(c1_.word(l)[i], c2_.word(m)[i])]).eval();
        return (dense_lambda(l, m) * rho).trace().real();
    }

    CcqMac mac_;
    std::vector<double> p1_, p2_;
    Codebook c1_, c2_;
    double delta_;
    int n_ = 0;
    int dim_ = 0;
    std::size_t total_ = 0;

    std::vector<Mat> pair_states_; // flat (x1,x2)
    std::vector<Mat> cond_states_; // averaged over x2, per x1
    Mat avg_state_;

    std::optional<Mat> basis_;
    std::vector<RVec> q_pair_, q_cond_;
    RVec q_avg_;
    std::vector<RVec> lg_pair_, lg_cond_;
    RVec lg_avg_;
    double h_pair_ = 0.0, h_cond_ = 0.0, h_avg_ = 0.0;
    std::vector<std::vector<int>> digits_;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<int> counts_;

    Mat big_pi_;
    std::vector<Mat> dense_pp_;
    Mat dense_root_;
};

// Three-sender decoder for mutually commuting channel states: the product of
// the eight typicality windows reduces to an intersection of index sets.
class SqrtDecoder3 {
public:
    SqrtDecoder3(const CcqMac& mac, const std::vector<double>& px, const std::vector<double>& py,
                 const std::vector<double>& pz, Codebook cx_, Codebook cy_, Codebook cz_, double delta)
        : mac_(mac), dists_{{px, py, pz}}, books_{{std::move(cx_), std::move(cy_), std::move(cz_)}},
          delta_(delta) {
        if (mac_.senders() != 3) throw input_error("SqrtDecoder3: MAC must have three senders");
        for (int r = 0; r < 3; ++r)
            if (static_cast<int>(dists_[r].size()) != mac_.alphabets()[r])
                throw input_error("SqrtDecoder3: distribution arity mismatch");
        if (books_[0].n != books_[1].n || books_[1].n != books_[2].n)
            throw input_error("SqrtDecoder3: codebook blocklengths differ");
        n_ = books_[0].n;
        dim_ = mac_.dim();
        total_ = detail::checked_seq_size(dim_, n_, kSeqBudget, "SqrtDecoder3");

        auto base = common_eigenbasis(std::vector<Mat>(mac_.states().begin(), mac_.states().end()));
        if (!base) throw input_error("SqrtDecoder3: channel states must commute");
        const Mat& u = *base;

        // Diagonal probability tables for every conditioning pattern: subsets
        // of senders fixed, the rest averaged.
        const auto& alpha = mac_.alphabets();
        std::size_t inputs = radix_size(alpha);
        std::vector<RVec> q_full(inputs);
        for (std::size_t f = 0; f < inputs; ++f) {
            Mat rot = u.adjoint() * mac_.states()[f] * u;
            RVec v(dim_);
            for (int i = 0; i < dim_; ++i) v(i) = std::max(rot(i, i).real(), 0.0);
            q_full[f] = v;
        }
        for (int mask = 0; mask < 8; ++mask) {
            auto& table = q_[mask];
            std::vector<int> fixed;
            for (int r = 0; r < 3; ++r)
                if (mask & (1 << r)) fixed.push_back(r);
            std::vector<int> sub_alpha;
            for (int r : fixed) sub_alpha.push_back(alpha[r]);
            std::size_t fixed_total = radix_size(sub_alpha);
            table.resize(fixed_total, RVec::Zero(dim_));
            double h = 0.0;
            for (std::size_t f = 0; f < inputs; ++f) {
                std::vector<int> in = unflatten_index(f, alpha);
                double w = 1.0;
                std::vector<int> sub;
                for (int r = 0; r < 3; ++r) {
                    if (mask & (1 << r)) sub.push_back(in[r]);
                    else w *= dists_[r][in[r]];
                }
                table[flat_index(sub, sub_alpha)] += w * q_full[f];
            }
            for (std::size_t s = 0; s < fixed_total; ++s) {
                std::vector<int> sub = unflatten_index(s, sub_alpha);
                double w = 1.0;
                for (std::size_t i = 0; i < fixed.size(); ++i) w *= dists_[fixed[i]][sub[i]];
                h += w * detail::spectrum_entropy_clamped(table[s]);
            }
            h_[mask] = h;
            lg_[mask].reserve(fixed_total);
            for (const RVec& v : table) lg_[mask].push_back(detail::log2_vec(v));
        }

        std::vector<int> radix(n_, dim_);
        digits_.resize(total_);
        for (std::size_t flat = 0; flat < total_; ++flat) digits_[flat] = unflatten_index(flat, radix);

        counts_.assign(total_, 0);
        members_.resize(static_cast<std::size_t>(books_[0].size()) * books_[1].size() * books_[2].size());
        for (int k = 0; k < books_[0].size(); ++k)
            for (int l = 0; l < books_[1].size(); ++l)
                for (int m = 0; m < books_[2].size(); ++m) {
                    auto& mem = members_[triple(k, l, m)];
                    for (std::size_t flat = 0; flat < total_; ++flat) {
                        bool ok = true;
                        for (int mask = 0; mask < 8 && ok; ++mask) {
                            double s = 0.0;
                            for (int i = 0; i < n_; ++i)
                                s += lg_[mask][cond_index(mask, k, l, m, i)](digits_[flat][i]);
                            ok = detail::window_hit(s, n_, h_[mask], delta_);
                        }
                        if (ok) {
                            mem.push_back(flat);
                            counts_[flat] += 1;
                        }
                    }
                }
    }

    double triple_success(int k, int l, int m) const {
        const auto& mem = members_[triple(k, l, m)];
        if (mem.empty()) return 0.0;
        double sum = 0.0;
        for (std::size_t flat : mem) {
            double prob = 1.0;
            for (int i = 0; i < n_; ++i)
                prob *= q_[7][cond_index(7, k, l, m, i)](digits_[flat][i]);
            sum += prob / counts_[flat];
        }
        return sum;
    }

    double avg_error() const {
        double sum = 0.0;
        for (int k = 0; k < books_[0].size(); ++k)
            for (int l = 0; l < books_[1].size(); ++l)
                for (int m = 0; m < books_[2].size(); ++m) sum += 1.0 - triple_success(k, l, m);
        return sum / (static_cast<double>(books_[0].size()) * books_[1].size() * books_[2].size());
    }

private:
    std::size_t triple(int k, int l, int m) const {
        return (static_cast<std::size_t>(k) * books_[1].size() + l) * books_[2].size() + m;
    }

    // Flat index into the mask's conditioning table for site i of message
    // triple (k,l,m).
    std::size_t cond_index(int mask, int k, int l, int m, int i) const {
        const auto& alpha = mac_.alphabets();
        std::size_t idx = 0;
        int msgs[3] = {k, l, m};
        for (int r = 0; r < 3; ++r)
            if (mask & (1 << r))
                idx = idx * static_cast<std::size_t>(alpha[r]) +
                      static_cast<std::size_t>(books_[r].word(msgs[r])[i]);
        return idx;
    }

    CcqMac mac_;
    std::array<std::vector<double>, 3> dists_;
    std::array<Codebook, 3> books_;
    double delta_;
    int n_ = 0;
    int dim_ = 0;
    std::size_t total_ = 0;

    std::array<std::vector<RVec>, 8> q_;   // mask bit r set => sender r fixed
    std::array<std::vector<RVec>, 8> lg_;
    std::array<double, 8> h_{};
    std::vector<std::vector<int>> digits_;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<int> counts_;
};

// --- Monte Carlo experiment ---

struct DecoderExperiment {
    CcqMac mac;
    std::vector<double> p1, p2;
    std::vector<int> n_list = {4, 6, 8, 10};
    double delta = 0.05;
    double rate1 = 0.0; // bits per channel use
    double rate2 = 0.0;
    int trials = 20;
    std::uint64_t seed = 7;
};

struct ErrorCurve {
    struct Row {
        int n;
        int size1;
        int size2;
        double mean_error;
        double ci_low;
        double ci_high;
    };
    std::vector<Row> rows;
};

inline int codebook_size_for_rate(double rate, int n) {
    if (rate <= 0.0) return 1;
    double raw = std::exp2(rate * n);
    if (raw > 1e6) throw budget_error("codebook_size_for_rate: codebook exceeds budget");
    return std::max(1, static_cast<int>(std::llround(raw)));
}

inline ErrorCurve run_experiment(const DecoderExperiment& cfg) {
    if (cfg.mac.senders() != 2) throw input_error("run_experiment: MAC must have two senders");
    if (cfg.trials < 1) throw input_error("run_experiment: trials must be positive");
    if (cfg.rate1 < 0.0 || cfg.rate2 < 0.0) throw input_error("run_experiment: negative rate");
    ErrorCurve curve;
    for (int n : cfg.n_list) {
        if (n < 1) throw input_error("run_experiment: blocklength must be positive");
        int l_size = codebook_size_for_rate(cfg.rate1, n);
        int m_size = codebook_size_for_rate(cfg.rate2, n);
        std::vector<double> errs(cfg.trials, 0.0);
        parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t t) {
            Rng rng = Rng::derived(cfg.seed, static_cast<std::uint64_t>(n) * 0x9e3779b9ULL + t);
            Codebook c1 = random_codebook(l_size, n, cfg.p1, rng);
            Codebook c2 = random_codebook(m_size, n, cfg.p2, rng);
            SqrtDecoder dec(cfg.mac, cfg.p1, cfg.p2, std::move(c1), std::move(c2), cfg.delta);
            errs[t] = dec.avg_error();
        });
        double mean = 0.0;
        for (double e : errs) mean += e;
        mean /= cfg.trials;
        double var = 0.0;
        for (double e : errs) var += (e - mean) * (e - mean);
        double sd = cfg.trials > 1 ? std::sqrt(var / (cfg.trials - 1)) : 0.0;
        double half = 1.959963984540054 * sd / std::sqrt(static_cast<double>(cfg.trials));
        curve.rows.push_back({n, l_size, m_size, mean, std::max(0.0, mean - half),
                              std::min(1.0, mean + half)});
    }
    return curve;
}

// --- operator inequality spot checks ---

struct IneqReport {
    int trials = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    bool ok = false;
    std::string worst; // description of the tightest instance
};

namespace detail {

inline Mat random_gaussian(int d, Rng& r) {
    Mat g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = cx(r.normal(), r.normal());
    return g;
}

inline Mat random_psd(int d, Rng& r) {
    Mat g = random_gaussian(d, r);
    return g * g.adjoint() / static_cast<double>(d);
}

inline Mat random_density(int d, Rng& r) {
    Mat w = random_psd(d, r);
    return w / w.trace().real();
}

// Random effect operator with 0 <= E <= I.
inline Mat random_effect(int d, Rng& r) {
    Mat w = random_psd(d, r);
    double lmax = eigvals_h(w).maxCoeff();
    return w / (lmax * (1.0 + r.uniform()));
}

} // namespace detail

inline IneqReport check_hayashi_nagaoka(int trials, int dim, std::uint64_t seed = 0x4a17) {
    if (trials < 1 || dim < 1) throw input_error("check_hayashi_nagaoka: bad parameters");
    IneqReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        Rng r = Rng::derived(seed, static_cast<std::uint64_t>(t));
        Mat s = detail::random_effect(dim, r);
        Mat tt = detail::random_psd(dim, r) * r.uniform();
        Mat root = psd_sqrt_pinv(s + tt);
        Mat lhs = Mat::Identity(dim, dim) - root * s * root;
        Mat rhs = 2.0 * (Mat::Identity(dim, dim) - s) + 4.0 * tt;
        Mat diff = rhs - lhs;
        diff = 0.5 * (diff + diff.adjoint().eval());
        double slack = eigvals_h(diff).minCoeff();
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst = "trial " + std::to_string(t);
        }
    }
    rep.ok = rep.min_slack >= -1e-8;
    return rep;
}

inline IneqReport check_gentle(int trials, std::uint64_t seed = 0x6e71e) {
    if (trials < 1) throw input_error("check_gentle: trials must be positive");
    IneqReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        Rng r = Rng::derived(seed, static_cast<std::uint64_t>(t));
        int d = 2 + static_cast<int>(r.below(7));
        int k = 1 + static_cast<int>(r.below(4));
        std::vector<double> probs = r.dirichlet(k);
        std::vector<Mat> states;
        states.reserve(k);
        for (int i = 0; i < k; ++i) states.push_back(detail::random_density(d, r));
        Mat lam = detail::random_effect(d, r);
        Mat avg = Mat::Zero(d, d);
        for (int i = 0; i < k; ++i) avg += probs[i] * states[i];
        double eps = std::max(0.0, 1.0 - (lam * avg).trace().real());
        Mat root = psd_sqrt(lam);
        double lhs = 0.0;
        for (int i = 0; i < k; ++i)
            lhs += probs[i] * trace_distance(Mat(root * states[i] * root), states[i]);
        double slack = 2.0 * std::sqrt(eps) - lhs;
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst = "trial " + std::to_string(t);
        }
    }
    rep.ok = rep.min_slack >= -1e-9;
    return rep;
}

inline IneqReport check_trace_ineq(int trials, std::uint64_t seed = 0x7a3c0) {
    if (trials < 1) throw input_error("check_trace_ineq: trials must be positive");
    IneqReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        Rng r = Rng::derived(seed, static_cast<std::uint64_t>(t));
        int d = 2 + static_cast<int>(r.below(7));
        Mat rho = detail::random_density(d, r);
        Mat sigma = detail::random_density(d, r);
        Mat lam = detail::random_effect(d, r);
        double slack = (lam * sigma).trace().real() + trace_distance(rho, sigma) -
                       (lam * rho).trace().real();
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst = "trial " + std::to_string(t);
        }
    }
    rep.ok = rep.min_slack >= -1e-9;
    return rep;
}

} // namespace qic
