#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qic/entropy.hpp"
#include "qic/matrix.hpp"

namespace qic {

// Two-sender channel with two quantum outputs. States live on the joint
// output space (dim1*dim2), flat-indexed by (x1,x2).
class CcqqChannel {
public:
    CcqqChannel(std::vector<int> alphabets, std::vector<int> dims, std::vector<Mat> states)
        : alphabets_(std::move(alphabets)), dims_(std::move(dims)), states_(std::move(states)) {
        if (alphabets_.size() != 2 || dims_.size() != 2)
            throw input_error("CcqqChannel: expected two senders and two outputs");
        for (int a : alphabets_)
            if (a < 1) throw input_error("CcqqChannel: empty input alphabet");
        for (int d : dims_)
            if (d < 1) throw input_error("CcqqChannel: invalid output dimension");
        if (states_.size() != radix_size(alphabets_))
            throw input_error("CcqqChannel: state count does not match input alphabet product");
        int joint = dims_[0] * dims_[1];
        for (std::size_t i = 0; i < states_.size(); ++i) {
            std::vector<int> in = unflatten_index(i, alphabets_);
            std::string where = " at input (" + std::to_string(in[0]) + "," + std::to_string(in[1]) + ")";
            if (states_[i].rows() != joint || states_[i].cols() != joint)
                throw input_error("CcqqChannel: state dimension mismatch" + where);
            try {
                DensityOperator d(states_[i]);
                d.validate();
            } catch (const input_error& e) {
                throw input_error(std::string(e.what()) + where);
            }
        }
    }

    const std::vector<int>& alphabets() const { return alphabets_; }
    const std::vector<int>& dims() const { return dims_; }
    int joint_dim() const { return dims_[0] * dims_[1]; }
    const Mat& state(int x1, int x2) const {
        return states_[flat_index({x1, x2}, alphabets_)];
    }
    const std::vector<Mat>& states() const { return states_; }

private:
    std::vector<int> alphabets_;
    std::vector<int> dims_;
    std::vector<Mat> states_;
};

// Multiple access channel with classical senders (two or three) and one
// quantum output.
class CcqMac {
public:
    CcqMac(std::vector<int> alphabets, int dim, std::vector<Mat> states)
        : alphabets_(std::move(alphabets)), dim_(dim), states_(std::move(states)) {
        if (alphabets_.size() != 2 && alphabets_.size() != 3)
            throw input_error("CcqMac: expected two or three senders");
        for (int a : alphabets_)
            if (a < 1) throw input_error("CcqMac: empty input alphabet");
        if (dim_ < 1) throw input_error("CcqMac: invalid output dimension");
        if (states_.size() != radix_size(alphabets_))
            throw input_error("CcqMac: state count does not match input alphabet product");
        for (std::size_t i = 0; i < states_.size(); ++i) {
            std::vector<int> in = unflatten_index(i, alphabets_);
            std::string where = " at input (";
            for (std::size_t k = 0; k < in.size(); ++k)
                where += std::to_string(in[k]) + (k + 1 < in.size() ? "," : ")");
            if (states_[i].rows() != dim_ || states_[i].cols() != dim_)
                throw input_error("CcqMac: state dimension mismatch" + where);
            try {
                DensityOperator d(states_[i]);
                d.validate();
            } catch (const input_error& e) {
                throw input_error(std::string(e.what()) + where);
            }
        }
    }

    int senders() const { return static_cast<int>(alphabets_.size()); }
    const std::vector<int>& alphabets() const { return alphabets_; }
    int dim() const { return dim_; }
    const Mat& state(const std::vector<int>& in) const { return states_[flat_index(in, alphabets_)]; }
    const std::vector<Mat>& states() const { return states_; }

    // Two-sender view of a three-sender MAC with one register averaged out.
    CcqMac marginalize(int reg, const std::vector<double>& dist) const {
        if (senders() != 3) throw input_error("CcqMac::marginalize: needs three senders");
        if (reg < 0 || reg > 2) throw input_error("CcqMac::marginalize: register out of range");
        if (static_cast<int>(dist.size()) != alphabets_[reg])
            throw input_error("CcqMac::marginalize: distribution size mismatch");
        std::vector<int> rest;
        for (int i = 0; i < 3; ++i)
            if (i != reg) rest.push_back(i);
        std::vector<int> out_alpha = {alphabets_[rest[0]], alphabets_[rest[1]]};
        std::vector<Mat> out(radix_size(out_alpha), Mat::Zero(dim_, dim_));
        for (std::size_t flat = 0; flat < states_.size(); ++flat) {
            std::vector<int> in = unflatten_index(flat, alphabets_);
            std::size_t o = flat_index({in[rest[0]], in[rest[1]]}, out_alpha);
            out[o] += dist[in[reg]] * states_[flat];
        }
        return CcqMac(out_alpha, dim_, std::move(out));
    }

private:
    std::vector<int> alphabets_;
    int dim_;
    std::vector<Mat> states_;
};

// MAC seen by one receiver of an interference channel: the other output is
// traced out.
inline CcqMac induced_mac(const CcqqChannel& ch, int receiver) {
    if (receiver != 1 && receiver != 2) throw input_error("induced_mac: receiver must be 1 or 2");
    std::vector<int> keep = {receiver - 1};
    std::vector<Mat> states;
    states.reserve(ch.states().size());
    for (const Mat& m : ch.states())
        states.push_back(partial_trace(m, ch.dims(), keep));
    return CcqMac(ch.alphabets(), ch.dims()[receiver - 1], std::move(states));
}

// Two-qubit partial-swap example channel. Inputs select one of four pure
// joint outputs; the interference strength is set by the swap angle.
inline CcqqChannel theta_swap(double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    auto ket = [](cx a00, cx a01, cx a10, cx a11) {
        CVec v(4);
        v << a00, a01, a10, a11;
        return v;
    };
    std::vector<CVec> kets = {
        ket(1, 0, 0, 0),
        ket(0, c, s, 0),
        ket(0, -s, c, 0),
        ket(0, 0, 0, 1),
    };
    std::vector<Mat> states;
    states.reserve(4);
    for (const CVec& v : kets) states.push_back(v * v.adjoint());
    return CcqqChannel({2, 2}, {2, 2}, std::move(states));
}

// Three-sender qubit MAC: the third sender picks the basis (computational or
// Hadamard), the first two encode the parity of their bits in that basis.
inline CcqMac bb84_cccq() {
    CVec k0(2), k1(2), kp(2), km(2);
    k0 << 1, 0;
    k1 << 0, 1;
    double r = 1.0 / std::sqrt(2.0);
    kp << r, r;
    km << r, -r;
    auto proj = [](const CVec& v) { return Mat(v * v.adjoint()); };
    std::vector<Mat> states(8);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) {
                int v = x ^ y;
                const CVec& ket = z == 0 ? (v == 0 ? k0 : k1) : (v == 0 ? kp : km);
                states[flat_index({x, y, z}, {2, 2, 2})] = proj(ket);
            }
    return CcqMac({2, 2, 2}, 2, std::move(states));
}

// Classical interference channel embedded as commuting diagonal states.
// probs is flat-indexed by (x1, x2, y1, y2).
inline CcqqChannel classical_embed(int n1, int n2, int m1, int m2, const std::vector<double>& probs) {
    std::vector<int> radix = {n1, n2, m1, m2};
    if (probs.size() != radix_size(radix))
        throw input_error("classical_embed: probability table size mismatch");
    std::vector<Mat> states(static_cast<std::size_t>(n1) * n2);
    for (int x1 = 0; x1 < n1; ++x1)
        for (int x2 = 0; x2 < n2; ++x2) {
            Mat rho = Mat::Zero(m1 * m2, m1 * m2);
            for (int y1 = 0; y1 < m1; ++y1)
                for (int y2 = 0; y2 < m2; ++y2) {
                    double p = probs[flat_index({x1, x2, y1, y2}, radix)];
                    if (p < -kPsdTol) throw input_error("classical_embed: negative probability");
                    int d = y1 * m2 + y2;
                    rho(d, d) = p;
                }
            states[flat_index({x1, x2}, {n1, n2})] = rho;
        }
    return CcqqChannel({n1, n2}, {m1, m2}, std::move(states));
}

// Classical MAC embedded as diagonal states; probs flat-indexed by
// (inputs..., y).
inline CcqMac classical_embed_mac(const std::vector<int>& alphabets, int m, const std::vector<double>& probs) {
    std::vector<int> radix = alphabets;
    radix.push_back(m);
    if (probs.size() != radix_size(radix))
        throw input_error("classical_embed_mac: probability table size mismatch");
    std::size_t inputs = radix_size(alphabets);
    std::vector<Mat> states(inputs);
    for (std::size_t flat = 0; flat < inputs; ++flat) {
        std::vector<int> in = unflatten_index(flat, alphabets);
        Mat rho = Mat::Zero(m, m);
        for (int y = 0; y < m; ++y) {
            std::vector<int> full = in;
            full.push_back(y);
            rho(y, y) = probs[flat_index(full, radix)];
        }
        states[flat] = rho;
    }
    return CcqMac(alphabets, m, std::move(states));
}

// k-fold blocking: inputs become k-tuples, outputs k-fold tensor powers.
// Rates over the blocked channel are per k uses of the original one.
inline CcqqChannel block_channel(const CcqqChannel& ch, int k) {
    if (k < 1) throw input_error("block_channel: k must be positive");
    long joint = 1;
    for (int i = 0; i < k; ++i) {
        joint *= ch.joint_dim();
        if (joint > 4096) throw budget_error("block_channel: blocked dimension exceeds budget");
    }
    std::vector<int> alpha = {1, 1}, dims = {1, 1};
    for (int i = 0; i < k; ++i) {
        alpha[0] *= ch.alphabets()[0];
        alpha[1] *= ch.alphabets()[1];
        dims[0] *= ch.dims()[0];
        dims[1] *= ch.dims()[1];
    }
    // Output factors must interleave as (B1...B1, B2...B2); build by tensoring
    // in block order then permuting factors via partial-trace-free reindexing.
    std::vector<int> site_dims;
    for (int i = 0; i < k; ++i) {
        site_dims.push_back(ch.dims()[0]);
        site_dims.push_back(ch.dims()[1]);
    }
    // Permutation: site factor order (b1_1,b2_1,...,b1_k,b2_k) -> (b1_1..b1_k, b2_1..b2_k).
    std::vector<int> perm;
    for (int i = 0; i < k; ++i) perm.push_back(2 * i);
    for (int i = 0; i < k; ++i) perm.push_back(2 * i + 1);
    std::size_t total = radix_size(site_dims);
    std::vector<int> perm_dims(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm_dims[i] = site_dims[perm[i]];
    std::vector<std::size_t> remap(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<int> t = unflatten_index(idx, site_dims);
        std::vector<int> pt(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) pt[i] = t[perm[i]];
        remap[idx] = flat_index(pt, perm_dims);
    }

    std::vector<int> in_radix;
    for (int i = 0; i < k; ++i) in_radix.push_back(ch.alphabets()[0]);
    for (int i = 0; i < k; ++i) in_radix.push_back(ch.alphabets()[1]);
    std::vector<Mat> states(radix_size({alpha[0], alpha[1]}));
    for (std::size_t flat = 0; flat < states.size(); ++flat) {
        std::vector<int> in = unflatten_index(flat, in_radix);
        Mat acc = Mat::Identity(1, 1);
        for (int i = 0; i < k; ++i) acc = tensor(acc, ch.state(in[i], in[k + i])).eval();
        Mat out(total, total);
        for (std::size_t r = 0; r < total; ++r)
            for (std::size_t c = 0; c < total; ++c)
                out(remap[r], remap[c]) = acc(r, c);
        states[flat] = out;
    }
    return CcqqChannel(alpha, dims, std::move(states));
}

// --- scalar Gaussian interference channel ---

struct GaussianIc {
    double snr1 = 0.0;
    double snr2 = 0.0;
    double inr1 = 0.0;
    double inr2 = 0.0;
};

enum class GaussTerm {
    x1_b1_given_x2,
    x2_b2_given_x1,
    x1_b1,
    x2_b2,
    x2_b1,
    x1_b2,
    x12_b1,
    x12_b2,
    x2_b1_given_x1,
    x1_b2_given_x2,
};

inline double gauss_cap(double snr) { return 0.5 * std::log2(1.0 + snr); }

inline double gauss_mi(const GaussianIc& ic, GaussTerm term) {
    switch (term) {
        case GaussTerm::x1_b1_given_x2: return gauss_cap(ic.snr1);
        case GaussTerm::x2_b2_given_x1: return gauss_cap(ic.snr2);
        case GaussTerm::x1_b1: return gauss_cap(ic.snr1 / (1.0 + ic.inr1));
        case GaussTerm::x2_b2: return gauss_cap(ic.snr2 / (1.0 + ic.inr2));
        case GaussTerm::x2_b1: return gauss_cap(ic.inr1 / (1.0 + ic.snr1));
        case GaussTerm::x1_b2: return gauss_cap(ic.inr2 / (1.0 + ic.snr2));
        case GaussTerm::x12_b1: return gauss_cap(ic.snr1 + ic.inr1);
        case GaussTerm::x12_b2: return gauss_cap(ic.snr2 + ic.inr2);
        case GaussTerm::x2_b1_given_x1: return gauss_cap(ic.inr1);
        case GaussTerm::x1_b2_given_x2: return gauss_cap(ic.inr2);
    }
    throw input_error("gauss_mi: unknown term");
}

// Rate-splitting auxiliary input: sender i splits into a personal stream and
// a common stream via X_i = f_i(U_i, W_i), with independent distributions on
// the auxiliaries. f_i is flat-indexed by (u_i, w_i).
struct HkInput {
    std::vector<double> p_u1, p_w1, p_u2, p_w2;
    std::vector<int> f1, f2;

    void validate(const CcqqChannel& ch) const {
        auto check = [](const std::vector<double>& p, const char* name) {
            if (p.empty()) throw input_error(std::string("HkInput: empty distribution ") + name);
            double s = 0.0;
            for (double v : p) {
                if (v < -kPsdTol) throw input_error(std::string("HkInput: negative probability in ") + name);
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-9)
                throw input_error(std::string("HkInput: distribution not normalized: ") + name);
        };
        check(p_u1, "p_u1");
        check(p_w1, "p_w1");
        check(p_u2, "p_u2");
        check(p_w2, "p_w2");
        if (f1.size() != p_u1.size() * p_w1.size() || f2.size() != p_u2.size() * p_w2.size())
            throw input_error("HkInput: function table size mismatch");
        for (int v : f1)
            if (v < 0 || v >= ch.alphabets()[0]) throw input_error("HkInput: f1 value out of range");
        for (int v : f2)
            if (v < 0 || v >= ch.alphabets()[1]) throw input_error("HkInput: f2 value out of range");
    }

    int x1(int u1, int w1) const { return f1[static_cast<std::size_t>(u1) * p_w1.size() + w1]; }
    int x2(int u2, int w2) const { return f2[static_cast<std::size_t>(u2) * p_w2.size() + w2]; }
};

} // namespace qic
