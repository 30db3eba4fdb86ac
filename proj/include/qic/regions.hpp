#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qic/channels.hpp"
#include "qic/conditions.hpp"
#include "qic/entropy.hpp"
#include "qic/geometry.hpp"
#include "qic/rng.hpp"

namespace qic {

struct RatePoint {
    double r1 = 0.0;
    double r2 = 0.0;
};

// Product-distribution source shared by the region builders. Grid mode walks
// each input simplex with a fixed mesh; random mode draws flat Dirichlet
// samples with per-index seeds.
struct DistSampler {
    enum class Mode { grid, random, explicit_list };

    Mode mode = Mode::grid;
    double step = 0.05;
    int count = 200;
    std::uint64_t seed = 1;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> list;

    static DistSampler grid_sampler(double step) {
        DistSampler s;
        s.mode = Mode::grid;
        s.step = step;
        return s;
    }

    static DistSampler random_sampler(int count, std::uint64_t seed) {
        DistSampler s;
        s.mode = Mode::random;
        s.count = count;
        s.seed = seed;
        return s;
    }

    static DistSampler explicit_sampler(std::vector<std::pair<std::vector<double>, std::vector<double>>> l) {
        DistSampler s;
        s.mode = Mode::explicit_list;
        s.list = std::move(l);
        return s;
    }

    std::vector<std::pair<std::vector<double>, std::vector<double>>> sample(int n1, int n2) const {
        if (mode == Mode::explicit_list) {
            for (const auto& [p1, p2] : list)
                if (static_cast<int>(p1.size()) != n1 || static_cast<int>(p2.size()) != n2)
                    throw input_error("DistSampler: explicit distribution arity mismatch");
            return list;
        }
        std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
        if (mode == Mode::random) {
            out.reserve(count);
            for (int t = 0; t < count; ++t) {
                Rng r = Rng::derived(seed, static_cast<std::uint64_t>(t));
                out.emplace_back(r.dirichlet(n1), r.dirichlet(n2));
            }
            return out;
        }
        std::vector<std::vector<double>> g1 = simplex_grid(n1, step);
        std::vector<std::vector<double>> g2 = simplex_grid(n2, step);
        out.reserve(g1.size() * g2.size());
        for (const auto& a : g1)
            for (const auto& b : g2) out.emplace_back(a, b);
        return out;
    }

    static std::vector<std::vector<double>> simplex_grid(int n, double step) {
        if (step <= 0.0 || step > 1.0) throw input_error("DistSampler: grid step must be in (0,1]");
        int m = static_cast<int>(std::llround(1.0 / step));
        std::vector<std::vector<double>> out;
        std::vector<int> parts(n, 0);
        // Enumerate compositions of m into n nonnegative parts.
        std::function<void(int, int)> rec = [&](int idx, int left) {
            if (idx == n - 1) {
                parts[idx] = left;
                std::vector<double> p(n);
                for (int i = 0; i < n; ++i) p[i] = static_cast<double>(parts[i]) / m;
                out.push_back(std::move(p));
                return;
            }
            for (int k = 0; k <= left; ++k) {
                parts[idx] = k;
                rec(idx + 1, left - k);
            }
        };
        rec(0, m);
        return out;
    }
};

// --- classical-quantum ensembles for MAC rate evaluation ---

inline CqEnsemble mac2_ensemble(const CcqMac& mac, const std::vector<double>& p1,
                                const std::vector<double>& p2) {
    if (mac.senders() != 2) throw input_error("mac2_ensemble: MAC must have two senders");
    std::vector<Mat> states(mac.states().begin(), mac.states().end());
    return CqEnsemble({{"X", p1}, {"Y", p2}}, std::move(states));
}

inline CqEnsemble mac3_ensemble(const CcqMac& mac, const std::vector<double>& px,
                                const std::vector<double>& py, const std::vector<double>& pz) {
    if (mac.senders() != 3) throw input_error("mac3_ensemble: MAC must have three senders");
    std::vector<Mat> states(mac.states().begin(), mac.states().end());
    return CqEnsemble({{"X", px}, {"Y", py}, {"Z", pz}}, std::move(states));
}

// --- achievable-rate halfspace systems ---

inline HalfspaceSystem mac2_system(const CcqMac& mac, const std::vector<double>& p1,
                                   const std::vector<double>& p2) {
    CqEnsemble e = mac2_ensemble(mac, p1, p2);
    HalfspaceSystem sys;
    sys.vars = {"R1", "R2"};
    sys.add_row({1.0, 0.0}, mutual_info(e, {"X"}, {"Y"}));
    sys.add_row({0.0, 1.0}, mutual_info(e, {"Y"}, {"X"}));
    sys.add_row({1.0, 1.0}, mutual_info(e, {"X", "Y"}, {}));
    return sys;
}

inline HalfspaceSystem mac3_system(const CcqMac& mac, const std::vector<double>& px,
                                   const std::vector<double>& py, const std::vector<double>& pz) {
    CqEnsemble e = mac3_ensemble(mac, px, py, pz);
    HalfspaceSystem sys;
    sys.vars = {"R1", "R2", "R3"};
    sys.add_row({1, 0, 0}, mutual_info(e, {"X"}, {"Y", "Z"}));
    sys.add_row({0, 1, 0}, mutual_info(e, {"Y"}, {"X", "Z"}));
    sys.add_row({0, 0, 1}, mutual_info(e, {"Z"}, {"X", "Y"}));
    sys.add_row({1, 1, 0}, mutual_info(e, {"X", "Y"}, {"Z"}));
    sys.add_row({1, 0, 1}, mutual_info(e, {"X", "Z"}, {"Y"}));
    sys.add_row({0, 1, 1}, mutual_info(e, {"Y", "Z"}, {"X"}));
    sys.add_row({1, 1, 1}, mutual_info(e, {"X", "Y", "Z"}, {}));
    return sys;
}

// Three-sender system with the first two personal bounds replaced by
// min-entropy differences. perm assigns which register plays each template
// role; rate variables follow the registers. Rows may have negative rhs, in
// which case the region is empty in those coordinates.
inline HalfspaceSystem minentropy3_system(const CcqMac& mac, const std::vector<double>& px,
                                          const std::vector<double>& py, const std::vector<double>& pz,
                                          const std::vector<int>& perm = {0, 1, 2}) {
    if (perm.size() != 3) throw input_error("minentropy3_system: perm must have three entries");
    {
        std::vector<bool> seen(3, false);
        for (int p : perm) {
            if (p < 0 || p > 2 || seen[p]) throw input_error("minentropy3_system: invalid permutation");
            seen[p] = true;
        }
    }
    CqEnsemble e = mac3_ensemble(mac, px, py, pz);
    const std::vector<std::string> names = {"X", "Y", "Z"};
    std::string a = names[perm[0]], b = names[perm[1]], c = names[perm[2]];
    double h_full = cond_entropy(e, {"X", "Y", "Z"});

    HalfspaceSystem sys;
    sys.vars = {"R1", "R2", "R3"};
    auto unit = [&](const std::string& reg) {
        std::vector<double> row(3, 0.0);
        row[e.position(reg)] = 1.0; // register order X,Y,Z matches R1,R2,R3
        return row;
    };
    auto sum2 = [&](const std::string& r1, const std::string& r2) {
        std::vector<double> row = unit(r1);
        std::vector<double> other = unit(r2);
        for (int i = 0; i < 3; ++i) row[i] += other[i];
        return row;
    };
    sys.add_row(unit(a), cond_min_entropy(e, {c, b}) - h_full);
    sys.add_row(unit(b), cond_min_entropy(e, {a, c}) - h_full);
    sys.add_row(unit(c), mutual_info(e, {c}, {a, b}));
    sys.add_row(sum2(a, b), cond_min_entropy(e, {c}) - h_full);
    sys.add_row(sum2(b, c), cond_min_entropy(e, {a}) - h_full);
    sys.add_row(sum2(a, c), mutual_info(e, {a, c}, {b}));
    sys.add_row({1, 1, 1}, mutual_info(e, {"X", "Y", "Z"}, {}));
    return sys;
}

// --- interference-channel inner and outer bounds ---

// Both receivers decode both messages: intersection of the two induced MAC
// pentagons, convexified over the sampled input distributions.
inline RateRegion2D sim_inner_bound(const CcqqChannel& ch, const DistSampler& sampler) {
    CcqMac m1 = induced_mac(ch, 1), m2 = induced_mac(ch, 2);
    std::vector<RateRegion2D> parts;
    for (const auto& [p1, p2] : sampler.sample(ch.alphabets()[0], ch.alphabets()[1])) {
        HalfspaceSystem sys = mac2_system(m1, p1, p2);
        HalfspaceSystem other = mac2_system(m2, p1, p2);
        for (const auto& r : other.rows) sys.rows.push_back(r);
        parts.push_back(to_region2d(sys));
    }
    return union_hull(parts);
}

struct condition_violation : property_error {
    ConditionReport report;
    condition_violation(const std::string& what, ConditionReport rep)
        : property_error(what), report(std::move(rep)) {}
};

// Capacity region under very strong interference: union of rectangles, each
// sender decoded through the cross observation first.
inline RateRegion2D vsi_capacity(const CcqqChannel& ch, const DistSampler& sampler,
                                 const ConditionReport* precomputed = nullptr) {
    ConditionReport rep = precomputed ? *precomputed : check_very_strong(ch);
    if (!rep.holds)
        throw condition_violation("vsi_capacity: very strong interference condition fails (min slack " +
                                      std::to_string(rep.min_slack) + ")",
                                  rep);
    detail::MarginalCache cache(ch);
    std::vector<RateRegion2D> parts;
    for (const auto& [p1, p2] : sampler.sample(ch.alphabets()[0], ch.alphabets()[1])) {
        auto e = cache.evaluate(p1, p2);
        HalfspaceSystem sys;
        sys.vars = {"R1", "R2"};
        sys.add_row({1.0, 0.0}, e.b1_x2 - e.b1_x1x2);
        sys.add_row({0.0, 1.0}, e.b2_x1 - e.b2_x1x2);
        parts.push_back(to_region2d(sys));
    }
    return union_hull(parts);
}

// Capacity region under strong interference: pentagons whose sum bound is the
// worse of the two receivers' joint informations.
inline RateRegion2D strong_capacity(const CcqqChannel& ch, const DistSampler& sampler,
                                    const ConditionReport* precomputed = nullptr) {
    ConditionReport rep = precomputed ? *precomputed : check_strong(ch);
    if (!rep.holds)
        throw condition_violation("strong_capacity: strong interference condition fails (min slack " +
                                      std::to_string(rep.min_slack) + ")",
                                  rep);
    detail::MarginalCache cache(ch);
    std::vector<RateRegion2D> parts;
    for (const auto& [p1, p2] : sampler.sample(ch.alphabets()[0], ch.alphabets()[1])) {
        auto e = cache.evaluate(p1, p2);
        HalfspaceSystem sys;
        sys.vars = {"R1", "R2"};
        sys.add_row({1.0, 0.0}, e.b1_x2 - e.b1_x1x2);
        sys.add_row({0.0, 1.0}, e.b2_x1 - e.b2_x1x2);
        sys.add_row({1.0, 1.0}, std::min(e.b1 - e.b1_x1x2, e.b2 - e.b2_x1x2));
        parts.push_back(to_region2d(sys));
    }
    return union_hull(parts);
}

namespace detail {

inline CqEnsemble hk_receiver_ensemble(const CcqqChannel& ch, const HkInput& hk, int receiver) {
    std::vector<int> radix = {static_cast<int>(hk.p_u1.size()), static_cast<int>(hk.p_w1.size()),
                              static_cast<int>(hk.p_u2.size()), static_cast<int>(hk.p_w2.size())};
    std::vector<Mat> states(radix_size(radix));
    std::vector<int> keep = {receiver - 1};
    for (std::size_t flat = 0; flat < states.size(); ++flat) {
        std::vector<int> t = unflatten_index(flat, radix);
        const Mat& joint = ch.state(hk.x1(t[0], t[1]), hk.x2(t[2], t[3]));
        states[flat] = partial_trace(joint, ch.dims(), keep);
    }
    return CqEnsemble({{"U1", hk.p_u1}, {"W1", hk.p_w1}, {"U2", hk.p_u2}, {"W2", hk.p_w2}},
                      std::move(states));
}

} // namespace detail

// Rate-splitting inner bound for one auxiliary input: fourteen bounds on the
// personal and common stream rates, projected to the message rates by
// eliminating the common-stream shares.
inline RateRegion2D hk_region(const CcqqChannel& ch, const HkInput& hk) {
    hk.validate(ch);
    CqEnsemble e1 = detail::hk_receiver_ensemble(ch, hk, 1);
    CqEnsemble e2 = detail::hk_receiver_ensemble(ch, hk, 2);

    // Variables (R1, T1, R2, T2) with the personal shares substituted away:
    // S1 = R1 - T1, S2 = R2 - T2. s, t1, t2 are each row's coefficients on
    // (personal own, common own, common other).
    HalfspaceSystem sys;
    sys.vars = {"R1", "T1", "R2", "T2"};
    auto add1 = [&](double s, double t1, double t2, double rhs) {
        sys.add_row({s, t1 - s, 0.0, t2}, rhs);
    };
    auto add2 = [&](double s, double t2, double t1, double rhs) {
        sys.add_row({0.0, t1, s, t2 - s}, rhs);
    };
    add1(1, 0, 0, mutual_info(e1, {"U1"}, {"W1", "W2"}));
    add1(0, 1, 0, mutual_info(e1, {"W1"}, {"U1", "W2"}));
    add1(0, 0, 1, mutual_info(e1, {"W2"}, {"U1", "W1"}));
    add1(1, 1, 0, mutual_info(e1, {"U1", "W1"}, {"W2"}));
    add1(1, 0, 1, mutual_info(e1, {"U1", "W2"}, {"W1"}));
    add1(0, 1, 1, mutual_info(e1, {"W1", "W2"}, {"U1"}));
    add1(1, 1, 1, mutual_info(e1, {"U1", "W1", "W2"}, {}));
    add2(1, 0, 0, mutual_info(e2, {"U2"}, {"W1", "W2"}));
    add2(0, 1, 0, mutual_info(e2, {"W2"}, {"U2", "W1"}));
    add2(0, 0, 1, mutual_info(e2, {"W1"}, {"U2", "W2"}));
    add2(1, 1, 0, mutual_info(e2, {"U2", "W2"}, {"W1"}));
    add2(1, 0, 1, mutual_info(e2, {"U2", "W1"}, {"W2"}));
    add2(0, 1, 1, mutual_info(e2, {"W1", "W2"}, {"U2"}));
    add2(1, 1, 1, mutual_info(e2, {"U2", "W1", "W2"}, {}));
    // Personal shares are nonnegative: T_i <= R_i.
    sys.add_row({-1.0, 1.0, 0.0, 0.0}, 0.0);
    sys.add_row({0.0, 0.0, -1.0, 1.0}, 0.0);

    HalfspaceSystem no_t1 = fm_eliminate(sys, "T1");
    HalfspaceSystem no_t = fm_eliminate(no_t1, "T2");
    return to_region2d(no_t);
}

inline RateRegion2D hk_hull(const CcqqChannel& ch, const std::vector<HkInput>& inputs) {
    std::vector<RateRegion2D> parts;
    parts.reserve(inputs.size());
    for (const auto& hk : inputs) parts.push_back(hk_region(ch, hk));
    return union_hull(parts);
}

// Degenerate splits at fixed input marginals: all-common, all-personal, and
// the two mixed assignments.
inline std::vector<HkInput> hk_canonical_inputs(const std::vector<double>& p1,
                                                const std::vector<double>& p2) {
    std::vector<double> unit = {1.0};
    auto ident = [](int n) {
        std::vector<int> f(n);
        for (int i = 0; i < n; ++i) f[i] = i;
        return f;
    };
    int n1 = static_cast<int>(p1.size()), n2 = static_cast<int>(p2.size());
    HkInput all_common{unit, p1, unit, p2, ident(n1), ident(n2)};
    HkInput all_personal{p1, unit, p2, unit, ident(n1), ident(n2)};
    HkInput mixed1{p1, unit, unit, p2, ident(n1), ident(n2)}; // sender 1 personal, sender 2 common
    HkInput mixed2{unit, p1, p2, unit, ident(n1), ident(n2)};
    return {all_common, all_personal, mixed1, mixed2};
}

// Random splits with auxiliary alphabets matching the channel inputs.
inline std::vector<HkInput> hk_random_inputs(const CcqqChannel& ch, int count, std::uint64_t seed) {
    int n1 = ch.alphabets()[0], n2 = ch.alphabets()[1];
    std::vector<HkInput> out;
    out.reserve(count);
    for (int t = 0; t < count; ++t) {
        Rng r = Rng::derived(seed, static_cast<std::uint64_t>(t));
        HkInput hk;
        hk.p_u1 = r.dirichlet(n1);
        hk.p_w1 = r.dirichlet(n1);
        hk.p_u2 = r.dirichlet(n2);
        hk.p_w2 = r.dirichlet(n2);
        hk.f1.resize(static_cast<std::size_t>(n1) * n1);
        hk.f2.resize(static_cast<std::size_t>(n2) * n2);
        for (auto& v : hk.f1) v = static_cast<int>(r.below(n1));
        for (auto& v : hk.f2) v = static_cast<int>(r.below(n2));
        out.push_back(std::move(hk));
    }
    return out;
}

// Outer bound: per-receiver personal bounds plus a sum bound through the
// joint output, convexified over sampled distributions.
inline RateRegion2D sato_outer(const CcqqChannel& ch, const DistSampler& sampler) {
    detail::MarginalCache cache(ch);
    std::vector<RateRegion2D> parts;
    for (const auto& [p1, p2] : sampler.sample(ch.alphabets()[0], ch.alphabets()[1])) {
        auto e = cache.evaluate(p1, p2);
        // Joint-output mutual information I(X1X2;B1B2).
        int d = ch.joint_dim();
        Mat avg = Mat::Zero(d, d);
        double h_cond = 0.0;
        for (int x1 = 0; x1 < ch.alphabets()[0]; ++x1)
            for (int x2 = 0; x2 < ch.alphabets()[1]; ++x2) {
                double w = p1[x1] * p2[x2];
                const Mat& rho = ch.state(x1, x2);
                avg += w * rho;
                if (w > 0.0) h_cond += w * von_neumann_entropy(rho);
            }
        double joint_mi = von_neumann_entropy(avg) - h_cond;
        HalfspaceSystem sys;
        sys.vars = {"R1", "R2"};
        sys.add_row({1.0, 0.0}, e.b1_x2 - e.b1_x1x2);
        sys.add_row({0.0, 1.0}, e.b2_x1 - e.b2_x1x2);
        sys.add_row({1.0, 1.0}, joint_mi);
        parts.push_back(to_region2d(sys));
    }
    return union_hull(parts);
}

// Corner points reachable by successive decoding without rate splitting.
inline std::vector<RatePoint> sd_points(const CcqqChannel& ch, const std::vector<double>& p1,
                                        const std::vector<double>& p2) {
    CqEnsemble e1 = mac2_ensemble(induced_mac(ch, 1), p1, p2);
    CqEnsemble e2 = mac2_ensemble(induced_mac(ch, 2), p1, p2);
    double i_x1_b1_g2 = mutual_info(e1, {"X"}, {"Y"});
    double i_x2_b1 = mutual_info(e1, {"Y"}, {});
    double i_x2_b1_g1 = mutual_info(e1, {"Y"}, {"X"});
    double i_x1_b1 = mutual_info(e1, {"X"}, {});
    double i_x1_b2 = mutual_info(e2, {"X"}, {});
    double i_x1_b2_g2 = mutual_info(e2, {"X"}, {"Y"});
    double i_x2_b2 = mutual_info(e2, {"Y"}, {});
    double i_x2_b2_g1 = mutual_info(e2, {"Y"}, {"X"});
    (void)i_x2_b1_g1;
    (void)i_x1_b2_g2;
    std::vector<RatePoint> pts;
    pts.push_back({i_x1_b1_g2, std::min(i_x2_b1, i_x2_b2)});
    pts.push_back({std::min(i_x1_b1_g2, i_x1_b2), std::min(i_x2_b1, i_x2_b2_g1)});
    pts.push_back({std::min(i_x1_b1, i_x1_b2), i_x2_b2_g1});
    pts.push_back({i_x1_b1, i_x2_b2});
    return pts;
}

// --- Gaussian rate-splitting evaluations ---

struct GaussSplit {
    double l1 = 1.0; // power fraction of sender 1 routed to the common stream
    double l2 = 1.0;
};

inline std::vector<GaussSplit> gauss_split_grid(double step) {
    if (step <= 0.0 || step > 1.0) throw input_error("gauss_split_grid: step must be in (0,1]");
    int m = static_cast<int>(std::llround(1.0 / step));
    std::vector<GaussSplit> out;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j)
            out.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
    return out;
}

inline std::vector<RatePoint> gaussian_sd_points(const GaussianIc& ic) {
    double i_x1_b1_g2 = gauss_mi(ic, GaussTerm::x1_b1_given_x2);
    double i_x2_b1 = gauss_mi(ic, GaussTerm::x2_b1);
    double i_x2_b2 = gauss_mi(ic, GaussTerm::x2_b2);
    double i_x1_b1 = gauss_mi(ic, GaussTerm::x1_b1);
    double i_x1_b2 = gauss_mi(ic, GaussTerm::x1_b2);
    double i_x2_b2_g1 = gauss_mi(ic, GaussTerm::x2_b2_given_x1);
    std::vector<RatePoint> pts;
    pts.push_back({i_x1_b1_g2, std::min(i_x2_b1, i_x2_b2)});
    pts.push_back({std::min(i_x1_b1_g2, i_x1_b2), std::min(i_x2_b1, i_x2_b2_g1)});
    pts.push_back({std::min(i_x1_b1, i_x1_b2), i_x2_b2_g1});
    pts.push_back({i_x1_b1, i_x2_b2});
    return pts;
}

namespace detail {

struct GaussStreams {
    // Stream powers at one receiver: personal own, common own, common other,
    // plus the effective noise floor (other sender's personal stream).
    double personal, common_own, common_other, noise;
};

inline GaussStreams receiver_streams(const GaussianIc& ic, const GaussSplit& sp, int receiver) {
    if (receiver == 1)
        return {(1.0 - sp.l1) * ic.snr1, sp.l1 * ic.snr1, sp.l2 * ic.inr1,
                1.0 + (1.0 - sp.l2) * ic.inr1};
    return {(1.0 - sp.l2) * ic.snr2, sp.l2 * ic.snr2, sp.l1 * ic.inr2,
            1.0 + (1.0 - sp.l1) * ic.inr2};
}

// Successive-decoding rates for the three streams at one receiver under a
// decoding order (permutation of {personal, common_own, common_other}).
inline std::array<double, 3> sd_rates(const GaussStreams& st, const std::array<int, 3>& order) {
    std::array<double, 3> powers = {st.personal, st.common_own, st.common_other};
    std::array<double, 3> rates{};
    double interference = 0.0;
    for (int k = 2; k >= 0; --k) interference += powers[order[k]]; // all streams
    for (int k = 0; k < 3; ++k) {
        int s = order[k];
        interference -= powers[s];
        rates[s] = gauss_cap(powers[s] / (st.noise + interference));
    }
    return rates;
}

inline const std::vector<std::array<int, 3>>& stream_orders() {
    static const std::vector<std::array<int, 3>> orders = {
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    return orders;
}

} // namespace detail

// Rate splitting with successive decoding: every pair of per-receiver
// decoding orders yields one rate point; common-stream rates take the worse
// receiver.
inline std::vector<RatePoint> gaussian_sd_rs(const GaussianIc& ic, const std::vector<GaussSplit>& splits) {
    std::vector<RatePoint> out;
    for (const auto& sp : splits) {
        detail::GaussStreams st1 = detail::receiver_streams(ic, sp, 1);
        detail::GaussStreams st2 = detail::receiver_streams(ic, sp, 2);
        for (const auto& o1 : detail::stream_orders())
            for (const auto& o2 : detail::stream_orders()) {
                auto r1 = detail::sd_rates(st1, o1);
                auto r2 = detail::sd_rates(st2, o2);
                // Index 1 is the receiver's own common stream, 2 the other
                // sender's common stream.
                double t1 = std::min(r1[1], r2[2]);
                double t2 = std::min(r1[2], r2[1]);
                out.push_back({r1[0] + t1, r2[0] + t2});
            }
    }
    return out;
}

// Gaussian rate-splitting region: the fourteen bounds evaluated in closed
// form per split, projected and convexified over the split grid.
inline RateRegion2D gaussian_hk(const GaussianIc& ic, const std::vector<GaussSplit>& splits) {
    std::vector<RateRegion2D> parts;
    for (const auto& sp : splits) {
        detail::GaussStreams st1 = detail::receiver_streams(ic, sp, 1);
        detail::GaussStreams st2 = detail::receiver_streams(ic, sp, 2);
        HalfspaceSystem sys;
        sys.vars = {"R1", "T1", "R2", "T2"};
        auto add1 = [&](double s, double t1, double t2, double rhs) {
            sys.add_row({s, t1 - s, 0.0, t2}, rhs);
        };
        auto add2 = [&](double s, double t2, double t1, double rhs) {
            sys.add_row({0.0, t1, s, t2 - s}, rhs);
        };
        auto bound = [&](const detail::GaussStreams& st, double s, double town, double tother) {
            return gauss_cap((s * st.personal + town * st.common_own + tother * st.common_other) / st.noise);
        };
        add1(1, 0, 0, bound(st1, 1, 0, 0));
        add1(0, 1, 0, bound(st1, 0, 1, 0));
        add1(0, 0, 1, bound(st1, 0, 0, 1));
        add1(1, 1, 0, bound(st1, 1, 1, 0));
        add1(1, 0, 1, bound(st1, 1, 0, 1));
        add1(0, 1, 1, bound(st1, 0, 1, 1));
        add1(1, 1, 1, bound(st1, 1, 1, 1));
        add2(1, 0, 0, bound(st2, 1, 0, 0));
        add2(0, 1, 0, bound(st2, 0, 1, 0));
        add2(0, 0, 1, bound(st2, 0, 0, 1));
        add2(1, 1, 0, bound(st2, 1, 1, 0));
        add2(1, 0, 1, bound(st2, 1, 0, 1));
        add2(0, 1, 1, bound(st2, 0, 1, 1));
        add2(1, 1, 1, bound(st2, 1, 1, 1));
        sys.add_row({-1.0, 1.0, 0.0, 0.0}, 0.0);
        sys.add_row({0.0, 0.0, -1.0, 1.0}, 0.0);
        parts.push_back(to_region2d(fm_eliminate(fm_eliminate(sys, "T1"), "T2")));
    }
    return union_hull(parts);
}

} // namespace qic
