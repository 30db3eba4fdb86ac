#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qic/channels.hpp"
#include "qic/parallel.hpp"
#include "qic/rng.hpp"

namespace qic {

inline constexpr double kSlackTol = 1e-9;

struct ConditionReport {
    bool holds = false;
    double min_slack = 0.0;
    std::vector<double> argmin_p1, argmin_p2;
    double grid_step = 0.0;
    bool refined = false;
    std::string method;
};

namespace detail {

// Cached single-receiver marginals of an interference channel; evaluates the
// eight conditional output entropies at a product input distribution.
struct MarginalCache {
    std::vector<int> alphabets;
    std::vector<Mat> b1, b2; // flat-indexed by (x1,x2)

    explicit MarginalCache(const CcqqChannel& ch) : alphabets(ch.alphabets()) {
        for (const Mat& m : ch.states()) {
            b1.push_back(partial_trace(m, ch.dims(), {0}));
            b2.push_back(partial_trace(m, ch.dims(), {1}));
        }
    }

    struct Entropies {
        double b1, b2;              // H(B1), H(B2)
        double b1_x1, b1_x2;        // H(B1|X1), H(B1|X2)
        double b2_x1, b2_x2;        // H(B2|X1), H(B2|X2)
        double b1_x1x2, b2_x1x2;    // H(B1|X1X2), H(B2|X1X2)
    };

    Entropies evaluate(const std::vector<double>& p1, const std::vector<double>& p2) const {
        int n1 = alphabets[0], n2 = alphabets[1];
        int d1 = static_cast<int>(b1[0].rows()), d2 = static_cast<int>(b2[0].rows());
        Mat avg1 = Mat::Zero(d1, d1), avg2 = Mat::Zero(d2, d2);
        Entropies e{};
        std::vector<Mat> row1(n1, Mat::Zero(d1, d1)), row2(n1, Mat::Zero(d2, d2));
        std::vector<Mat> col1(n2, Mat::Zero(d1, d1)), col2(n2, Mat::Zero(d2, d2));
        for (int x1 = 0; x1 < n1; ++x1)
            for (int x2 = 0; x2 < n2; ++x2) {
                std::size_t flat = flat_index({x1, x2}, alphabets);
                double w = p1[x1] * p2[x2];
                e.b1_x1x2 += w * von_neumann_entropy(b1[flat]);
                e.b2_x1x2 += w * von_neumann_entropy(b2[flat]);
                row1[x1] += p2[x2] * b1[flat];
                row2[x1] += p2[x2] * b2[flat];
                col1[x2] += p1[x1] * b1[flat];
                col2[x2] += p1[x1] * b2[flat];
            }
        for (int x1 = 0; x1 < n1; ++x1) {
            avg1 += p1[x1] * row1[x1];
            avg2 += p1[x1] * row2[x1];
            e.b1_x1 += p1[x1] * von_neumann_entropy(row1[x1]);
            e.b2_x1 += p1[x1] * von_neumann_entropy(row2[x1]);
        }
        for (int x2 = 0; x2 < n2; ++x2) {
            e.b1_x2 += p2[x2] * von_neumann_entropy(col1[x2]);
            e.b2_x2 += p2[x2] * von_neumann_entropy(col2[x2]);
        }
        e.b1 = von_neumann_entropy(avg1);
        e.b2 = von_neumann_entropy(avg2);
        return e;
    }
};

using SlackFn = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

struct SlackScan {
    double min_slack;
    std::vector<double> p1, p2;
};

// Exhaustive scan over product distributions of two binary inputs.
inline SlackScan binary_grid_scan(const SlackFn& slack, double step) {
    int n = static_cast<int>(std::llround(1.0 / step));
    std::vector<double> values(static_cast<std::size_t>(n + 1) * (n + 1));
    parallel_for(static_cast<std::size_t>(n + 1), [&](std::size_t i) {
        double a = std::min(1.0, static_cast<double>(i) * step);
        for (int j = 0; j <= n; ++j) {
            double b = std::min(1.0, static_cast<double>(j) * step);
            values[i * (n + 1) + j] = slack({a, 1.0 - a}, {b, 1.0 - b});
        }
    });
    SlackScan best{values[0], {0.0, 1.0}, {0.0, 1.0}};
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            double v = values[static_cast<std::size_t>(i) * (n + 1) + j];
            if (v < best.min_slack) {
                double a = std::min(1.0, i * step), b = std::min(1.0, j * step);
                best = SlackScan{v, {a, 1.0 - a}, {b, 1.0 - b}};
            }
        }
    return best;
}

inline SlackScan binary_refine(const SlackFn& slack, const SlackScan& coarse, double step) {
    double fine = step / 10.0;
    double a0 = coarse.p1[0], b0 = coarse.p2[0];
    SlackScan best = coarse;
    for (int i = -10; i <= 10; ++i) {
        double a = a0 + i * fine;
        if (a < 0.0 || a > 1.0) continue;
        for (int j = -10; j <= 10; ++j) {
            double b = b0 + j * fine;
            if (b < 0.0 || b > 1.0) continue;
            double v = slack({a, 1.0 - a}, {b, 1.0 - b});
            if (v < best.min_slack) best = SlackScan{v, {a, 1.0 - a}, {b, 1.0 - b}};
        }
    }
    return best;
}

// Larger alphabets: seeded flat-Dirichlet sampling plus grids on every
// two-symbol face of each simplex, then jitter refinement around the best.
inline SlackScan sampled_scan(const SlackFn& slack, int n1, int n2, double step, std::uint64_t seed) {
    SlackScan best{std::numeric_limits<double>::infinity(), {}, {}};
    auto consider = [&](const std::vector<double>& p1, const std::vector<double>& p2) {
        double v = slack(p1, p2);
        if (v < best.min_slack) best = SlackScan{v, p1, p2};
    };
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
        Rng r = Rng::derived(seed, static_cast<std::uint64_t>(t));
        consider(r.dirichlet(n1), r.dirichlet(n2));
    }
    int steps = static_cast<int>(std::llround(1.0 / step));
    auto edge = [&](int n, int a, int b, double w) {
        std::vector<double> p(n, 0.0);
        p[a] = w;
        p[b] = 1.0 - w;
        return p;
    };
    for (int a1 = 0; a1 < n1; ++a1)
        for (int b1 = a1; b1 < n1; ++b1)
            for (int a2 = 0; a2 < n2; ++a2)
                for (int b2 = a2; b2 < n2; ++b2)
                    for (int i = 0; i <= steps; ++i)
                        for (int j = 0; j <= steps; ++j)
                            consider(edge(n1, a1, b1, std::min(1.0, i * step)),
                                     edge(n2, a2, b2, std::min(1.0, j * step)));
    // Local jitter refinement with shrinking scale.
    Rng r = Rng::derived(seed, 0xfefefefeull);
    for (int round = 0; round < 3; ++round) {
        double scale = step / std::pow(10.0, round);
        SlackScan base = best;
        for (int t = 0; t < 200; ++t) {
            auto jitter = [&](const std::vector<double>& p) {
                std::vector<double> q(p.size());
                double s = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) {
                    q[i] = std::max(0.0, p[i] + scale * r.normal());
                    s += q[i];
                }
                if (s <= 0.0) return p;
                for (double& x : q) x /= s;
                return q;
            };
            consider(jitter(base.p1), jitter(base.p2));
        }
    }
    return best;
}

inline ConditionReport run_condition_check(const CcqqChannel& ch, const SlackFn& slack, double grid_step,
                                           std::uint64_t seed) {
    if (grid_step <= 0.0 || grid_step > 0.5)
        throw input_error("condition check: grid step must be in (0, 0.5]");
    int n1 = ch.alphabets()[0], n2 = ch.alphabets()[1];
    ConditionReport rep;
    rep.grid_step = grid_step;
    SlackScan best{};
    if (n1 == 2 && n2 == 2) {
        best = binary_grid_scan(slack, grid_step);
        best = binary_refine(slack, best, grid_step);
        rep.method = "grid+refine";
        rep.refined = true;
    } else {
        best = sampled_scan(slack, n1, n2, grid_step, seed);
        rep.method = "dirichlet+edge-grid+jitter";
        rep.refined = true;
    }
    rep.min_slack = best.min_slack;
    rep.argmin_p1 = best.p1;
    rep.argmin_p2 = best.p2;
    rep.holds = best.min_slack >= -kSlackTol;
    return rep;
}

} // namespace detail

// Very strong interference: each receiver learns more about the other
// sender's input than that sender's own receiver does with full side
// information. Certified by exhaustive scan over product distributions.
inline ConditionReport check_very_strong(const CcqqChannel& ch, double grid_step = 0.02,
                                         std::uint64_t seed = 0x51c0ffee) {
    detail::MarginalCache cache(ch);
    auto slack = [cache](const std::vector<double>& p1, const std::vector<double>& p2) {
        auto e = cache.evaluate(p1, p2);
        double s1 = (e.b2 - e.b2_x1) - (e.b1_x2 - e.b1_x1x2);
        double s2 = (e.b1 - e.b1_x2) - (e.b2_x1 - e.b2_x1x2);
        return std::min(s1, s2);
    };
    return detail::run_condition_check(ch, slack, grid_step, seed);
}

// Strong interference: cross observation is at least as informative with the
// interfering input given on both sides.
inline ConditionReport check_strong(const CcqqChannel& ch, double grid_step = 0.02,
                                    std::uint64_t seed = 0x51c0ffee) {
    detail::MarginalCache cache(ch);
    auto slack = [cache](const std::vector<double>& p1, const std::vector<double>& p2) {
        auto e = cache.evaluate(p1, p2);
        double s1 = (e.b2_x2 - e.b2_x1x2) - (e.b1_x2 - e.b1_x1x2);
        double s2 = (e.b1_x1 - e.b1_x1x2) - (e.b2_x1 - e.b2_x1x2);
        return std::min(s1, s2);
    };
    return detail::run_condition_check(ch, slack, grid_step, seed);
}

// Closed-form output entropies of the partial-swap channel at a product
// distribution; p1 and p2 are the probabilities of input symbol 0.
struct ThetaSwapEntropies {
    double b1;        // H(B1)
    double b2;        // H(B2)
    double b1_x2;     // H(B1|X2)
    double b2_x1;     // H(B2|X1)
    double b1_x1x2;   // H(B1|X1X2)
    double b2_x1x2;   // H(B2|X1X2)
};

inline ThetaSwapEntropies theta_swap_entropies(double theta, double p1, double p2) {
    if (p1 < -kPsdTol || p1 > 1.0 + kPsdTol || p2 < -kPsdTol || p2 > 1.0 + kPsdTol)
        throw input_error("theta_swap_entropies: probabilities outside [0,1]");
    double c2 = std::cos(theta) * std::cos(theta);
    double s2 = 1.0 - c2;
    double q1 = 1.0 - p1, q2 = 1.0 - p2;
    ThetaSwapEntropies e{};
    double cross = p1 * q2 + q1 * p2;
    e.b1_x1x2 = cross * binary_entropy(c2);
    e.b2_x1x2 = e.b1_x1x2;
    e.b1 = binary_entropy(p1 + (q1 * p2 - p1 * q2) * s2);
    e.b2 = binary_entropy(p2 + (p1 * q2 - q1 * p2) * s2);
    e.b1_x2 = p2 * binary_entropy(q1 * c2) + q2 * binary_entropy(p1 * c2);
    e.b2_x1 = p1 * binary_entropy(q2 * c2) + q1 * binary_entropy(p2 * c2);
    return e;
}

} // namespace qic
