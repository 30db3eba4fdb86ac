#include <catch2/catch_amalgamated.hpp>

#include <qic/regions.hpp>
#include <qic/rng.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace qic;

namespace {

CcqqChannel parallel_pipes() {
    std::vector<double> probs(16, 0.0);
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2) probs[flat_index({x1, x2, x1, x2}, {2, 2, 2, 2})] = 1.0;
    return classical_embed(2, 2, 2, 2, probs);
}

std::vector<double> uni(int n) { return std::vector<double>(n, 1.0 / n); }

DistSampler uniform_only(int n1, int n2) {
    return DistSampler::explicit_sampler({{uni(n1), uni(n2)}});
}

// Intersection of the two induced MAC pentagons at one fixed distribution.
RateRegion2D pentagon_intersection(const CcqqChannel& ch, const std::vector<double>& p1,
                                   const std::vector<double>& p2) {
    HalfspaceSystem sys = mac2_system(induced_mac(ch, 1), p1, p2);
    HalfspaceSystem other = mac2_system(induced_mac(ch, 2), p1, p2);
    for (const auto& r : other.rows) sys.rows.push_back(r);
    return to_region2d(sys);
}

void require_subset(const RateRegion2D& inner, const RateRegion2D& outer, double tol) {
    if (inner.empty) return;
    REQUIRE_FALSE(outer.empty);
    for (const auto& p : inner.frontier) REQUIRE(contains(outer, p[0], p[1], tol));
    REQUIRE(contains(outer, inner.xmax, 0.0, tol));
    REQUIRE(contains(outer, 0.0, inner.ymax, tol));
}

void require_same_region(const RateRegion2D& a, const RateRegion2D& b, double tol) {
    REQUIRE(a.empty == b.empty);
    if (a.empty) return;
    REQUIRE(a.xmax == Catch::Approx(b.xmax).margin(tol));
    REQUIRE(a.ymax == Catch::Approx(b.ymax).margin(tol));
    double xr = std::min(a.xmax, b.xmax);
    for (int i = 0; i <= 64; ++i) {
        double x = xr * i / 64.0;
        REQUIRE(frontier_height(a, x) == Catch::Approx(frontier_height(b, x)).margin(tol));
    }
}

} // namespace

TEST_CASE("distribution samplers", "[regions]") {
    auto grid = DistSampler::grid_sampler(0.5).sample(2, 2);
    REQUIRE(grid.size() == 9);
    REQUIRE(DistSampler::simplex_grid(3, 0.5).size() == 6);
    for (const auto& d : DistSampler::simplex_grid(3, 0.25)) {
        double s = 0.0;
        for (double v : d) s += v;
        REQUIRE(s == Catch::Approx(1.0).margin(1e-12));
    }
    REQUIRE_THROWS_AS(DistSampler::grid_sampler(0.0).sample(2, 2), input_error);

    auto r1 = DistSampler::random_sampler(10, 7).sample(2, 3);
    auto r2 = DistSampler::random_sampler(10, 7).sample(2, 3);
    REQUIRE(r1.size() == 10);
    for (std::size_t i = 0; i < r1.size(); ++i) {
        REQUIRE(r1[i].first == r2[i].first);
        REQUIRE(r1[i].second == r2[i].second);
        REQUIRE(r1[i].first.size() == 2);
        REQUIRE(r1[i].second.size() == 3);
    }

    auto ex = DistSampler::explicit_sampler({{uni(2), uni(2)}});
    REQUIRE(ex.sample(2, 2).size() == 1);
    REQUIRE_THROWS_AS(ex.sample(3, 2), input_error);
}

TEST_CASE("two sender achievable system matches Shannon oracles", "[regions]") {
    std::vector<double> probs(8, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) probs[flat_index({x, y, x ^ y}, {2, 2, 2})] = 1.0;
    CcqMac adder = classical_embed_mac({2, 2}, 2, probs);

    HalfspaceSystem sys = mac2_system(adder, {0.7, 0.3}, uni(2));
    REQUIRE(sys.vars == std::vector<std::string>{"R1", "R2"});
    REQUIRE(sys.rows[0].b == Catch::Approx(binary_entropy(0.3)).margin(1e-10));
    REQUIRE(sys.rows[1].b == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(sys.rows[2].b == Catch::Approx(1.0).margin(1e-10));

    // Constant output carries nothing.
    std::vector<double> flat(8, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) flat[flat_index({x, y, 0}, {2, 2, 2})] = 1.0;
    CcqMac constant = classical_embed_mac({2, 2}, 2, flat);
    for (const auto& r : mac2_system(constant, uni(2), uni(2)).rows)
        REQUIRE(std::abs(r.b) < 1e-10);
}

TEST_CASE("three sender system on the parity channel", "[regions]") {
    CcqMac mac = bb84_cccq();
    HalfspaceSystem sys = mac3_system(mac, uni(2), uni(2), uni(2));
    const double hz = binary_entropy(std::cos(std::numbers::pi / 8) * std::cos(std::numbers::pi / 8));
    std::vector<double> want = {1.0, 1.0, hz, 1.0, 1.0, 1.0, 1.0};
    REQUIRE(sys.rows.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        REQUIRE(sys.rows[i].b == Catch::Approx(want[i]).margin(1e-9));
}

TEST_CASE("min entropy variant of the three sender system", "[regions]") {
    CcqMac mac = bb84_cccq();
    HalfspaceSystem minsys = minentropy3_system(mac, uni(2), uni(2), uni(2));
    HalfspaceSystem shannon = mac3_system(mac, uni(2), uni(2), uni(2));
    const double hz = binary_entropy(std::cos(std::numbers::pi / 8) * std::cos(std::numbers::pi / 8));
    std::vector<double> want = {1.0, 1.0, hz, 1.0, 1.0, 1.0, 1.0};
    REQUIRE(minsys.rows.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        REQUIRE(minsys.rows[i].b == Catch::Approx(want[i]).margin(1e-9));

    // Min-entropy personal and pair bounds never exceed their Shannon versions.
    REQUIRE(minsys.rows[0].b <= shannon.rows[0].b + 1e-9);
    REQUIRE(minsys.rows[1].b <= shannon.rows[1].b + 1e-9);
    REQUIRE(minsys.rows[3].b <= shannon.rows[3].b + 1e-9);
    REQUIRE(minsys.rows[4].b <= shannon.rows[5].b + 1e-9);

    REQUIRE_THROWS_AS(minentropy3_system(mac, uni(2), uni(2), uni(2), {0, 0, 1}), input_error);

    // Identical mixed states: averaging hides nothing, so the min-entropy
    // bound goes negative and must be kept as an infeasibility witness.
    std::vector<Mat> same(8, [] {
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = cx(0.9, 0);
        m(1, 1) = cx(0.1, 0);
        return m;
    }());
    CcqMac dull({2, 2, 2}, 2, same);
    HalfspaceSystem neg = minentropy3_system(dull, uni(2), uni(2), uni(2));
    REQUIRE(neg.rows[0].b == Catch::Approx(-std::log2(0.9) - binary_entropy(0.9)).margin(1e-9));
    REQUIRE(neg.rows[0].b < -0.1);
    REQUIRE_FALSE(neg.feasible({0.0, 0.0, 0.0}));
}

TEST_CASE("simultaneous decoding inner bound", "[regions]") {
    CcqqChannel ch = theta_swap(1.2);
    const double corner = 0.0689818748985;
    RateRegion2D sim = sim_inner_bound(ch, DistSampler::grid_sampler(0.25));
    REQUIRE(contains(sim, corner - 1e-9, corner - 1e-9));
    REQUIRE(sim.xmax == Catch::Approx(corner).margin(1e-9));
    REQUIRE(sim.ymax == Catch::Approx(corner).margin(1e-9));

    // Full swap: both receivers hear only the other sender, nothing flows.
    RateRegion2D dead = sim_inner_bound(theta_swap(std::numbers::pi / 2),
                                        DistSampler::grid_sampler(0.25));
    REQUIRE(dead.xmax + dead.ymax <= 1e-6);

    // Independent pipes: requiring both receivers to decode both messages
    // kills the region even though each pipe is perfect.
    RateRegion2D pipes = sim_inner_bound(parallel_pipes(), DistSampler::grid_sampler(0.25));
    REQUIRE(pipes.xmax <= 1e-9);
    REQUIRE(pipes.ymax <= 1e-9);
}

TEST_CASE("successive decoding corner points", "[regions]") {
    CcqqChannel ch = theta_swap(1.2);
    auto pts = sd_points(ch, uni(2), uni(2));
    REQUIRE(pts.size() == 4);
    const double a = 0.0689818748985;
    const double b = 0.0124723865967;
    REQUIRE(pts[0].r1 == Catch::Approx(a).margin(1e-9));
    REQUIRE(pts[0].r2 == Catch::Approx(b).margin(1e-9));
    REQUIRE(pts[1].r1 == Catch::Approx(a).margin(1e-9));
    REQUIRE(pts[1].r2 == Catch::Approx(a).margin(1e-9));
    REQUIRE(pts[2].r1 == Catch::Approx(b).margin(1e-9));
    REQUIRE(pts[2].r2 == Catch::Approx(a).margin(1e-9));
    REQUIRE(pts[3].r1 == Catch::Approx(b).margin(1e-9));
    REQUIRE(pts[3].r2 == Catch::Approx(b).margin(1e-9));

    // The double conditional corner always survives simultaneous decoding.
    Rng rng(61);
    for (int t = 0; t < 20; ++t) {
        double theta = rng.uniform(0.0, 2 * std::numbers::pi);
        auto p1 = rng.dirichlet(2);
        auto p2 = rng.dirichlet(2);
        CcqqChannel c = theta_swap(theta);
        auto sd = sd_points(c, p1, p2);
        RateRegion2D pent = pentagon_intersection(c, p1, p2);
        REQUIRE(contains(pent, sd[1].r1, sd[1].r2, 1e-9));
    }

    // Pipes: treating interference as noise reaches (1,1), far outside the
    // simultaneous-decoding region.
    CcqqChannel pipes = parallel_pipes();
    auto psd = sd_points(pipes, uni(2), uni(2));
    REQUIRE(psd[3].r1 == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(psd[3].r2 == Catch::Approx(1.0).margin(1e-9));
    RateRegion2D sim = sim_inner_bound(pipes, uniform_only(2, 2));
    REQUIRE_FALSE(contains(sim, psd[3].r1, psd[3].r2, 1e-6));
}

TEST_CASE("very strong interference capacity", "[regions]") {
    CcqqChannel ch = theta_swap(1.2);
    DistSampler grid = DistSampler::grid_sampler(0.25);
    RateRegion2D cap = vsi_capacity(ch, grid);
    const double corner = 0.0689818748985;
    REQUIRE(contains(cap, corner - 1e-9, corner - 1e-9));

    // The reach on each axis is the best conditional information on the grid.
    double best = 0.0;
    for (const auto& [p1, p2] : grid.sample(2, 2)) {
        auto e = theta_swap_entropies(1.2, p1[1], p2[1]);
        best = std::max(best, e.b1_x2 - e.b1_x1x2);
    }
    REQUIRE(cap.xmax == Catch::Approx(best).margin(1e-9));

    REQUIRE_THROWS_AS(vsi_capacity(theta_swap(0.5), grid), condition_violation);
    try {
        vsi_capacity(theta_swap(0.5), grid);
    } catch (const condition_violation& e) {
        REQUIRE_FALSE(e.report.holds);
        REQUIRE(e.report.min_slack < 0.0);
    }

    // A caller-supplied verdict short-circuits the scan.
    ConditionReport forced;
    forced.holds = true;
    REQUIRE_NOTHROW(vsi_capacity(theta_swap(0.5), grid, &forced));
}

TEST_CASE("strong capacity agrees with the very strong region here", "[regions]") {
    CcqqChannel ch = theta_swap(1.2);
    DistSampler grid = DistSampler::grid_sampler(0.25);
    require_same_region(strong_capacity(ch, grid), vsi_capacity(ch, grid), 1e-9);
    REQUIRE_THROWS_AS(strong_capacity(parallel_pipes(), grid), condition_violation);
}

TEST_CASE("mirror swap angles give the same capacity region", "[regions]") {
    DistSampler grid = DistSampler::grid_sampler(0.25);
    RateRegion2D a = vsi_capacity(theta_swap(1.2), grid);
    RateRegion2D b = vsi_capacity(theta_swap(std::numbers::pi - 1.2), grid);
    require_same_region(a, b, 1e-6);
}

TEST_CASE("rate splitting degenerations", "[regions]") {
    CcqqChannel ch = theta_swap(1.2);
    auto canon = hk_canonical_inputs(uni(2), uni(2));
    REQUIRE(canon.size() == 4);

    // All-common: both receivers decode everything, exactly the pentagon
    // intersection at the same distribution.
    RateRegion2D all_common = hk_region(ch, canon[0]);
    require_same_region(all_common, pentagon_intersection(ch, uni(2), uni(2)), 1e-9);

    // All-personal on clean pipes: the full unit square.
    CcqqChannel pipes = parallel_pipes();
    auto pc = hk_canonical_inputs(uni(2), uni(2));
    RateRegion2D personal = hk_region(pipes, pc[1]);
    REQUIRE(personal.xmax == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(personal.ymax == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(contains(personal, 1.0 - 1e-9, 1.0 - 1e-9));
}

TEST_CASE("rate splitting hull dominates simultaneous decoding", "[regions]") {
    CcqqChannel ch = theta_swap(1.2);
    RateRegion2D sim = pentagon_intersection(ch, uni(2), uni(2));
    RateRegion2D hull = hk_hull(ch, hk_canonical_inputs(uni(2), uni(2)));
    require_subset(sim, hull, 1e-9);

    // Adding inputs can only grow the hull.
    auto more = hk_canonical_inputs(uni(2), uni(2));
    auto extra = hk_random_inputs(ch, 4, 99);
    more.insert(more.end(), extra.begin(), extra.end());
    RateRegion2D bigger = hk_hull(ch, more);
    require_subset(hull, bigger, 1e-9);

    auto again = hk_random_inputs(ch, 4, 99);
    REQUIRE(extra[0].p_u1 == again[0].p_u1);
    REQUIRE(extra[2].f1 == again[2].f1);
}

TEST_CASE("outer bound contains the inner bounds", "[regions]") {
    Rng rng(62);
    for (double theta : {0.6, 1.2, 2.4}) {
        CcqqChannel ch = theta_swap(theta);
        DistSampler grid = DistSampler::grid_sampler(0.25);
        RateRegion2D sim = sim_inner_bound(ch, grid);
        RateRegion2D sato = sato_outer(ch, grid);
        require_subset(sim, sato, 1e-7);
    }

    // Pipes: the outer bound is the whole unit square.
    RateRegion2D sato = sato_outer(parallel_pipes(), uniform_only(2, 2));
    REQUIRE(sato.xmax == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(sato.ymax == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(contains(sato, 1.0 - 1e-9, 1.0 - 1e-9));
}

TEST_CASE("gaussian successive decoding corners", "[regions]") {
    GaussianIc ic{1.7, 2.0, 3.4, 4.0};
    auto pts = gaussian_sd_points(ic);
    REQUIRE(pts.size() == 4);
    REQUIRE(pts[0].r1 == Catch::Approx(gauss_cap(1.7)).margin(1e-12));
    REQUIRE(pts[0].r2 == Catch::Approx(gauss_cap(2.0 / 5.0)).margin(1e-12));
    REQUIRE(pts[1].r1 == Catch::Approx(gauss_cap(4.0 / 3.0)).margin(1e-12));
    REQUIRE(pts[1].r2 == Catch::Approx(gauss_cap(3.4 / 2.7)).margin(1e-12));
    REQUIRE(pts[2].r1 == Catch::Approx(gauss_cap(1.7 / 4.4)).margin(1e-12));
    REQUIRE(pts[2].r2 == Catch::Approx(gauss_cap(2.0)).margin(1e-12));
    REQUIRE(pts[3].r1 == Catch::Approx(0.235652859463).margin(1e-9));
    REQUIRE(pts[3].r2 == Catch::Approx(0.242713413585).margin(1e-9));
}

TEST_CASE("degenerate splits recover the corner points", "[regions]") {
    GaussianIc ic{1.7, 2.0, 3.4, 4.0};
    std::vector<GaussSplit> degenerate = {{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}};
    auto rs = gaussian_sd_rs(ic, degenerate);
    REQUIRE(rs.size() == 4 * 36);
    for (const auto& want : gaussian_sd_points(ic)) {
        double best = 1e9;
        for (const auto& got : rs)
            best = std::min(best, std::max(std::abs(got.r1 - want.r1), std::abs(got.r2 - want.r2)));
        REQUIRE(best <= 1e-9);
    }
}

TEST_CASE("gaussian rate splitting region", "[regions]") {
    GaussianIc ic{1.7, 2.0, 3.4, 4.0};
    auto splits = gauss_split_grid(0.25);
    REQUIRE(splits.size() == 25);
    REQUIRE_THROWS_AS(gauss_split_grid(0.0), input_error);

    RateRegion2D hk = gaussian_hk(ic, splits);
    for (const auto& p : gaussian_sd_rs(ic, splits))
        REQUIRE(contains(hk, p.r1, p.r2, 1e-6));

    // No cross talk: the region is the clean rectangle whatever the split.
    GaussianIc clean{1.7, 2.0, 0.0, 0.0};
    RateRegion2D rect = gaussian_hk(clean, splits);
    REQUIRE(rect.xmax == Catch::Approx(gauss_cap(1.7)).margin(1e-9));
    REQUIRE(rect.ymax == Catch::Approx(gauss_cap(2.0)).margin(1e-9));
    REQUIRE(contains(rect, gauss_cap(1.7) - 1e-9, gauss_cap(2.0) - 1e-9));

    // Silent channel: everything collapses to the origin.
    GaussianIc silent{0.0, 0.0, 0.0, 0.0};
    for (const auto& p : gaussian_sd_points(silent)) {
        REQUIRE(p.r1 == 0.0);
        REQUIRE(p.r2 == 0.0);
    }
    RateRegion2D nothing = gaussian_hk(silent, splits);
    REQUIRE(nothing.xmax == 0.0);
    REQUIRE(nothing.ymax == 0.0);
}
