#include <catch2/catch_amalgamated.hpp>

#include <qic/channels.hpp>
#include <qic/conditions.hpp>
#include <qic/rng.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace qic;

namespace {

// Clean parallel classical pipes: no cross talk at all.
CcqqChannel parallel_pipes() {
    std::vector<double> probs(16, 0.0);
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2) probs[flat_index({x1, x2, x1, x2}, {2, 2, 2, 2})] = 1.0;
    return classical_embed(2, 2, 2, 2, probs);
}

std::vector<double> bin(double p_one) { return {1.0 - p_one, p_one}; }

} // namespace

TEST_CASE("closed form entropies match the numeric pipeline", "[conditions]") {
    Rng rng(41);
    for (int t = 0; t < 100; ++t) {
        double theta = rng.uniform(0.0, 2 * std::numbers::pi);
        double p1 = rng.uniform();
        double p2 = rng.uniform();
        detail::MarginalCache cache(theta_swap(theta));
        auto num = cache.evaluate(bin(p1), bin(p2));
        auto cf = theta_swap_entropies(theta, p1, p2);
        REQUIRE(cf.b1 == Catch::Approx(num.b1).margin(1e-9));
        REQUIRE(cf.b2 == Catch::Approx(num.b2).margin(1e-9));
        REQUIRE(cf.b1_x2 == Catch::Approx(num.b1_x2).margin(1e-9));
        REQUIRE(cf.b2_x1 == Catch::Approx(num.b2_x1).margin(1e-9));
        REQUIRE(cf.b1_x1x2 == Catch::Approx(num.b1_x1x2).margin(1e-9));
        REQUIRE(cf.b2_x1x2 == Catch::Approx(num.b2_x1x2).margin(1e-9));
    }
    REQUIRE_THROWS_AS(theta_swap_entropies(1.0, -0.1, 0.5), input_error);
}

TEST_CASE("very strong interference verdicts across swap angles", "[conditions]") {
    ConditionReport mid = check_very_strong(theta_swap(1.5));
    REQUIRE(mid.holds);
    REQUIRE(mid.method == "grid+refine");
    REQUIRE(mid.refined);
    REQUIRE(mid.grid_step == Catch::Approx(0.02));

    ConditionReport weak = check_very_strong(theta_swap(0.5));
    REQUIRE_FALSE(weak.holds);
    REQUIRE(weak.min_slack < -1e-3);

    ConditionReport shifted = check_very_strong(theta_swap(4.5));
    REQUIRE(shifted.holds);
}

TEST_CASE("verdict flips near the condition boundary", "[conditions]") {
    REQUIRE_FALSE(check_very_strong(theta_swap(0.93)).holds);
    REQUIRE(check_very_strong(theta_swap(0.95)).holds);
    REQUIRE(check_very_strong(theta_swap(2.17)).holds);
    REQUIRE_FALSE(check_very_strong(theta_swap(2.21)).holds);
}

TEST_CASE("reported minimum is reproducible at its own argmin", "[conditions]") {
    ConditionReport rep = check_very_strong(theta_swap(1.1));
    REQUIRE(rep.argmin_p1.size() == 2);
    REQUIRE(rep.argmin_p2.size() == 2);
    detail::MarginalCache cache(theta_swap(1.1));
    auto e = cache.evaluate(rep.argmin_p1, rep.argmin_p2);
    double s1 = (e.b2 - e.b2_x1) - (e.b1_x2 - e.b1_x1x2);
    double s2 = (e.b1 - e.b1_x2) - (e.b2_x1 - e.b2_x1x2);
    REQUIRE(std::min(s1, s2) == Catch::Approx(rep.min_slack).margin(1e-12));
}

TEST_CASE("strong interference verdicts", "[conditions]") {
    REQUIRE(check_strong(theta_swap(std::numbers::pi / 2)).holds);
    REQUIRE(check_strong(theta_swap(1.5)).holds);
    REQUIRE_FALSE(check_strong(parallel_pipes()).holds);
}

TEST_CASE("very strong implies strong pointwise", "[conditions]") {
    // With independent inputs, conditioning on the other sender only helps,
    // so the strong slack dominates the very strong slack.
    for (double theta : {0.5, 1.2, 2.0, 2.8}) {
        detail::MarginalCache cache(theta_swap(theta));
        for (double p1 = 0.0; p1 <= 1.0; p1 += 0.125)
            for (double p2 = 0.0; p2 <= 1.0; p2 += 0.125) {
                auto e = cache.evaluate(bin(p1), bin(p2));
                double vsi = std::min((e.b2 - e.b2_x1) - (e.b1_x2 - e.b1_x1x2),
                                      (e.b1 - e.b1_x2) - (e.b2_x1 - e.b2_x1x2));
                double si = std::min((e.b2_x2 - e.b2_x1x2) - (e.b1_x2 - e.b1_x1x2),
                                     (e.b1_x1 - e.b1_x1x2) - (e.b2_x1 - e.b2_x1x2));
                REQUIRE(si >= vsi - 1e-12);
            }
    }
    REQUIRE(check_strong(theta_swap(1.2)).holds);
    REQUIRE(check_very_strong(theta_swap(1.2)).holds);
}

TEST_CASE("mirror angles give identical slack minima", "[conditions]") {
    for (double theta : {0.7, 1.3}) {
        ConditionReport a = check_very_strong(theta_swap(theta));
        ConditionReport b = check_very_strong(theta_swap(std::numbers::pi - theta));
        REQUIRE(a.holds == b.holds);
        REQUIRE(a.min_slack == Catch::Approx(b.min_slack).margin(1e-12));
    }
}

TEST_CASE("finer grids never raise the reported minimum", "[conditions]") {
    for (double theta : {1.0, 1.5}) {
        CcqqChannel ch = theta_swap(theta);
        double coarse = check_very_strong(ch, 0.1).min_slack;
        double fine = check_very_strong(ch, 0.05).min_slack;
        REQUIRE(fine <= coarse + 1e-9);
    }
}

TEST_CASE("non binary alphabets use the sampled scan", "[conditions]") {
    // Ternary first input; embedded classical channel with mild cross talk.
    std::vector<double> probs(3 * 2 * 3 * 2, 0.0);
    for (int x1 = 0; x1 < 3; ++x1)
        for (int x2 = 0; x2 < 2; ++x2) {
            int y1 = (x1 + x2) % 3;
            probs[flat_index({x1, x2, y1, x2 ^ (x1 & 1)}, {3, 2, 3, 2})] = 1.0;
        }
    CcqqChannel ch = classical_embed(3, 2, 3, 2, probs);
    ConditionReport rep = check_very_strong(ch, 0.1);
    REQUIRE(rep.method == "dirichlet+edge-grid+jitter");
    REQUIRE(rep.argmin_p1.size() == 3);

    ConditionReport again = check_very_strong(ch, 0.1);
    REQUIRE(rep.min_slack == again.min_slack);
    REQUIRE(rep.holds == again.holds);
}

TEST_CASE("grid step is validated", "[conditions]") {
    CcqqChannel ch = theta_swap(1.2);
    REQUIRE_THROWS_AS(check_very_strong(ch, 0.0), input_error);
    REQUIRE_THROWS_AS(check_very_strong(ch, 0.6), input_error);
    REQUIRE_NOTHROW(check_very_strong(ch, 0.5));
}
