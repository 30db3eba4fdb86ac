#include <catch2/catch_amalgamated.hpp>

#include <qic/entropy.hpp>
#include <qic/rng.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace qic;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = cx(a, 0);
    m(1, 1) = cx(b, 0);
    return m;
}

Mat random_density_mat(int d, Rng& rng) {
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            a(i, j) = cx(rng.normal(), rng.normal());
    Mat p = a * a.adjoint();
    return Mat(p / p.trace());
}

std::vector<double> random_dist(int k, Rng& rng) { return rng.dirichlet(k); }

// Two-register ensemble with random distributions and states.
CqEnsemble random_ensemble(Rng& rng) {
    int n1 = 2 + static_cast<int>(rng.below(2));
    int n2 = 2 + static_cast<int>(rng.below(2));
    int d = 2 + static_cast<int>(rng.below(3));
    std::vector<Mat> states;
    states.reserve(static_cast<std::size_t>(n1) * n2);
    for (int i = 0; i < n1 * n2; ++i) states.push_back(random_density_mat(d, rng));
    return CqEnsemble({{"X", random_dist(n1, rng)}, {"Y", random_dist(n2, rng)}},
                      std::move(states));
}

// Qubit in basis z (0 computational, 1 Hadamard) holding bit v.
Mat basis_state(int z, int v) {
    CVec k(2);
    const double r = 1.0 / std::sqrt(2.0);
    if (z == 0)
        k << cx(v == 0 ? 1 : 0, 0), cx(v == 1 ? 1 : 0, 0);
    else
        k << cx(r, 0), cx(v == 0 ? r : -r, 0);
    return k * k.adjoint();
}

// Parity-in-a-random-basis ensemble: registers X, Y, Z all uniform bits,
// state holds x XOR y written in basis z.
CqEnsemble parity_ensemble() {
    std::vector<Mat> states;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) states.push_back(basis_state(z, x ^ y));
    std::vector<double> half{0.5, 0.5};
    return CqEnsemble({{"X", half}, {"Y", half}, {"Z", half}}, std::move(states));
}

} // namespace

TEST_CASE("binary entropy values and domain", "[entropy]") {
    REQUIRE(binary_entropy(0.5) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(binary_entropy(0.0) == 0.0);
    REQUIRE(binary_entropy(1.0) == 0.0);
    REQUIRE(binary_entropy(0.11) == Catch::Approx(0.499915958164528).margin(1e-12));
    REQUIRE(binary_entropy(0.3) == binary_entropy(0.7));
    REQUIRE_THROWS_AS(binary_entropy(-0.01), input_error);
    REQUIRE_THROWS_AS(binary_entropy(1.01), input_error);
}

TEST_CASE("entropy of spectrum clamps tiny negatives and rejects real ones", "[entropy]") {
    RVec ok(3);
    ok << -1e-12, 0.5, 0.5;
    REQUIRE(entropy_of_spectrum(ok) == Catch::Approx(1.0).margin(1e-10));
    RVec bad(2);
    bad << -1e-6, 1.0;
    REQUIRE_THROWS_AS(entropy_of_spectrum(bad), input_error);
}

TEST_CASE("von Neumann entropy on known states", "[entropy]") {
    CVec v(2);
    v << cx(0.6, 0), cx(0.8, 0);
    Mat pure = v * v.adjoint();
    REQUIRE(von_neumann_entropy(pure) == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(von_neumann_entropy(Mat(0.5 * Mat::Identity(2, 2))) == Catch::Approx(1.0).margin(1e-12));

    const double c2 = std::cos(std::numbers::pi / 8) * std::cos(std::numbers::pi / 8);
    REQUIRE(von_neumann_entropy(diag2(c2, 1 - c2)) ==
            Catch::Approx(binary_entropy(c2)).margin(1e-12));
    REQUIRE(binary_entropy(c2) == Catch::Approx(0.600876).margin(1e-6));
}

TEST_CASE("von Neumann entropy matches Shannon on diagonal states and is additive", "[entropy]") {
    Rng rng(21);
    for (int t = 0; t < 30; ++t) {
        int d = 2 + static_cast<int>(rng.below(4));
        auto p = rng.dirichlet(d);
        Mat rho = Mat::Zero(d, d);
        double shannon = 0.0;
        for (int i = 0; i < d; ++i) {
            rho(i, i) = cx(p[i], 0);
            if (p[i] > 0) shannon -= p[i] * std::log2(p[i]);
        }
        REQUIRE(von_neumann_entropy(rho) == Catch::Approx(shannon).margin(1e-12));

        Mat a = random_density_mat(2, rng);
        Mat b = random_density_mat(3, rng);
        REQUIRE(von_neumann_entropy(tensor(a, b)) ==
                Catch::Approx(von_neumann_entropy(a) + von_neumann_entropy(b)).margin(1e-10));
    }
}

TEST_CASE("min entropy", "[entropy]") {
    REQUIRE(min_entropy(diag2(0.7, 0.3)) == Catch::Approx(-std::log2(0.7)).margin(1e-12));
    REQUIRE(min_entropy(Mat(Mat::Identity(4, 4) * cx(0.25, 0))) == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(min_entropy(diag2(1.0, 0.0)) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE_THROWS_AS(min_entropy(Mat(Mat::Zero(2, 2))), input_error);

    Rng rng(22);
    for (int t = 0; t < 20; ++t) {
        Mat rho = random_density_mat(3, rng);
        REQUIRE(min_entropy(rho) <= von_neumann_entropy(rho) + 1e-9);
    }
}

TEST_CASE("ensemble constructor validates inputs", "[entropy]") {
    std::vector<double> half{0.5, 0.5};
    std::vector<Mat> two{diag2(1, 0), diag2(0, 1)};
    REQUIRE_NOTHROW(CqEnsemble({{"X", half}}, two));
    REQUIRE_THROWS_AS(CqEnsemble({{"X", {0.5, 0.6}}}, two), input_error);
    REQUIRE_THROWS_AS(CqEnsemble({{"X", half}}, {diag2(1, 0)}), input_error);
    std::vector<Mat> mixed_dims{diag2(1, 0), Mat(Mat::Identity(3, 3) / 3.0)};
    REQUIRE_THROWS_AS(CqEnsemble({{"X", half}}, mixed_dims), input_error);

    CqEnsemble ens({{"X", half}}, two);
    REQUIRE(ens.position("X") == 0);
    REQUIRE_THROWS_AS(ens.position("Q"), input_error);
    REQUIRE(ens.tuple_probability({1}) == Catch::Approx(0.5));
}

TEST_CASE("averaged state matches a manual mixture", "[entropy]") {
    Rng rng(23);
    CqEnsemble ens = random_ensemble(rng);
    const auto& regs = ens.registers();
    int n1 = static_cast<int>(regs[0].probs.size());
    int n2 = static_cast<int>(regs[1].probs.size());

    Mat full = Mat::Zero(ens.dim(), ens.dim());
    for (int x = 0; x < n1; ++x)
        for (int y = 0; y < n2; ++y)
            full += regs[0].probs[x] * regs[1].probs[y] *
                    ens.state(flat_index({x, y}, ens.radix()));
    REQUIRE((ens.averaged_state({}, {}) - full).norm() < 1e-12);

    Mat given_x0 = Mat::Zero(ens.dim(), ens.dim());
    for (int y = 0; y < n2; ++y)
        given_x0 += regs[1].probs[y] * ens.state(flat_index({0, y}, ens.radix()));
    REQUIRE((ens.averaged_state({0}, {0}) - given_x0).norm() < 1e-12);
}

TEST_CASE("parity ensemble entropies", "[entropy]") {
    CqEnsemble ens = parity_ensemble();
    const double c2 = std::cos(std::numbers::pi / 8) * std::cos(std::numbers::pi / 8);

    REQUIRE(cond_entropy(ens, {}) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(cond_entropy(ens, {"X", "Y"}) == Catch::Approx(binary_entropy(c2)).margin(1e-12));
    REQUIRE(cond_entropy(ens, {"X", "Y", "Z"}) == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(mutual_info(ens, {"Z"}, {"X", "Y"}) ==
            Catch::Approx(binary_entropy(c2)).margin(1e-12));
    // Bit parity is invisible without both senders.
    REQUIRE(cond_entropy(ens, {"Z", "Y"}) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(mutual_info(ens, {"X"}, {}) == Catch::Approx(0.0).margin(1e-12));

    REQUIRE(cond_min_entropy(ens, {"X", "Y"}) == Catch::Approx(-std::log2(c2)).margin(1e-12));
    REQUIRE(cond_min_entropy(ens, {"Z", "Y"}) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(cond_min_entropy(ens, {"X"}) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("chain rule and nonnegative conditional mutual information", "[entropy]") {
    Rng rng(24);
    for (int t = 0; t < 100; ++t) {
        CqEnsemble ens = random_ensemble(rng);
        double joint = mutual_info(ens, {"X", "Y"}, {});
        double chained = mutual_info(ens, {"Y"}, {}) + mutual_info(ens, {"X"}, {"Y"});
        REQUIRE(joint == Catch::Approx(chained).margin(1e-9));
        REQUIRE(mutual_info(ens, {"X"}, {"Y"}) >= -1e-9);
        REQUIRE(mutual_info(ens, {"Y"}, {"X"}) >= -1e-9);
    }
}

TEST_CASE("conditional min entropy lower bounds conditional entropy", "[entropy]") {
    Rng rng(25);
    for (int t = 0; t < 50; ++t) {
        CqEnsemble ens = random_ensemble(rng);
        REQUIRE(cond_min_entropy(ens, {"X"}) <= cond_entropy(ens, {"X"}) + 1e-9);
        REQUIRE(cond_min_entropy(ens, {"X", "Y"}) <= cond_entropy(ens, {"X", "Y"}) + 1e-9);
    }
}

TEST_CASE("conditional min entropy ranges over zero probability symbols", "[entropy]") {
    // Symbol 1 never occurs but its state still caps the guessing probability.
    CqEnsemble ens({{"X", {1.0, 0.0}}}, {Mat(0.5 * Mat::Identity(2, 2)), diag2(1, 0)});
    REQUIRE(cond_entropy(ens, {"X"}) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(cond_min_entropy(ens, {"X"}) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("guessing bound holds as an operator inequality", "[entropy]") {
    Rng rng(26);
    for (int t = 0; t < 20; ++t) {
        CqEnsemble ens = random_ensemble(rng);
        double cap = std::exp2(-cond_min_entropy(ens, {"X", "Y"}));
        const auto& radix = ens.radix();
        std::size_t total = radix_size(radix);
        for (std::size_t flat = 0; flat < total; ++flat) {
            auto tuple = unflatten_index(flat, radix);
            Mat gap = cap * Mat::Identity(ens.dim(), ens.dim()) -
                      ens.averaged_state({0, 1}, {tuple[0], tuple[1]});
            REQUIRE(eigvals_h(gap).minCoeff() >= -1e-9);
        }
    }
}

TEST_CASE("mutual information rejects overlapping register sets", "[entropy]") {
    Rng rng(27);
    CqEnsemble ens = random_ensemble(rng);
    REQUIRE_THROWS_AS(mutual_info(ens, {"X"}, {"X"}), input_error);
    REQUIRE_THROWS_AS(mutual_info(ens, {"X", "Y"}, {"Y"}), input_error);
}
