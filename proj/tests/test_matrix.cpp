#include <catch2/catch_amalgamated.hpp>

#include <qic/matrix.hpp>
#include <qic/rng.hpp>

#include <cmath>
#include <complex>
#include <vector>

using namespace qic;

namespace {

Mat random_hermitian(int d, Rng& rng) {
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            a(i, j) = cx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    return Mat(0.5 * (a + a.adjoint()));
}

Mat random_density_mat(int d, Rng& rng) {
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            a(i, j) = cx(rng.normal(), rng.normal());
    Mat p = a * a.adjoint();
    return Mat(p / p.trace());
}

Mat random_unitary(int d, Rng& rng) {
    Mat h = random_hermitian(d, rng);
    EigH eig = eig_h(h);
    return eig.vectors;
}

} // namespace

TEST_CASE("flat index round trip", "[matrix]") {
    std::vector<int> radix{2, 3, 4};
    REQUIRE(radix_size(radix) == 24);
    for (int flat = 0; flat < 24; ++flat) {
        auto digits = unflatten_index(flat, radix);
        REQUIRE(static_cast<int>(digits.size()) == 3);
        for (std::size_t k = 0; k < digits.size(); ++k) {
            REQUIRE(digits[k] >= 0);
            REQUIRE(digits[k] < radix[k]);
        }
        REQUIRE(flat_index(digits, radix) == flat);
    }
    // First factor is most significant.
    REQUIRE(flat_index({1, 0, 0}, radix) == 12);
    REQUIRE(flat_index({0, 1, 0}, radix) == 4);
    REQUIRE(flat_index({0, 0, 1}, radix) == 1);
}

TEST_CASE("tensor product spectra multiply", "[matrix]") {
    Rng rng(11);
    Mat a = random_density_mat(2, rng);
    Mat b = random_density_mat(3, rng);
    Mat ab = tensor(a, b);
    REQUIRE(ab.rows() == 6);

    auto ea = eig_h(Mat(a)).values;
    auto eb = eig_h(Mat(b)).values;
    auto eab = eig_h(ab).values;

    std::vector<double> prod;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) prod.push_back(ea[i] * eb[j]);
    std::sort(prod.begin(), prod.end());
    for (int k = 0; k < 6; ++k) REQUIRE(eab[k] == Catch::Approx(prod[k]).margin(1e-12));
}

TEST_CASE("tensor ordering puts first factor on the outer index", "[matrix]") {
    Mat z(2, 2);
    z << cx(1, 0), cx(0, 0), cx(0, 0), cx(-1, 0);
    Mat i2 = Mat::Identity(2, 2);
    Mat zi = tensor(z, i2);
    REQUIRE(zi(0, 0).real() == Catch::Approx(1.0));
    REQUIRE(zi(2, 2).real() == Catch::Approx(-1.0));
}

TEST_CASE("partial trace of a product state", "[matrix]") {
    Rng rng(12);
    Mat a = random_density_mat(3, rng);
    Mat b = random_density_mat(2, rng);
    Mat ab = tensor(a, b);

    Mat left = partial_trace(ab, {3, 2}, {0});
    REQUIRE((left - a).norm() < 1e-12);

    Mat right = partial_trace(ab, {3, 2}, {1});
    REQUIRE((right - b).norm() < 1e-12);

    Mat both = partial_trace(ab, {3, 2}, {0, 1});
    REQUIRE((both - ab).norm() < 1e-12);
}

TEST_CASE("partial trace of a Bell state is maximally mixed", "[matrix]") {
    CVec bell(4);
    bell << cx(1 / std::sqrt(2.0), 0), cx(0, 0), cx(0, 0), cx(1 / std::sqrt(2.0), 0);
    Mat rho = bell * bell.adjoint();
    Mat r = partial_trace(rho, {2, 2}, {1});
    REQUIRE((r - 0.5 * Mat::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("partial trace keep list must be in range", "[matrix]") {
    Mat id4 = Mat::Identity(4, 4) * cx(0.25, 0);
    REQUIRE_THROWS_AS(partial_trace(id4, {2, 3}, {0}), input_error);
    REQUIRE_THROWS_AS(partial_trace(id4, {2, 2}, {2}), input_error);
}

TEST_CASE("trace distance on known pairs", "[matrix]") {
    Mat p0(2, 2), p1(2, 2);
    p0 << cx(1, 0), cx(0, 0), cx(0, 0), cx(0, 0);
    p1 << cx(0, 0), cx(0, 0), cx(0, 0), cx(1, 0);
    REQUIRE(trace_distance(p0, p0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(trace_distance(p0, p1) == Catch::Approx(2.0).margin(1e-12));

    Mat a = Mat::Zero(2, 2), b = Mat::Zero(2, 2);
    a(0, 0) = cx(0.6, 0);
    a(1, 1) = cx(0.4, 0);
    b(0, 0) = cx(0.4, 0);
    b(1, 1) = cx(0.6, 0);
    REQUIRE(trace_distance(a, b) == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("trace distance triangle inequality and unitary invariance", "[matrix]") {
    Rng rng(13);
    for (int t = 0; t < 20; ++t) {
        int d = 2 + static_cast<int>(rng.below(3));
        Mat x = random_density_mat(d, rng);
        Mat y = random_density_mat(d, rng);
        Mat z = random_density_mat(d, rng);
        REQUIRE(trace_distance(x, z) <= trace_distance(x, y) + trace_distance(y, z) + 1e-10);

        Mat u = random_unitary(d, rng);
        double before = trace_distance(x, y);
        double after = trace_distance(Mat(u * x * u.adjoint()), Mat(u * y * u.adjoint()));
        REQUIRE(after == Catch::Approx(before).margin(1e-10));
    }
}

TEST_CASE("eig_h reconstructs random Hermitian matrices", "[matrix]") {
    Rng rng(14);
    for (int t = 0; t < 50; ++t) {
        int d = 2 + static_cast<int>(rng.below(63));
        Mat h = random_hermitian(d, rng);
        EigH e = eig_h(h);
        Mat rebuilt = Mat::Zero(d, d);
        for (int k = 0; k < d; ++k)
            rebuilt += e.values[k] * (e.vectors.col(k) * e.vectors.col(k).adjoint());
        REQUIRE((rebuilt - h).norm() < 1e-10 * std::max(1.0, h.norm()));
        for (int k = 1; k < d; ++k) REQUIRE(e.values[k - 1] <= e.values[k] + 1e-12);
    }
}

TEST_CASE("eigvals_h matches eig_h on 2x2", "[matrix]") {
    Rng rng(15);
    for (int t = 0; t < 40; ++t) {
        Mat h = random_hermitian(2, rng);
        auto quick = eigvals_h(h);
        auto full = eig_h(h).values;
        REQUIRE(quick[0] == Catch::Approx(full[0]).margin(1e-12));
        REQUIRE(quick[1] == Catch::Approx(full[1]).margin(1e-12));
    }
}

TEST_CASE("psd_sqrt squares back", "[matrix]") {
    Rng rng(16);
    for (int t = 0; t < 10; ++t) {
        int d = 2 + static_cast<int>(rng.below(5));
        Mat rho = random_density_mat(d, rng);
        Mat s = psd_sqrt(rho);
        REQUIRE((s * s - rho).norm() < 1e-10);
    }
}

TEST_CASE("psd_sqrt_pinv inverts on the support", "[matrix]") {
    Rng rng(17);
    // Rank-deficient 8x8: embed a rank-3 density in the top-left block.
    Mat small = random_density_mat(3, rng);
    Mat a = Mat::Zero(8, 8);
    a.topLeftCorner(3, 3) = small;
    Mat m = psd_sqrt_pinv(a);
    Mat proj = Mat::Zero(8, 8);
    proj.topLeftCorner(3, 3) = Mat::Identity(3, 3);
    REQUIRE((m * a * m - proj).norm() < 1e-8);

    // Full-rank case inverts exactly.
    Mat rho = random_density_mat(4, rng);
    Mat inv = psd_sqrt_pinv(rho);
    REQUIRE((inv * rho * inv - Mat::Identity(4, 4)).norm() < 1e-8);
}

TEST_CASE("operator wrappers validate their invariants", "[matrix]") {
    Mat nonherm(2, 2);
    nonherm << cx(1, 0), cx(1, 0), cx(0, 0), cx(0, 0);
    REQUIRE_THROWS_AS(HermitianOperator(nonherm), input_error);

    Mat herm(2, 2);
    herm << cx(0.5, 0), cx(0, 0.25), cx(0, -0.25), cx(0.5, 0);
    REQUIRE_NOTHROW(HermitianOperator(herm));

    Mat wrong_trace = Mat::Identity(2, 2);
    REQUIRE_THROWS_AS(DensityOperator(wrong_trace), input_error);
    REQUIRE_NOTHROW(DensityOperator(Mat(0.5 * Mat::Identity(2, 2))));

    CVec unnorm(2);
    unnorm << cx(1, 0), cx(1, 0);
    REQUIRE_THROWS_AS(PureState(unnorm), input_error);
    CVec norm_vec(2);
    norm_vec << cx(1 / std::sqrt(2.0), 0), cx(0, 1 / std::sqrt(2.0));
    REQUIRE_NOTHROW(PureState(norm_vec));
}

TEST_CASE("pure state density is a rank one projector", "[matrix]") {
    CVec v(3);
    v << cx(0.6, 0), cx(0, 0.8), cx(0, 0);
    PureState psi(v);
    Mat rho = psi.density().mat();
    REQUIRE((rho * rho - rho).norm() < 1e-12);
    REQUIRE(std::abs(rho.trace() - cx(1, 0)) < 1e-12);
}

TEST_CASE("tensor of density wrappers stays a density", "[matrix]") {
    Rng rng(18);
    DensityOperator a(random_density_mat(2, rng));
    DensityOperator b(random_density_mat(3, rng));
    DensityOperator ab = tensor(a, b);
    REQUIRE(ab.dim() == 6);
    REQUIRE_NOTHROW(ab.validate());
}
