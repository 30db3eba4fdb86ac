#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qic/errors.hpp"

namespace qic {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kHermTol = 1e-12;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kPinvCutoff = 1e-10; // relative to largest eigenvalue

// --- mixed-radix index helpers (row-major, first factor most significant) ---

inline std::size_t flat_index(const std::vector<int>& tuple, const std::vector<int>& radix) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < radix.size(); ++i)
        idx = idx * static_cast<std::size_t>(radix[i]) + static_cast<std::size_t>(tuple[i]);
    return idx;
}

inline std::vector<int> unflatten_index(std::size_t idx, const std::vector<int>& radix) {
    std::vector<int> tuple(radix.size());
    for (std::size_t i = radix.size(); i-- > 0;) {
        tuple[i] = static_cast<int>(idx % static_cast<std::size_t>(radix[i]));
        idx /= static_cast<std::size_t>(radix[i]);
    }
    return tuple;
}

inline std::size_t radix_size(const std::vector<int>& radix) {
    std::size_t n = 1;
    for (int r : radix) n *= static_cast<std::size_t>(r);
    return n;
}

// --- Hermitian eigendecomposition ---

struct EigH {
    RVec values;  // ascending
    Mat vectors;  // columns
};

inline EigH eig_h(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> solver;
    if (a.rows() <= 3) solver.computeDirect(a);
    else solver.compute(a);
    if (solver.info() != Eigen::Success)
        throw property_error("eig_h: eigendecomposition failed to converge");
    return EigH{solver.eigenvalues(), solver.eigenvectors()};
}

// Eigenvalues only; 2x2 handled in closed form (hot path for qubit outputs).
inline RVec eigvals_h(const Mat& a) {
    if (a.rows() == 2) {
        double p = a(0, 0).real();
        double q = a(1, 1).real();
        double mid = 0.5 * (p + q);
        double rad = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(a(0, 1)));
        RVec v(2);
        v << mid - rad, mid + rad;
        return v;
    }
    Eigen::SelfAdjointEigenSolver<Mat> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw property_error("eigvals_h: eigendecomposition failed to converge");
    return solver.eigenvalues();
}

// --- operator wrappers ---

class HermitianOperator {
public:
    explicit HermitianOperator(Mat m) : mat_(std::move(m)) {
        if (mat_.rows() != mat_.cols())
            throw input_error("HermitianOperator: matrix must be square");
        double scale = std::max(1.0, mat_.cwiseAbs().maxCoeff());
        double asym = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
        if (asym > kHermTol * scale)
            throw input_error("HermitianOperator: matrix is not Hermitian");
        mat_ = 0.5 * (mat_ + mat_.adjoint().eval());
    }

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Mat& mat() const { return mat_; }

private:
    Mat mat_;
};

class DensityOperator {
public:
    explicit DensityOperator(Mat m) : op_(std::move(m)) {
        double tr = op_.mat().trace().real();
        if (std::abs(tr - 1.0) > kTraceTol)
            throw input_error("DensityOperator: trace differs from one");
        assert(min_eigenvalue() >= -kPsdTol && "DensityOperator: negative eigenvalue");
    }

    // Full validation for untrusted inputs (channel files); throws on failure.
    void validate() const {
        if (min_eigenvalue() < -kPsdTol)
            throw input_error("DensityOperator: operator is not positive semidefinite");
    }

    double min_eigenvalue() const { return eigvals_h(op_.mat()).minCoeff(); }

    int dim() const { return op_.dim(); }
    const Mat& mat() const { return op_.mat(); }

private:
    HermitianOperator op_;
};

class PureState {
public:
    explicit PureState(CVec v) : vec_(std::move(v)) {
        if (std::abs(vec_.norm() - 1.0) > kNormTol)
            throw input_error("PureState: vector is not normalized");
    }

    int dim() const { return static_cast<int>(vec_.size()); }
    const CVec& vec() const { return vec_; }

    DensityOperator density() const { return DensityOperator(vec_ * vec_.adjoint()); }

private:
    CVec vec_;
};

// --- tensor products ---

inline Mat tensor(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline CVec tensor(const CVec& a, const CVec& b) {
    CVec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    return DensityOperator(tensor(a.mat(), b.mat()));
}

inline PureState tensor(const PureState& a, const PureState& b) {
    return PureState(tensor(a.vec(), b.vec()));
}

// --- partial trace ---

// Traces out every factor not listed in keep. keep holds factor indices into
// dims, strictly increasing; output factors stay in that order.
inline Mat partial_trace(const Mat& rho, const std::vector<int>& dims, const std::vector<int>& keep) {
    std::size_t total = radix_size(dims);
    if (static_cast<std::size_t>(rho.rows()) != total || static_cast<std::size_t>(rho.cols()) != total)
        throw input_error("partial_trace: dimension mismatch");
    for (std::size_t i = 0; i + 1 < keep.size(); ++i)
        if (keep[i] >= keep[i + 1]) throw input_error("partial_trace: keep must be strictly increasing");
    for (int k : keep)
        if (k < 0 || k >= static_cast<int>(dims.size())) throw input_error("partial_trace: keep index out of range");

    std::vector<int> traced;
    for (int i = 0; i < static_cast<int>(dims.size()); ++i)
        if (std::find(keep.begin(), keep.end(), i) == keep.end()) traced.push_back(i);

    std::vector<int> keep_dims, traced_dims;
    for (int k : keep) keep_dims.push_back(dims[k]);
    for (int t : traced) traced_dims.push_back(dims[t]);
    std::size_t dk = radix_size(keep_dims);
    std::size_t dt = radix_size(traced_dims);

    // Strides of each factor in the full index.
    std::vector<std::size_t> stride(dims.size());
    std::size_t acc = 1;
    for (std::size_t i = dims.size(); i-- > 0;) {
        stride[i] = acc;
        acc *= static_cast<std::size_t>(dims[i]);
    }

    auto offset = [&](const std::vector<int>& factors, const std::vector<int>& fdims, std::size_t flat) {
        std::vector<int> tuple = unflatten_index(flat, fdims);
        std::size_t off = 0;
        for (std::size_t i = 0; i < factors.size(); ++i)
            off += static_cast<std::size_t>(tuple[i]) * stride[factors[i]];
        return off;
    };

    std::vector<std::size_t> keep_off(dk), traced_off(dt);
    for (std::size_t i = 0; i < dk; ++i) keep_off[i] = offset(keep, keep_dims, i);
    for (std::size_t i = 0; i < dt; ++i) traced_off[i] = offset(traced, traced_dims, i);

    Mat out = Mat::Zero(dk, dk);
    for (std::size_t r = 0; r < dk; ++r)
        for (std::size_t c = 0; c < dk; ++c) {
            cx sum = 0.0;
            for (std::size_t t = 0; t < dt; ++t)
                sum += rho(keep_off[r] + traced_off[t], keep_off[c] + traced_off[t]);
            out(r, c) = sum;
        }
    return out;
}

inline DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& dims,
                                     const std::vector<int>& keep) {
    return DensityOperator(partial_trace(rho.mat(), dims, keep));
}

// --- trace norm distance ---

inline double trace_distance(const Mat& a, const Mat& b) {
    RVec ev = eigvals_h(a - b);
    return ev.cwiseAbs().sum();
}

inline double trace_distance(const DensityOperator& a, const DensityOperator& b) {
    return trace_distance(a.mat(), b.mat());
}

// --- PSD functional calculus ---

// Inverse square root on the support; eigenvalues below cutoff*lambda_max are
// treated as zero.
inline Mat psd_sqrt_pinv(const Mat& a, double rel_cutoff = kPinvCutoff) {
    EigH e = eig_h(a);
    double lmax = e.values.size() ? e.values.maxCoeff() : 0.0;
    double cut = rel_cutoff * std::max(lmax, 0.0);
    RVec d(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
        d(i) = e.values(i) > cut && e.values(i) > 0.0 ? 1.0 / std::sqrt(e.values(i)) : 0.0;
    return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

inline Mat psd_sqrt(const Mat& a) {
    EigH e = eig_h(a);
    RVec d(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
        d(i) = e.values(i) > 0.0 ? std::sqrt(e.values(i)) : 0.0;
    return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

} // namespace qic
