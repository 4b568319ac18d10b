#pragma once

// Independent reference computations for the tests. These deliberately avoid
// the library's real-coordinate machinery: commutants are solved as complex
// null spaces of Kronecker superoperators over the full matrix space.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ethsim/matrix.hpp"

namespace oracle {

using ethsim::ComplexMatrix;
using ethsim::cplx;

inline ComplexMatrix vec_to_mat(const Eigen::VectorXcd& v, Eigen::Index n) {
    ComplexMatrix M(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) M(i, j) = v(j * n + i);
    return M;
}

// Column-major vec: vec(A X B) = (B^T kron A) vec(X).
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Eigen::MatrixXcd complex_null_space(const Eigen::MatrixXcd& A, double rel) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double thr = rel * (1.0 + (s.size() ? s(0) : 0.0));
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > thr) ++rank;
    return svd.matrixV().rightCols(A.cols() - rank);
}

// Commutant of the set `elems` in M_n, as a list of matrices spanning it.
inline std::vector<ComplexMatrix> commutant(const std::vector<ComplexMatrix>& elems, Eigen::Index n) {
    const ComplexMatrix I = ComplexMatrix::Identity(n, n);
    Eigen::MatrixXcd stacked(static_cast<Eigen::Index>(elems.size()) * n * n, n * n);
    for (std::size_t k = 0; k < elems.size(); ++k) {
        // vec(X B - B X) = (B^T kron I - I kron B) vec(X)
        stacked.middleRows(k * n * n, n * n) =
            kron(elems[k].transpose(), I) - kron(I, elems[k]);
    }
    const Eigen::MatrixXcd N = complex_null_space(stacked, 1e-9);
    std::vector<ComplexMatrix> out;
    for (Eigen::Index j = 0; j < N.cols(); ++j) out.push_back(vec_to_mat(N.col(j), n));
    return out;
}

// Complex dimension of span of matrices.
inline Eigen::Index span_dim(const std::vector<ComplexMatrix>& elems, Eigen::Index n) {
    if (elems.empty()) return 0;
    Eigen::MatrixXcd M(n * n, elems.size());
    for (std::size_t k = 0; k < elems.size(); ++k)
        M.col(k) = Eigen::Map<const Eigen::VectorXcd>(elems[k].data(), n * n);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > 1e-9 * (1.0 + s(0))) ++r;
    return r;
}

// Residual of X outside the complex span of elems.
inline double span_residual(const std::vector<ComplexMatrix>& elems, const ComplexMatrix& X) {
    const Eigen::Index n = X.rows();
    if (elems.empty()) return X.norm();
    Eigen::MatrixXcd M(n * n, elems.size());
    for (std::size_t k = 0; k < elems.size(); ++k)
        M.col(k) = Eigen::Map<const Eigen::VectorXcd>(elems[k].data(), n * n);
    const Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(X.data(), n * n);
    const Eigen::VectorXcd c = M.completeOrthogonalDecomposition().solve(x);
    return (M * c - x).norm();
}

// Orthonormal basis of a complex span, built once for repeated residual queries.
class SpanProjector {
public:
    explicit SpanProjector(const std::vector<ComplexMatrix>& elems) {
        const Eigen::Index n = elems.front().rows();
        Eigen::MatrixXcd M(n * n, elems.size());
        for (std::size_t k = 0; k < elems.size(); ++k)
            M.col(k) = Eigen::Map<const Eigen::VectorXcd>(elems[k].data(), n * n);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        Eigen::Index r = 0;
        while (r < s.size() && s(r) > 1e-9 * (1.0 + s(0))) ++r;
        Q_ = svd.matrixU().leftCols(r);
    }
    Eigen::Index dim() const { return Q_.cols(); }
    double residual(const ComplexMatrix& X) const {
        const Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(X.data(), X.size());
        return (x - Q_ * (Q_.adjoint() * x)).norm();
    }

private:
    Eigen::MatrixXcd Q_;
};

inline ComplexMatrix random_hermitian(Eigen::Index n, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    ComplexMatrix A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = cplx(nd(gen), nd(gen));
    return 0.5 * (A + A.adjoint());
}

inline ComplexMatrix random_matrix(Eigen::Index n, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    ComplexMatrix A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = cplx(nd(gen), nd(gen));
    return A;
}

inline ComplexMatrix random_unitary(Eigen::Index n, std::mt19937_64& gen) {
    Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(n, gen));
    return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

inline ComplexMatrix random_density(Eigen::Index n, std::mt19937_64& gen) {
    const ComplexMatrix A = random_matrix(n, gen);
    ComplexMatrix rho = A * A.adjoint();
    return rho / rho.trace().real();
}

}  // namespace oracle
