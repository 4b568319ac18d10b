#include "ethsim/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/QR>
#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "ethsim/errors.hpp"

namespace ethsim {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<std::size_t>());
}

}  // namespace

HermitianEigensystem hermitian_eig(const ComplexMatrix& M, double tol, double cluster_tol) {
    if (!is_square(M)) fail(ErrorKind::DimensionMismatch, "hermitian_eig needs a square matrix");
    const double scale = hs_norm(M);
    const double asym = (M - M.adjoint()).norm();
    if (asym > tol * (1.0 + scale))
        fail(ErrorKind::NotHermitian, "||M - M*|| = " + std::to_string(asym));

    const ComplexMatrix H = hermitian_part(M);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
    const RealVector& ev = es.eigenvalues();
    const ComplexMatrix& V = es.eigenvectors();
    const Eigen::Index n = ev.size();

    HermitianEigensystem out;
    if (n == 0) return out;
    const double norm = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
    const double thr = cluster_tol >= 0.0 ? cluster_tol : 1e-8 * (1.0 + norm);

    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && ev(stop) - ev(stop - 1) <= thr) ++stop;
        const Eigen::Index width = stop - start;
        const auto block = V.middleCols(start, width);
        out.eigenvalues.push_back(ev.segment(start, width).mean());
        out.projections.push_back(block * block.adjoint());
        start = stop;
    }
    return out;
}

double operator_norm(const ComplexMatrix& M) {
    if (M.size() == 0) return 0.0;
    ComplexMatrix A = M;
    const lapack_int m = static_cast<lapack_int>(A.rows());
    const lapack_int n = static_cast<lapack_int>(A.cols());
    RealVector s(std::min(m, n));
    std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(s.size(), 2)));
    lapack_complex_double dummy{};
    const lapack_int info = LAPACKE_zgesvd(
        LAPACK_COL_MAJOR, 'N', 'N', m, n, reinterpret_cast<lapack_complex_double*>(A.data()),
        m, s.data(), &dummy, 1, &dummy, 1, superb.data());
    if (info != 0)
        fail(ErrorKind::NonConvergence, "zgesvd failed with info " + std::to_string(info));
    return s(0);
}

ComplexMatrix embed_site_operator(const ComplexMatrix& op, std::size_t site,
                                  const std::vector<std::size_t>& site_dims) {
    if (site >= site_dims.size()) fail(ErrorKind::DimensionMismatch, "site index out of range");
    if (!is_square(op) || static_cast<std::size_t>(op.rows()) != site_dims[site])
        fail(ErrorKind::DimensionMismatch, "operator does not match site dimension");
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < site; ++k) left *= site_dims[k];
    for (std::size_t k = site + 1; k < site_dims.size(); ++k) right *= site_dims[k];
    return kron(kron(identity(left), op), identity(right));
}

ComplexMatrix embed_two_site_operator(const ComplexMatrix& op, std::size_t site_a,
                                      std::size_t site_b,
                                      const std::vector<std::size_t>& site_dims) {
    const std::size_t nsites = site_dims.size();
    if (site_a >= nsites || site_b >= nsites || site_a == site_b)
        fail(ErrorKind::DimensionMismatch, "invalid site pair");
    const std::size_t da = site_dims[site_a], db = site_dims[site_b];
    if (!is_square(op) || static_cast<std::size_t>(op.rows()) != da * db)
        fail(ErrorKind::DimensionMismatch, "operator does not match the two-site dimension");

    const std::size_t dim = product(site_dims);
    std::vector<std::size_t> stride(nsites, 1);
    for (std::size_t k = nsites; k-- > 1;) stride[k - 1] = stride[k] * site_dims[k];

    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        const std::size_t ia = (col / stride[site_a]) % da;
        const std::size_t ib = (col / stride[site_b]) % db;
        const std::size_t rest = col - ia * stride[site_a] - ib * stride[site_b];
        const std::size_t local_col = ia * db + ib;
        for (std::size_t ra = 0; ra < da; ++ra) {
            for (std::size_t rb = 0; rb < db; ++rb) {
                const cplx v = op(ra * db + rb, local_col);
                if (v == cplx(0.0)) continue;
                out(rest + ra * stride[site_a] + rb * stride[site_b], col) = v;
            }
        }
    }
    return out;
}

ComplexMatrix identity(std::size_t dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b - b * a;
}

bool is_square(const ComplexMatrix& M) { return M.rows() == M.cols(); }

bool is_finite(const ComplexMatrix& M) { return M.allFinite(); }

bool is_hermitian(const ComplexMatrix& M, double tol) {
    return is_square(M) && (M - M.adjoint()).norm() <= tol * (1.0 + M.norm());
}

bool is_unitary(const ComplexMatrix& M, double tol) {
    if (!is_square(M)) return false;
    return (M.adjoint() * M - identity(M.rows())).norm() <= tol * (1.0 + M.rows());
}

bool is_projection(const ComplexMatrix& M, double tol) {
    if (!is_hermitian(M, tol)) return false;
    return (M * M - M).norm() <= tol * (1.0 + M.norm());
}

double hs_norm(const ComplexMatrix& M) { return M.norm(); }

cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a.conjugate().cwiseProduct(b)).sum();
}

ComplexMatrix partial_trace_tail(const ComplexMatrix& M, std::size_t keep_dim) {
    const std::size_t dim = M.rows();
    if (keep_dim == 0 || dim % keep_dim != 0)
        fail(ErrorKind::DimensionMismatch, "partial trace: kept dimension does not divide");
    const std::size_t tail = dim / keep_dim;
    ComplexMatrix out = ComplexMatrix::Zero(keep_dim, keep_dim);
    for (std::size_t i = 0; i < keep_dim; ++i)
        for (std::size_t j = 0; j < keep_dim; ++j)
            for (std::size_t k = 0; k < tail; ++k) out(i, j) += M(i * tail + k, j * tail + k);
    return out;
}

RealVector hermitian_coordinates(const ComplexMatrix& H) {
    const Eigen::Index d = H.rows();
    RealVector v(d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        v(i * d + i) = H(i, i).real();
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const cplx h = 0.5 * (H(i, j) + std::conj(H(j, i)));
            v(i * d + j) = kSqrt2 * h.real();
            v(j * d + i) = -kSqrt2 * h.imag();
        }
    }
    return v;
}

ComplexMatrix from_hermitian_coordinates(const RealVector& v, std::size_t dim) {
    const Eigen::Index d = static_cast<Eigen::Index>(dim);
    if (v.size() != d * d) fail(ErrorKind::DimensionMismatch, "coordinate vector length");
    ComplexMatrix H(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        H(i, i) = v(i * d + i);
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const cplx h(v(i * d + j) / kSqrt2, -v(j * d + i) / kSqrt2);
            H(i, j) = h;
            H(j, i) = std::conj(h);
        }
    }
    return H;
}

ComplexMatrix hermitian_part(const ComplexMatrix& X) { return 0.5 * (X + X.adjoint()); }

ComplexMatrix antihermitian_part(const ComplexMatrix& X) {
    return cplx(0.0, -0.5) * (X - X.adjoint());
}

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

namespace {

// Thin SVD pieces of A after an optional QR compression of tall inputs.
struct RankSplit {
    RealMatrix U;
    RealVector s;
    RealMatrix V;
    Eigen::Index rank = 0;
};

// Eigen 3.4.0's BDCSVD returns wrong singular vectors when singular values
// repeat, which is the common case here. LAPACK's QR-iteration driver is used.
void run_svd(RealMatrix A, RealMatrix* U, RealVector& s, RealMatrix* V) {
    const lapack_int m = static_cast<lapack_int>(A.rows());
    const lapack_int n = static_cast<lapack_int>(A.cols());
    const lapack_int k = std::min(m, n);
    s.resize(k);
    if (U) U->resize(m, k);
    if (V) V->resize(n, n);
    RealMatrix vt(V ? n : 1, V ? n : 1);
    std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(k, 2)));
    const lapack_int info = LAPACKE_dgesvd(
        LAPACK_COL_MAJOR, U ? 'S' : 'N', V ? 'A' : 'N', m, n, A.data(), m, s.data(),
        U ? U->data() : nullptr, m, vt.data(), static_cast<lapack_int>(vt.rows()),
        superb.data());
    if (info != 0)
        fail(ErrorKind::NonConvergence, "dgesvd failed with info " + std::to_string(info));
    if (V) *V = vt.transpose();
}

RankSplit rank_split(const RealMatrix& A, double tol, bool need_u) {
    RankSplit out;
    const Eigen::Index m = A.rows(), n = A.cols();
    if (need_u) {
        run_svd(A, &out.U, out.s, nullptr);
    } else if (m > 2 * n) {
        Eigen::HouseholderQR<RealMatrix> qr(A);
        const RealMatrix R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        run_svd(R, nullptr, out.s, &out.V);
    } else {
        run_svd(A, nullptr, out.s, &out.V);
    }
    const double smax = out.s.size() > 0 ? out.s(0) : 0.0;
    const double thr = tol * (1.0 + smax);
    while (out.rank < out.s.size() && out.s(out.rank) > thr) ++out.rank;
    return out;
}

}  // namespace

RealMatrix real_null_space(const RealMatrix& A, double tol) {
    const Eigen::Index n = A.cols();
    if (n == 0) return RealMatrix(0, 0);
    if (A.rows() == 0) return RealMatrix::Identity(n, n);
    const RankSplit rs = rank_split(A, tol, false);
    return rs.V.rightCols(n - rs.rank);
}

RealMatrix real_range(const RealMatrix& A, double tol) {
    if (A.cols() == 0 || A.rows() == 0) return RealMatrix(A.rows(), 0);
    const RankSplit rs = rank_split(A, tol, true);
    return rs.U.leftCols(rs.rank);
}

}  // namespace ethsim
