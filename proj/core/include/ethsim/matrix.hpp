#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ethsim {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

struct HermitianEigensystem {
    std::vector<double> eigenvalues;          // ascending, one per cluster
    std::vector<ComplexMatrix> projections;   // spectral projection per eigenvalue
};

// Spectral decomposition of a Hermitian matrix. Eigenvalues closer than
// cluster_tol share a projection; a negative cluster_tol selects the default
// 1e-8 * (1 + ||M||).
HermitianEigensystem hermitian_eig(const ComplexMatrix& M, double tol = 1e-9,
                                   double cluster_tol = -1.0);

// Largest singular value.
double operator_norm(const ComplexMatrix& M);

// 1 (x) ... (x) op (x) ... (x) 1, site 0 being the most significant factor.
ComplexMatrix embed_site_operator(const ComplexMatrix& op, std::size_t site,
                                  const std::vector<std::size_t>& site_dims);

// Embeds an operator acting on the ordered pair of sites (a, b), a != b, whose
// own tensor ordering is site a (x) site b.
ComplexMatrix embed_two_site_operator(const ComplexMatrix& op, std::size_t site_a,
                                      std::size_t site_b,
                                      const std::vector<std::size_t>& site_dims);

ComplexMatrix identity(std::size_t dim);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_square(const ComplexMatrix& M);
bool is_finite(const ComplexMatrix& M);
bool is_hermitian(const ComplexMatrix& M, double tol);
bool is_unitary(const ComplexMatrix& M, double tol);
bool is_projection(const ComplexMatrix& M, double tol);

double hs_norm(const ComplexMatrix& M);
cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);  // tr(a* b)

// Partial trace over the trailing factor of dimension dim / keep_dim.
ComplexMatrix partial_trace_tail(const ComplexMatrix& M, std::size_t keep_dim);

// Real coordinates of a Hermitian matrix: diagonal entries plus sqrt(2) Re and
// sqrt(2) Im of the upper triangle, an isometry from (Herm_D, HS) onto R^{D^2}.
RealVector hermitian_coordinates(const ComplexMatrix& H);
ComplexMatrix from_hermitian_coordinates(const RealVector& v, std::size_t dim);

// X = herm + i*anti with both parts Hermitian.
ComplexMatrix hermitian_part(const ComplexMatrix& X);
ComplexMatrix antihermitian_part(const ComplexMatrix& X);

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// Orthonormal basis of the real null space of A: right singular vectors whose
// singular value is at most tol * (1 + sigma_max).
RealMatrix real_null_space(const RealMatrix& A, double tol);

// Orthonormal basis of the column span of A, same rank rule.
RealMatrix real_range(const RealMatrix& A, double tol);

}  // namespace ethsim
