#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ethsim/event_family.hpp"
#include "ethsim/matrix.hpp"

namespace ethsim {

// A unital *-subalgebra of M_D stored as an HS-orthonormal basis of Hermitian
// matrices. Because the span is *-closed, it is determined by its real
// Hermitian part, kept alongside as a D^2 x d matrix of orthonormal
// coordinates (see hermitian_coordinates).
class StarAlgebra {
public:
    StarAlgebra() = default;

    // Orthonormalises the real span of the given Hermitian matrices.
    static StarAlgebra from_hermitian_span(std::size_t ambient_dim,
                                           const std::vector<ComplexMatrix>& elements,
                                           double svd_tol = 1e-9);
    // Columns must already be orthonormal.
    static StarAlgebra from_coordinates(std::size_t ambient_dim, RealMatrix coords);
    // Basis must already be Hermitian and HS-orthonormal.
    static StarAlgebra from_orthonormal_basis(std::size_t ambient_dim,
                                              std::vector<ComplexMatrix> basis);

    static StarAlgebra full(std::size_t ambient_dim);
    static StarAlgebra scalars(std::size_t ambient_dim);

    std::size_t ambient_dim() const { return ambient_dim_; }
    std::size_t dim() const { return basis_.size(); }
    const std::vector<ComplexMatrix>& basis() const { return basis_; }
    const RealMatrix& coordinates() const { return coords_; }
    bool contains_unit() const { return contains_unit_; }

    // HS-orthogonal projection onto the span.
    ComplexMatrix project(const ComplexMatrix& X) const;
    // ||X - P(X)||_HS.
    double residual(const ComplexMatrix& X) const;

private:
    StarAlgebra(std::size_t ambient_dim, std::vector<ComplexMatrix> basis, RealMatrix coords);

    std::size_t ambient_dim_ = 0;
    std::vector<ComplexMatrix> basis_;
    RealMatrix coords_;
    bool contains_unit_ = false;
};

StarAlgebra generate_algebra(const std::vector<ComplexMatrix>& generators,
                             std::size_t ambient_dim, double svd_tol = 1e-9);

StarAlgebra commutant(const StarAlgebra& A, double svd_tol = 1e-9);

// commutant(A) intersected with B.
StarAlgebra relative_commutant(const StarAlgebra& A, const StarAlgebra& B,
                               double svd_tol = 1e-9);

StarAlgebra center(const StarAlgebra& A, double svd_tol = 1e-9);

EventFamily minimal_projections(const StarAlgebra& A, std::uint64_t rng_seed);

bool contains(const StarAlgebra& A, const ComplexMatrix& X, double tol);

// Mutual containment of every basis element.
bool same_span(const StarAlgebra& A, const StarAlgebra& B, double tol);

bool is_abelian(const StarAlgebra& A, double tol = 1e-8);

// Largest residual of B_i B_j outside the span, over all pairs when
// dim^2 <= max_pairs, else over max_pairs seeded random products of
// random elements.
double product_closure_defect(const StarAlgebra& A, std::size_t max_pairs = 4096,
                              std::uint64_t seed = 7);

}  // namespace ethsim
