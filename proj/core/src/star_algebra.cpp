#include "ethsim/star_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ethsim/errors.hpp"
#include "ethsim/rng.hpp"

namespace ethsim {

namespace {

constexpr int kMaxClosureRounds = 64;
// Below this size commutants stack every basis element of A as a constraint.
constexpr std::size_t kExhaustiveGenerators = 8;

std::vector<ComplexMatrix> basis_from_coordinates(const RealMatrix& coords, std::size_t dim) {
    std::vector<ComplexMatrix> basis;
    basis.reserve(coords.cols());
    for (Eigen::Index j = 0; j < coords.cols(); ++j)
        basis.push_back(from_hermitian_coordinates(coords.col(j), dim));
    return basis;
}

RealMatrix coordinates_of(const std::vector<ComplexMatrix>& elements, std::size_t dim) {
    RealMatrix out(dim * dim, elements.size());
    for (std::size_t j = 0; j < elements.size(); ++j)
        out.col(j) = hermitian_coordinates(elements[j]);
    return out;
}

// Appends to Q an orthonormal basis of the directions of `cand` outside
// span(Q). Singular values below tol * max(1, largest column norm) are noise.
Eigen::Index extend_basis(RealMatrix& Q, const RealMatrix& cand, double tol) {
    if (cand.cols() == 0) return 0;
    RealMatrix R = cand;
    if (Q.cols() > 0) {
        R -= Q * (Q.transpose() * R);
        R -= Q * (Q.transpose() * R);
    }
    const double scale = std::max(1.0, cand.colwise().norm().maxCoeff());
    const RealMatrix range = real_range(R, tol * scale / (1.0 + R.norm()));
    RealMatrix fresh = range;
    // real_range's threshold is tol' * (1 + sigma_max); recheck against the
    // absolute noise floor tol * scale.
    Eigen::Index keep = 0;
    while (keep < fresh.cols() && (R.transpose() * fresh.col(keep)).norm() > tol * scale) ++keep;
    fresh = fresh.leftCols(keep).eval();
    if (keep == 0) return 0;
    if (Q.cols() > 0) fresh -= Q * (Q.transpose() * fresh);
    Eigen::HouseholderQR<RealMatrix> qr(fresh);
    const RealMatrix orth = qr.householderQ() * RealMatrix::Identity(fresh.rows(), keep);
    const Eigen::Index old = Q.cols();
    Q.conservativeResize(Q.rows(), old + keep);
    Q.rightCols(keep) = orth;
    return keep;
}

ComplexMatrix random_element(const StarAlgebra& A, Rng& rng) {
    ComplexMatrix X = ComplexMatrix::Zero(A.ambient_dim(), A.ambient_dim());
    for (const auto& b : A.basis()) X += rng.normal() * b;
    const double n = X.norm();
    return n > 0.0 ? ComplexMatrix(X / n) : X;
}

// Hermitian elements whose commutant equals the commutant of A.
std::vector<ComplexMatrix> commutant_generators(const StarAlgebra& A, std::size_t count,
                                                std::uint64_t seed) {
    if (A.dim() <= std::max(count, kExhaustiveGenerators)) return A.basis();
    Rng rng(seed);
    std::vector<ComplexMatrix> gens;
    gens.reserve(count);
    for (std::size_t k = 0; k < count; ++k) gens.push_back(random_element(A, rng));
    return gens;
}

RealMatrix commutator_constraints(const StarAlgebra& B, const std::vector<ComplexMatrix>& gens) {
    const std::size_t D = B.ambient_dim();
    const Eigen::Index rows = static_cast<Eigen::Index>(D * D);
    RealMatrix C(rows * static_cast<Eigen::Index>(gens.size()), B.dim());
    const cplx i_unit(0.0, 1.0);
    for (std::size_t k = 0; k < B.dim(); ++k) {
        const ComplexMatrix& b = B.basis()[k];
        for (std::size_t g = 0; g < gens.size(); ++g)
            C.block(g * rows, k, rows, 1) = hermitian_coordinates(i_unit * commutator(b, gens[g]));
    }
    return C;
}

double commutation_defect(const StarAlgebra& X, const StarAlgebra& A, std::uint64_t seed) {
    if (X.dim() == 0) return 0.0;
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 2; ++trial) {
        const ComplexMatrix x = random_element(X, rng);
        for (const auto& a : A.basis()) worst = std::max(worst, commutator(x, a).norm());
    }
    return worst;
}

}  // namespace

StarAlgebra::StarAlgebra(std::size_t ambient_dim, std::vector<ComplexMatrix> basis,
                         RealMatrix coords)
    : ambient_dim_(ambient_dim), basis_(std::move(basis)), coords_(std::move(coords)) {
    contains_unit_ = basis_.empty() ? false : residual(identity(ambient_dim_)) <= 1e-8 * (1.0 + std::sqrt(double(ambient_dim_)));
}

StarAlgebra StarAlgebra::from_hermitian_span(std::size_t ambient_dim,
                                             const std::vector<ComplexMatrix>& elements,
                                             double svd_tol) {
    for (const auto& e : elements)
        if (static_cast<std::size_t>(e.rows()) != ambient_dim || !is_square(e))
            fail(ErrorKind::DimensionMismatch, "element dimension differs from ambient dimension");
    RealMatrix Q(ambient_dim * ambient_dim, 0);
    extend_basis(Q, coordinates_of(elements, ambient_dim), svd_tol);
    return from_coordinates(ambient_dim, std::move(Q));
}

StarAlgebra StarAlgebra::from_coordinates(std::size_t ambient_dim, RealMatrix coords) {
    if (static_cast<std::size_t>(coords.rows()) != ambient_dim * ambient_dim)
        fail(ErrorKind::DimensionMismatch, "coordinate rows must equal D^2");
    auto basis = basis_from_coordinates(coords, ambient_dim);
    return StarAlgebra(ambient_dim, std::move(basis), std::move(coords));
}

StarAlgebra StarAlgebra::from_orthonormal_basis(std::size_t ambient_dim,
                                                std::vector<ComplexMatrix> basis) {
    RealMatrix coords = coordinates_of(basis, ambient_dim);
    return StarAlgebra(ambient_dim, std::move(basis), std::move(coords));
}

StarAlgebra StarAlgebra::full(std::size_t ambient_dim) {
    const std::size_t n = ambient_dim * ambient_dim;
    return from_coordinates(ambient_dim, RealMatrix::Identity(n, n));
}

StarAlgebra StarAlgebra::scalars(std::size_t ambient_dim) {
    const double s = 1.0 / std::sqrt(static_cast<double>(ambient_dim));
    return from_orthonormal_basis(ambient_dim, {s * identity(ambient_dim)});
}

ComplexMatrix StarAlgebra::project(const ComplexMatrix& X) const {
    if (static_cast<std::size_t>(X.rows()) != ambient_dim_ || !is_square(X))
        fail(ErrorKind::DimensionMismatch, "project: dimension mismatch");
    if (basis_.empty()) return ComplexMatrix::Zero(ambient_dim_, ambient_dim_);
    const RealVector h = coords_ * (coords_.transpose() * hermitian_coordinates(hermitian_part(X)));
    const RealVector k = coords_ * (coords_.transpose() * hermitian_coordinates(antihermitian_part(X)));
    return from_hermitian_coordinates(h, ambient_dim_) +
           cplx(0.0, 1.0) * from_hermitian_coordinates(k, ambient_dim_);
}

double StarAlgebra::residual(const ComplexMatrix& X) const {
    if (static_cast<std::size_t>(X.rows()) != ambient_dim_ || !is_square(X))
        fail(ErrorKind::DimensionMismatch, "residual: dimension mismatch");
    RealVector h = hermitian_coordinates(hermitian_part(X));
    RealVector k = hermitian_coordinates(antihermitian_part(X));
    if (!basis_.empty()) {
        h -= coords_ * (coords_.transpose() * h);
        k -= coords_ * (coords_.transpose() * k);
    }
    return std::sqrt(h.squaredNorm() + k.squaredNorm());
}

StarAlgebra generate_algebra(const std::vector<ComplexMatrix>& generators,
                             std::size_t ambient_dim, double svd_tol) {
    if (ambient_dim == 0) fail(ErrorKind::DimensionMismatch, "ambient dimension must be positive");
    std::vector<ComplexMatrix> seeds{identity(ambient_dim)};
    for (const auto& g : generators) {
        if (!is_square(g) || static_cast<std::size_t>(g.rows()) != ambient_dim)
            fail(ErrorKind::DimensionMismatch, "generator dimension differs from ambient dimension");
        // Parts that vanish up to rounding are dropped: normalising them would
        // promote noise to a generator.
        const double floor = 1e-12 * (1.0 + g.norm());
        for (ComplexMatrix part : {hermitian_part(g), antihermitian_part(g)}) {
            const double n = part.norm();
            if (n > floor) seeds.push_back(part / n);
        }
    }
    seeds.front() /= std::sqrt(static_cast<double>(ambient_dim));

    RealMatrix Q(ambient_dim * ambient_dim, 0);
    extend_basis(Q, coordinates_of(seeds, ambient_dim), svd_tol);
    const Eigen::Index full_dim = static_cast<Eigen::Index>(ambient_dim * ambient_dim);

    Eigen::Index frontier_begin = 0;
    for (int round = 0; round < kMaxClosureRounds; ++round) {
        const Eigen::Index frontier_end = Q.cols();
        if (frontier_begin == frontier_end || Q.cols() == full_dim)
            return StarAlgebra::from_coordinates(ambient_dim, std::move(Q));
        const auto basis = basis_from_coordinates(Q, ambient_dim);
        for (Eigen::Index f = frontier_begin; f < frontier_end; ++f) {
            std::vector<ComplexMatrix> products;
            products.reserve(2 * basis.size());
            for (const auto& b : basis) {
                const ComplexMatrix fb = basis[f] * b;
                products.push_back(hermitian_part(fb));
                products.push_back(antihermitian_part(fb));
            }
            extend_basis(Q, coordinates_of(products, ambient_dim), svd_tol);
            if (Q.cols() == full_dim) break;
        }
        frontier_begin = frontier_end;
    }
    fail(ErrorKind::NonConvergence, "algebra closure did not stabilise within 64 rounds");
}

StarAlgebra relative_commutant(const StarAlgebra& A, const StarAlgebra& B, double svd_tol) {
    if (A.ambient_dim() != B.ambient_dim())
        fail(ErrorKind::DimensionMismatch, "relative_commutant: ambient dimensions differ");
    const std::size_t D = B.ambient_dim();
    const double verify_tol = 1e-7;
    std::size_t count = 3;
    for (int attempt = 0; attempt < 4; ++attempt, count += 3) {
        const auto gens = commutant_generators(A, count, 0xC0117A47ULL + attempt);
        const RealMatrix N = real_null_space(commutator_constraints(B, gens), svd_tol);
        StarAlgebra out = StarAlgebra::from_coordinates(D, B.coordinates() * N);
        if (gens.size() == A.dim() ||
            commutation_defect(out, A, 0xD1CE5EEDULL + attempt) <= verify_tol)
            return out;
    }
    const RealMatrix N = real_null_space(commutator_constraints(B, A.basis()), svd_tol);
    return StarAlgebra::from_coordinates(D, B.coordinates() * N);
}

StarAlgebra commutant(const StarAlgebra& A, double svd_tol) {
    return relative_commutant(A, StarAlgebra::full(A.ambient_dim()), svd_tol);
}

StarAlgebra center(const StarAlgebra& A, double svd_tol) {
    return relative_commutant(A, A, svd_tol);
}

bool is_abelian(const StarAlgebra& A, double tol) {
    if (A.dim() > A.ambient_dim()) return false;
    const auto& b = A.basis();
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = i + 1; j < b.size(); ++j)
            if (commutator(b[i], b[j]).norm() > tol) return false;
    return true;
}

EventFamily minimal_projections(const StarAlgebra& A, std::uint64_t rng_seed) {
    if (!is_abelian(A)) fail(ErrorKind::NotAbelian, "minimal_projections needs an abelian algebra");
    const std::size_t D = A.ambient_dim();
    EventFamily out;
    if (A.dim() <= 1) {
        out.projections.push_back(identity(D));
        out.labels.push_back("e0");
        return out;
    }
    Rng rng(rng_seed);
    ComplexMatrix H = ComplexMatrix::Zero(D, D);
    for (const auto& b : A.basis()) H += rng.uniform(-1.0, 1.0) * b;
    const HermitianEigensystem es = hermitian_eig(H);
    if (es.projections.size() != A.dim())
        fail(ErrorKind::GenericityFailure, "random combination has " +
                                               std::to_string(es.projections.size()) +
                                               " spectral projections, expected " +
                                               std::to_string(A.dim()));
    for (const auto& P : es.projections) {
        if (!contains(A, P, 1e-8))
            fail(ErrorKind::GenericityFailure, "spectral projection outside the algebra");
    }
    for (std::size_t k = 0; k < es.projections.size(); ++k) {
        out.projections.push_back(es.projections[k]);
        out.labels.push_back("e" + std::to_string(k));
    }
    return out;
}

bool contains(const StarAlgebra& A, const ComplexMatrix& X, double tol) {
    if (static_cast<std::size_t>(X.rows()) != A.ambient_dim() || !is_square(X))
        fail(ErrorKind::DimensionMismatch, "contains: dimension mismatch");
    return A.residual(X) <= tol * (1.0 + X.norm());
}

bool same_span(const StarAlgebra& A, const StarAlgebra& B, double tol) {
    if (A.ambient_dim() != B.ambient_dim()) return false;
    for (const auto& b : B.basis())
        if (!contains(A, b, tol)) return false;
    for (const auto& a : A.basis())
        if (!contains(B, a, tol)) return false;
    return true;
}

double product_closure_defect(const StarAlgebra& A, std::size_t max_pairs, std::uint64_t seed) {
    const auto& b = A.basis();
    double worst = 0.0;
    if (b.size() * b.size() <= max_pairs) {
        for (const auto& x : b)
            for (const auto& y : b) worst = std::max(worst, A.residual(x * y));
        return worst;
    }
    Rng rng(seed);
    for (std::size_t k = 0; k < std::min<std::size_t>(max_pairs, 16); ++k) {
        const ComplexMatrix x = random_element(A, rng);
        const ComplexMatrix y = random_element(A, rng);
        worst = std::max(worst, A.residual(x * y));
    }
    return worst;
}

double partition_defect(const EventFamily& family) {
    if (family.projections.empty()) return 0.0;
    const Eigen::Index D = family.projections.front().rows();
    ComplexMatrix sum = ComplexMatrix::Zero(D, D);
    double worst = 0.0;
    for (std::size_t a = 0; a < family.size(); ++a) {
        const auto& pa = family.projections[a];
        sum += pa;
        for (std::size_t b = a; b < family.size(); ++b) {
            const ComplexMatrix prod = pa * family.projections[b];
            worst = std::max(worst, a == b ? (prod - pa).norm() : prod.norm());
        }
    }
    return std::max(worst, (sum - identity(D)).norm());
}

}  // namespace ethsim
