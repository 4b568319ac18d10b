#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ethsim/errors.hpp"
#include "ethsim/star_algebra.hpp"
#include "oracles.hpp"

using namespace ethsim;

namespace {

ComplexMatrix unit(std::size_t n, std::size_t i, std::size_t j) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    m(i, j) = 1.0;
    return m;
}

StarAlgebra diagonal_algebra(std::size_t n) {
    std::vector<ComplexMatrix> gens;
    for (std::size_t i = 0; i < n; ++i) gens.push_back(unit(n, i, i));
    return generate_algebra(gens, n);
}

StarAlgebra block_algebra_m2_m2() {
    // block-diagonal M2 (+) M2 inside M4
    std::vector<ComplexMatrix> gens;
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) gens.push_back(unit(4, 2 * b + i, 2 * b + j));
    return generate_algebra(gens, 4);
}

}  // namespace

TEST(GenerateAlgebra, Examples) {
    EXPECT_EQ(generate_algebra({pauli_x()}, 2).dim(), 2u);
    EXPECT_EQ(generate_algebra({pauli_x(), pauli_z()}, 2).dim(), 4u);
    const StarAlgebra one = generate_algebra({}, 3);
    EXPECT_EQ(one.dim(), 1u);
    EXPECT_TRUE(one.contains_unit());
}

TEST(GenerateAlgebra, RejectsDimensionMismatch) {
    try {
        generate_algebra({pauli_x()}, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(GenerateAlgebra, PowersOfOneGenerator) {
    ComplexMatrix d = ComplexMatrix::Zero(5, 5);
    d.diagonal() << 1, 2, 3, 4, 5;
    EXPECT_EQ(generate_algebra({d}, 5).dim(), 5u);
}

TEST(GenerateAlgebra, Invariants) {
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 2 + trial % 4;
        const ComplexMatrix V = oracle::random_unitary(n, gen);
        ComplexMatrix P = ComplexMatrix::Zero(n, n);
        P(0, 0) = 1.0;
        const StarAlgebra A = generate_algebra({V * P * V.adjoint()}, n);
        const auto& b = A.basis();
        for (std::size_t i = 0; i < b.size(); ++i) {
            EXPECT_LT((b[i] - b[i].adjoint()).norm(), 1e-12);
            for (std::size_t j = 0; j < b.size(); ++j) {
                EXPECT_NEAR(std::abs(hs_inner(b[i], b[j])), i == j ? 1.0 : 0.0, 1e-9);
                EXPECT_TRUE(contains(A, b[i] * b[j], 1e-8));
            }
        }
        EXPECT_TRUE(A.contains_unit());
        EXPECT_EQ(A.dim(), 2u);
    }
}

TEST(Commutant, Examples) {
    EXPECT_EQ(commutant(StarAlgebra::full(2)).dim(), 1u);
    const StarAlgebra diag = diagonal_algebra(2);
    const StarAlgebra dc = commutant(diag);
    EXPECT_EQ(dc.dim(), 2u);
    EXPECT_TRUE(same_span(dc, diag, 1e-8));

    std::vector<ComplexMatrix> gens;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) gens.push_back(kron(identity(2), unit(2, i, j)));
    const StarAlgebra one_m2 = generate_algebra(gens, 4);
    EXPECT_EQ(one_m2.dim(), 4u);
    const StarAlgebra c = commutant(one_m2);
    EXPECT_EQ(c.dim(), 4u);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            EXPECT_TRUE(contains(c, kron(unit(2, i, j), identity(2)), 1e-9));
}

TEST(Commutant, MatchesKroneckerOracle) {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 12; ++trial) {
        const Eigen::Index n = 2 + trial % 4;
        std::vector<ComplexMatrix> gens{oracle::random_hermitian(n, gen)};
        if (trial % 2 == 0) {
            // a projection, so the commutant is a non-trivial block algebra
            const ComplexMatrix V = oracle::random_unitary(n, gen);
            ComplexMatrix P = ComplexMatrix::Zero(n, n);
            P(0, 0) = P(1 % n, 1 % n) = 1.0;
            gens = {V * P * V.adjoint()};
        }
        const StarAlgebra A = generate_algebra(gens, n);
        const StarAlgebra C = commutant(A);
        const auto expect = oracle::commutant(A.basis(), n);
        EXPECT_EQ(static_cast<Eigen::Index>(C.dim()), oracle::span_dim(expect, n));
        for (const auto& x : expect) EXPECT_LT(C.residual(x), 1e-8 * (1.0 + x.norm()));
        for (const auto& c : C.basis())
            for (const auto& a : A.basis()) EXPECT_LT(commutator(c, a).norm(), 1e-9);
    }
}

TEST(Commutant, DoubleCommutantReturnsTheAlgebra) {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 2 + trial % 5;
        const ComplexMatrix V = oracle::random_unitary(n, gen);
        ComplexMatrix D = ComplexMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) D(i, i) = double(i / 2);
        const StarAlgebra A = generate_algebra({V * D * V.adjoint()}, n);
        EXPECT_TRUE(same_span(commutant(commutant(A)), A, 1e-8));
    }
}

TEST(Commutant, LargeAlgebraUsesGenericGeneratorsCorrectly) {
    // 1 (x) M3 inside M9: the randomized generator path must still give M3 (x) 1.
    std::vector<ComplexMatrix> gens;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) gens.push_back(kron(identity(3), unit(3, i, j)));
    const StarAlgebra A = generate_algebra(gens, 9);
    ASSERT_EQ(A.dim(), 9u);
    const StarAlgebra C = commutant(A);
    EXPECT_EQ(C.dim(), 9u);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            EXPECT_TRUE(contains(C, kron(unit(3, i, j), identity(3)), 1e-9));
}

TEST(RelativeCommutant, Examples) {
    const StarAlgebra full = StarAlgebra::full(3);
    EXPECT_EQ(relative_commutant(full, full).dim(), 1u);
    const StarAlgebra rc = relative_commutant(StarAlgebra::scalars(3), full);
    EXPECT_EQ(rc.dim(), 9u);
    try {
        relative_commutant(StarAlgebra::full(2), full);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(Center, Examples) {
    EXPECT_EQ(center(StarAlgebra::full(3)).dim(), 1u);
    const StarAlgebra diag = diagonal_algebra(3);
    EXPECT_TRUE(same_span(center(diag), diag, 1e-9));

    const StarAlgebra blocks = block_algebra_m2_m2();
    ASSERT_EQ(blocks.dim(), 8u);
    const StarAlgebra z = center(blocks);
    EXPECT_EQ(z.dim(), 2u);
    ComplexMatrix p0 = ComplexMatrix::Zero(4, 4);
    p0(0, 0) = p0(1, 1) = 1.0;
    EXPECT_TRUE(contains(z, p0, 1e-9));
    EXPECT_TRUE(contains(z, identity(4) - p0, 1e-9));
}

TEST(Center, NoLargerThanAlgebraOrCommutant) {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 8; ++trial) {
        const Eigen::Index n = 3 + trial % 3;
        const ComplexMatrix V = oracle::random_unitary(n, gen);
        ComplexMatrix P = ComplexMatrix::Zero(n, n);
        P(0, 0) = 1.0;
        const StarAlgebra A = generate_algebra({V * P * V.adjoint(), unit(n, 1, 2)}, n);
        const std::size_t z = center(A).dim();
        EXPECT_LE(z, std::min(A.dim(), commutant(A).dim()));
    }
}

TEST(MinimalProjections, Examples) {
    const StarAlgebra z = generate_algebra({pauli_z()}, 2);
    const EventFamily f = minimal_projections(z, 1);
    ASSERT_EQ(f.size(), 2u);
    bool saw0 = false, saw1 = false;
    for (const auto& p : f.projections) {
        saw0 = saw0 || (p - unit(2, 0, 0)).norm() < 1e-9;
        saw1 = saw1 || (p - unit(2, 1, 1)).norm() < 1e-9;
    }
    EXPECT_TRUE(saw0 && saw1);

    const EventFamily s = minimal_projections(StarAlgebra::scalars(3), 1);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_LT((s.projections[0] - identity(3)).norm(), 1e-12);

    const EventFamily d = minimal_projections(diagonal_algebra(4), 5);
    EXPECT_EQ(d.size(), 4u);
    EXPECT_LT(partition_defect(d), 1e-9);
    for (const auto& p : d.projections) {
        EXPECT_LT((p - p.adjoint()).norm(), 1e-9);
        EXPECT_LT((p * p - p).norm(), 1e-9);
        EXPECT_NEAR(p.trace().real(), 1.0, 1e-9);
    }
}

TEST(MinimalProjections, RejectsNonAbelian) {
    try {
        minimal_projections(StarAlgebra::full(2), 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotAbelian);
    }
}

TEST(Contains, Examples) {
    const StarAlgebra diag = diagonal_algebra(2);
    for (const auto& b : diag.basis()) EXPECT_TRUE(contains(diag, b, 1e-9));
    EXPECT_FALSE(contains(diag, pauli_x(), 1e-9));
    const StarAlgebra z = generate_algebra({pauli_z()}, 2);
    EXPECT_TRUE(contains(z, 0.5 * (identity(2) + pauli_z()), 1e-9));
    // complex combinations of the span
    EXPECT_TRUE(contains(z, cplx(0.3, -2.0) * pauli_z() + cplx(0.0, 1.0) * identity(2), 1e-9));
}
