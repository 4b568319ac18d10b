#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ethsim/errors.hpp"
#include "ethsim/state.hpp"
#include "oracles.hpp"

using namespace ethsim;

namespace {

ComplexMatrix diag(std::initializer_list<double> v) {
    ComplexMatrix m = ComplexMatrix::Zero(v.size(), v.size());
    Eigen::Index i = 0;
    for (double x : v) m(i, i) = x, ++i;
    return m;
}

EventFamily diagonal_pair() {
    EventFamily f;
    f.projections = {diag({1, 0}), diag({0, 1})};
    f.labels = {"a", "b"};
    return f;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::ValidationError;
}

// Random unital algebra: block structure from a random projection plus a
// random Hermitian element compressed to one block.
StarAlgebra random_algebra(Eigen::Index n, std::mt19937_64& gen) {
    const ComplexMatrix V = oracle::random_unitary(n, gen);
    ComplexMatrix P = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n / 2; ++i) P(i, i) = 1.0;
    const ComplexMatrix proj = V * P * V.adjoint();
    const ComplexMatrix h = oracle::random_hermitian(n, gen);
    return generate_algebra({proj, proj * h * proj}, n);
}

}  // namespace

TEST(State, Validation) {
    EXPECT_EQ(kind_of([] { State s(diag({0.5, 0.6})); }), ErrorKind::ValidationError);
    EXPECT_EQ(kind_of([] { State s(diag({1.5, -0.5})); }), ErrorKind::ValidationError);
    ComplexMatrix m = diag({0.5, 0.5});
    m(0, 1) = 0.3;
    EXPECT_EQ(kind_of([&] { State s(m); }), ErrorKind::NotHermitian);
    EXPECT_NEAR(State(diag({0.3, 0.7})).expect(pauli_z()), -0.4, 1e-15);
}

TEST(Centralizer, Examples) {
    EXPECT_EQ(centralizer_of_state(State::maximally_mixed(2), StarAlgebra::full(2)).dim(), 4u);
    const StarAlgebra c = centralizer_of_state(State(diag({0.3, 0.7})), StarAlgebra::full(2));
    EXPECT_EQ(c.dim(), 2u);
    EXPECT_TRUE(contains(c, diag({1, 0}), 1e-9));

    std::vector<ComplexMatrix> gens;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            ComplexMatrix e = ComplexMatrix::Zero(2, 2);
            e(i, j) = 1.0;
            gens.push_back(kron(e, identity(2)));
        }
    const StarAlgebra m2 = generate_algebra(gens, 4);
    EXPECT_TRUE(same_span(centralizer_of_state(State::maximally_mixed(4), m2), m2, 1e-9));
}

TEST(Centralizer, CharacterisationAndOracle) {
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index n = 2 + trial % 2;
        const StarAlgebra M = trial % 3 == 0 ? StarAlgebra::full(n) : random_algebra(n, gen);
        ComplexMatrix rho = oracle::random_density(n, gen);
        if (trial % 5 == 0) {
            // non-faithful
            const ComplexVector v = oracle::random_matrix(n, gen).col(0);
            rho = v * v.adjoint() / v.squaredNorm();
        }
        const State omega(rho);
        const StarAlgebra C = centralizer_of_state(omega, M);
        for (const auto& y : C.basis())
            for (const auto& x : M.basis()) EXPECT_LT(std::abs(omega(commutator(y, x))), 1e-9);

        // Oracle: complex coefficients over M's basis, constraints tr(Omega [Y, M_i]) = 0.
        const std::size_t d = M.dim();
        Eigen::MatrixXcd K(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                K(i, j) = omega(commutator(M.basis()[j], M.basis()[i]));
        const Eigen::MatrixXcd N = oracle::complex_null_space(K, 1e-9);
        EXPECT_EQ(static_cast<std::size_t>(N.cols()), C.dim());
        for (Eigen::Index k = 0; k < N.cols(); ++k) {
            ComplexMatrix y = ComplexMatrix::Zero(n, n);
            for (std::size_t j = 0; j < d; ++j) y += N(j, k) * M.basis()[j];
            EXPECT_TRUE(contains(C, y, 1e-8));
        }
        EXPECT_LT(product_closure_defect(C), 1e-8);
    }
}

TEST(CenterOfCentralizer, Examples) {
    EXPECT_EQ(center_of_centralizer(State::maximally_mixed(2), StarAlgebra::full(2)).dim(), 1u);
    const StarAlgebra z = center_of_centralizer(State(diag({0.3, 0.7})), StarAlgebra::full(2));
    EXPECT_EQ(z.dim(), 2u);
    EXPECT_TRUE(contains(z, diag({0, 1}), 1e-9));
    std::mt19937_64 gen(2);
    EXPECT_EQ(center_of_centralizer(State(oracle::random_density(3, gen)), StarAlgebra::scalars(3)).dim(), 1u);
}

TEST(CenterOfCentralizer, ContainsCenterOfAlgebra) {
    std::mt19937_64 gen(43);
    for (int trial = 0; trial < 15; ++trial) {
        const Eigen::Index n = 3 + trial % 2;
        const StarAlgebra M = random_algebra(n, gen);
        const State omega(oracle::random_density(n, gen));
        const StarAlgebra zw = center_of_centralizer(omega, M);
        const StarAlgebra zm = center(M);
        for (const auto& z : zm.basis()) EXPECT_TRUE(contains(zw, z, 1e-8));
    }
}

TEST(DetectEvent, Examples) {
    const EventDetection d = detect_event(State(diag({0.3, 0.7})), StarAlgebra::full(2), 3);
    ASSERT_TRUE(d.event.has_value());
    EXPECT_TRUE(d.actual);
    ASSERT_EQ(d.weights.size(), 2u);
    EXPECT_NEAR(d.weights[0], 0.7, 1e-9);
    EXPECT_NEAR(d.weights[1], 0.3, 1e-9);
    EXPECT_LT((d.event->projections[0] - diag({0, 1})).norm(), 1e-9);
    EXPECT_LT((d.event->projections[1] - diag({1, 0})).norm(), 1e-9);
    EXPECT_EQ(d.event->labels[0], "t3:e0");
    EXPECT_EQ(d.event->labels[1], "t3:e1");
    EXPECT_EQ(d.event->time_index, 3);

    EXPECT_FALSE(detect_event(State::maximally_mixed(2), StarAlgebra::full(2), 0).actual);

    const EventDetection pure = detect_event(State(diag({1, 0})), StarAlgebra::full(2), 0, 1e-8);
    EXPECT_EQ(pure.center_of_centralizer.dim(), 2u);
    EXPECT_FALSE(pure.actual);
    EXPECT_NEAR(pure.weights[0], 1.0, 1e-12);
}

TEST(DetectEvent, RejectsBadWeightEps) {
    EXPECT_EQ(kind_of([] { detect_event(State::maximally_mixed(2), StarAlgebra::full(2), 0, 0.7); }),
              ErrorKind::ValidationError);
}

TEST(DetectEvent, IncoherentSuperpositionAndWeights) {
    std::mt19937_64 gen(47);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + trial % 3;
        const StarAlgebra M = trial % 2 ? StarAlgebra::full(n) : random_algebra(n, gen);
        const State omega(oracle::random_density(n, gen));
        const EventDetection d = detect_event(omega, M, 1, 1e-8, trial);
        double sum = 0.0;
        for (double w : d.weights) sum += w;
        EXPECT_NEAR(sum, 1.0, 1e-9);
        EXPECT_LT(partition_defect(*d.event), 1e-9);
        if (!d.actual) continue;
        for (const auto& x : M.basis()) {
            cplx pinched = 0.0;
            for (const auto& p : d.event->projections) pinched += omega(p * x * p);
            EXPECT_LE(std::abs(omega(x) - pinched), 1e-8 * (1.0 + operator_norm(x)));
        }
        EXPECT_LE(d.superposition_residual, 1e-8);
    }
}

TEST(DetectEvent, LabelsAreSeedIndependent) {
    const State omega(diag({0.25, 0.25, 0.5}));
    const auto a = detect_event(omega, StarAlgebra::full(3), 1, 1e-8, 1);
    const auto b = detect_event(omega, StarAlgebra::full(3), 1, 1e-8, 99);
    ASSERT_EQ(a.event->size(), b.event->size());
    for (std::size_t k = 0; k < a.event->size(); ++k)
        EXPECT_LT((a.event->projections[k] - b.event->projections[k]).norm(), 1e-9);
}

TEST(Collapse, Examples) {
    ComplexVector singlet = ComplexVector::Zero(4);
    singlet(1) = 1.0 / std::sqrt(2.0);
    singlet(2) = -1.0 / std::sqrt(2.0);
    const State s = State::pure(singlet);
    const State c = collapse(s, kron(diag({1, 0}), identity(2)));
    EXPECT_LT((c.density() - diag({0, 1, 0, 0})).norm(), 1e-12);

    const State w(diag({0.3, 0.7}));
    EXPECT_LT((collapse(w, identity(2)).density() - w.density()).norm(), 1e-12);
    EXPECT_LT((collapse(w, diag({1, 0})).density() - diag({1, 0})).norm(), 1e-12);
    EXPECT_EQ(kind_of([] { collapse(State(diag({1, 0})), diag({0, 1})); }), ErrorKind::ZeroProbability);
}

TEST(BornWeights, Examples) {
    EventFamily halves;
    halves.projections = {diag({1, 1, 0, 0}), diag({0, 0, 1, 1})};
    const auto u = born_weights(State::maximally_mixed(4), halves);
    EXPECT_NEAR(u[0], 0.5, 1e-12);
    EXPECT_NEAR(u[1], 0.5, 1e-12);
    const auto w = born_weights(State(diag({0.25, 0.75})), diagonal_pair());
    EXPECT_NEAR(w[0], 0.25, 1e-12);
    EXPECT_NEAR(w[1], 0.75, 1e-12);
    EventFamily one;
    one.projections = {identity(2)};
    EXPECT_NEAR(born_weights(State(diag({0.25, 0.75})), one)[0], 1.0, 1e-12);
    EXPECT_EQ(kind_of([&] { born_weights(State::maximally_mixed(3), one); }), ErrorKind::DimensionMismatch);
}

TEST(ConditionalExpectation, Examples) {
    const State omega(diag({0.3, 0.7}));
    const StarAlgebra M = StarAlgebra::full(2);
    const EventFamily Z = diagonal_pair();
    const ComplexMatrix x = 0.2 * diag({1, 0}) - 1.5 * diag({0, 1});
    EXPECT_LT((conditional_expectation(omega, M, Z, x).value - x).norm(), 1e-12);
    EXPECT_LT(conditional_expectation(omega, M, Z, pauli_x()).value.norm(), 1e-12);
    EXPECT_LT((conditional_expectation(omega, M, Z, identity(2)).value - identity(2)).norm(), 1e-12);

    const StarAlgebra diag_alg = generate_algebra({pauli_z()}, 2);
    EXPECT_EQ(kind_of([&] { conditional_expectation(omega, diag_alg, Z, pauli_x()); }), ErrorKind::NotMember);

    const auto deg = conditional_expectation(State(diag({1, 0})), M, Z, pauli_z());
    EXPECT_TRUE(deg.degenerate_weight);
    EXPECT_LT((deg.value - diag({1, 0})).norm(), 1e-12);
}

TEST(ConditionalExpectation, ContractionStateBimodulePositivity) {
    std::mt19937_64 gen(53);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index n = 2 + trial % 3;
        const StarAlgebra M = trial % 2 ? StarAlgebra::full(n) : random_algebra(n, gen);
        const State omega(oracle::random_density(n, gen));
        const EventFamily Z = *detect_event(omega, M, 0).event;
        ComplexMatrix X = ComplexMatrix::Zero(n, n);
        for (const auto& b : M.basis()) X += cplx(oracle::random_matrix(1, gen)(0, 0)) * b;
        const ComplexMatrix e = conditional_expectation(omega, M, Z, X).value;
        EXPECT_LE(operator_norm(e), operator_norm(X) + 1e-9);                      // (i)
        EXPECT_LT(std::abs(omega(e) - omega(X)), 1e-9);                            // (iii)
        ComplexMatrix zspan = ComplexMatrix::Zero(n, n);
        for (const auto& p : Z.projections) zspan += cplx(oracle::random_matrix(1, gen)(0, 0)) * p;
        EXPECT_LT((conditional_expectation(omega, M, Z, zspan).value - zspan).norm(), 1e-9);  // (ii)
        const ComplexMatrix a = Z.projections.front(), b = zspan;
        const ComplexMatrix lhs = conditional_expectation(omega, M, Z, a * X * b).value;
        EXPECT_LT((lhs - a * e * b).norm(), 1e-9);                                  // (iv)
        const ComplexMatrix pos = conditional_expectation(omega, M, Z, X.adjoint() * X).value;
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(pos));
        EXPECT_GE(es.eigenvalues()(0), -1e-9);                                      // (v)
    }
}

TEST(DistToEventAlgebra, Examples) {
    const State omega(diag({0.3, 0.7}));
    const StarAlgebra M = StarAlgebra::full(2);
    EXPECT_NEAR(dist_to_event_algebra(omega, M, diagonal_pair(), diag({2, 1})), 0.0, 1e-12);
    EXPECT_NEAR(dist_to_event_algebra(omega, M, diagonal_pair(), pauli_x()), 1.0, 1e-12);
    const double th = 0.1;
    const ComplexMatrix x = std::cos(th) * diag({1, 0}) + std::sin(th) * pauli_x();
    EXPECT_NEAR(dist_to_event_algebra(omega, M, diagonal_pair(), x), std::sin(th), 1e-12);
    EXPECT_NEAR(std::sin(th), 0.0998, 1e-4);
}

TEST(NearestProjection, Examples) {
    const State omega(diag({0.3, 0.7}));
    const auto exact = nearest_projection_in_event(diag({1, 0}), diagonal_pair(), omega);
    EXPECT_NEAR(exact.distance, 0.0, 1e-12);
    EXPECT_LT((exact.projection - diag({1, 0})).norm(), 1e-12);

    const double th = 0.05;
    ComplexMatrix R(2, 2);
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const ComplexMatrix Q = R * diag({1, 0}) * R.adjoint();
    const auto rot = nearest_projection_in_event(Q, diagonal_pair(), omega);
    EXPECT_LT((rot.projection - diag({1, 0})).norm(), 1e-12);
    EXPECT_NEAR(rot.distance, std::sin(th), 1e-12);

    const auto zero = nearest_projection_in_event(ComplexMatrix::Zero(2, 2), diagonal_pair(), omega);
    EXPECT_NEAR(zero.distance, 0.0, 1e-12);
    EXPECT_TRUE(zero.members.empty());

    const auto greedy = nearest_projection_in_event(Q, diagonal_pair(), omega, {false, true, 20});
    EXPECT_LT((greedy.projection - diag({1, 0})).norm(), 1e-12);
    EXPECT_EQ(kind_of([&] { nearest_projection_in_event(Q, diagonal_pair(), omega, {false, false, 20}); }),
              ErrorKind::TooManyProjections);
}
