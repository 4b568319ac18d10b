#include "ethsim/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ethsim/errors.hpp"
#include "ethsim/rng.hpp"

namespace ethsim {

namespace {

constexpr int kGenericityRetries = 8;
constexpr double kClosureTol = 1e-7;

// Stacks the basis matrices as columns of a D^2 x d complex matrix.
ComplexMatrix vectorise(const std::vector<ComplexMatrix>& mats, std::size_t D) {
    ComplexMatrix out(D * D, mats.size());
    for (std::size_t j = 0; j < mats.size(); ++j)
        out.col(j) = Eigen::Map<const ComplexVector>(mats[j].data(), D * D);
    return out;
}

// {Y in span(S) : omega([Y, X]) = 0 for all X in M}. With Hermitian Omega,
// X and Y the constraint tr(Omega [Y, X]) = 2i Im tr(X Omega Y) is real.
StarAlgebra centralizer_within(const State& omega, const StarAlgebra& M, const StarAlgebra& S,
                               double svd_tol) {
    const std::size_t D = M.ambient_dim();
    std::vector<ComplexMatrix> omega_s;
    omega_s.reserve(S.dim());
    for (const auto& s : S.basis()) omega_s.push_back(omega.density() * s);
    const ComplexMatrix G = vectorise(M.basis(), D);
    const ComplexMatrix F = vectorise(omega_s, D);
    const RealMatrix K = (G.adjoint() * F).imag();
    const RealMatrix N = real_null_space(K, svd_tol);
    return StarAlgebra::from_coordinates(D, S.coordinates() * N);
}

int compare_entries(const ComplexMatrix& a, const ComplexMatrix& b) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            for (int part = 0; part < 2; ++part) {
                const double x = std::round((part == 0 ? a(i, j).real() : a(i, j).imag()) * 1e9);
                const double y = std::round((part == 0 ? b(i, j).real() : b(i, j).imag()) * 1e9);
                if (x != y) return x > y ? -1 : 1;
            }
        }
    }
    return 0;
}

}  // namespace

State::State(const ComplexMatrix& density, double tol) {
    if (!is_square(density) || density.rows() == 0)
        fail(ErrorKind::DimensionMismatch, "density must be a non-empty square matrix");
    if (!is_finite(density)) fail(ErrorKind::ValidationError, "density has non-finite entries");
    if ((density - density.adjoint()).norm() > tol * (1.0 + density.norm()))
        fail(ErrorKind::NotHermitian, "density is not Hermitian");
    density_ = hermitian_part(density);
    const double tr = density_.trace().real();
    if (std::abs(tr - 1.0) > tol) fail(ErrorKind::ValidationError, "density trace " + std::to_string(tr));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(density_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -tol)
        fail(ErrorKind::ValidationError, "density is not positive semidefinite");
}

State State::pure(const ComplexVector& psi) {
    const ComplexVector v = psi / psi.norm();
    return State(v * v.adjoint());
}

State State::maximally_mixed(std::size_t dim) {
    return State(identity(dim) / static_cast<double>(dim));
}

cplx State::operator()(const ComplexMatrix& X) const {
    if (X.rows() != density_.rows() || !is_square(X))
        fail(ErrorKind::DimensionMismatch, "state evaluated on operator of wrong dimension");
    return (density_.transpose().cwiseProduct(X)).sum();
}

std::size_t EventDetection::positive_branches(double weight_eps) const {
    return static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [&](double w) { return w > weight_eps; }));
}

StarAlgebra centralizer_of_state(const State& omega, const StarAlgebra& M, double svd_tol) {
    if (omega.dim() != M.ambient_dim())
        fail(ErrorKind::DimensionMismatch, "state and algebra dimensions differ");
    StarAlgebra C = centralizer_within(omega, M, M, svd_tol);
    // The null space is an algebra in exact arithmetic; if rounding broke
    // closure, alternate generate and restrict until a fixed point.
    for (int round = 0; round < 16; ++round) {
        if (product_closure_defect(C) <= kClosureTol) return C;
        const StarAlgebra closed = generate_algebra(C.basis(), C.ambient_dim(), svd_tol);
        StarAlgebra next = centralizer_within(omega, M, closed, svd_tol);
        if (next.dim() == C.dim() && product_closure_defect(next) > kClosureTol)
            fail(ErrorKind::NonConvergence, "centralizer is not multiplicatively closed");
        C = std::move(next);
    }
    fail(ErrorKind::NonConvergence, "centralizer closure repair did not converge");
}

StarAlgebra center_of_centralizer(const State& omega, const StarAlgebra& M, double svd_tol) {
    return center(centralizer_of_state(omega, M, svd_tol), svd_tol);
}

EventDetection detect_event(const State& omega, const StarAlgebra& E_t, int t, double weight_eps,
                            std::uint64_t rng_seed, double svd_tol) {
    if (!(weight_eps > 0.0 && weight_eps < 0.5))
        fail(ErrorKind::ValidationError, "weight_eps must lie in (0, 0.5)");
    EventDetection det;
    det.centralizer = centralizer_of_state(omega, E_t, svd_tol);
    det.center_of_centralizer = center(det.centralizer, svd_tol);

    EventFamily family;
    for (int attempt = 0;; ++attempt) {
        try {
            family = minimal_projections(det.center_of_centralizer, derive_seed(rng_seed, attempt));
            break;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::GenericityFailure || attempt + 1 >= kGenericityRetries) throw;
        }
    }

    const std::size_t k = family.size();
    std::vector<double> w(k), tr(k);
    for (std::size_t i = 0; i < k; ++i) {
        w[i] = std::max(0.0, omega.expect(family.projections[i]));  // round-off only
        tr[i] = family.projections[i].trace().real();
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double wa = std::round(w[a] * 1e9), wb = std::round(w[b] * 1e9);
        if (wa != wb) return wa > wb;
        const double ta = std::round(tr[a]), tb = std::round(tr[b]);
        if (ta != tb) return ta < tb;
        return compare_entries(family.projections[a], family.projections[b]) < 0;
    });

    EventFamily ordered;
    ordered.time_index = t;
    for (std::size_t pos = 0; pos < k; ++pos) {
        ordered.projections.push_back(std::move(family.projections[order[pos]]));
        ordered.labels.push_back("t" + std::to_string(t) + ":e" + std::to_string(pos));
        det.weights.push_back(w[order[pos]]);
    }

    // Incoherent superposition: omega(X) - sum omega(pi X pi) = tr((Omega - sum pi Omega pi) X).
    ComplexMatrix pinched = ComplexMatrix::Zero(omega.dim(), omega.dim());
    for (const auto& p : ordered.projections) pinched += p * omega.density() * p;
    const RealVector delta = hermitian_coordinates(hermitian_part(omega.density() - pinched));
    det.superposition_residual =
        E_t.dim() > 0 ? (E_t.coordinates().transpose() * delta).cwiseAbs().maxCoeff() : 0.0;

    det.actual = det.center_of_centralizer.dim() >= 2 && det.positive_branches(weight_eps) >= 2;
    det.event = std::move(ordered);
    return det;
}

State collapse(const State& omega, const ComplexMatrix& pi, double weight_eps) {
    if (pi.rows() != static_cast<Eigen::Index>(omega.dim()) || !is_square(pi))
        fail(ErrorKind::DimensionMismatch, "collapse: projection dimension");
    if (!is_projection(pi, 1e-9)) fail(ErrorKind::ValidationError, "collapse: not a projection");
    const double w = omega.expect(pi);
    if (w <= weight_eps)
        fail(ErrorKind::ZeroProbability, "collapse onto branch of weight " + std::to_string(w));
    ComplexMatrix rho = pi * omega.density() * pi / w;
    rho = hermitian_part(rho);
    rho /= rho.trace().real();
    return State(rho, 1e-8);
}

std::vector<double> born_weights(const State& omega, const EventFamily& event) {
    std::vector<double> out;
    out.reserve(event.size());
    for (const auto& p : event.projections) {
        if (p.rows() != static_cast<Eigen::Index>(omega.dim()))
            fail(ErrorKind::DimensionMismatch, "born_weights: projection dimension");
        out.push_back(omega.expect(p));
    }
    return out;
}

ConditionalExpectation conditional_expectation(const State& omega, const StarAlgebra& M,
                                               const EventFamily& Z, const ComplexMatrix& X,
                                               double weight_eps) {
    if (omega.dim() != M.ambient_dim() || X.rows() != static_cast<Eigen::Index>(omega.dim()))
        fail(ErrorKind::DimensionMismatch, "conditional_expectation: dimensions differ");
    if (!contains(M, X, 1e-8)) fail(ErrorKind::NotMember, "X is not in M");
    for (const auto& p : Z.projections)
        if (!contains(M, p, 1e-8)) fail(ErrorKind::NotMember, "event projection is not in M");
    ConditionalExpectation out{ComplexMatrix::Zero(omega.dim(), omega.dim()), false};
    for (const auto& p : Z.projections) {
        const double w = omega.expect(p);
        if (w <= weight_eps) {
            out.degenerate_weight = true;
            continue;
        }
        out.value += (omega(p * X) / w) * p;
    }
    return out;
}

double dist_to_event_algebra(const State& omega, const StarAlgebra& M, const EventFamily& Z,
                             const ComplexMatrix& X, double weight_eps) {
    return operator_norm(X - conditional_expectation(omega, M, Z, X, weight_eps).value);
}

namespace {

double hermitian_norm(const ComplexMatrix& H) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

}  // namespace

NearestProjection nearest_projection_in_event(const ComplexMatrix& Q, const EventFamily& Z,
                                              const State& omega,
                                              const ProjectionSearch& search) {
    if (Q.rows() != static_cast<Eigen::Index>(omega.dim()))
        fail(ErrorKind::DimensionMismatch, "nearest_projection: dimension");
    if (!is_projection(Q, 1e-8)) fail(ErrorKind::ValidationError, "Q is not a projection");
    const std::size_t n = Z.size();
    const std::size_t D = omega.dim();
    const ComplexMatrix Qh = hermitian_part(Q);
    NearestProjection best{ComplexMatrix::Zero(D, D), hermitian_norm(Qh), {}};

    if (search.allow_exhaustive && n <= search.max_exhaustive) {
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
            ComplexMatrix P = ComplexMatrix::Zero(D, D);
            for (std::size_t k = 0; k < n; ++k)
                if (mask >> k & 1U) P += Z.projections[k];
            const double d = hermitian_norm(Qh - P);
            if (d < best.distance - 1e-14) {
                best.distance = d;
                best.projection = P;
                best.members.clear();
                for (std::size_t k = 0; k < n; ++k)
                    if (mask >> k & 1U) best.members.push_back(k);
            }
        }
        return best;
    }
    if (!search.allow_greedy)
        fail(ErrorKind::TooManyProjections, std::to_string(n) + " projections and no search enabled");
    ComplexMatrix P = ComplexMatrix::Zero(D, D);
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& pk = Z.projections[k];
        if (operator_norm(pk * Q - pk) < 0.5) {
            P += pk;
            members.push_back(k);
        }
    }
    return {P, hermitian_norm(Qh - P), members};
}

}  // namespace ethsim
