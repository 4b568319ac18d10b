#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ethsim/event_family.hpp"
#include "ethsim/matrix.hpp"
#include "ethsim/star_algebra.hpp"

namespace ethsim {

// Density matrix Omega with omega(X) = tr(Omega X).
class State {
public:
    // Validates Hermiticity, positivity and unit trace within tol.
    explicit State(const ComplexMatrix& density, double tol = 1e-10);

    static State pure(const ComplexVector& psi);
    static State maximally_mixed(std::size_t dim);

    const ComplexMatrix& density() const { return density_; }
    std::size_t dim() const { return static_cast<std::size_t>(density_.rows()); }

    cplx operator()(const ComplexMatrix& X) const;
    double expect(const ComplexMatrix& X) const { return (*this)(X).real(); }

private:
    ComplexMatrix density_;
};

struct EventDetection {
    StarAlgebra centralizer;
    StarAlgebra center_of_centralizer;
    std::optional<EventFamily> event;
    std::vector<double> weights;
    bool actual = false;
    // max |omega(X) - sum omega(pi X pi)| over the basis of E_t
    double superposition_residual = 0.0;

    // Number of branches with weight above weight_eps.
    std::size_t positive_branches(double weight_eps) const;
};

StarAlgebra centralizer_of_state(const State& omega, const StarAlgebra& M, double svd_tol = 1e-9);

StarAlgebra center_of_centralizer(const State& omega, const StarAlgebra& M,
                                  double svd_tol = 1e-9);

EventDetection detect_event(const State& omega, const StarAlgebra& E_t, int t,
                            double weight_eps = 1e-8, std::uint64_t rng_seed = 0,
                            double svd_tol = 1e-9);

State collapse(const State& omega, const ComplexMatrix& pi, double weight_eps = 1e-8);

std::vector<double> born_weights(const State& omega, const EventFamily& event);

struct ConditionalExpectation {
    ComplexMatrix value;
    bool degenerate_weight = false;  // some pi had omega(pi) <= weight_eps
};

// eps_omega(X) = sum_xi omega(pi_xi X) / omega(pi_xi) pi_xi; zero-weight
// projections contribute nothing.
ConditionalExpectation conditional_expectation(const State& omega, const StarAlgebra& M,
                                               const EventFamily& Z, const ComplexMatrix& X,
                                               double weight_eps = 1e-8);

double dist_to_event_algebra(const State& omega, const StarAlgebra& M, const EventFamily& Z,
                             const ComplexMatrix& X, double weight_eps = 1e-8);

struct NearestProjection {
    ComplexMatrix projection;
    double distance = 0.0;
    std::vector<std::size_t> members;  // indices into Z
};

struct ProjectionSearch {
    bool allow_exhaustive = true;
    bool allow_greedy = true;
    std::size_t max_exhaustive = 20;
};

NearestProjection nearest_projection_in_event(const ComplexMatrix& Q, const EventFamily& Z,
                                              const State& omega,
                                              const ProjectionSearch& search = {});

}  // namespace ethsim
