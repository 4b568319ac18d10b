#include "ethsim/recording.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ethsim/errors.hpp"
#include "ethsim/rng.hpp"

namespace ethsim {

PhysicalQuantity PhysicalQuantity::probe_z(std::size_t s, std::size_t p) {
    PhysicalQuantity q;
    q.name = "probe_z";
    for (std::size_t k = 0; k < p; ++k) {
        ComplexMatrix e = ComplexMatrix::Zero(p, p);
        e(k, k) = 1.0;
        q.spectrum.push_back(static_cast<double>(k));
        q.abstract_projections.push_back(kron(identity(s), e));
    }
    return q;
}

void PhysicalQuantity::validate() const {
    if (abstract_projections.empty())
        fail(ErrorKind::ValidationError, "quantity '" + name + "' has no projections");
    if (spectrum.size() != abstract_projections.size())
        fail(ErrorKind::ValidationError, "quantity '" + name + "': spectrum and projections differ in size");
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        for (std::size_t j = i + 1; j < spectrum.size(); ++j)
            if (spectrum[i] == spectrum[j])
                fail(ErrorKind::ValidationError, "quantity '" + name + "': spectrum values repeat");
    const auto n = abstract_projections.front().rows();
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (std::size_t a = 0; a < abstract_projections.size(); ++a) {
        const auto& P = abstract_projections[a];
        if (P.rows() != n || !is_projection(P, 1e-9))
            fail(ErrorKind::ValidationError, "quantity '" + name + "': entry " + std::to_string(a) +
                                                 " is not a projection");
        for (std::size_t b = a + 1; b < abstract_projections.size(); ++b)
            if ((P * abstract_projections[b]).norm() > 1e-9)
                fail(ErrorKind::ValidationError, "quantity '" + name + "': projections overlap");
        sum += P;
    }
    if ((sum - identity(static_cast<std::size_t>(n))).norm() > 1e-9)
        fail(ErrorKind::ValidationError, "quantity '" + name + "': projections do not sum to 1");
}

std::size_t designated_site(const PhysicalQuantity& q, const ChainModel& model, std::size_t t) {
    if (q.site) return *q.site;
    return model.record_pointers() ? std::max<std::size_t>(t, 1) : t + 1;
}

std::vector<ComplexMatrix> represent_at(const PhysicalQuantity& q, const ChainModel& model,
                                        std::size_t t) {
    q.validate();
    const std::size_t T = model.horizon();
    if (t > T) fail(ErrorKind::OutOfRange, "time " + std::to_string(t) + " beyond the horizon");
    const std::size_t site = designated_site(q, model, t);
    if (site == 0 || site > T)
        fail(ErrorKind::OutOfRange, "probe site " + std::to_string(site) + " does not exist");
    const std::size_t sp = model.system_dim() * model.probe_dim();
    if (static_cast<std::size_t>(q.abstract_projections.front().rows()) != sp)
        fail(ErrorKind::DimensionMismatch, "quantity must act on system (x) probe");
    if (site <= t && !model.record_pointers())
        fail(ErrorKind::NotInFutureAlgebra,
             "probe " + std::to_string(site) + " is already used at t = " + std::to_string(t));

    const auto dims = model.site_dims();
    const ComplexMatrix U = propagator(model, t, 0);
    const StarAlgebra& E = model.future_algebra(t);
    std::vector<ComplexMatrix> out;
    for (const auto& P : q.abstract_projections) {
        ComplexMatrix Q = U.adjoint() * embed_two_site_operator(P, 0, site, dims) * U;
        if (!contains(E, Q, 1e-8))
            fail(ErrorKind::NotInFutureAlgebra,
                 "quantity '" + q.name + "' is not represented in E_{>=" + std::to_string(t) + "}");
        out.push_back(std::move(Q));
    }
    return out;
}

double resolution(std::size_t N, std::size_t M, double delta) {
    if (N > M)
        fail(ErrorKind::ValidationError, "resolution undefined for N = " + std::to_string(N) +
                                             " > M = " + std::to_string(M));
    if (N < 2) return 0.0;
    return static_cast<double>(N) / static_cast<double>(M) * (1.0 - delta);
}

std::size_t covering_count(const std::vector<double>& weights, double delta) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    double acc = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        acc += weights[order[k]];
        if (acc >= 1.0 - delta - 1e-12) return k + 1;
    }
    return order.size();
}

std::optional<std::size_t> resolve_pointer(const ComplexMatrix& pi,
                                           const std::vector<ComplexMatrix>& Q) {
    std::optional<std::size_t> found;
    for (std::size_t a = 0; a < Q.size(); ++a) {
        if (operator_norm(pi * Q[a] - pi) < 0.5) {
            if (found) return std::nullopt;
            found = a;
        }
    }
    return found;
}

namespace {

const EventFamily& require_event(const EventDetection& detection) {
    if (!detection.actual || !detection.event)
        fail(ErrorKind::NoEvent, "recording needs an actual event");
    return *detection.event;
}

}  // namespace

RecordingReport check_recording_conditions(const State& omega, const StarAlgebra& E_t,
                                           const std::vector<ComplexMatrix>& Q,
                                           const EventDetection& detection, double delta,
                                           double weight_eps) {
    const EventFamily& Z = require_event(detection);
    if (Q.empty()) fail(ErrorKind::ValidationError, "no quantity representatives");
    const std::size_t D = omega.dim();
    RecordingReport r;
    r.delta = delta;

    ComplexMatrix sum = ComplexMatrix::Zero(D, D);
    for (const auto& q : Q) {
        if (static_cast<std::size_t>(q.rows()) != D)
            fail(ErrorKind::DimensionMismatch, "quantity representative dimension");
        sum += q;
    }
    r.condition_a = operator_norm(sum - identity(D)) <= 1e-9;
    r.null_weight = omega.expect(Q.front());
    r.condition_b = r.null_weight <= delta;
    for (std::size_t a = 1; a < Q.size(); ++a)
        r.condition_c_max_dist = std::max(r.condition_c_max_dist,
                                          dist_to_event_algebra(omega, E_t, Z, Q[a], weight_eps));
    r.condition_c = r.condition_c_max_dist < delta;

    r.N = Q.size() - 1;
    r.M = covering_count(detection.weights, delta);
    if (r.N > r.M) {
        r.n_exceeds_m = true;
    } else {
        r.resolution = resolution(r.N, r.M, delta);
    }
    for (std::size_t k = 0; k < Z.size(); ++k) {
        if (detection.weights[k] <= weight_eps) continue;
        if (auto a = resolve_pointer(Z.projections[k], Q))
            r.matches.push_back({*a, Z.labels[k], operator_norm(Z.projections[k] * Q[*a] - Z.projections[k])});
    }
    return r;
}

RecordedEvent record_event(const State& omega, const StarAlgebra& E_t,
                           const std::vector<ComplexMatrix>& Q, const EventDetection& detection,
                           double delta, std::uint64_t seed, double weight_eps) {
    const EventFamily& Z = require_event(detection);
    const RecordingReport report =
        check_recording_conditions(omega, E_t, Q, detection, delta, weight_eps);
    if (!report.ok())
        fail(ErrorKind::ValidationError,
             "recording conditions fail at delta = " + std::to_string(delta) +
                 " (a: " + std::to_string(report.condition_a) + ", b: " +
                 std::to_string(report.condition_b) +
                 ", c max dist: " + std::to_string(report.condition_c_max_dist) + ")");
    if (static_cast<double>(report.N) * delta >= 0.1)
        fail(ErrorKind::ValidationError, "N * delta must stay below 0.1");

    Rng rng(seed);
    double total = 0.0;
    for (double w : detection.weights)
        if (w > weight_eps) total += w;
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t chosen = 0;
    for (std::size_t k = 0; k < Z.size(); ++k) {
        if (detection.weights[k] <= weight_eps) continue;
        acc += detection.weights[k];
        chosen = k;
        if (u < acc) break;
    }
    const auto alpha = resolve_pointer(Z.projections[chosen], Q);
    if (!alpha)
        fail(ErrorKind::AmbiguousPointer, "no unique pointer for branch " + Z.labels[chosen]);
    return {*alpha, chosen, Z.labels[chosen], collapse(omega, Z.projections[chosen], weight_eps)};
}

DichotomyReport verify_result_dichotomy(const EventDetection& detection,
                                        const std::vector<ComplexMatrix>& Q, double delta,
                                        double constant, double weight_eps) {
    const EventFamily& Z = require_event(detection);
    DichotomyReport r;
    r.delta = delta;
    r.constant = constant;
    for (std::size_t k = 0; k < Z.size(); ++k) {
        if (detection.weights[k] <= weight_eps) continue;
        const ComplexMatrix& pi = Z.projections[k];
        for (std::size_t a = 0; a < Q.size(); ++a) {
            const ComplexMatrix pq = pi * Q[a];
            DichotomyEntry e{k, a, operator_norm(pq - pi), operator_norm(pq)};
            r.max_min = std::max(r.max_min, e.min());
            r.entries.push_back(e);
        }
    }
    r.holds = r.max_min <= constant * delta;
    return r;
}

double superposition_defect(const State& omega, const std::vector<ComplexMatrix>& Q,
                            const ComplexMatrix& X) {
    cplx acc = omega(X);
    for (std::size_t a = 1; a < Q.size(); ++a) acc -= omega(Q[a] * X * Q[a]);
    return std::abs(acc);
}

}  // namespace ethsim
