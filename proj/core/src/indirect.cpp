#include "ethsim/indirect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "ethsim/errors.hpp"
#include "ethsim/gates.hpp"
#include "ethsim/histories.hpp"
#include "ethsim/parallel.hpp"

namespace ethsim {

namespace {

std::string event_label(std::size_t t, std::size_t k) {
    return "t" + std::to_string(t) + ":e" + std::to_string(k);
}

std::string none_label(std::size_t t) { return "t" + std::to_string(t) + ":none"; }

std::size_t draw(const std::vector<double>& w, double eps, double u) {
    double total = 0.0;
    for (double x : w)
        if (x > eps) total += x;
    u *= total;
    double acc = 0.0;
    std::size_t chosen = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] <= eps) continue;
        acc += w[k];
        chosen = k;
        if (u < acc) break;
    }
    return chosen;
}

std::optional<std::size_t> single_positive(const std::vector<double>& w, double eps) {
    std::optional<std::size_t> found;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] <= eps) continue;
        if (found) return std::nullopt;
        found = k;
    }
    return found;
}

// B(s) (x) D(p) with an HS-orthonormal Hermitian basis.
StarAlgebra window_algebra(std::size_t s, std::size_t p) {
    std::vector<ComplexMatrix> basis;
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < p; ++k) {
        ComplexMatrix e = ComplexMatrix::Zero(p, p);
        e(k, k) = 1.0;
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < s; ++j) {
                ComplexMatrix h = ComplexMatrix::Zero(s, s);
                if (i == j) {
                    h(i, i) = 1.0;
                } else if (i < j) {
                    h(i, j) = r;
                    h(j, i) = r;
                } else {
                    h(i, j) = cplx(0.0, r);
                    h(j, i) = cplx(0.0, -r);
                }
                basis.push_back(kron(h, e));
            }
    }
    return StarAlgebra::from_orthonormal_basis(s * p, std::move(basis));
}

ComplexMatrix hermitize(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

struct ProbeWindow::Entry {
    EventDetection det;
    std::vector<std::optional<std::size_t>> eta;  // pointer per positive-weight branch
};

struct ProbeWindow::Cache {
    std::shared_mutex mutex;
    std::map<Fingerprint, std::shared_ptr<const Entry>> entries;
};

ProbeWindow::ProbeWindow(std::size_t system_dim, std::size_t probe_dim, ComplexMatrix probe_state,
                         std::vector<ComplexMatrix> quantity, double weight_eps, double svd_tol)
    : s_(system_dim),
      p_(probe_dim),
      probe_state_(std::move(probe_state)),
      quantity_(std::move(quantity)),
      weight_eps_(weight_eps),
      svd_tol_(svd_tol),
      cache_(std::make_shared<Cache>()) {
    if (s_ == 0 || p_ == 0) fail(ErrorKind::DimensionMismatch, "window dimensions must be positive");
    if (static_cast<std::size_t>(probe_state_.rows()) != p_)
        fail(ErrorKind::DimensionMismatch, "probe state dimension");
    State check(probe_state_);
    for (const auto& q : quantity_)
        if (static_cast<std::size_t>(q.rows()) != s_ * p_)
            fail(ErrorKind::DimensionMismatch, "quantity must act on system (x) probe");
    algebra_ = std::make_shared<const StarAlgebra>(window_algebra(s_, p_));
}

std::shared_ptr<const ProbeWindow::Entry> ProbeWindow::lookup(const ComplexMatrix& rho) const {
    const Fingerprint key = fingerprint(rho);
    {
        std::shared_lock lock(cache_->mutex);
        auto it = cache_->entries.find(key);
        if (it != cache_->entries.end()) return it->second;
    }
    auto e = std::make_shared<Entry>();
    e->det = detect_event(State(rho, 1e-8), *algebra_, 0, weight_eps_, derive_seed(0xD37EC7, 0),
                          svd_tol_);
    const EventFamily& Z = *e->det.event;
    e->eta.resize(Z.size());
    for (std::size_t k = 0; k < Z.size(); ++k)
        if (e->det.weights[k] > weight_eps_) e->eta[k] = resolve_pointer(Z.projections[k], quantity_);
    std::unique_lock lock(cache_->mutex);
    return cache_->entries.emplace(key, std::move(e)).first->second;
}

ProtocolStep ProbeWindow::step(ComplexMatrix& rho_S, const ComplexMatrix& gate, std::size_t t,
                               Rng& rng) const {
    if (static_cast<std::size_t>(rho_S.rows()) != s_ ||
        static_cast<std::size_t>(gate.rows()) != s_ * p_)
        fail(ErrorKind::DimensionMismatch, "window step dimensions");
    ComplexMatrix rho = hermitize(gate * kron(rho_S, probe_state_) * gate.adjoint());
    const auto entry = lookup(rho);
    const EventDetection& det = entry->det;
    const EventFamily& Z = *det.event;

    ProtocolStep out;
    out.t = t;
    if (det.actual) {
        const std::size_t k = draw(det.weights, weight_eps_, rng.uniform());
        if (!entry->eta[k])
            fail(ErrorKind::AmbiguousPointer, "no unique pointer for branch " + event_label(t, k));
        out.actual = true;
        out.eta = *entry->eta[k];
        out.label = event_label(t, k);
        out.weights = det.weights;
        out.weight = det.weights[k];
        out.entropy = missing_information(det.weights);
        const ComplexMatrix& pi = Z.projections[k];
        rho = hermitize(pi * rho * pi / det.weights[k]);
    } else {
        out.label = none_label(t);
        out.weights = {1.0};
        if (auto k = single_positive(det.weights, weight_eps_); k && entry->eta[*k])
            out.eta = *entry->eta[*k];
    }
    rho_S = hermitize(partial_trace_tail(rho, s_));
    out.post_state_fingerprint = fingerprint(rho_S);
    return out;
}

MeasurementProtocol run_protocol_full(const ChainModel& model, const PhysicalQuantity& q,
                                      std::size_t n, std::uint64_t seed, double weight_eps) {
    return run_protocol_full(HistorySampler(model, weight_eps), q, n, seed);
}

MeasurementProtocol run_protocol_full(const HistorySampler& sampler, const PhysicalQuantity& q,
                                      std::size_t n, std::uint64_t seed) {
    const ChainModel& model = sampler.model();
    const double weight_eps = sampler.weight_eps();
    if (n > model.horizon()) fail(ErrorKind::OutOfRange, "protocol length exceeds the horizon");
    if (!model.record_pointers() && !q.site)
        fail(ErrorKind::NotInFutureAlgebra, "pointer readings need record_pointers");
    Rng rng(seed);
    MeasurementProtocol out;
    out.seed = seed;
    State omega = model.initial_state();
    for (std::size_t t = 1; t <= n; ++t) {
        const auto Q = represent_at(q, model, t);
        const auto det = sampler.detect(omega, t);
        const EventFamily& Z = *det->event;
        ProtocolStep st;
        st.t = t;
        if (det->actual) {
            const std::size_t k = draw(det->weights, weight_eps, rng.uniform());
            const auto eta = resolve_pointer(Z.projections[k], Q);
            if (!eta) fail(ErrorKind::AmbiguousPointer, "no unique pointer for branch " + Z.labels[k]);
            st.actual = true;
            st.eta = *eta;
            st.label = Z.labels[k];
            st.weights = det->weights;
            st.weight = det->weights[k];
            st.entropy = missing_information(det->weights);
            omega = collapse(omega, Z.projections[k], weight_eps);
        } else {
            st.label = none_label(t);
            st.weights = {1.0};
            if (auto k = single_positive(det->weights, weight_eps))
                if (auto eta = resolve_pointer(Z.projections[*k], Q)) st.eta = *eta;
        }
        st.post_state_fingerprint = fingerprint(omega.density());
        out.values.push_back(st.eta);
        out.times.push_back(t);
        out.steps.push_back(std::move(st));
    }
    return out;
}

MeasurementProtocol run_protocol(const ChainModel& model, const PhysicalQuantity& q,
                                 std::size_t n, std::uint64_t seed, double weight_eps) {
    q.validate();
    if (n > model.horizon()) fail(ErrorKind::OutOfRange, "protocol length exceeds the horizon");
    const auto& local = model.local_gates();
    if (local.empty() || !model.product() || q.site)
        return run_protocol_full(model, q, n, seed, weight_eps);

    const ProbeWindow window(model.system_dim(), model.probe_dim(), model.product()->probe,
                             q.abstract_projections, weight_eps);
    Rng rng(seed);
    MeasurementProtocol out;
    out.seed = seed;
    ComplexMatrix rho_S = model.product()->system;
    for (std::size_t t = 1; t <= n; ++t) {
        const ComplexMatrix& gate = local.size() == 1 ? local.front() : local[t - 1];
        ProtocolStep st = window.step(rho_S, gate, t, rng);
        out.values.push_back(st.eta);
        out.times.push_back(t);
        out.steps.push_back(std::move(st));
    }
    return out;
}

std::vector<double> frequencies(const MeasurementProtocol& protocol, std::size_t k) {
    if (protocol.values.empty()) fail(ErrorKind::EmptyProtocol, "no outcomes recorded");
    std::vector<double> f(k + 1, 0.0);
    for (std::size_t v : protocol.values) {
        if (v > k) fail(ErrorKind::OutOfRange, "outcome " + std::to_string(v) + " above k");
        f[v] += 1.0;
    }
    for (double& x : f) x /= static_cast<double>(protocol.values.size());
    return f;
}

void NdmScenario::validate() const {
    const std::size_t sp = system_dim * probe_dim;
    if (system_dim == 0 || probe_dim == 0) fail(ErrorKind::DimensionMismatch, "empty dimensions");
    if (static_cast<std::size_t>(gate.rows()) != sp || !is_square(gate))
        fail(ErrorKind::DimensionMismatch, "gate must be (s*p) x (s*p)");
    if (!is_unitary(gate, 1e-9)) fail(ErrorKind::ValidationError, "gate is not unitary");
    if (static_cast<std::size_t>(conserved.rows()) != system_dim || !is_square(conserved))
        fail(ErrorKind::DimensionMismatch, "conserved quantity must act on the system");
    if (!is_hermitian(conserved, 1e-9)) fail(ErrorKind::NotHermitian, "conserved quantity");
    if (static_cast<std::size_t>(system_state.rows()) != system_dim ||
        static_cast<std::size_t>(probe_state.rows()) != probe_dim)
        fail(ErrorKind::DimensionMismatch, "initial state dimensions");
    State a(system_state), b(probe_state);
    quantity.validate();
    if (static_cast<std::size_t>(quantity.abstract_projections.front().rows()) != sp)
        fail(ErrorKind::DimensionMismatch, "quantity must act on system (x) probe");
    const ComplexMatrix A1 = kron(conserved, identity(probe_dim));
    if (operator_norm(commutator(A1, gate)) > 1e-9)
        fail(ErrorKind::ValidationError, "gate does not conserve A");
    for (const auto& Q : quantity.abstract_projections)
        if (operator_norm(commutator(A1, Q)) > 1e-9)
            fail(ErrorKind::ValidationError, "quantity does not commute with A");
    if (steps == 0) fail(ErrorKind::EmptyProtocol, "no steps");
}

std::vector<ComplexMatrix> sector_projections(const ComplexMatrix& A) {
    return hermitian_eig(A).projections;
}

RealMatrix outcome_likelihoods(const NdmScenario& scn) {
    const auto P = sector_projections(scn.conserved);
    const auto& Q = scn.quantity.abstract_projections;
    RealMatrix L(P.size(), Q.size());
    for (std::size_t a = 0; a < P.size(); ++a) {
        ComplexMatrix rho = P[a] * scn.system_state * P[a];
        const double w = rho.trace().real();
        rho = w > scn.weight_eps ? ComplexMatrix(rho / w) : ComplexMatrix(P[a] / P[a].trace().real());
        const ComplexMatrix joint = scn.gate * kron(rho, scn.probe_state) * scn.gate.adjoint();
        for (std::size_t e = 0; e < Q.size(); ++e) L(a, e) = (Q[e] * joint).trace().real();
    }
    return L;
}

namespace {

std::vector<double> distances(const std::vector<double>& f, const RealMatrix& L) {
    if (static_cast<std::size_t>(L.cols()) != f.size())
        fail(ErrorKind::DimensionMismatch, "frequency vector length");
    std::vector<double> d(L.rows());
    for (Eigen::Index a = 0; a < L.rows(); ++a) {
        double acc = 0.0;
        for (Eigen::Index e = 0; e < L.cols(); ++e) acc += std::pow(f[e] - L(a, e), 2);
        d[a] = std::sqrt(acc);
    }
    return d;
}

double separation_of(const RealMatrix& L) {
    double sep = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < L.rows(); ++a)
        for (Eigen::Index b = a + 1; b < L.rows(); ++b)
            sep = std::min(sep, (L.row(a) - L.row(b)).norm());
    return sep;
}

double purification_of(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& P) {
    double best = 0.0;
    for (const auto& p : P) best = std::max(best, (p * rho).trace().real());
    return 1.0 - best;
}

std::size_t likeliest_sector(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& P) {
    std::size_t best = 0;
    double w = -1.0;
    for (std::size_t a = 0; a < P.size(); ++a) {
        const double x = (P[a] * rho).trace().real();
        if (x > w) w = x, best = a;
    }
    return best;
}

}  // namespace

std::size_t classify(const std::vector<double>& freq, const RealMatrix& likelihoods) {
    const auto d = distances(freq, likelihoods);
    return static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
}

double purification_metric(const State& system_state, const ComplexMatrix& A) {
    if (A.rows() != static_cast<Eigen::Index>(system_state.dim()))
        fail(ErrorKind::DimensionMismatch, "conserved quantity dimension");
    return purification_of(system_state.density(), sector_projections(A));
}

NdmReport ndm_experiment(const NdmScenario& scn, std::uint64_t master_seed) {
    scn.validate();
    NdmReport report;
    report.likelihoods = outcome_likelihoods(scn);
    report.separation = separation_of(report.likelihoods);
    if (report.separation < 1e-6)
        fail(ErrorKind::SeparationFailure,
             "outcome distributions of two sectors coincide (distance " +
                 std::to_string(report.separation) + ")");
    const auto P = sector_projections(scn.conserved);
    for (const auto& p : P) report.born.push_back((p * scn.system_state).trace().real());

    const ProbeWindow window(scn.system_dim, scn.probe_dim, scn.probe_state,
                             scn.quantity.abstract_projections, scn.weight_eps, scn.svd_tol);
    const std::size_t K = scn.quantity.abstract_projections.size();
    const std::size_t traced = std::min(scn.runs, scn.max_traced_runs);
    report.runs.resize(scn.runs);
    std::vector<std::vector<NdmTraceRow>> traces(traced);

    parallel_for(scn.runs, [&](std::size_t r) {
        NdmRun& run = report.runs[r];
        run.seed = derive_seed(master_seed, r);
        Rng rng(run.seed);
        ComplexMatrix rho = scn.system_state;
        std::vector<double> counts(K, 0.0);
        double a_prev = (scn.conserved * rho).trace().real();
        for (std::size_t j = 1; j <= scn.steps; ++j) {
            const ProtocolStep st = window.step(rho, scn.gate, j, rng);
            counts[st.eta] += 1.0;
            const double a_now = (scn.conserved * rho).trace().real();
            const double purity = purification_of(rho, P);
            if (st.actual) {
                run.a_jumps.push_back(a_now - a_prev);
                if (!run.first_event_step) run.first_event_step = j;
            } else {
                run.max_drift_between_events =
                    std::max(run.max_drift_between_events, std::abs(a_now - a_prev));
            }
            if (run.first_event_step)
                run.purification_after_first_event =
                    std::max(run.purification_after_first_event, purity);
            a_prev = a_now;
            if (r < traced) {
                std::vector<double> f(counts);
                for (double& x : f) x /= static_cast<double>(j);
                traces[r].push_back({r, j, st.eta, classify(f, report.likelihoods), purity, a_now,
                                     st.actual, st});
            }
        }
        run.frequencies = counts;
        for (double& x : run.frequencies) x /= static_cast<double>(scn.steps);
        run.classified_alpha = classify(run.frequencies, report.likelihoods);
        for (std::size_t e = 0; e < K; ++e)
            run.frequency_error =
                std::max(run.frequency_error,
                         std::abs(run.frequencies[e] -
                                  report.likelihoods(static_cast<Eigen::Index>(run.classified_alpha),
                                                     static_cast<Eigen::Index>(e))));
    });

    report.classified_counts.assign(P.size(), 0);
    for (const auto& run : report.runs) {
        ++report.classified_counts[run.classified_alpha];
        report.max_purification_after_first_event =
            std::max(report.max_purification_after_first_event, run.purification_after_first_event);
        report.max_frequency_error = std::max(report.max_frequency_error, run.frequency_error);
    }
    for (std::size_t c : report.classified_counts)
        report.classified_distribution.push_back(static_cast<double>(c) /
                                                 static_cast<double>(scn.runs));
    for (auto& t : traces)
        report.trace.insert(report.trace.end(), t.begin(), t.end());
    return report;
}

JumpTrajectory weak_measurement_trajectory(const NdmScenario& scn, double drift_angle,
                                           std::size_t n, std::size_t window_size,
                                           std::uint64_t seed) {
    scn.validate();
    if (!(std::abs(drift_angle) <= 0.2))
        fail(ErrorKind::ValidationError, "drift angle must satisfy |eps| <= 0.2");
    if (window_size < 10) fail(ErrorKind::ValidationError, "window must hold at least 10 outcomes");
    if (n < window_size) fail(ErrorKind::ValidationError, "trajectory shorter than the window");
    const auto P = sector_projections(scn.conserved);
    const ComplexMatrix gate = gates::sequence(
        {gates::system_rotation(scn.system_dim, scn.probe_dim, drift_angle), scn.gate});
    const ProbeWindow window(scn.system_dim, scn.probe_dim, scn.probe_state,
                             scn.quantity.abstract_projections, scn.weight_eps, scn.svd_tol);

    JumpTrajectory out;
    Rng rng(seed);
    ComplexMatrix rho = scn.system_state;
    for (std::size_t j = 1; j <= n; ++j) {
        const ProtocolStep st = window.step(rho, gate, j, rng);
        if (st.actual) ++out.events;
        out.eta.push_back(st.eta);
        out.sector.push_back(likeliest_sector(rho, P));
    }
    if (out.events == 0) fail(ErrorKind::NoEvent, "no actual events; the trajectory is undefined");
    const RealMatrix L = outcome_likelihoods(scn);
    if (separation_of(L) < 1e-6)
        fail(ErrorKind::SeparationFailure, "outcome distributions of two sectors coincide");

    std::vector<double> counts(scn.quantity.abstract_projections.size(), 0.0);
    int previous = -1;
    for (std::size_t j = 1; j <= n; ++j) {
        counts[out.eta[j - 1]] += 1.0;
        if (j > window_size) counts[out.eta[j - 1 - window_size]] -= 1.0;
        if (j < window_size) {
            out.estimate.push_back(-1);
            continue;
        }
        std::vector<double> f(counts);
        for (double& x : f) x /= static_cast<double>(window_size);
        const auto d = distances(f, L);
        const double best = *std::min_element(d.begin(), d.end());
        std::vector<int> tied;
        for (std::size_t a = 0; a < d.size(); ++a)
            if (d[a] <= best + 1e-12) tied.push_back(static_cast<int>(a));
        int est = tied.front();
        if (tied.size() > 1 && previous >= 0) est = previous;
        if (previous >= 0 && est != previous) ++out.jumps;
        previous = est;
        out.estimate.push_back(est);
    }
    out.dwell.assign(P.size(), 0.0);
    const double defined = static_cast<double>(n - window_size + 1);
    for (int e : out.estimate)
        if (e >= 0) out.dwell[static_cast<std::size_t>(e)] += 1.0 / defined;
    return out;
}

}  // namespace ethsim
