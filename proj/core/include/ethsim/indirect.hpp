#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ethsim/chain.hpp"
#include "ethsim/histories.hpp"
#include "ethsim/recording.hpp"
#include "ethsim/rng.hpp"
#include "ethsim/state.hpp"

namespace ethsim {

struct ProtocolStep {
    std::size_t t = 0;
    bool actual = false;
    std::size_t eta = 0;
    std::string label;           // chosen branch, or "t{t}:none"
    std::vector<double> weights;
    double weight = 1.0;
    double entropy = 0.0;
    Fingerprint post_state_fingerprint;  // reduced system state in the window
};

struct MeasurementProtocol {
    std::vector<std::size_t> values;  // spectrum indices eta_j
    std::vector<std::size_t> times;
    std::uint64_t seed = 0;
    std::vector<ProtocolStep> steps;
};

// Repeated system-probe interaction simulated one probe at a time: the
// window is system (x) current probe with algebra B(system) (x) D(probe).
// Used probes keep only their pointer reading, so they drop out once read.
// Detections are cached by state fingerprint; safe to share across threads.
class ProbeWindow {
public:
    ProbeWindow(std::size_t system_dim, std::size_t probe_dim, ComplexMatrix probe_state,
                std::vector<ComplexMatrix> quantity, double weight_eps = 1e-8,
                double svd_tol = 1e-9);

    std::size_t system_dim() const { return s_; }
    std::size_t probe_dim() const { return p_; }

    // Couples rho_S to a fresh probe through gate, detects and records; rho_S
    // is replaced by the reduced system state after the step. Non-actual
    // steps read the pointer of the single positive-weight branch, if any,
    // and eta = 0 otherwise.
    ProtocolStep step(ComplexMatrix& rho_S, const ComplexMatrix& gate, std::size_t t,
                      Rng& rng) const;

private:
    struct Entry;
    struct Cache;
    std::shared_ptr<const Entry> lookup(const ComplexMatrix& rho) const;

    std::size_t s_, p_;
    ComplexMatrix probe_state_;
    std::vector<ComplexMatrix> quantity_;
    double weight_eps_, svd_tol_;
    std::shared_ptr<const StarAlgebra> algebra_;
    std::shared_ptr<Cache> cache_;
};

// One Rng(seed) stream drives every branch choice of the run. Models with local gates and a
// product initial state run in the window; others on the full space, which
// needs record_pointers.
MeasurementProtocol run_protocol(const ChainModel& model, const PhysicalQuantity& q,
                                 std::size_t n, std::uint64_t seed, double weight_eps = 1e-8);
MeasurementProtocol run_protocol_full(const ChainModel& model, const PhysicalQuantity& q,
                                      std::size_t n, std::uint64_t seed,
                                      double weight_eps = 1e-8);
// Shares the sampler's detection cache across runs.
MeasurementProtocol run_protocol_full(const HistorySampler& sampler, const PhysicalQuantity& q,
                                      std::size_t n, std::uint64_t seed);

// f_eta for eta = 0..k.
std::vector<double> frequencies(const MeasurementProtocol& protocol, std::size_t k);

struct NdmScenario {
    std::size_t system_dim = 2;
    std::size_t probe_dim = 2;
    ComplexMatrix gate;           // (s*p) x (s*p), system first
    ComplexMatrix conserved;      // A on the system
    PhysicalQuantity quantity;    // on system (x) probe
    ComplexMatrix system_state;
    ComplexMatrix probe_state;
    std::size_t runs = 1000;
    std::size_t steps = 20;
    double weight_eps = 1e-8;
    double svd_tol = 1e-9;
    std::size_t max_traced_runs = 1000;

    // A Hermitian, [A (x) 1, gate] = 0 and [A (x) 1, Q_eta] = 0.
    void validate() const;
};

// A's eigenprojections in ascending eigenvalue order (alpha index).
std::vector<ComplexMatrix> sector_projections(const ComplexMatrix& A);

// p(eta | alpha): one window step from the alpha-conditioned system state.
RealMatrix outcome_likelihoods(const NdmScenario& scn);

// Nearest row of p(.|alpha) in l2; lowest alpha on ties.
std::size_t classify(const std::vector<double>& freq, const RealMatrix& likelihoods);

// 1 - max_alpha tr(rho_S P_alpha).
double purification_metric(const State& system_state, const ComplexMatrix& A);

struct NdmTraceRow {
    std::size_t run = 0;
    std::size_t step = 0;
    std::size_t eta = 0;
    std::size_t estimated_alpha = 0;
    double purification = 0.0;
    double a_expectation = 0.0;
    bool actual = false;
    ProtocolStep detail;
};

struct NdmRun {
    std::uint64_t seed = 0;
    std::vector<double> frequencies;
    std::size_t classified_alpha = 0;
    std::optional<std::size_t> first_event_step;
    double purification_after_first_event = 0.0;  // max over later steps
    double frequency_error = 0.0;                 // max_eta |f - p(eta|alpha*)|
    double max_drift_between_events = 0.0;        // |change of <A>| on no-event steps
    std::vector<double> a_jumps;                  // change of <A> at events
};

struct NdmReport {
    RealMatrix likelihoods;
    double separation = 0.0;  // min l2 distance between rows
    std::vector<double> born;
    std::vector<std::size_t> classified_counts;
    std::vector<double> classified_distribution;
    std::vector<NdmRun> runs;
    std::vector<NdmTraceRow> trace;  // first max_traced_runs runs
    double max_purification_after_first_event = 0.0;
    double max_frequency_error = 0.0;
};

// Run r uses derive_seed(master_seed, r); runs execute in parallel.
NdmReport ndm_experiment(const NdmScenario& scn, std::uint64_t master_seed);

struct JumpTrajectory {
    std::vector<std::size_t> eta;
    std::vector<int> estimate;       // -1 before the first full window
    std::vector<std::size_t> sector; // most likely A sector of the true state per step
    std::size_t events = 0;
    std::size_t jumps = 0;
    std::vector<double> dwell;       // fraction of estimated steps per alpha
};

// Before each probe the system turns by exp(-i eps sigma_y) (two levels) or
// the matching real rotation of its first two levels.
JumpTrajectory weak_measurement_trajectory(const NdmScenario& scn, double drift_angle,
                                           std::size_t n, std::size_t window,
                                           std::uint64_t seed);

}  // namespace ethsim
