#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ethsim/chain.hpp"
#include "ethsim/state.hpp"

namespace ethsim {

// Abelian family of projections on the reference factor system (x) probe.
// Index 0 is the null outcome by convention.
struct PhysicalQuantity {
    std::string name;
    std::vector<double> spectrum;
    std::vector<ComplexMatrix> abstract_projections;  // (s*p) x (s*p)
    // Probe site carrying the quantity; unset means the probe of the step
    // being recorded (t with pointer records, t + 1 otherwise).
    std::optional<std::size_t> site;

    // Spectrum 0..p-1, projections 1_s (x) |k><k|.
    static PhysicalQuantity probe_z(std::size_t s, std::size_t p);
    void validate() const;
};

std::size_t designated_site(const PhysicalQuantity& q, const ChainModel& model, std::size_t t);

// Q_alpha(t) = U(t,0)* embed(Q_alpha) U(t,0), each checked to lie in E_{>=t}.
std::vector<ComplexMatrix> represent_at(const PhysicalQuantity& q, const ChainModel& model,
                                        std::size_t t);

// (N/M)(1 - delta) for 2 <= N <= M, 0 for N < 2; N > M is a ValidationError.
double resolution(std::size_t N, std::size_t M, double delta);

// Smallest number of event branches whose weights reach 1 - delta, taking
// branches by descending weight (ties in label order).
std::size_t covering_count(const std::vector<double>& weights, double delta);

struct PointerMatch {
    std::size_t alpha = 0;
    std::string label;
    double distance = 0.0;  // ||pi Q_alpha - pi||
};

struct RecordingReport {
    double delta = 0.0;
    bool condition_a = false;
    bool condition_b = false;
    bool condition_c = false;
    double null_weight = 0.0;           // omega(Q_0)
    double condition_c_max_dist = 0.0;  // max over alpha >= 1
    std::size_t N = 0;
    std::size_t M = 0;
    bool n_exceeds_m = false;           // resolution undefined; reported as 0
    double resolution = 0.0;
    std::vector<PointerMatch> matches;  // one per positive-weight branch with a pointer
    bool ok() const { return condition_a && condition_b && condition_c; }
};

RecordingReport check_recording_conditions(const State& omega, const StarAlgebra& E_t,
                                           const std::vector<ComplexMatrix>& Q,
                                           const EventDetection& detection, double delta,
                                           double weight_eps = 1e-8);

// Unique alpha with ||pi Q_alpha - pi|| < 1/2, if any.
std::optional<std::size_t> resolve_pointer(const ComplexMatrix& pi,
                                           const std::vector<ComplexMatrix>& Q);

struct RecordedEvent {
    std::size_t alpha = 0;
    std::size_t event_index = 0;
    std::string label;
    State post = State::maximally_mixed(1);
};

// Samples the actual branch by Born weights and reads its pointer.
// Requires the recording conditions at level delta and N * delta < 0.1.
RecordedEvent record_event(const State& omega, const StarAlgebra& E_t,
                           const std::vector<ComplexMatrix>& Q, const EventDetection& detection,
                           double delta, std::uint64_t seed, double weight_eps = 1e-8);

constexpr double kDichotomyConstant = 16.0;

struct DichotomyEntry {
    std::size_t xi = 0;
    std::size_t alpha = 0;
    double on = 0.0;   // ||pi Q - pi||
    double off = 0.0;  // ||pi Q||
    double min() const { return on < off ? on : off; }
};

struct DichotomyReport {
    double delta = 0.0;
    double constant = kDichotomyConstant;
    std::vector<DichotomyEntry> entries;  // positive-weight branches only
    double max_min = 0.0;
    bool holds = true;                    // max_min <= constant * delta
};

DichotomyReport verify_result_dichotomy(const EventDetection& detection,
                                        const std::vector<ComplexMatrix>& Q, double delta,
                                        double constant = kDichotomyConstant,
                                        double weight_eps = 1e-8);

// |omega(X) - sum_{alpha >= 1} omega(Q_alpha X Q_alpha)|.
double superposition_defect(const State& omega, const std::vector<ComplexMatrix>& Q,
                            const ComplexMatrix& X);

}  // namespace ethsim
