#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "ethsim/matrix.hpp"
#include "ethsim/star_algebra.hpp"
#include "ethsim/state.hpp"

namespace ethsim {

// System coupled in turn to probes 1..T. Site 0 is the system, site k the
// k-th probe; step k applies U_k to system (x) probe k.
//
// E_{>=t} = U(t,0)* [B(system) (x) R_{<=t} (x) B(probes > t)] U(t,0), where R
// is the identity on used probes, or their diagonal pointer algebra when
// record_pointers is set (used probes then keep a classical record).
class ChainModel {
public:
    struct Product {
        ComplexMatrix system;  // s x s density
        ComplexMatrix probe;   // p x p density, shared by all probes
    };

    // gates: one s*p gate per step, or a single gate reused for every step.
    static ChainModel from_local_gates(std::size_t s, std::size_t p, std::size_t T,
                                       std::vector<ComplexMatrix> gates, const State& initial,
                                       bool record_pointers = false);
    static ChainModel from_local_gates(std::size_t s, std::size_t p, std::size_t T,
                                       std::vector<ComplexMatrix> gates, const Product& product,
                                       bool record_pointers = false);
    // Full-space step unitaries; locality is verified.
    static ChainModel from_step_unitaries(std::size_t s, std::size_t p, std::size_t T,
                                          std::vector<ComplexMatrix> steps, const State& initial,
                                          bool record_pointers = false);

    std::size_t system_dim() const { return s_; }
    std::size_t probe_dim() const { return p_; }
    std::size_t horizon() const { return T_; }
    std::size_t full_dim() const;
    std::vector<std::size_t> site_dims() const;
    bool record_pointers() const { return record_pointers_; }

    const std::vector<ComplexMatrix>& step_unitaries() const { return steps_; }
    // Empty when built from full-space unitaries.
    const std::vector<ComplexMatrix>& local_gates() const { return local_; }
    const State& initial_state() const { return *initial_; }
    const std::optional<Product>& product() const { return product_; }

    // Cached E_{>=t}; thread-safe.
    const StarAlgebra& future_algebra(std::size_t t) const;

private:
    ChainModel() = default;
    void validate() const;

    std::size_t s_ = 0, p_ = 0, T_ = 0;
    bool record_pointers_ = false;
    std::vector<ComplexMatrix> steps_;
    std::vector<ComplexMatrix> local_;
    std::shared_ptr<const State> initial_;
    std::optional<Product> product_;

    struct Cache;
    std::shared_ptr<Cache> cache_;
};

constexpr std::size_t kMaxFullDim = 4096;

State product_state(const ChainModel::Product& product, std::size_t T);

// U(t, t'): maps time t' to time t; U(t, t) = 1 and U(t, t'') = U(t, t') U(t', t'').
ComplexMatrix propagator(const ChainModel& model, std::size_t t, std::size_t t_prime);

struct FiltrationSnapshot {
    std::size_t t = 0;
    StarAlgebra algebra;
    std::size_t dim = 0;
};

FiltrationSnapshot algebra_at(const ChainModel& model, std::size_t t);

// Dimension of E_{>=t} predicted by counting tensor factors.
std::size_t expected_algebra_dim(const ChainModel& model, std::size_t t);

struct PdpStep {
    std::size_t t = 0;              // compares E_{>=t+1} with E_{>=t}
    std::size_t dim_t = 0;
    std::size_t dim_next = 0;
    bool inclusion = false;
    bool strict = false;
    double max_inclusion_residual = 0.0;
    std::size_t relative_commutant_dim = 0;
};

struct PdpReport {
    std::vector<std::size_t> dims;  // dims[t] = dim E_{>=t}, t = 0..T
    std::vector<std::size_t> expected_dims;
    std::vector<PdpStep> steps;
    bool all_inclusions = true;
    bool all_strict = true;
    bool dims_match = true;
    bool ok() const { return all_inclusions && all_strict && dims_match; }
};

PdpReport verify_pdp(const ChainModel& model);

}  // namespace ethsim
