#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ethsim/chain.hpp"
#include "ethsim/event_family.hpp"
#include "ethsim/state.hpp"

namespace ethsim {

// 128-bit FNV-1a over entries rounded to 1e-10.
struct Fingerprint {
    std::array<std::uint8_t, 16> bytes{};
    std::string hex() const;
    bool operator==(const Fingerprint&) const = default;
    auto operator<=>(const Fingerprint&) const = default;
};

Fingerprint fingerprint(const ComplexMatrix& M);

struct HistoryStep {
    std::size_t t = 0;
    std::optional<EventFamily> event;  // empty when no actual event
    std::vector<double> weights;
    std::size_t chosen_index = 0;
    std::string chosen_label;
    double weight = 1.0;
    double entropy = 0.0;
    Fingerprint post_state_fingerprint;
    bool actual() const { return event.has_value(); }
};

struct History {
    std::vector<HistoryStep> steps;
    State final_state = State::maximally_mixed(1);
    std::uint64_t seed = 0;
};

// Samples histories of one model. Detections are memoised by (t, state
// fingerprint), so many histories over few distinct states stay cheap.
// Safe to share across threads.
class HistorySampler {
public:
    explicit HistorySampler(ChainModel model, double weight_eps = 1e-8, double svd_tol = 1e-9);

    const ChainModel& model() const { return model_; }
    double weight_eps() const { return weight_eps_; }

    std::shared_ptr<const EventDetection> detect(const State& omega, std::size_t t) const;
    History sample(std::size_t horizon, std::uint64_t seed) const;
    // History i uses derive_seed(master_seed, i); runs in parallel.
    std::vector<History> sample_many(std::size_t horizon, std::size_t count,
                                     std::uint64_t master_seed) const;

private:
    ChainModel model_;
    double weight_eps_;
    double svd_tol_;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

History sample_history(const ChainModel& model, std::size_t horizon, std::uint64_t seed,
                       double weight_eps = 1e-8);

struct TreeNode {
    std::size_t depth = 0;
    std::size_t parent = 0;             // root points at itself
    std::vector<std::size_t> children;
    std::string label;                  // edge label from the parent
    ComplexMatrix projection;           // edge projection (identity at the root)
    double edge_weight = 1.0;           // conditional Born weight of the edge
    double path_weight = 1.0;           // product of edge weights from the root
    State state = State::maximally_mixed(1);  // collapsed state at this node
    // Detection at time depth + 1; unset on nodes at the horizon.
    std::optional<EventFamily> event;
    std::vector<double> weights;
};

struct HistoryTree {
    std::vector<TreeNode> nodes;        // nodes[0] is the root
    std::size_t horizon = 0;
    double prune_eps = 0.0;
    double pruned_mass = 0.0;           // path-measure mass of dropped children

    const State& root_state() const { return nodes.front().state; }
    std::vector<std::size_t> nodes_at_depth(std::size_t depth) const;
    // Projections pi_1 .. pi_n along the root-to-node path.
    std::vector<ComplexMatrix> path_projections(std::size_t node) const;
    std::vector<std::string> path_labels(std::size_t node) const;
    // Sum of path weights per depth 0..horizon.
    std::vector<double> depth_weight_sums() const;
};

constexpr std::size_t kMaxTreeNodes = 100000;

HistoryTree enumerate_tree(const ChainModel& model, std::size_t horizon, double prune_eps,
                           double weight_eps = 1e-8, std::size_t max_nodes = kMaxTreeNodes);

// mu(xi_1..xi_n | X) = omega(Pi X X* Pi*), Pi = pi_1 pi_2 ... pi_n.
double history_measure(const State& root, const std::vector<ComplexMatrix>& events,
                       const ComplexMatrix& X);

// Largest deviation in the marginalisation sum rule over all k < m <= n on
// the tree's paths, conditioning on pi_{m+1}..pi_n X from each depth-n path.
// X should lie in the future algebra at the tree's horizon.
double check_sum_rule(const HistoryTree& tree, const ComplexMatrix& X);

double missing_information(const std::vector<double>& weights);
double missing_information_per_event(const HistoryTree& tree, std::size_t n);

struct RelativeEntropy {
    double value = 0.0;
    bool infinite = false;  // mu^opp vanished on the support of mu
};

// S_n(mu || mu^opp) with mu^opp(path) = omega(Pi* Pi).
RelativeEntropy relative_entropy_vs_reversed(const State& root, const HistoryTree& tree,
                                             std::size_t n);

struct EprBranch {
    std::string label;
    double weight = 0.0;
    double filter_value = 0.0;   // +1 when the filter probe reads 0 (P' up)
    double conditional_pz = 0.0;
};

struct EprReport {
    double theta = 0.0;
    bool event_actual = false;
    std::vector<double> unitary_marginal;   // omega(U(t,0)* sz_P U(t,0)), t = 0..T
    std::vector<EprBranch> branches;
    std::size_t samples = 0;
    double correlation = 0.0;               // mean of filter value times P outcome
    double correlation_stderr = 0.0;
};

// P' and P in a singlet; a filter probe couples to P' through a controlled
// x-rotation by theta (pi measures sz, 0 decouples).
ChainModel epr_model(double theta_filter);
EprReport epr_demo(double theta_filter, std::uint64_t seed, std::size_t samples = 10000);

}  // namespace ethsim
