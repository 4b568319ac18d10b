#include "ethsim/histories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include "ethsim/errors.hpp"
#include "ethsim/parallel.hpp"
#include "ethsim/rng.hpp"

namespace ethsim {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr u128 kFnvOffset =
    (static_cast<u128>(0x6C62272E07BB0142ULL) << 64) | 0x62B821756295C58DULL;
constexpr u128 kFnvPrime = (static_cast<u128>(0x0000000001000000ULL) << 64) | 0x000000000000013BULL;

void fnv_mix(u128& h, std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
        h ^= static_cast<std::uint8_t>(word >> (8 * b));
        h *= kFnvPrime;
    }
}

// Seed for detections; fixed per time step so cached results do not depend on
// which history asked first.
std::uint64_t detection_seed(std::size_t t) { return derive_seed(0xD37EC7ULL, t); }

std::string none_label(std::size_t t) { return "t" + std::to_string(t) + ":none"; }

// Index of the branch selected by u in [0,1) among weights above eps.
std::size_t draw_branch(const std::vector<double>& w, double eps, double u) {
    double total = 0.0;
    for (double x : w)
        if (x > eps) total += x;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= eps) continue;
        acc += w[i];
        last = i;
        if (u * total < acc) return i;
    }
    return last;
}

}  // namespace

std::string Fingerprint::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(32, '0');
    for (std::size_t i = 0; i < 16; ++i) {
        out[2 * i] = digits[bytes[i] >> 4];
        out[2 * i + 1] = digits[bytes[i] & 0xF];
    }
    return out;
}

Fingerprint fingerprint(const ComplexMatrix& M) {
    u128 h = kFnvOffset;
    fnv_mix(h, static_cast<std::uint64_t>(M.rows()));
    fnv_mix(h, static_cast<std::uint64_t>(M.cols()));
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            fnv_mix(h, static_cast<std::uint64_t>(std::llround(M(i, j).real() * 1e10)));
            fnv_mix(h, static_cast<std::uint64_t>(std::llround(M(i, j).imag() * 1e10)));
        }
    Fingerprint f;
    for (int b = 0; b < 16; ++b) f.bytes[b] = static_cast<std::uint8_t>(h >> (8 * (15 - b)));
    return f;
}

struct HistorySampler::Cache {
    std::mutex mutex;
    std::map<std::pair<std::size_t, Fingerprint>, std::shared_ptr<const EventDetection>> entries;
};

HistorySampler::HistorySampler(ChainModel model, double weight_eps, double svd_tol)
    : model_(std::move(model)),
      weight_eps_(weight_eps),
      svd_tol_(svd_tol),
      cache_(std::make_shared<Cache>()) {}

std::shared_ptr<const EventDetection> HistorySampler::detect(const State& omega,
                                                             std::size_t t) const {
    const auto key = std::make_pair(t, fingerprint(omega.density()));
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->entries.find(key);
        if (it != cache_->entries.end()) return it->second;
    }
    auto det = std::make_shared<const EventDetection>(
        detect_event(omega, model_.future_algebra(t), static_cast<int>(t), weight_eps_,
                     detection_seed(t), svd_tol_));
    std::lock_guard<std::mutex> lock(cache_->mutex);
    return cache_->entries.emplace(key, std::move(det)).first->second;
}

History HistorySampler::sample(std::size_t horizon, std::uint64_t seed) const {
    if (horizon > model_.horizon())
        fail(ErrorKind::OutOfRange, "history horizon exceeds the model horizon");
    Rng rng(seed);
    History h;
    h.seed = seed;
    State omega = model_.initial_state();
    for (std::size_t t = 1; t <= horizon; ++t) {
        const auto det = detect(omega, t);
        HistoryStep step;
        step.t = t;
        if (det->actual) {
            step.event = det->event;
            step.weights = det->weights;
            step.chosen_index = draw_branch(det->weights, weight_eps_, rng.uniform());
            step.chosen_label = det->event->labels[step.chosen_index];
            step.weight = det->weights[step.chosen_index];
            step.entropy = missing_information(det->weights);
            omega = collapse(omega, det->event->projections[step.chosen_index], weight_eps_);
        } else {
            step.weights = {1.0};
            step.chosen_label = none_label(t);
        }
        step.post_state_fingerprint = fingerprint(omega.density());
        h.steps.push_back(std::move(step));
    }
    h.final_state = omega;
    return h;
}

std::vector<History> HistorySampler::sample_many(std::size_t horizon, std::size_t count,
                                                 std::uint64_t master_seed) const {
    std::vector<History> out(count);
    parallel_for(count, [&](std::size_t i) { out[i] = sample(horizon, derive_seed(master_seed, i)); });
    return out;
}

History sample_history(const ChainModel& model, std::size_t horizon, std::uint64_t seed,
                       double weight_eps) {
    return HistorySampler(model, weight_eps).sample(horizon, seed);
}

std::vector<std::size_t> HistoryTree::nodes_at_depth(std::size_t depth) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].depth == depth) out.push_back(i);
    return out;
}

std::vector<ComplexMatrix> HistoryTree::path_projections(std::size_t node) const {
    std::vector<ComplexMatrix> out;
    for (std::size_t i = node; i != 0; i = nodes[i].parent) out.push_back(nodes[i].projection);
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<std::string> HistoryTree::path_labels(std::size_t node) const {
    std::vector<std::string> out;
    for (std::size_t i = node; i != 0; i = nodes[i].parent) out.push_back(nodes[i].label);
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<double> HistoryTree::depth_weight_sums() const {
    std::vector<double> sums(horizon + 1, 0.0);
    for (const auto& n : nodes) sums[n.depth] += n.path_weight;
    return sums;
}

HistoryTree enumerate_tree(const ChainModel& model, std::size_t horizon, double prune_eps,
                           double weight_eps, std::size_t max_nodes) {
    if (horizon > model.horizon())
        fail(ErrorKind::OutOfRange, "tree horizon exceeds the model horizon");
    const HistorySampler sampler(model, weight_eps);
    const std::size_t D = model.full_dim();

    HistoryTree tree;
    tree.horizon = horizon;
    tree.prune_eps = prune_eps;
    TreeNode root;
    root.projection = identity(D);
    root.state = model.initial_state();
    tree.nodes.push_back(std::move(root));

    // Depth-first: children are appended in label order, grandchildren after.
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t id = stack.back();
        stack.pop_back();
        if (tree.nodes[id].depth == horizon) continue;
        const std::size_t t = tree.nodes[id].depth + 1;
        const auto det = sampler.detect(tree.nodes[id].state, t);

        std::vector<TreeNode> kids;
        if (det->actual) {
            tree.nodes[id].event = det->event;
            tree.nodes[id].weights = det->weights;
            for (std::size_t k = 0; k < det->weights.size(); ++k) {
                const double w = det->weights[k];
                const double mass = tree.nodes[id].path_weight * w;
                if (w <= prune_eps || w <= weight_eps) {
                    tree.pruned_mass += mass;
                    continue;
                }
                TreeNode c;
                c.label = det->event->labels[k];
                c.projection = det->event->projections[k];
                c.edge_weight = w;
                c.path_weight = mass;
                c.state = collapse(tree.nodes[id].state, c.projection, weight_eps);
                kids.push_back(std::move(c));
            }
        } else {
            tree.nodes[id].weights = {1.0};
            if (1.0 <= prune_eps) {
                tree.pruned_mass += tree.nodes[id].path_weight;
            } else {
                TreeNode c;
                c.label = none_label(t);
                c.projection = identity(D);
                c.path_weight = tree.nodes[id].path_weight;
                c.state = tree.nodes[id].state;
                kids.push_back(std::move(c));
            }
        }
        if (tree.nodes.size() + kids.size() > max_nodes)
            fail(ErrorKind::TreeTooLarge,
                 "history tree exceeds " + std::to_string(max_nodes) + " nodes");
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
            it->depth = t;
            it->parent = id;
            tree.nodes[id].children.push_back(tree.nodes.size());
            stack.push_back(tree.nodes.size());
            tree.nodes.push_back(std::move(*it));
        }
        std::reverse(tree.nodes[id].children.begin(), tree.nodes[id].children.end());
    }
    return tree;
}

double history_measure(const State& root, const std::vector<ComplexMatrix>& events,
                       const ComplexMatrix& X) {
    const auto D = static_cast<Eigen::Index>(root.dim());
    if (X.rows() != D || X.cols() != D) fail(ErrorKind::DimensionMismatch, "X dimension");
    ComplexMatrix Y = X;
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
        if (it->rows() != D || it->cols() != D)
            fail(ErrorKind::DimensionMismatch, "event projection dimension");
        Y = (*it) * Y;
    }
    return root(Y * Y.adjoint()).real();
}

double check_sum_rule(const HistoryTree& tree, const ComplexMatrix& X) {
    const std::size_t N = tree.nodes.size();
    const ComplexMatrix& Omega = tree.root_state().density();
    if (X.rows() != Omega.rows() || X.cols() != Omega.cols())
        fail(ErrorKind::DimensionMismatch, "X dimension");

    // A_node = Pi* Omega Pi, so mu(node | Y) = tr(A_node Y Y*).
    std::vector<ComplexMatrix> A(N);
    std::vector<ComplexMatrix> Pi(N);
    Pi[0] = identity(static_cast<std::size_t>(Omega.rows()));
    for (std::size_t i = 0; i < N; ++i) {
        if (i > 0) Pi[i] = Pi[tree.nodes[i].parent] * tree.nodes[i].projection;
        A[i] = Pi[i].adjoint() * Omega * Pi[i];
    }
    auto measure = [&](std::size_t node, const ComplexMatrix& Z) {
        return (A[node].transpose().cwiseProduct(Z)).sum().real();
    };

    std::size_t max_depth = 0;
    for (const auto& n : tree.nodes) max_depth = std::max(max_depth, n.depth);

    double worst = 0.0;
    std::vector<double> mu(N), below(N);
    for (std::size_t ref = 0; ref < N; ++ref) {
        const std::size_t n = tree.nodes[ref].depth;
        if (n == 0) continue;
        const auto proj = tree.path_projections(ref);
        for (std::size_t m = 1; m <= n; ++m) {
            ComplexMatrix Xc = X;
            for (std::size_t j = n; j > m; --j) Xc = proj[j - 1] * Xc;
            const ComplexMatrix Z = Xc * Xc.adjoint();
            // below[i] = sum of mu over depth-m descendants of i.
            std::fill(below.begin(), below.end(), 0.0);
            for (std::size_t i = N; i-- > 0;) {
                const std::size_t d = tree.nodes[i].depth;
                if (d > m) continue;
                mu[i] = measure(i, Z);
                if (d == m) below[i] = mu[i];
            }
            // Children have larger indices than parents, so a reverse sweep
            // accumulates complete subtree sums.
            for (std::size_t i = N; i-- > 1;)
                if (tree.nodes[i].depth <= m) below[tree.nodes[i].parent] += below[i];
            for (std::size_t i = 0; i < N; ++i) {
                if (tree.nodes[i].depth >= m) continue;
                worst = std::max(worst, std::abs(below[i] - mu[i]));
            }
        }
    }
    return worst;
}

double missing_information(const std::vector<double>& weights) {
    double total = 0.0, s = 0.0;
    for (double w : weights) {
        if (!(w >= -1e-12)) fail(ErrorKind::ValidationError, "weights must be non-negative");
        total += w;
        if (w > 0.0) s -= w * std::log(w);
    }
    if (total > 1.0 + 1e-9) fail(ErrorKind::ValidationError, "weights sum above 1");
    return s;
}

double missing_information_per_event(const HistoryTree& tree, std::size_t n) {
    if (n > tree.horizon)
        fail(ErrorKind::DepthExceeded, "depth " + std::to_string(n) + " exceeds the tree");
    if (n == 0) return 0.0;
    std::vector<double> w;
    for (std::size_t id : tree.nodes_at_depth(n)) w.push_back(tree.nodes[id].path_weight);
    double s = 0.0;
    for (double x : w)
        if (x > 0.0) s -= x * std::log(x);
    return s / static_cast<double>(n);
}

RelativeEntropy relative_entropy_vs_reversed(const State& root, const HistoryTree& tree,
                                             std::size_t n) {
    if (n > tree.horizon)
        fail(ErrorKind::DepthExceeded, "depth " + std::to_string(n) + " exceeds the tree");
    RelativeEntropy out;
    if (n == 0) return out;
    const auto D = static_cast<std::size_t>(root.dim());
    for (std::size_t id : tree.nodes_at_depth(n)) {
        ComplexMatrix Pi = identity(D);
        for (const auto& p : tree.path_projections(id)) Pi = Pi * p;
        const double mu = root(Pi * Pi.adjoint()).real();
        const double opp = root(Pi.adjoint() * Pi).real();
        if (mu <= 0.0) continue;
        if (opp <= 0.0) {
            out.infinite = true;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        out.value += mu * (std::log(mu) - std::log(opp));
    }
    if (out.value < -1e-9)
        fail(ErrorKind::ValidationError,
             "relative entropy is negative: " + std::to_string(out.value));
    return out;
}

ChainModel epr_model(double theta_filter) {
    // Sites: system = P' (x) P, one filter probe.
    const ComplexMatrix I2 = identity(2);
    ComplexMatrix P0 = ComplexMatrix::Zero(2, 2), P1 = ComplexMatrix::Zero(2, 2);
    P0(0, 0) = 1.0;
    P1(1, 1) = 1.0;
    const ComplexMatrix rx = std::cos(theta_filter / 2) * I2 -
                             cplx(0.0, std::sin(theta_filter / 2)) * pauli_x();
    const ComplexMatrix gate = kron(kron(P0, I2), I2) + kron(kron(P1, I2), rx);

    ComplexVector singlet = ComplexVector::Zero(4);
    singlet(1) = 1.0 / std::sqrt(2.0);
    singlet(2) = -1.0 / std::sqrt(2.0);
    ChainModel::Product product{singlet * singlet.adjoint(), P0};
    return ChainModel::from_local_gates(4, 2, 1, {gate}, product, true);
}

EprReport epr_demo(double theta_filter, std::uint64_t seed, std::size_t samples) {
    const ChainModel model = epr_model(theta_filter);
    const std::size_t T = model.horizon();
    const auto dims = model.site_dims();
    const ComplexMatrix sz_P = embed_site_operator(kron(identity(2), pauli_z()), 0, dims);
    ComplexMatrix ptr0 = ComplexMatrix::Zero(2, 2);
    ptr0(0, 0) = 1.0;
    const ComplexMatrix U1 = propagator(model, 1, 0);
    const ComplexMatrix probe_zero = U1.adjoint() * embed_site_operator(ptr0, 1, dims) * U1;

    EprReport r;
    r.theta = theta_filter;
    const State& omega = model.initial_state();
    for (std::size_t t = 0; t <= T; ++t) {
        const ComplexMatrix U = propagator(model, t, 0);
        r.unitary_marginal.push_back(omega.expect(U.adjoint() * sz_P * U));
    }

    const HistorySampler sampler(model);
    const auto det = sampler.detect(omega, 1);
    r.event_actual = det->actual;
    if (det->actual) {
        for (std::size_t k = 0; k < det->event->size(); ++k) {
            EprBranch b;
            b.label = det->event->labels[k];
            b.weight = det->weights[k];
            if (b.weight > sampler.weight_eps()) {
                const State post = collapse(omega, det->event->projections[k]);
                b.filter_value = post.expect(probe_zero) > 0.5 ? 1.0 : -1.0;
                b.conditional_pz = post.expect(sz_P);
            }
            r.branches.push_back(b);
        }
    } else {
        r.branches.push_back({none_label(1), 1.0, 0.0, omega.expect(sz_P)});
    }

    const auto histories = sampler.sample_many(1, samples, seed);
    std::vector<double> products(samples, 0.0);
    std::vector<char> counted(samples, 0);
    parallel_for(samples, [&](std::size_t i) {
        const HistoryStep& step = histories[i].steps.front();
        if (!step.actual()) return;
        const State& post = histories[i].final_state;
        const double f = post.expect(probe_zero) > 0.5 ? 1.0 : -1.0;
        const double p_up = 0.5 * (1.0 + post.expect(sz_P));
        Rng rng(derive_seed(seed ^ 0x9E3779B97F4A7C15ULL, i));
        const double outcome = rng.uniform() < p_up ? 1.0 : -1.0;
        products[i] = f * outcome;
        counted[i] = 1;
    });
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        if (!counted[i]) continue;
        ++r.samples;
        sum += products[i];
        sum2 += products[i] * products[i];
    }
    if (r.samples > 0) {
        const double n = static_cast<double>(r.samples);
        r.correlation = sum / n;
        const double var = std::max(0.0, sum2 / n - r.correlation * r.correlation);
        r.correlation_stderr = std::sqrt(var / n);
    }
    return r;
}

}  // namespace ethsim
