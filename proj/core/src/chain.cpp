#include "ethsim/chain.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include "ethsim/errors.hpp"

namespace ethsim {

struct ChainModel::Cache {
    explicit Cache(std::size_t T) : flags(T + 1), algebras(T + 1) {}
    std::vector<std::once_flag> flags;
    std::vector<std::unique_ptr<StarAlgebra>> algebras;
};

namespace {

std::vector<ComplexMatrix> full_factor_basis(std::size_t n) {
    std::vector<ComplexMatrix> out;
    out.reserve(n * n);
    for (std::size_t k = 0; k < n * n; ++k)
        out.push_back(from_hermitian_coordinates(RealVector::Unit(n * n, k), n));
    return out;
}

std::vector<ComplexMatrix> pointer_factor_basis(std::size_t n) {
    std::vector<ComplexMatrix> out;
    for (std::size_t k = 0; k < n; ++k) {
        ComplexMatrix P = ComplexMatrix::Zero(n, n);
        P(k, k) = 1.0;
        out.push_back(P);
    }
    return out;
}

std::vector<ComplexMatrix> tensor_basis(const std::vector<std::vector<ComplexMatrix>>& factors) {
    std::vector<ComplexMatrix> acc{ComplexMatrix::Identity(1, 1)};
    for (const auto& f : factors) {
        std::vector<ComplexMatrix> next;
        next.reserve(acc.size() * f.size());
        for (const auto& a : acc)
            for (const auto& b : f) next.push_back(kron(a, b));
        acc = std::move(next);
    }
    return acc;
}

// Cyclic shift and clock: together they generate M_n.
std::vector<ComplexMatrix> weyl_generators(std::size_t n) {
    ComplexMatrix X = ComplexMatrix::Zero(n, n), Z = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        X((k + 1) % n, k) = 1.0;
        Z(k, k) = std::polar(1.0, 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n) + 0.1 * k);
    }
    return {X, Z};
}

void check_size(std::size_t s, std::size_t p, std::size_t T) {
    if (s == 0) fail(ErrorKind::ValidationError, "system_dim must be >= 1");
    if (p == 0) fail(ErrorKind::ValidationError, "probe_dim must be >= 1");
    if (T == 0) fail(ErrorKind::ValidationError, "horizon must be >= 1");
    const double dim = static_cast<double>(s) * std::pow(static_cast<double>(p), static_cast<double>(T));
    if (dim > static_cast<double>(kMaxFullDim))
        fail(ErrorKind::ValidationError, "full dimension s*p^T exceeds the cap of 4096");
}

}  // namespace

std::size_t ChainModel::full_dim() const {
    std::size_t d = s_;
    for (std::size_t k = 0; k < T_; ++k) d *= p_;
    return d;
}

std::vector<std::size_t> ChainModel::site_dims() const {
    std::vector<std::size_t> dims(T_ + 1, p_);
    dims[0] = s_;
    return dims;
}

void ChainModel::validate() const {
    check_size(s_, p_, T_);
    if (steps_.size() != T_) fail(ErrorKind::ValidationError, "need one step unitary per time step");
    const std::size_t D = full_dim();
    if (initial_->dim() != D) fail(ErrorKind::DimensionMismatch, "initial state dimension");
    const auto dims = site_dims();
    const auto gens = weyl_generators(p_);
    for (std::size_t k = 0; k < T_; ++k) {
        const auto& U = steps_[k];
        if (static_cast<std::size_t>(U.rows()) != D || !is_square(U))
            fail(ErrorKind::DimensionMismatch, "step unitary dimension");
        if (!is_unitary(U, 1e-9))
            fail(ErrorKind::ValidationError, "step " + std::to_string(k + 1) + " is not unitary");
        if (p_ == 1) continue;
        for (std::size_t site = 1; site <= T_; ++site) {
            if (site == k + 1) continue;
            for (const auto& g : gens) {
                const ComplexMatrix G = embed_site_operator(g, site, dims);
                if (commutator(U, G).norm() > 1e-9 * (1.0 + D))
                    fail(ErrorKind::ValidationError, "step " + std::to_string(k + 1) +
                                                         " acts on probe " + std::to_string(site));
            }
        }
    }
}

ChainModel ChainModel::from_local_gates(std::size_t s, std::size_t p, std::size_t T,
                                        std::vector<ComplexMatrix> gates, const State& initial,
                                        bool record_pointers) {
    check_size(s, p, T);
    ChainModel m;
    m.s_ = s;
    m.p_ = p;
    m.T_ = T;
    m.record_pointers_ = record_pointers;
    m.initial_ = std::make_shared<const State>(initial);
    if (gates.size() == 1 && T > 1) gates.assign(T, gates.front());
    if (gates.size() != T) fail(ErrorKind::ValidationError, "need one gate per step or a single gate");
    const auto dims = m.site_dims();
    for (std::size_t k = 0; k < T; ++k) {
        if (static_cast<std::size_t>(gates[k].rows()) != s * p || !is_square(gates[k]))
            fail(ErrorKind::DimensionMismatch, "gate must be (s*p) x (s*p)");
        if (!is_unitary(gates[k], 1e-9))
            fail(ErrorKind::ValidationError, "gate " + std::to_string(k + 1) + " is not unitary");
        m.steps_.push_back(embed_two_site_operator(gates[k], 0, k + 1, dims));
    }
    m.local_ = std::move(gates);
    m.validate();
    m.cache_ = std::make_shared<Cache>(T);
    return m;
}

ChainModel ChainModel::from_local_gates(std::size_t s, std::size_t p, std::size_t T,
                                        std::vector<ComplexMatrix> gates, const Product& product,
                                        bool record_pointers) {
    check_size(s, p, T);
    if (static_cast<std::size_t>(product.system.rows()) != s ||
        static_cast<std::size_t>(product.probe.rows()) != p)
        fail(ErrorKind::DimensionMismatch, "product state factor dimensions");
    ChainModel m = from_local_gates(s, p, T, std::move(gates), product_state(product, T),
                                    record_pointers);
    m.product_ = product;
    return m;
}

ChainModel ChainModel::from_step_unitaries(std::size_t s, std::size_t p, std::size_t T,
                                           std::vector<ComplexMatrix> steps, const State& initial,
                                           bool record_pointers) {
    check_size(s, p, T);
    ChainModel m;
    m.s_ = s;
    m.p_ = p;
    m.T_ = T;
    m.record_pointers_ = record_pointers;
    m.steps_ = std::move(steps);
    m.initial_ = std::make_shared<const State>(initial);
    m.validate();
    m.cache_ = std::make_shared<Cache>(T);
    return m;
}

State product_state(const ChainModel::Product& product, std::size_t T) {
    ComplexMatrix rho = product.system;
    for (std::size_t k = 0; k < T; ++k) rho = kron(rho, product.probe);
    return State(rho, 1e-9);
}

ComplexMatrix propagator(const ChainModel& model, std::size_t t, std::size_t t_prime) {
    const std::size_t T = model.horizon();
    if (t > T || t_prime > T)
        fail(ErrorKind::OutOfRange, "propagator times must lie in [0, " + std::to_string(T) + "]");
    const std::size_t D = model.full_dim();
    if (t == t_prime) return identity(D);
    if (t < t_prime) return propagator(model, t_prime, t).adjoint();
    ComplexMatrix U = identity(D);
    for (std::size_t k = t_prime + 1; k <= t; ++k) U = model.step_unitaries()[k - 1] * U;
    return U;
}

std::size_t expected_algebra_dim(const ChainModel& model, std::size_t t) {
    const std::size_t s = model.system_dim(), p = model.probe_dim(), T = model.horizon();
    std::size_t d = s * s;
    for (std::size_t k = 1; k <= T; ++k) {
        if (k > t) d *= p * p;
        else if (model.record_pointers()) d *= p;
    }
    return d;
}

const StarAlgebra& ChainModel::future_algebra(std::size_t t) const {
    if (t > T_) fail(ErrorKind::OutOfRange, "algebra time must lie in [0, " + std::to_string(T_) + "]");
    std::call_once(cache_->flags[t], [&] {
        std::vector<std::vector<ComplexMatrix>> factors;
        factors.push_back(full_factor_basis(s_));
        const double used_norm = 1.0 / std::sqrt(static_cast<double>(p_));
        for (std::size_t k = 1; k <= T_; ++k) {
            if (k > t) factors.push_back(full_factor_basis(p_));
            else if (record_pointers_) factors.push_back(pointer_factor_basis(p_));
            else factors.push_back({used_norm * identity(p_)});
        }
        std::vector<ComplexMatrix> basis = tensor_basis(factors);
        const ComplexMatrix U = propagator(*this, t, 0);
        const ComplexMatrix Ud = U.adjoint();
        for (auto& b : basis) b = hermitian_part(Ud * b * U);
        cache_->algebras[t] = std::make_unique<StarAlgebra>(
            StarAlgebra::from_orthonormal_basis(full_dim(), std::move(basis)));
    });
    return *cache_->algebras[t];
}

FiltrationSnapshot algebra_at(const ChainModel& model, std::size_t t) {
    const StarAlgebra& A = model.future_algebra(t);
    return {t, A, A.dim()};
}

PdpReport verify_pdp(const ChainModel& model) {
    PdpReport report;
    const std::size_t T = model.horizon();
    for (std::size_t t = 0; t <= T; ++t) {
        report.dims.push_back(model.future_algebra(t).dim());
        report.expected_dims.push_back(expected_algebra_dim(model, t));
        if (report.dims.back() != report.expected_dims.back()) report.dims_match = false;
    }
    for (std::size_t t = 0; t < T; ++t) {
        const StarAlgebra& cur = model.future_algebra(t);
        const StarAlgebra& next = model.future_algebra(t + 1);
        PdpStep step;
        step.t = t;
        step.dim_t = cur.dim();
        step.dim_next = next.dim();
        step.inclusion = true;
        for (const auto& b : next.basis()) {
            const double r = cur.residual(b);
            step.max_inclusion_residual = std::max(step.max_inclusion_residual, r);
            if (r > 1e-8 * (1.0 + b.norm())) step.inclusion = false;
        }
        step.strict = step.dim_next < step.dim_t;
        step.relative_commutant_dim = relative_commutant(next, cur).dim();
        report.all_inclusions = report.all_inclusions && step.inclusion;
        report.all_strict = report.all_strict && step.strict;
        report.steps.push_back(step);
    }
    return report;
}

}  // namespace ethsim
