#include "ethsim/gates.hpp"

#include <cmath>

#include "ethsim/errors.hpp"

namespace ethsim::gates {

ComplexMatrix identity_gate(std::size_t s, std::size_t p) { return identity(s * p); }

ComplexMatrix cnot(std::size_t s, std::size_t p) {
    ComplexMatrix U = ComplexMatrix::Zero(s * p, s * p);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < p; ++j) U(i * p + (j + i) % p, i * p + j) = 1.0;
    return U;
}

ComplexMatrix controlled_phase(std::size_t s, std::size_t p, double phi) {
    ComplexMatrix U = ComplexMatrix::Zero(s * p, s * p);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < p; ++j)
            U(i * p + j, i * p + j) = std::polar(1.0, phi * static_cast<double>(i * j));
    return U;
}

ComplexMatrix partial_swap(std::size_t s, std::size_t p, double theta) {
    if (s != p) fail(ErrorKind::ValidationError, "partial_swap needs system_dim == probe_dim");
    ComplexMatrix swap = ComplexMatrix::Zero(s * p, s * p);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < p; ++j) swap(j * p + i, i * p + j) = 1.0;
    return std::cos(theta) * identity(s * p) - cplx(0.0, std::sin(theta)) * swap;
}

ComplexMatrix ry(std::size_t dim, double phi) {
    if (dim < 2) fail(ErrorKind::ValidationError, "rotation needs dimension >= 2");
    ComplexMatrix R = identity(dim);
    const double c = std::cos(phi / 2.0), sn = std::sin(phi / 2.0);
    R(0, 0) = c;
    R(0, 1) = -sn;
    R(1, 0) = sn;
    R(1, 1) = c;
    return R;
}

ComplexMatrix readout_rotation(std::size_t s, std::size_t p, double phi) {
    return kron(identity(s), ry(p, phi));
}

ComplexMatrix system_rotation(std::size_t s, std::size_t p, double angle) {
    return kron(ry(s, 2.0 * angle), identity(p));
}

ComplexMatrix sequence(const std::vector<ComplexMatrix>& gates) {
    if (gates.empty()) fail(ErrorKind::ValidationError, "empty gate sequence");
    ComplexMatrix U = gates.front();
    for (std::size_t k = 1; k < gates.size(); ++k) {
        if (gates[k].rows() != U.rows()) fail(ErrorKind::DimensionMismatch, "gate sequence dimensions");
        U = gates[k] * U;
    }
    return U;
}

}  // namespace ethsim::gates
