#pragma once

#include <cstddef>
#include <vector>

#include "ethsim/matrix.hpp"

// Two-site step gates on system (x) probe, system factor first.
namespace ethsim::gates {

ComplexMatrix identity_gate(std::size_t s, std::size_t p);

// |i>|j> -> |i>|j + i mod p>; the system controls the probe.
ComplexMatrix cnot(std::size_t s, std::size_t p);

// |i>|j> -> exp(i phi i j)|i>|j>
ComplexMatrix controlled_phase(std::size_t s, std::size_t p, double phi);

// cos(theta) 1 - i sin(theta) SWAP; needs s == p.
ComplexMatrix partial_swap(std::size_t s, std::size_t p, double theta);

// 1 (x) R_y(phi) on probe levels 0, 1.
ComplexMatrix readout_rotation(std::size_t s, std::size_t p, double phi);

// exp(-i angle sigma_y) on system levels 0, 1, tensored with the probe identity.
ComplexMatrix system_rotation(std::size_t s, std::size_t p, double angle);

// Real rotation [[c, -s], [s, c]] with c = cos(phi/2) embedded on levels 0, 1.
ComplexMatrix ry(std::size_t dim, double phi);

// Applies gates in order: the first element acts first.
ComplexMatrix sequence(const std::vector<ComplexMatrix>& gates);

}  // namespace ethsim::gates
