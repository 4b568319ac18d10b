#pragma once

#include <string>
#include <vector>

#include "ethsim/matrix.hpp"

namespace ethsim {

// Disjoint orthogonal projections summing to 1, with opaque labels.
struct EventFamily {
    std::vector<ComplexMatrix> projections;
    std::vector<std::string> labels;
    int time_index = 0;

    std::size_t size() const { return projections.size(); }
};

// Max deviation from pi_a pi_b = delta_ab pi_a and sum pi = 1 (Frobenius).
double partition_defect(const EventFamily& family);

}  // namespace ethsim
