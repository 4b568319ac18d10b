#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ethsim/chain.hpp"
#include "ethsim/indirect.hpp"
#include "ethsim/recording.hpp"

namespace ethsim {

// Named gate ("identity", "cnot", "controlled_phase", "partial_swap",
// "readout_rotation", "system_rotation") or "matrix" with explicit entries.
struct GateSpec {
    std::string name;
    double angle = 0.0;
    ComplexMatrix matrix;

    bool operator==(const GateSpec& o) const;
};

// Named ("ground", "plus", "maximally_mixed", "singlet_pair", "tilted") or
// "density" with explicit entries.
struct StateSpec {
    std::string name = "ground";
    double angle = 0.0;
    ComplexMatrix density;

    bool operator==(const StateSpec& o) const;
};

// "probe_z" or "explicit".
struct QuantitySpec {
    std::string name = "probe_z";
    std::string label;
    std::vector<double> spectrum;
    std::vector<ComplexMatrix> projections;

    bool operator==(const QuantitySpec& o) const;
};

struct Thresholds {
    double svd_tol = 1e-9;
    double weight_eps = 1e-8;
    double delta = 1e-3;

    bool operator==(const Thresholds&) const = default;
};

struct NdmSpec {
    std::string conserved = "diagonal";  // or "matrix"
    ComplexMatrix conserved_matrix;
    std::size_t runs = 1000;
    std::size_t steps = 20;
    double drift_angle = 0.05;
    std::size_t window = 25;

    bool operator==(const NdmSpec& o) const;
};

struct EprSpec {
    double theta = 3.141592653589793;  // filter measures sz
    std::size_t samples = 10000;

    bool operator==(const EprSpec&) const = default;
};

struct Scenario {
    std::string name;
    std::size_t system_dim = 2;
    std::size_t probe_dim = 2;
    std::size_t horizon = 1;
    std::vector<GateSpec> gates;  // composed in order into the step gate
    StateSpec system_state;
    StateSpec probe_state;
    QuantitySpec quantity;
    bool record_pointers = true;
    Thresholds thresholds;
    std::uint64_t seed = 0;
    std::optional<NdmSpec> ndm;
    std::optional<EprSpec> epr;

    bool operator==(const Scenario& o) const;
};

// ParseError for malformed JSON, unknown keys or wrong types (with line or
// field path); ValidationError for violated invariants.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<string>");
std::string emit_scenario(const Scenario& scn);

void validate_scenario(const Scenario& scn);

ComplexMatrix build_step_gate(const Scenario& scn);
ComplexMatrix build_state(const StateSpec& spec, std::size_t dim);
ChainModel build_model(const Scenario& scn);
PhysicalQuantity build_quantity(const Scenario& scn);
NdmScenario build_ndm(const Scenario& scn);

}  // namespace ethsim
