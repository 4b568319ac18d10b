#include "ethsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ethsim/errors.hpp"
#include "ethsim/gates.hpp"

namespace ethsim {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

bool same_matrix(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    fail(ErrorKind::ParseError, "field '" + path + "': " + what);
}

// Strict view of one JSON object: unknown keys are rejected up front.
class Fields {
public:
    Fields(const json& j, std::string path, std::initializer_list<const char*> keys)
        : j_(j), path_(std::move(path)) {
        if (!j.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
        for (const auto& [k, v] : j.items()) {
            (void)v;
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                field_error(sub(k), "unknown key");
        }
    }

    std::string sub(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    bool has(const char* k) const { return j_.contains(k); }

    const json& at(const char* k) const {
        if (!j_.contains(k)) field_error(sub(k), "missing");
        return j_.at(k);
    }

    double number(const char* k, double fallback) const {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_number()) field_error(sub(k), "expected a number");
        return v.get<double>();
    }

    std::size_t count(const char* k, std::size_t fallback) const {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            field_error(sub(k), "expected a non-negative integer");
        return v.get<std::size_t>();
    }

    std::string text(const char* k, const std::string& fallback) const {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_string()) field_error(sub(k), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const char* k, bool fallback) const {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_boolean()) field_error(sub(k), "expected true or false");
        return v.get<bool>();
    }

private:
    const json& j_;
    std::string path_;
};

ComplexMatrix read_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) field_error(path, "expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    ComplexMatrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            field_error(rp, "expected a row of " + std::to_string(n) + " entries");
        for (Eigen::Index c = 0; c < n; ++c) {
            const json& e = row[static_cast<std::size_t>(c)];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                field_error(rp + "[" + std::to_string(c) + "]", "expected [re, im]");
            m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

ojson write_matrix(const ComplexMatrix& m) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::vector<std::string>& gate_names() {
    static const std::vector<std::string> names{"identity",         "cnot",
                                                "controlled_phase", "partial_swap",
                                                "readout_rotation", "system_rotation",
                                                "matrix"};
    return names;
}

bool gate_has_angle(const std::string& name) {
    return name == "controlled_phase" || name == "partial_swap" || name == "readout_rotation" ||
           name == "system_rotation";
}

GateSpec read_gate(const json& j, const std::string& path) {
    Fields f(j, path, {"name", "angle", "entries"});
    GateSpec g;
    g.name = f.text("name", "");
    if (std::find(gate_names().begin(), gate_names().end(), g.name) == gate_names().end())
        field_error(f.sub("name"), "unknown gate '" + g.name + "'");
    if (f.has("angle") && !gate_has_angle(g.name)) field_error(f.sub("angle"), "gate takes no angle");
    if (f.has("entries") != (g.name == "matrix"))
        field_error(f.sub("entries"), g.name == "matrix" ? "missing" : "only for gate 'matrix'");
    g.angle = f.number("angle", 0.0);
    if (g.name == "matrix") g.matrix = read_matrix(f.at("entries"), f.sub("entries"));
    return g;
}

StateSpec read_state(const json& j, const std::string& path) {
    StateSpec s;
    if (j.is_string()) {
        s.name = j.get<std::string>();
    } else {
        Fields f(j, path, {"name", "angle", "density"});
        s.name = f.text("name", f.has("density") ? "density" : "");
        if (f.has("angle") != (s.name == "tilted"))
            field_error(f.sub("angle"), s.name == "tilted" ? "missing" : "only for state 'tilted'");
        s.angle = f.number("angle", 0.0);
        if (s.name == "density") s.density = read_matrix(f.at("density"), f.sub("density"));
        else if (f.has("density")) field_error(f.sub("density"), "only for state 'density'");
    }
    static const std::vector<std::string> names{"ground", "plus", "maximally_mixed",
                                                "singlet_pair", "tilted", "density"};
    if (std::find(names.begin(), names.end(), s.name) == names.end())
        field_error(path, "unknown state '" + s.name + "'");
    if (s.name == "tilted" && j.is_string()) field_error(path, "state 'tilted' needs an angle");
    return s;
}

ojson write_state(const StateSpec& s) {
    if (s.name == "tilted") return ojson{{"name", s.name}, {"angle", s.angle}};
    if (s.name == "density") return ojson{{"name", s.name}, {"density", write_matrix(s.density)}};
    return s.name;
}

QuantitySpec read_quantity(const json& j, const std::string& path) {
    QuantitySpec q;
    if (j.is_string()) {
        q.name = j.get<std::string>();
        if (q.name != "probe_z") field_error(path, "unknown quantity '" + q.name + "'");
        return q;
    }
    Fields f(j, path, {"name", "spectrum", "projections"});
    q.name = "explicit";
    q.label = f.text("name", "quantity");
    const json& spec = f.at("spectrum");
    if (!spec.is_array()) field_error(f.sub("spectrum"), "expected an array");
    for (const auto& v : spec) {
        if (!v.is_number()) field_error(f.sub("spectrum"), "expected numbers");
        q.spectrum.push_back(v.get<double>());
    }
    const json& proj = f.at("projections");
    if (!proj.is_array()) field_error(f.sub("projections"), "expected an array");
    for (std::size_t k = 0; k < proj.size(); ++k)
        q.projections.push_back(
            read_matrix(proj[k], f.sub("projections") + "[" + std::to_string(k) + "]"));
    return q;
}

NdmSpec read_ndm(const json& j, const std::string& path) {
    Fields f(j, path, {"conserved", "runs", "steps", "drift_angle", "window"});
    NdmSpec n;
    if (f.has("conserved")) {
        const json& c = f.at("conserved");
        if (c.is_string()) {
            n.conserved = c.get<std::string>();
            if (n.conserved != "diagonal")
                field_error(f.sub("conserved"), "unknown conserved quantity '" + n.conserved + "'");
        } else {
            n.conserved = "matrix";
            n.conserved_matrix = read_matrix(c, f.sub("conserved"));
        }
    }
    n.runs = f.count("runs", n.runs);
    n.steps = f.count("steps", n.steps);
    n.drift_angle = f.number("drift_angle", n.drift_angle);
    n.window = f.count("window", n.window);
    return n;
}

Scenario read_scenario(const json& j) {
    Fields f(j, "", {"name", "system_dim", "probe_dim", "horizon", "gates", "initial_state",
                     "quantity", "record_pointers", "thresholds", "seed", "ndm", "epr"});
    Scenario s;
    s.name = f.text("name", "");
    if (s.name.empty()) field_error("name", "missing");
    s.system_dim = f.count("system_dim", s.system_dim);
    s.probe_dim = f.count("probe_dim", s.probe_dim);
    s.horizon = f.count("horizon", s.horizon);

    const json& gates = f.at("gates");
    if (!gates.is_array() || gates.empty()) field_error("gates", "expected a non-empty array");
    for (std::size_t k = 0; k < gates.size(); ++k)
        s.gates.push_back(read_gate(gates[k], "gates[" + std::to_string(k) + "]"));

    if (f.has("initial_state")) {
        const json& is = f.at("initial_state");
        if (is.is_string()) {
            s.system_state = read_state(is, "initial_state");
        } else {
            Fields st(is, "initial_state", {"system", "probe"});
            if (st.has("system")) s.system_state = read_state(st.at("system"), st.sub("system"));
            if (st.has("probe")) s.probe_state = read_state(st.at("probe"), st.sub("probe"));
        }
    }
    if (f.has("quantity")) s.quantity = read_quantity(f.at("quantity"), "quantity");
    s.record_pointers = f.flag("record_pointers", s.record_pointers);
    if (f.has("thresholds")) {
        Fields t(f.at("thresholds"), "thresholds", {"svd_tol", "weight_eps", "delta"});
        s.thresholds.svd_tol = t.number("svd_tol", s.thresholds.svd_tol);
        s.thresholds.weight_eps = t.number("weight_eps", s.thresholds.weight_eps);
        s.thresholds.delta = t.number("delta", s.thresholds.delta);
    }
    if (f.has("seed")) {
        const json& v = f.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            field_error("seed", "expected a non-negative integer");
        s.seed = v.get<std::uint64_t>();
    }
    if (f.has("ndm")) s.ndm = read_ndm(f.at("ndm"), "ndm");
    if (f.has("epr")) {
        Fields e(f.at("epr"), "epr", {"theta", "samples"});
        EprSpec spec;
        spec.theta = e.number("theta", spec.theta);
        spec.samples = e.count("samples", spec.samples);
        s.epr = spec;
    }
    return s;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(
                                                             std::min(byte, text.size())),
                              '\n'));
}

ComplexMatrix ket_density(const ComplexVector& v) { return v * v.adjoint(); }

}  // namespace

bool GateSpec::operator==(const GateSpec& o) const {
    return name == o.name && angle == o.angle && same_matrix(matrix, o.matrix);
}

bool StateSpec::operator==(const StateSpec& o) const {
    return name == o.name && angle == o.angle && same_matrix(density, o.density);
}

bool QuantitySpec::operator==(const QuantitySpec& o) const {
    if (name != o.name || label != o.label || spectrum != o.spectrum ||
        projections.size() != o.projections.size())
        return false;
    for (std::size_t k = 0; k < projections.size(); ++k)
        if (!same_matrix(projections[k], o.projections[k])) return false;
    return true;
}

bool NdmSpec::operator==(const NdmSpec& o) const {
    return conserved == o.conserved && same_matrix(conserved_matrix, o.conserved_matrix) &&
           runs == o.runs && steps == o.steps && drift_angle == o.drift_angle && window == o.window;
}

bool Scenario::operator==(const Scenario& o) const {
    return name == o.name && system_dim == o.system_dim && probe_dim == o.probe_dim &&
           horizon == o.horizon && gates == o.gates && system_state == o.system_state &&
           probe_state == o.probe_state && quantity == o.quantity &&
           record_pointers == o.record_pointers && thresholds == o.thresholds && seed == o.seed &&
           ndm == o.ndm && epr == o.epr;
}

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text, nullptr, true, false);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::ParseError,
             source + ":" + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    Scenario s = read_scenario(j);
    validate_scenario(s);
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ParseError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), path.string());
}

std::string emit_scenario(const Scenario& s) {
    ojson j;
    j["name"] = s.name;
    j["system_dim"] = s.system_dim;
    j["probe_dim"] = s.probe_dim;
    j["horizon"] = s.horizon;
    ojson gates = ojson::array();
    for (const auto& g : s.gates) {
        ojson o{{"name", g.name}};
        if (gate_has_angle(g.name)) o["angle"] = g.angle;
        if (g.name == "matrix") o["entries"] = write_matrix(g.matrix);
        gates.push_back(std::move(o));
    }
    j["gates"] = std::move(gates);
    j["initial_state"] = {{"system", write_state(s.system_state)},
                          {"probe", write_state(s.probe_state)}};
    if (s.quantity.name == "probe_z") {
        j["quantity"] = "probe_z";
    } else {
        ojson proj = ojson::array();
        for (const auto& p : s.quantity.projections) proj.push_back(write_matrix(p));
        j["quantity"] = {{"name", s.quantity.label}, {"spectrum", s.quantity.spectrum},
                         {"projections", std::move(proj)}};
    }
    j["record_pointers"] = s.record_pointers;
    j["thresholds"] = {{"svd_tol", s.thresholds.svd_tol},
                       {"weight_eps", s.thresholds.weight_eps},
                       {"delta", s.thresholds.delta}};
    j["seed"] = s.seed;
    if (s.ndm) {
        ojson n;
        if (s.ndm->conserved == "matrix") n["conserved"] = write_matrix(s.ndm->conserved_matrix);
        else n["conserved"] = s.ndm->conserved;
        n["runs"] = s.ndm->runs;
        n["steps"] = s.ndm->steps;
        n["drift_angle"] = s.ndm->drift_angle;
        n["window"] = s.ndm->window;
        j["ndm"] = std::move(n);
    }
    if (s.epr) j["epr"] = {{"theta", s.epr->theta}, {"samples", s.epr->samples}};
    return j.dump(2) + "\n";
}

ComplexMatrix build_state(const StateSpec& spec, std::size_t dim) {
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    if (spec.name == "ground") {
        v(0) = 1.0;
        return ket_density(v);
    }
    if (spec.name == "maximally_mixed") return identity(dim) / static_cast<double>(dim);
    if (spec.name == "plus" || spec.name == "tilted") {
        if (dim < 2) fail(ErrorKind::ValidationError, "state '" + spec.name + "' needs dimension >= 2");
        const double a = spec.name == "plus" ? M_PI / 4 : spec.angle;
        v(0) = std::cos(a);
        v(1) = std::sin(a);
        return ket_density(v);
    }
    if (spec.name == "singlet_pair") {
        if (dim != 4) fail(ErrorKind::ValidationError, "state 'singlet_pair' needs dimension 4");
        v(1) = 1.0 / std::sqrt(2.0);
        v(2) = -1.0 / std::sqrt(2.0);
        return ket_density(v);
    }
    if (spec.name == "density") {
        if (static_cast<std::size_t>(spec.density.rows()) != dim)
            fail(ErrorKind::ValidationError, "explicit density has dimension " +
                                                 std::to_string(spec.density.rows()) + ", expected " +
                                                 std::to_string(dim));
        State check(spec.density);
        return spec.density;
    }
    fail(ErrorKind::ValidationError, "unknown state '" + spec.name + "'");
}

ComplexMatrix build_step_gate(const Scenario& scn) {
    const std::size_t s = scn.system_dim, p = scn.probe_dim;
    std::vector<ComplexMatrix> parts;
    for (const auto& g : scn.gates) {
        if (g.name == "identity") parts.push_back(gates::identity_gate(s, p));
        else if (g.name == "cnot") parts.push_back(gates::cnot(s, p));
        else if (g.name == "controlled_phase") parts.push_back(gates::controlled_phase(s, p, g.angle));
        else if (g.name == "partial_swap") parts.push_back(gates::partial_swap(s, p, g.angle));
        else if (g.name == "readout_rotation") parts.push_back(gates::readout_rotation(s, p, g.angle));
        else if (g.name == "system_rotation") parts.push_back(gates::system_rotation(s, p, g.angle));
        else if (g.name == "matrix") {
            if (static_cast<std::size_t>(g.matrix.rows()) != s * p)
                fail(ErrorKind::ValidationError, "explicit gate must be (s*p) x (s*p)");
            if (!is_unitary(g.matrix, 1e-9)) fail(ErrorKind::ValidationError, "explicit gate is not unitary");
            parts.push_back(g.matrix);
        } else {
            fail(ErrorKind::ValidationError, "unknown gate '" + g.name + "'");
        }
    }
    return gates::sequence(parts);
}

void validate_scenario(const Scenario& scn) {
    if (scn.system_dim == 0) fail(ErrorKind::ValidationError, "system_dim must be >= 1");
    if (scn.probe_dim == 0) fail(ErrorKind::ValidationError, "probe_dim must be >= 1");
    if (scn.horizon == 0) fail(ErrorKind::ValidationError, "horizon must be >= 1");
    const double dim = static_cast<double>(scn.system_dim) *
                       std::pow(static_cast<double>(scn.probe_dim), static_cast<double>(scn.horizon));
    if (dim > static_cast<double>(kMaxFullDim))
        fail(ErrorKind::ValidationError, "dimension cap: s*p^T = " + std::to_string(dim) +
                                             " exceeds " + std::to_string(kMaxFullDim));
    const auto& t = scn.thresholds;
    if (!(t.svd_tol > 0) || !(t.weight_eps > 0) || !(t.delta > 0) || !(t.delta < 1))
        fail(ErrorKind::ValidationError, "thresholds must be positive and delta below 1");
    build_step_gate(scn);
    build_state(scn.system_state, scn.system_dim);
    build_state(scn.probe_state, scn.probe_dim);
    build_quantity(scn);
    if (scn.ndm) build_ndm(scn).validate();
    if (scn.epr && scn.epr->samples == 0) fail(ErrorKind::ValidationError, "epr.samples must be >= 1");
}

ChainModel build_model(const Scenario& scn) {
    return ChainModel::from_local_gates(
        scn.system_dim, scn.probe_dim, scn.horizon, {build_step_gate(scn)},
        ChainModel::Product{build_state(scn.system_state, scn.system_dim),
                            build_state(scn.probe_state, scn.probe_dim)},
        scn.record_pointers);
}

PhysicalQuantity build_quantity(const Scenario& scn) {
    PhysicalQuantity q;
    if (scn.quantity.name == "probe_z") {
        q = PhysicalQuantity::probe_z(scn.system_dim, scn.probe_dim);
    } else {
        q.name = scn.quantity.label;
        q.spectrum = scn.quantity.spectrum;
        q.abstract_projections = scn.quantity.projections;
    }
    q.validate();
    if (static_cast<std::size_t>(q.abstract_projections.front().rows()) != scn.system_dim * scn.probe_dim)
        fail(ErrorKind::ValidationError, "quantity must act on system (x) probe");
    return q;
}

NdmScenario build_ndm(const Scenario& scn) {
    if (!scn.ndm) fail(ErrorKind::ValidationError, "scenario '" + scn.name + "' has no ndm block");
    const NdmSpec& n = *scn.ndm;
    NdmScenario out;
    out.system_dim = scn.system_dim;
    out.probe_dim = scn.probe_dim;
    out.gate = build_step_gate(scn);
    if (n.conserved == "diagonal") {
        out.conserved = ComplexMatrix::Zero(static_cast<Eigen::Index>(scn.system_dim),
                                            static_cast<Eigen::Index>(scn.system_dim));
        for (std::size_t k = 0; k < scn.system_dim; ++k)
            out.conserved(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = static_cast<double>(k);
    } else {
        out.conserved = n.conserved_matrix;
    }
    out.quantity = build_quantity(scn);
    out.system_state = build_state(scn.system_state, scn.system_dim);
    out.probe_state = build_state(scn.probe_state, scn.probe_dim);
    out.runs = n.runs;
    out.steps = n.steps;
    out.weight_eps = scn.thresholds.weight_eps;
    out.svd_tol = scn.thresholds.svd_tol;
    return out;
}

}  // namespace ethsim
