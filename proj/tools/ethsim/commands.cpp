#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>

#include <nlohmann/json.hpp>

#include "ethsim/errors.hpp"
#include "ethsim/histories.hpp"
#include "ethsim/indirect.hpp"
#include "ethsim/parallel.hpp"
#include "ethsim/recording.hpp"
#include "ethsim/rng.hpp"
#include "ethsim/trace.hpp"
#include "svg.hpp"

namespace ethsim::cli {

using ojson = nlohmann::ordered_json;

namespace {

std::unique_ptr<std::ofstream> open_out(const std::string& path) {
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) fail(ErrorKind::ValidationError, "cannot write " + path);
    return f;
}

std::uint64_t seed_of(const Scenario& scn, const Options& opt) { return opt.seed.value_or(scn.seed); }

std::size_t horizon_of(const Scenario& scn, const Options& opt) {
    const std::size_t h = opt.steps.value_or(scn.horizon);
    if (h == 0 || h > scn.horizon)
        fail(ErrorKind::OutOfRange, "--steps must lie in 1.." + std::to_string(scn.horizon));
    return h;
}

void print(std::ostream& log, const ojson& j) { log << j.dump(2) << '\n'; }

ComplexMatrix random_element(const StarAlgebra& E, std::uint64_t seed) {
    Rng rng(seed);
    ComplexMatrix X = ComplexMatrix::Zero(static_cast<Eigen::Index>(E.ambient_dim()),
                                          static_cast<Eigen::Index>(E.ambient_dim()));
    for (const auto& b : E.basis()) X += cplx(rng.normal(), rng.normal()) * b;
    return X / std::max(1.0, operator_norm(X));
}

}  // namespace

int simulate(const Scenario& scn, const Options& opt, std::ostream& log) {
    const ChainModel model = build_model(scn);
    const std::size_t horizon = horizon_of(scn, opt);
    const std::size_t runs = opt.runs.value_or(1);
    const std::uint64_t seed = seed_of(scn, opt);
    const HistorySampler sampler(model, scn.thresholds.weight_eps, scn.thresholds.svd_tol);
    const auto histories = sampler.sample_many(horizon, runs, seed);

    if (auto f = open_out(opt.trace)) {
        TraceSink sink(*f);
        for (std::size_t r = 0; r < histories.size(); ++r)
            for (const auto& step : histories[r].steps) sink.write(trace_record(r, step));
    }
    std::vector<double> mean_entropy(horizon + 1, 0.0);
    double events = 0.0;
    for (const auto& h : histories) {
        double acc = 0.0;
        for (const auto& st : h.steps) {
            acc += st.entropy;
            mean_entropy[st.t] += acc / static_cast<double>(runs);
            if (st.actual()) events += 1.0 / static_cast<double>(runs);
        }
    }
    if (auto f = open_out(opt.out)) {
        *f << "run,t,chosen_label,weight,entropy,cumulative_entropy\n";
        for (std::size_t r = 0; r < histories.size(); ++r) {
            double acc = 0.0;
            for (const auto& st : histories[r].steps) {
                acc += st.entropy;
                *f << r << ',' << st.t << ',' << st.chosen_label << ',' << format_double(st.weight) << ','
                   << format_double(st.entropy) << ',' << format_double(acc) << '\n';
            }
        }
    }
    if (!opt.svg.empty()) {
        Series s{"mean cumulative missing information", {}, {}};
        for (std::size_t t = 0; t <= horizon; ++t) s.x.push_back(static_cast<double>(t)), s.y.push_back(mean_entropy[t]);
        write_line_chart(opt.svg, scn.name + ": entropy production", "t", "nats", {s});
    }
    print(log, {{"command", "simulate"}, {"scenario", scn.name}, {"seed", seed}, {"runs", runs},
                {"horizon", horizon}, {"mean_events", events},
                {"mean_missing_information", mean_entropy[horizon]}});
    return kOk;
}

int tree(const Scenario& scn, const Options& opt, std::ostream& log) {
    const ChainModel model = build_model(scn);
    const std::size_t horizon = horizon_of(scn, opt);
    const double prune = opt.prune.value_or(0.0);
    const HistoryTree t = enumerate_tree(model, horizon, prune, scn.thresholds.weight_eps);

    std::size_t leaves = 0;
    for (const auto& n : t.nodes)
        if (n.depth == horizon) ++leaves;
    ojson info = ojson::array(), rel = ojson::array();
    Series curve{"missing information per event", {}, {}};
    for (std::size_t n = 1; n <= horizon; ++n) {
        const double s = missing_information_per_event(t, n);
        info.push_back(s);
        curve.x.push_back(static_cast<double>(n));
        curve.y.push_back(s);
        if (prune == 0.0) {
            const auto r = relative_entropy_vs_reversed(t.root_state(), t, n);
            if (r.infinite) rel.push_back("inf");
            else rel.push_back(r.value);
        }
    }
    if (auto f = open_out(opt.out)) {
        *f << "node,depth,parent,label,edge_weight,path_weight\n";
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
            const auto& n = t.nodes[i];
            *f << i << ',' << n.depth << ',' << (i == 0 ? std::string() : std::to_string(n.parent)) << ','
               << n.label << ',' << format_double(n.edge_weight) << ',' << format_double(n.path_weight) << '\n';
        }
    }
    if (!opt.svg.empty()) write_line_chart(opt.svg, scn.name + ": missing information", "depth", "nats", {curve});
    ojson j{{"command", "tree"},   {"scenario", scn.name},    {"horizon", horizon},
            {"prune", prune},      {"nodes", t.nodes.size()}, {"leaves", leaves},
            {"pruned_mass", t.pruned_mass}, {"depth_weight_sums", t.depth_weight_sums()},
            {"missing_information", info}};
    if (prune == 0.0) j["relative_entropy"] = rel;
    print(log, j);
    return kOk;
}

namespace {

struct Suite {
    std::string name;
    std::string status;  // pass, fail or skipped
    std::string detail;
};

std::string sci(double x) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(2) << x;
    return s.str();
}

}  // namespace

int verify(const Scenario& scn, const Options& opt, std::ostream& log) {
    const ChainModel model = build_model(scn);
    const std::size_t T = scn.horizon;
    const double delta = opt.delta.value_or(scn.thresholds.delta);
    const double eps = scn.thresholds.weight_eps;
    const HistorySampler sampler(model, eps, scn.thresholds.svd_tol);
    const HistoryTree t = enumerate_tree(model, T, 0.0, eps);
    std::vector<Suite> suites;
    const auto add = [&](const std::string& name, bool ok, const std::string& detail) {
        suites.push_back({name, ok ? "pass" : "fail", detail});
    };
    const auto guarded = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            add(name, false, e.what());
        }
    };

    guarded("filtration_pdp", [&] {
        const auto r = verify_pdp(model);
        std::string dims;
        for (auto d : r.dims) dims += (dims.empty() ? "" : " ") + std::to_string(d);
        add("filtration_pdp", r.ok(), "dims " + dims);
    });
    guarded("event_calculus", [&] {
        double defect = 0.0, residual = 0.0;
        for (const auto& n : t.nodes) {
            if (n.depth >= T) continue;
            const auto det = sampler.detect(n.state, n.depth + 1);
            defect = std::max(defect, partition_defect(*det->event));
            double sum = 0.0;
            for (double w : det->weights) sum += w;
            defect = std::max(defect, std::abs(sum - 1.0));
            residual = std::max(residual, det->superposition_residual);
        }
        add("event_calculus", defect <= 1e-9 && residual <= 1e-8,
            "partition " + sci(defect) + ", superposition " + sci(residual));
    });
    guarded("tree_weights", [&] {
        double dev = 0.0;
        for (double s : t.depth_weight_sums()) dev = std::max(dev, std::abs(s - 1.0));
        add("tree_weights", dev <= 1e-9, "max |sum - 1| " + sci(dev));
    });
    guarded("history_measure", [&] {
        const ComplexMatrix one = identity(model.full_dim());
        double dev = 0.0;
        for (std::size_t i = 1; i < t.nodes.size(); ++i)
            dev = std::max(dev, std::abs(history_measure(t.root_state(), t.path_projections(i), one) -
                                         t.nodes[i].path_weight));
        add("history_measure", dev <= 1e-10, "max deviation " + sci(dev));
    });
    guarded("sum_rule", [&] {
        const ComplexMatrix X = random_element(model.future_algebra(T), derive_seed(seed_of(scn, opt), 17));
        const double dev = std::max(check_sum_rule(t, identity(model.full_dim())), check_sum_rule(t, X));
        add("sum_rule", dev <= 1e-9, "max deviation " + sci(dev) + " (X = 1 and random X)");
    });
    guarded("relative_entropy", [&] {
        double low = 0.0;
        for (std::size_t n = 1; n <= T; ++n) {
            const auto r = relative_entropy_vs_reversed(t.root_state(), t, n);
            if (!r.infinite) low = std::min(low, r.value);
        }
        add("relative_entropy", low >= -1e-9, "min S_n " + sci(low));
    });
    if (!scn.record_pointers) {
        suites.push_back({"pointer_dichotomy", "skipped", "record_pointers is off"});
    } else {
        guarded("pointer_dichotomy", [&] {
            const PhysicalQuantity q = build_quantity(scn);
            double worst = 0.0;
            for (const auto& n : t.nodes) {
                if (n.depth >= T) continue;
                const auto det = sampler.detect(n.state, n.depth + 1);
                if (!det->actual) continue;
                const auto Q = represent_at(q, model, n.depth + 1);
                worst = std::max(worst, verify_result_dichotomy(*det, Q, delta, kDichotomyConstant, eps).max_min);
            }
            add("pointer_dichotomy", worst <= kDichotomyConstant * delta,
                "max min(|pi Q - pi|, |pi Q|) " + sci(worst) + " vs " + sci(kDichotomyConstant * delta));
        });
    }
    guarded("sampling_determinism", [&] {
        const auto seed = seed_of(scn, opt);
        const auto a = sampler.sample_many(T, 64, seed);
        const auto b = HistorySampler(model, eps, scn.thresholds.svd_tol).sample_many(T, 64, seed);
        bool same = true;
        for (std::size_t r = 0; r < a.size(); ++r)
            for (std::size_t k = 0; k < a[r].steps.size(); ++k)
                same = same && to_json_line(trace_record(r, a[r].steps[k])) ==
                                   to_json_line(trace_record(r, b[r].steps[k]));
        add("sampling_determinism", same, "64 histories resampled");
    });

    bool ok = true;
    log << "verify " << scn.name << '\n';
    for (const auto& s : suites) {
        log << "  " << std::left << std::setw(22) << s.name << std::setw(8) << s.status << s.detail << '\n';
        ok = ok && s.status != "fail";
    }
    log << (ok ? "all suites pass" : "verification failed") << '\n';
    if (auto f = open_out(opt.out)) {
        *f << "suite,status,detail\n";
        for (const auto& s : suites) *f << s.name << ',' << s.status << ",\"" << s.detail << "\"\n";
    }
    return ok ? kOk : kVerificationFailed;
}

int ndm(const Scenario& scn, const Options& opt, std::ostream& log) {
    NdmScenario ns = build_ndm(scn);
    ns.runs = opt.runs.value_or(ns.runs);
    ns.steps = opt.steps.value_or(ns.steps);
    const bool keep = !opt.out.empty() || !opt.trace.empty() || !opt.svg.empty();
    ns.max_traced_runs = keep ? std::min<std::size_t>(ns.runs, 2000) : 0;
    const std::uint64_t seed = seed_of(scn, opt);
    const NdmReport r = ndm_experiment(ns, seed);

    if (auto f = open_out(opt.trace)) {
        TraceSink sink(*f);
        for (const auto& row : r.trace) sink.write(trace_record(row.run, row.detail));
    }
    if (auto f = open_out(opt.out)) {
        *f << "run,step,eta,estimated_alpha,purification_metric\n";
        for (const auto& row : r.trace)
            *f << row.run << ',' << row.step << ',' << row.eta << ',' << row.estimated_alpha << ','
               << format_double(row.purification) << '\n';
    }
    if (!opt.svg.empty()) {
        Series s{"mean purification metric", {}, {}};
        std::vector<double> acc(ns.steps + 1, 0.0);
        for (const auto& row : r.trace) acc[row.step] += row.purification / static_cast<double>(ns.max_traced_runs);
        for (std::size_t j = 1; j <= ns.steps; ++j) s.x.push_back(static_cast<double>(j)), s.y.push_back(acc[j]);
        write_line_chart(opt.svg, scn.name + ": purification", "step", "1 - max tr(rho P)", {s});
    }
    ojson L = ojson::array();
    for (Eigen::Index a = 0; a < r.likelihoods.rows(); ++a) {
        ojson row = ojson::array();
        for (Eigen::Index e = 0; e < r.likelihoods.cols(); ++e) row.push_back(r.likelihoods(a, e));
        L.push_back(row);
    }
    print(log, {{"command", "ndm"},
                {"scenario", scn.name},
                {"seed", seed},
                {"runs", ns.runs},
                {"steps", ns.steps},
                {"likelihoods", L},
                {"separation", r.separation},
                {"born", r.born},
                {"classified_counts", r.classified_counts},
                {"classified_distribution", r.classified_distribution},
                {"max_purification_after_first_event", r.max_purification_after_first_event},
                {"max_frequency_error", r.max_frequency_error},
                {"traced_runs", ns.max_traced_runs}});
    return kOk;
}

int jumps(const Scenario& scn, const Options& opt, std::ostream& log) {
    const NdmScenario ns = build_ndm(scn);
    const std::size_t runs = opt.runs.value_or(scn.ndm->runs);
    const std::size_t n = opt.steps.value_or(scn.ndm->steps);
    const std::uint64_t seed = seed_of(scn, opt);
    std::vector<JumpTrajectory> tr(runs);
    parallel_for(runs, [&](std::size_t r) {
        tr[r] = weak_measurement_trajectory(ns, scn.ndm->drift_angle, n, scn.ndm->window, derive_seed(seed, r));
    });
    double mean_jumps = 0.0, multi = 0.0;
    std::vector<double> dwell(tr.empty() ? 0 : tr.front().dwell.size(), 0.0);
    for (const auto& t : tr) {
        mean_jumps += static_cast<double>(t.jumps) / static_cast<double>(runs);
        if (t.jumps >= 2) multi += 1.0 / static_cast<double>(runs);
        for (std::size_t a = 0; a < dwell.size(); ++a) dwell[a] += t.dwell[a] / static_cast<double>(runs);
    }
    if (auto f = open_out(opt.out)) {
        *f << "run,step,eta,estimate,sector\n";
        for (std::size_t r = 0; r < runs; ++r)
            for (std::size_t j = 0; j < n; ++j)
                *f << r << ',' << j + 1 << ',' << tr[r].eta[j] << ',' << tr[r].estimate[j] << ','
                   << tr[r].sector[j] << '\n';
    }
    if (!opt.svg.empty() && !tr.empty()) {
        Series est{"window estimate", {}, {}}, sec{"true sector", {}, {}};
        for (std::size_t j = 0; j < n; ++j) {
            if (tr[0].estimate[j] >= 0) est.x.push_back(static_cast<double>(j + 1)), est.y.push_back(tr[0].estimate[j]);
            sec.x.push_back(static_cast<double>(j + 1));
            sec.y.push_back(static_cast<double>(tr[0].sector[j]));
        }
        write_line_chart(opt.svg, scn.name + ": run 0", "step", "alpha", {sec, est});
    }
    print(log, {{"command", "jumps"},
                {"scenario", scn.name},
                {"seed", seed},
                {"runs", runs},
                {"steps", n},
                {"drift_angle", scn.ndm->drift_angle},
                {"window", scn.ndm->window},
                {"mean_jumps", mean_jumps},
                {"fraction_with_two_or_more_jumps", multi},
                {"mean_dwell", dwell}});
    return kOk;
}

int epr_demo(const Scenario& scn, const Options& opt, std::ostream& log) {
    const EprSpec spec = scn.epr.value_or(EprSpec{});
    const std::size_t samples = opt.runs.value_or(spec.samples);
    const std::uint64_t seed = seed_of(scn, opt);
    const EprReport r = ethsim::epr_demo(spec.theta, seed, samples);
    ojson branches = ojson::array();
    for (const auto& b : r.branches)
        branches.push_back({{"label", b.label},
                            {"weight", b.weight},
                            {"filter_value", b.filter_value},
                            {"conditional_pz", b.conditional_pz}});
    if (auto f = open_out(opt.out)) {
        *f << "label,weight,filter_value,conditional_pz\n";
        for (const auto& b : r.branches)
            *f << b.label << ',' << format_double(b.weight) << ',' << format_double(b.filter_value) << ','
               << format_double(b.conditional_pz) << '\n';
    }
    print(log, {{"command", "epr-demo"},
                {"scenario", scn.name},
                {"theta", r.theta},
                {"seed", seed},
                {"event_actual", r.event_actual},
                {"unitary_marginal", r.unitary_marginal},
                {"branches", branches},
                {"samples", r.samples},
                {"correlation", r.correlation},
                {"correlation_stderr", r.correlation_stderr}});
    return kOk;
}

}  // namespace ethsim::cli
