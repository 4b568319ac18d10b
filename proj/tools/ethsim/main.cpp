#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ethsim/errors.hpp"

using namespace ethsim;

int main(int argc, char** argv) {
    CLI::App app{"ethsim: event/tree/history simulator for repeated system-probe chains"};
    app.require_subcommand(1);
    cli::Options opt;

    using Command = std::function<int(const Scenario&, const cli::Options&, std::ostream&)>;
    const std::map<std::string, std::pair<std::string, Command>> commands{
        {"simulate", {"sample seeded histories and write their trace", cli::simulate}},
        {"tree", {"enumerate the history tree", cli::tree}},
        {"verify", {"run the invariant suites on a scenario", cli::verify}},
        {"ndm", {"non-demolition measurement statistics", cli::ndm}},
        {"jumps", {"weak-measurement jump trajectories", cli::jumps}},
        {"epr-demo", {"singlet pair with a filter probe", cli::epr_demo}},
    };
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--scenario", opt.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "master seed (default: scenario seed)");
        sub->add_option("--runs", opt.runs, "number of runs or samples")->check(CLI::PositiveNumber);
        sub->add_option("--steps", opt.steps, "steps per run")->check(CLI::PositiveNumber);
        sub->add_option("--trace", opt.trace, "JSONL trace output");
        sub->add_option("--out", opt.out, "CSV summary output");
        sub->add_option("--prune", opt.prune, "tree pruning threshold")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--delta", opt.delta, "recording tolerance")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--svg", opt.svg, "SVG line chart output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? cli::kOk : cli::kError;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const Scenario scn = parse_scenario(opt.scenario);
        return commands.at(name).second(scn, opt, std::cout);
    } catch (const Error& e) {
        std::cerr << "ethsim " << name << ": " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "ethsim " << name << ": " << e.what() << '\n';
    }
    return cli::kError;
}
