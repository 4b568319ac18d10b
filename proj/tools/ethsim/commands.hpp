#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "ethsim/scenario.hpp"

namespace ethsim::cli {

struct Options {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> steps;
    std::optional<double> prune;
    std::optional<double> delta;
    std::string trace;
    std::string out;
    std::string svg;
};

enum ExitCode : int { kOk = 0, kError = 1, kVerificationFailed = 2 };

int simulate(const Scenario& scn, const Options& opt, std::ostream& log);
int tree(const Scenario& scn, const Options& opt, std::ostream& log);
int verify(const Scenario& scn, const Options& opt, std::ostream& log);
int ndm(const Scenario& scn, const Options& opt, std::ostream& log);
int jumps(const Scenario& scn, const Options& opt, std::ostream& log);
int epr_demo(const Scenario& scn, const Options& opt, std::ostream& log);

}  // namespace ethsim::cli
