#pragma once

#include "zoomsig/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace zoomsig {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
};

/// Everything `simulate` needs, as read from a config file and flags.
struct SimulationSpec {
    std::vector<SyntheticModelConfig> models;
    SimulationOptions options;
    std::optional<std::uint64_t> n;
    std::optional<std::uint64_t> seed;
};

ErrorDistribution parse_error_distribution(const nlohmann::json& j);
SyntheticModelConfig parse_model_config(const nlohmann::json& j);
/// Parses a simulation config document (see configs/acceptance_sim.json).
SimulationSpec parse_simulation_spec(const nlohmann::json& j);

/// Compact flag form "name:sigma1:sigma2[:coupling]" with Gaussian errors.
SyntheticModelConfig parse_model_flag(const std::string& spec);

/// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zoomsig
