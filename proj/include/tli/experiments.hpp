#ifndef TLI_EXPERIMENTS_HPP
#define TLI_EXPERIMENTS_HPP

#include <optional>
#include <string>

#include "json.hpp"

namespace tli {

using json = nlohmann::json;

// Command-line overrides applied on top of the config file.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    std::optional<std::string> experiment;
};

// Executes the experiment named by the config and writes CSV data, a JSON
// summary and a reproducibility manifest into the output directory.  Files
// land there only after the experiment finishes (staged writes + rename).
//
// Exit codes: 0 pass, 1 experiment ran but failed its acceptance predicate,
// 2 invalid config, 3 numerical failure (non-finite value).
int run_experiment_json(json config, const RunOverrides& overrides, std::string* message = nullptr);
int run_experiment_file(const std::string& config_path, const RunOverrides& overrides,
                        std::string* message = nullptr);

// Built-in defaults per experiment (the `kernel` subcommand uses these).
json default_config(const std::string& experiment);

}  // namespace tli

#endif
