#pragma once

#include "cli.hpp"
#include "common.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iosfwd>
#include <vector>

namespace patchlens::cli {

using Action = std::function<int(std::ostream& out, std::ostream& err)>;

struct Command {
    CLI::App* app = nullptr;
    Action action;
};

void add_dataset_options(CLI::App& sub, DatasetOptions& options);

void add_data_commands(CLI::App& app, const GlobalOptions& globals, std::vector<Command>& commands);
void add_model_commands(CLI::App& app, const GlobalOptions& globals, std::vector<Command>& commands);
void add_verify_command(CLI::App& app, const GlobalOptions& globals, std::vector<Command>& commands);

}  // namespace patchlens::cli
