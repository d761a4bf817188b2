#include "cli.hpp"

#include "commands.hpp"

#include <ostream>

namespace patchlens::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"patchlens: patch-PCA energy profiles and exact linear-CNN training dynamics"};
    app.name("patchlens");
    app.require_subcommand(1, 1);
    app.fallthrough();

    GlobalOptions globals;
    app.add_option("--seed", globals.seed, "Seed for every random stream")->capture_default_str();
    app.add_option("--threads", globals.threads, "Worker threads for Monte Carlo draws")
        ->check(CLI::Range(1, 256))
        ->capture_default_str();
    app.add_flag("--no-scale", globals.no_scale, "Keep CIFAR pixels in 0..255 instead of dividing by 255");

    std::vector<Command> commands;
    add_data_commands(app, globals, commands);
    add_model_commands(app, globals, commands);
    add_verify_command(app, globals, commands);

    // CLI11 expects a C-style argv, program name first.
    std::vector<const char*> argv{"patchlens"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto& c : commands)
            if (c.app->parsed()) target = c.app;
        out << target->help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    for (const auto& c : commands) {
        if (!c.app->parsed()) continue;
        try {
            return c.action(out, err);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitFailure;
        }
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace patchlens::cli
