#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ubi/commands.hpp"
#include "ubi/config.hpp"

namespace {

std::filesystem::path resolve_out_dir(const std::string& flag_out, const ubi::RunConfig& cfg) {
    if (!flag_out.empty()) return flag_out;
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* root = std::getenv("UBIOPT_OUT_ROOT")) return root;
    return "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Budget-constrained multi-period insurance discount allocation"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_flag;
    std::string portfolio_path;
    std::string observations_path;
    long long seed_override = -1;
    int threads_override = -1;
    bool dump_default = false;

    app.add_flag("--dump-default-config", dump_default,
                 "Print the default configuration and exit");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed_override, "Override the config seed");
        cmd->add_option("--threads", threads_override, "Worker threads (0 = all cores)");
        cmd->add_option("--out", out_flag, "Output directory");
    };

    CLI::App* generate = app.add_subcommand("generate", "Draw a synthetic driver portfolio");
    add_common(generate);

    CLI::App* estimate =
        app.add_subcommand("estimate", "Fit driver parameters from observed trajectories");
    add_common(estimate);
    estimate->add_option("--observations", observations_path, "Observations CSV")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* optimize =
        app.add_subcommand("optimize", "Solve the budgeted discount-allocation problem");
    add_common(optimize);
    optimize->add_option("--portfolio", portfolio_path, "Portfolio CSV")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* experiment =
        app.add_subcommand("experiment", "Run the receding-horizon pricing experiment");
    add_common(experiment);

    CLI::App* gap = app.add_subcommand("gap", "Verify duality gaps on tiny instances");
    add_common(gap);

    CLI11_PARSE(app, argc, argv);

    try {
        if (dump_default) {
            std::cout << ubi::run_config_to_json(ubi::default_run_config());
            return 0;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return 1;
        }

        ubi::RunConfig cfg = config_path.empty() ? ubi::default_run_config()
                                                 : ubi::load_run_config(config_path);
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (threads_override >= 0) cfg.threads = threads_override;
        const std::filesystem::path out_dir = resolve_out_dir(out_flag, cfg);

        CLI::App* cmd = app.get_subcommands().front();
        if (cmd == generate) return ubi::cmd_generate(cfg, out_dir);
        if (cmd == estimate) return ubi::cmd_estimate(cfg, observations_path, out_dir);
        if (cmd == optimize) return ubi::cmd_optimize(cfg, portfolio_path, out_dir);
        if (cmd == experiment) return ubi::cmd_experiment(cfg, out_dir);
        if (cmd == gap) return ubi::cmd_gap(cfg, out_dir);
        std::cerr << "unknown subcommand\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
