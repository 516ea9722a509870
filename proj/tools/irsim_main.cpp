#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irsim/irsim.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> replications;
    std::string out;
    std::uint32_t threads = 0;
    bool dump_grids = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out = true) {
    cmd->add_option("config", args.config_path, "experiment config file")->required();
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--replications", args.replications, "override the replication count");
    if (with_out) {
        cmd->add_option("--out", args.out, "output directory");
        cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
        cmd->add_flag("--dump-grids", args.dump_grids, "write per-step grid dumps");
    }
}

irsim::lab::ExperimentConfig load_config(const CommonArgs& args) {
    auto cfg = irsim::lab::ExperimentConfig::parse_file(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.replications) cfg.replications = *args.replications;
    cfg.validate();
    return cfg;
}

// --out beats the config, the config beats IRSIM_OUT_DIR, which beats "irsim_out".
std::string resolve_out_dir(const CommonArgs& args, const irsim::lab::ExperimentConfig& cfg) {
    if (!args.out.empty()) return args.out;
    if (!cfg.output.empty()) return cfg.output;
    if (const char* env = std::getenv("IRSIM_OUT_DIR"); env && *env) return env;
    return "irsim_out";
}

int run_command(const CommonArgs& args, bool oracle) {
    const auto cfg = load_config(args);
    irsim::lab::RunOptions opts;
    opts.threads = args.threads;
    opts.dump_grids = args.dump_grids;
    opts.out_dir = resolve_out_dir(args, cfg);
    irsim::lab::run_experiment(cfg, opts, oracle);
    std::cout << (oracle ? "oracle" : "run") << ": " << cfg.replications << " replication(s), "
              << cfg.t_final << " step(s) -> " << opts.out_dir << "\n";
    return 0;
}

int sweep_command(const CommonArgs& args, double from, double to, double step_size) {
    const auto cfg = load_config(args);
    if (cfg.model != irsim::lab::ModelKind::life)
        throw irsim::ConfigError("sweep: the lambda sweep needs model = life");
    if (step_size <= 0.0) throw irsim::ConfigError("sweep: --lambda-step must be positive");
    if (to < from) throw irsim::ConfigError("sweep: --lambda-to must be >= --lambda-from");

    std::vector<double> lambdas;
    for (double v = from; v <= to + 1e-12; v += step_size) lambdas.push_back(v);

    irsim::lab::RunOptions opts;
    opts.threads = args.threads;
    opts.out_dir = resolve_out_dir(args, cfg);
    const auto table = irsim::lab::sweep_lambda(cfg, lambdas, opts);

    std::filesystem::create_directories(opts.out_dir);
    irsim::lab::write_text_file(opts.out_dir + "/sweep.csv", irsim::lab::sweep_csv(table));
    for (const auto& row : table)
        std::cout << "lambda=" << irsim::lab::format_g6(row.lambda_plus) << " p="
                  << irsim::lab::format_g6(row.p) << " converged=" << row.converged << "/"
                  << row.replications << " mean_steps="
                  << irsim::lab::format_g6(row.mean_steps_to_steady) << "\n";
    std::cout << "sweep: " << table.size() << " value(s) -> " << opts.out_dir << "/sweep.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-level influence/reaction simulation lab"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, validate_args, oracle_args;
    double lambda_from = 0.0, lambda_to = 0.0, lambda_step = 0.0;

    auto* run_cmd = app.add_subcommand("run", "run an experiment and write CSV output");
    add_common(run_cmd, run_args);

    auto* sweep_cmd = app.add_subcommand("sweep", "run a lambda sweep over a life config");
    add_common(sweep_cmd, sweep_args);
    sweep_cmd->add_option("--lambda-from", lambda_from, "first lambda value")->required();
    sweep_cmd->add_option("--lambda-to", lambda_to, "last lambda value")->required();
    sweep_cmd->add_option("--lambda-step", lambda_step, "lambda increment")->required();

    auto* validate_cmd = app.add_subcommand("validate", "parse and check a config, write nothing");
    add_common(validate_cmd, validate_args, /*with_out=*/false);

    auto* oracle_cmd =
        app.add_subcommand("oracle", "run the brute-force Life oracle for cross-checks");
    add_common(oracle_cmd, oracle_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    }

    try {
        if (run_cmd->parsed()) return run_command(run_args, /*oracle=*/false);
        if (oracle_cmd->parsed()) return run_command(oracle_args, /*oracle=*/true);
        if (sweep_cmd->parsed()) return sweep_command(sweep_args, lambda_from, lambda_to, lambda_step);
        if (validate_cmd->parsed()) {
            (void)load_config(validate_args);
            std::cout << "config ok: " << validate_args.config_path << "\n";
            return 0;
        }
    } catch (const irsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
