#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robustq/cli.hpp"
#include "robustq/errors.hpp"
#include "robustq/parallel.hpp"

namespace {

using robustq::SolveConfig;
namespace cli = robustq::cli;

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& s : split(text, ',')) out.push_back(robustq::parse_number(s));
    return out;
}

struct Common {
    std::string config;
    std::string out;
    int grid = 0;
    std::string mode;
};

SolveConfig load(const Common& c, bool required) {
    SolveConfig cfg;
    if (!c.config.empty()) cfg = robustq::load_config(c.config);
    else if (required) throw robustq::ConfigError("--config is required");
    if (c.grid != 0) cfg.numerics.grid_N = c.grid;
    if (!c.mode.empty()) cfg.numerics.mode = c.mode;
    if (!c.out.empty()) cfg.output.directory = c.out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust quantile optimization: solver, sweeps, budget curves and oracle checks"};
    app.require_subcommand(1);

    Common common;
    std::string sweep;
    std::string lambdas;
    std::string xs;
    std::string sizes;
    std::uint64_t seed = 7;
    double tolerance_scale = 1.0;
    std::size_t workers = robustq::default_workers();

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON config file");
        sub->add_option("--out", common.out, "output directory (overrides output.directory)");
        sub->add_option("--grid", common.grid, "number of grid intervals");
        sub->add_option("--mode", common.mode, "active-set or penalized");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one configuration");
    add_common(solve);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "solve once per parameter value");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--sweep", sweep, "NAME=v1,v2,... (pairs as a:b)")->required();
    sweep_cmd->add_option("--workers", workers, "parallel solves");
    CLI::App* curve = app.add_subcommand("budget-curve", "x(lambda) samples");
    add_common(curve);
    curve->add_option("--lambdas", lambdas, "comma-separated multipliers");
    curve->add_option("--xs", xs, "comma-separated endowments (solved for lambda)");
    curve->add_option("--workers", workers, "parallel solves");
    CLI::App* verify = app.add_subcommand("verify", "oracle cross-checks");
    verify->add_option("--out", common.out, "output directory");
    verify->add_option("--seed", seed, "random seed");
    verify->add_option("--sizes", sizes, "comma-separated atom counts (<= 8)");
    verify->add_option("--tolerance-scale", tolerance_scale, "multiplies every check tolerance");
    CLI::App* kq = app.add_subcommand("kernel-quantile", "pricing-kernel quantile table");
    add_common(kq);
    std::string thetas;
    kq->add_option("--thetas", thetas, "comma-separated market prices of risk");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : cli::kConfigError;
    }

    try {
        if (*solve) {
            const SolveConfig cfg = load(common, true);
            return cli::run_solve(cfg, cfg.output.directory, std::cerr);
        }
        if (*sweep_cmd) {
            const SolveConfig cfg = load(common, true);
            const auto eq = sweep.find('=');
            if (eq == std::string::npos || eq == 0) throw robustq::ConfigError("--sweep expects NAME=v1,v2,...");
            return cli::run_sweep(cfg, sweep.substr(0, eq), split(sweep.substr(eq + 1), ','), cfg.output.directory,
                                  workers, std::cerr);
        }
        if (*curve) {
            const SolveConfig cfg = load(common, true);
            return cli::run_budget_curve(cfg, parse_list(lambdas), parse_list(xs), cfg.output.directory, workers,
                                         std::cerr);
        }
        if (*verify) {
            cli::VerifyOptions opts;
            opts.seed = seed;
            opts.tolerance_scale = tolerance_scale;
            if (!sizes.empty()) {
                opts.sizes.clear();
                for (double s : parse_list(sizes)) opts.sizes.push_back(static_cast<int>(s));
            }
            return cli::run_verify(opts, common.out.empty() ? "out" : common.out, std::cerr);
        }
        if (*kq) {
            const SolveConfig cfg = load(common, false);
            return cli::run_kernel_quantile(cfg, parse_list(thetas), cfg.output.directory, std::cerr);
        }
    } catch (const robustq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kConfigError;
    } catch (const robustq::NonConvergence& e) {
        std::cerr << e.what() << '\n';
        return cli::kNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kOther;
    }
    return cli::kOther;
}
