#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustq/config.hpp"

namespace robustq::cli {

enum ExitCode : int { kOk = 0, kOther = 1, kConfigError = 2, kNonConvergence = 3, kVerificationFailure = 4 };

// Shortest decimal string that reads back to the same double.
std::string format_number(double v);

// Solves the configured problem and writes solution.csv, profile.csv and meta.json.
int run_solve(const SolveConfig& cfg, const std::filesystem::path& out, std::ostream& log);

// One solve per value of `name`; writes sweep_<name>=<value>.csv with a .json sidecar
// and index.json. A theta sweep also writes kernel_quantile.csv.
int run_sweep(const SolveConfig& cfg, const std::string& name, const std::vector<std::string>& values,
              const std::filesystem::path& out, std::size_t workers, std::ostream& log);

// curve.csv of (lambda, x); from a lambda grid, or from endowments via lambda_of_x.
int run_budget_curve(const SolveConfig& cfg, const std::vector<double>& lambdas, const std::vector<double>& xs,
                     const std::filesystem::path& out, std::size_t workers, std::ostream& log);

struct VerifyOptions {
    std::uint64_t seed = 7;
    std::vector<int> sizes{2, 3, 4, 5, 6, 7};
    double tolerance_scale = 1.0;
};

// Oracle cross-checks; writes verify.json. Returns kVerificationFailure if any check fails.
int run_verify(const VerifyOptions& opts, const std::filesystem::path& out, std::ostream& log);
nlohmann::json verify_report(const VerifyOptions& opts);

// kernel_quantile.csv in long format (theta, p, Q_rho) for the given theta values.
int run_kernel_quantile(const SolveConfig& cfg, const std::vector<double>& thetas, const std::filesystem::path& out,
                        std::ostream& log);

}  // namespace robustq::cli
