#include "robustq/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>

#include "robustq/budget.hpp"
#include "robustq/errors.hpp"
#include "robustq/oracle.hpp"
#include "robustq/parallel.hpp"
#include "robustq/payoff.hpp"

namespace robustq::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_solution_csv(const fs::path& path, const SolveResult& r) {
    std::ofstream out = open_out(path);
    out << "p,Q,H,lambda_eta,candidate,active_flag\n";
    for (std::size_t i = 0; i < r.Q.size(); ++i) {
        out << format_number(r.grid.p(i)) << ',' << format_number(r.Q[i]) << ',' << format_number(r.H[i]) << ','
            << format_number(r.eta_scaled[i]) << ',' << format_number(r.candidate[i]) << ','
            << static_cast<int>(r.active[i]) << '\n';
    }
}

void write_profile_csv(const fs::path& path, const PayoffProfile& prof) {
    std::ofstream out = open_out(path);
    out << "rho,payoff\n";
    for (std::size_t i = 0; i < prof.rho.size(); ++i)
        out << format_number(prof.rho[i]) << ',' << format_number(prof.payoff[i]) << '\n';
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

json residual_json(const ResidualReport& rep) {
    return {{"obstacle_min", rep.obstacle_min},
            {"complementarity", rep.complementarity},
            {"ode_max", rep.ode_max},
            {"second_order_max", rep.second_order_max},
            {"second_order_points", rep.second_order_points},
            {"zero_region_ok", rep.zero_region_ok},
            {"monotone_ok", rep.monotone_ok},
            {"tolerance", rep.tolerance},
            {"ode_tolerance", rep.ode_tolerance},
            {"ok", rep.ok()}};
}

json result_json(const SolveConfig& cfg, const SolveResult& r) {
    return {{"config", to_json(cfg)},
            {"lambda", r.lambda},
            {"pbar", r.pbar},
            {"budget", r.budget},
            {"degenerate", r.degenerate},
            {"mode", to_string(r.mode)},
            {"grid", {{"intervals", r.grid.intervals()}, {"eps_p", r.grid.eps()}}},
            {"residuals", residual_json(r.residuals)}};
}

// Solves for the configured multiplier, or recovers it from the endowment.
SolveResult compute(const SolveConfig& cfg) {
    const RobustObjective obj = cfg.objective();
    const LognormalKernel kernel = cfg.kernel();
    if (cfg.lambda) return solve(obj, kernel, *cfg.lambda, cfg.settings());
    return lambda_of_x(obj, kernel, *cfg.x, cfg.settings()).result;
}

struct Outcome {
    int code = kOk;
    std::optional<SolveResult> result;
    std::string error;
};

Outcome compute_outcome(const SolveConfig& cfg) {
    Outcome o;
    try {
        validate(cfg);
        o.result = compute(cfg);
    } catch (const ConfigError& e) {
        o.code = kConfigError;
        o.error = e.what();
    } catch (const DomainError& e) {
        o.code = kConfigError;
        o.error = e.what();
    } catch (const NonConvergence& e) {
        o.code = kNonConvergence;
        o.error = e.what();
        o.result = e.result();
    } catch (const std::exception& e) {
        o.code = kOther;
        o.error = e.what();
    }
    return o;
}

std::string canonical_value(const std::string& name, const std::string& text) {
    if (name == "c" || name == "gamma") {
        const auto colon = text.find(':');
        if (colon == std::string::npos) throw ConfigError("sweep value for " + name + " must be a pair v1:v2");
        return format_number(parse_number(text.substr(0, colon))) + ":" +
               format_number(parse_number(text.substr(colon + 1)));
    }
    return format_number(parse_number(text));
}

void write_kernel_quantiles(const fs::path& path, const MarketConfig& market, const std::vector<double>& thetas) {
    std::ofstream out = open_out(path);
    out << "theta,p,Q_rho\n";
    for (double theta : thetas) {
        const LognormalKernel k(market.r, theta, market.T);
        for (int i = 1; i < 1000; ++i) {
            const double p = i / 1000.0;
            out << format_number(theta) << ',' << format_number(p) << ',' << format_number(k.quantile(p)) << '\n';
        }
    }
}

}  // namespace

int run_solve(const SolveConfig& cfg, const fs::path& out, std::ostream& log) {
    fs::create_directories(out);
    Outcome o = compute_outcome(cfg);
    if (o.code == kConfigError) {
        log << "config error: " << o.error << '\n';
        return o.code;
    }
    json meta;
    if (o.result) {
        const SolveResult& r = *o.result;
        write_solution_csv(out / "solution.csv", r);
        const LognormalKernel kernel = cfg.kernel();
        write_profile_csv(out / "profile.csv",
                          profile(r, kernel, default_rho_grid(kernel, static_cast<std::size_t>(cfg.numerics.rho_points))));
        meta = result_json(cfg, r);
    } else {
        meta = {{"config", to_json(cfg)}};
    }
    if (cfg.x) meta["target_x"] = *cfg.x;
    meta["converged"] = o.code == kOk;
    if (!o.error.empty()) meta["error"] = o.error;
    write_json(out / "meta.json", meta);
    if (o.code != kOk) log << "solve failed: " << o.error << '\n';
    return o.code;
}

int run_sweep(const SolveConfig& cfg, const std::string& name, const std::vector<std::string>& values,
              const fs::path& out, std::size_t workers, std::ostream& log) {
    if (values.empty()) {
        log << "config error: empty sweep list\n";
        return kConfigError;
    }
    std::vector<std::string> tags;
    std::vector<SolveConfig> configs;
    try {
        for (const std::string& v : values) {
            SolveConfig c = cfg;
            apply_parameter(c, name, v);
            tags.push_back(canonical_value(name, v));
            configs.push_back(std::move(c));
        }
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    fs::create_directories(out);

    std::vector<Outcome> outcomes(configs.size());
    parallel_for(configs.size(), workers, [&](std::size_t i) { outcomes[i] = compute_outcome(configs[i]); });

    json entries = json::array();
    bool all_ok = true;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const std::string stem = "sweep_" + name + "=" + tags[i];
        const Outcome& o = outcomes[i];
        json entry = {{"parameter", name}, {"value", tags[i]}, {"json", stem + ".json"}};
        json meta = o.result ? result_json(configs[i], *o.result) : json{{"config", to_json(configs[i])}};
        meta["converged"] = o.code == kOk;
        if (o.code == kOk) {
            const LognormalKernel kernel = configs[i].kernel();
            const auto grid = default_rho_grid(kernel, static_cast<std::size_t>(configs[i].numerics.rho_points));
            write_profile_csv(out / (stem + ".csv"), profile(*o.result, kernel, grid));
            entry["file"] = stem + ".csv";
            entry["status"] = "ok";
            entry["lambda"] = o.result->lambda;
            entry["budget"] = o.result->budget;
        } else {
            all_ok = false;
            meta["error"] = o.error;
            entry["status"] = "failed";
            entry["error"] = o.error;
            log << "sweep " << name << "=" << tags[i] << " failed: " << o.error << '\n';
        }
        write_json(out / (stem + ".json"), meta);
        entries.push_back(entry);
    }
    json index = {{"parameter", name}, {"entries", entries}};
    if (name == "theta") {
        std::vector<double> thetas;
        for (const auto& c : configs)
            if (c.market.theta != 0.0) thetas.push_back(c.market.theta);
        write_kernel_quantiles(out / "kernel_quantile.csv", cfg.market, thetas);
        index["kernel_quantile"] = "kernel_quantile.csv";
    }
    write_json(out / "index.json", index);
    return all_ok ? kOk : kNonConvergence;
}

int run_budget_curve(const SolveConfig& cfg, const std::vector<double>& lambdas, const std::vector<double>& xs,
                     const fs::path& out, std::size_t workers, std::ostream& log) {
    RobustObjective obj = cfg.objective();
    const LognormalKernel kernel = cfg.kernel();
    const SolverSettings settings = cfg.settings();
    struct Row {
        double lambda;
        double x;
    };
    std::vector<Row> rows;
    if (!xs.empty()) {
        for (double x : xs)
            if (!(x > 0.0)) throw ConfigError("budget-curve endowments must be positive");
        std::vector<std::optional<Row>> found(xs.size());
        std::vector<std::string> errors(xs.size());
        parallel_for(xs.size(), workers, [&](std::size_t i) {
            try {
                const BudgetSolution s = lambda_of_x(obj, kernel, xs[i], settings);
                found[i] = Row{s.lambda, s.result.budget};
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (found[i]) rows.push_back(*found[i]);
            else log << "warning: x=" << format_number(xs[i]) << " skipped: " << errors[i] << '\n';
        }
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.lambda < b.lambda; });
    } else {
        std::vector<double> grid = lambdas;
        if (grid.empty()) {
            const double scale = obj.marginal_bound();
            for (int i = 0; i < 20; ++i) grid.push_back(scale * std::exp(std::log(0.05) * (1.0 - i / 19.0)));
        }
        for (double l : grid)
            if (!(l > 0.0)) throw ConfigError("budget-curve multipliers must be positive");
        const BudgetCurve curve = budget_curve(obj, kernel, grid, settings, workers);
        for (const auto& row : curve.rows) {
            if (row.x) rows.push_back({row.lambda, *row.x});
            else log << "warning: lambda=" << format_number(row.lambda) << " skipped: " << row.error << '\n';
        }
    }
    fs::create_directories(out);
    std::ofstream csv = open_out(out / "curve.csv");
    csv << "lambda,x\n";
    for (const Row& r : rows) csv << format_number(r.lambda) << ',' << format_number(r.x) << '\n';
    return kOk;
}

namespace {

struct CheckLog {
    json checks = json::array();
    json first_failure;
    void add(const std::string& name, bool passed, json detail) {
        json entry = {{"name", name}, {"passed", passed}, {"detail", std::move(detail)}};
        if (!passed && first_failure.is_null()) first_failure = entry;
        checks.push_back(std::move(entry));
    }
};

std::vector<double> random_atoms(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = d(rng);
    return v;
}

// Best monotone fit by trying every partition of 0..n-1 into contiguous blocks.
double brute_force_isotonic_distance(const std::vector<double>& v) {
    const std::size_t n = v.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<double> fit;
        std::size_t start = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i + 1 == n || (mask >> i & 1u)) {
                double s = 0.0;
                for (std::size_t j = start; j <= i; ++j) s += v[j];
                fit.insert(fit.end(), i - start + 1, s / static_cast<double>(i - start + 1));
                start = i + 1;
            }
        }
        if (!std::is_sorted(fit.begin(), fit.end())) continue;
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += (fit[i] - v[i]) * (fit[i] - v[i]);
        best = std::min(best, d);
    }
    return best;
}

}  // namespace

json verify_report(const VerifyOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    const double scale = opts.tolerance_scale;
    CheckLog log;

    {
        const auto r = oracle::rearrangement_extremes({1.0, 2.0}, {0.0, 1.0});
        log.add("rearrangement_canonical", r.max == 1.0 && r.min == 0.5, {{"max", r.max}, {"min", r.min}});
    }
    for (int n : opts.sizes) {
        if (n < 1 || n > static_cast<int>(oracle::kMaxAtoms)) throw ConfigError("verify sizes must lie in [1, 8]");
        for (int rep = 0; rep < 3; ++rep) {
            const auto x = random_atoms(rng, n, -2.0, 3.0);
            const auto y = random_atoms(rng, n, -1.0, 4.0);
            const auto r = oracle::rearrangement_extremes(x, y);
            log.add("rearrangement_n" + std::to_string(n), r.max == r.sorted_max && r.min == r.anti_min,
                    {{"max", r.max}, {"sorted_max", r.sorted_max}, {"min", r.min}, {"anti_min", r.anti_min}});

            const auto wealth = random_atoms(rng, n, 0.0, 3.0);
            const auto claim_atoms = random_atoms(rng, n, 0.0, 2.0);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const RobustObjective obj(unit(rng), Claim(DiscreteDistribution::uniform_atoms(claim_atoms)),
                                      UtilitySpec({0.5 + unit(rng), 0.5 + unit(rng)}, {0.5 + unit(rng), 0.5 + 1.5 * unit(rng)}));
            const auto c = oracle::coupling_J_alpha(obj, wealth);
            const double quad = obj.J_alpha(GridQuantile::from_atoms(wealth));
            const double diff = std::abs(c.J - quad);
            log.add("coupling_J_alpha_n" + std::to_string(n),
                    diff <= 1e-10 * scale && c.worst == c.comonotone && c.best == c.anti_comonotone,
                    {{"enumerated", c.J}, {"quadrature", quad}, {"abs_diff", diff}});
        }
    }
    {
        const auto v = random_atoms(rng, 100, -1.0, 1.0);
        const auto proj = oracle::pava_project(v);
        const auto again = oracle::pava_project(proj);
        double mean_diff = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) mean_diff += proj[i] - v[i];
        const bool idempotent = again == proj;
        const std::vector<double> prefix(v.begin(), v.begin() + 6);
        const auto small = oracle::pava_project(prefix);
        double dist = 0.0;
        for (std::size_t i = 0; i < 6; ++i) dist += (small[i] - prefix[i]) * (small[i] - prefix[i]);
        const double brute = brute_force_isotonic_distance(prefix);
        log.add("pava_projection",
                idempotent && std::is_sorted(proj.begin(), proj.end()) && std::abs(mean_diff) <= 1e-12 * scale &&
                    std::abs(dist - brute) <= 1e-12 * scale,
                {{"mean_shift", mean_diff}, {"prefix_distance", dist}, {"brute_force_distance", brute}});
    }
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double alpha = unit(rng);
        const LognormalKernel kernel(0.02, 0.2 + 0.3 * unit(rng), 1.0);
        const RobustObjective obj(alpha, Claim(UniformClaim{0.5 + 1.5 * unit(rng)}),
                                  UtilitySpec({0.5 + unit(rng), 0.5 + unit(rng)}, {0.5 + unit(rng), 0.5 + 1.5 * unit(rng)}));
        const double x = 0.5 + 2.0 * unit(rng);
        SolverSettings settings;
        settings.intervals = 2000;
        const BudgetSolution vi = lambda_of_x(obj, kernel, x, settings);
        const oracle::DirectSolution direct = oracle::direct_solve({&obj, &kernel, x, 400});
        const double vi_obj = obj.J_alpha(GridQuantile(vi.result.grid.p(), vi.result.Q));
        const double rel = std::abs(vi_obj - direct.objective) / std::abs(direct.objective);
        double sup = 0.0;
        for (std::size_t i = 0; i < direct.p.size(); ++i) {
            const double p = direct.p[i];
            if (p < vi.result.pbar + 0.01 || p > 0.99) continue;
            sup = std::max(sup, std::abs(reconstruct_quantile(vi.result, obj, kernel, p) - direct.Q[i]));
        }
        log.add("direct_vs_vi", rel <= 1e-3 * scale && sup <= 1e-2 * scale,
                {{"vi_objective", vi_obj}, {"direct_objective", direct.objective}, {"relative_gap", rel},
                 {"quantile_sup", sup}, {"x", x}, {"alpha", alpha}});
    }

    bool passed = true;
    for (const auto& c : log.checks) passed = passed && c["passed"].get<bool>();
    json report = {{"seed", opts.seed}, {"tolerance_scale", scale}, {"sizes", opts.sizes},
                   {"passed", passed}, {"checks", log.checks}};
    report["first_failure"] = log.first_failure;
    return report;
}

int run_verify(const VerifyOptions& opts, const fs::path& out, std::ostream& log) {
    const json report = verify_report(opts);
    fs::create_directories(out);
    write_json(out / "verify.json", report);
    std::size_t failed = 0;
    for (const auto& c : report["checks"])
        if (!c["passed"].get<bool>()) ++failed;
    log << report["checks"].size() - failed << "/" << report["checks"].size() << " checks passed\n";
    if (failed > 0) {
        log << "first failure: " << report["first_failure"].dump() << '\n';
        return kVerificationFailure;
    }
    return kOk;
}

int run_kernel_quantile(const SolveConfig& cfg, const std::vector<double>& thetas, const fs::path& out,
                        std::ostream& log) {
    std::vector<double> list = thetas.empty() ? std::vector<double>{cfg.market.theta} : thetas;
    for (double t : list)
        if (t == 0.0) throw ConfigError("theta must be non-zero");
    fs::create_directories(out);
    write_kernel_quantiles(out / "kernel_quantile.csv", cfg.market, list);
    log << "wrote " << (out / "kernel_quantile.csv").string() << '\n';
    return kOk;
}

}  // namespace robustq::cli
