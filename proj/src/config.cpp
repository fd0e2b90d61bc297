#include "robustq/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "robustq/errors.hpp"

namespace robustq {

using nlohmann::json;

bool ClaimConfig::operator==(const ClaimConfig& o) const {
    if (kind != o.kind) return false;
    if (kind == "uniform") return y == o.y;
    if (kind == "truncated_normal") return mu == o.mu && sigma == o.sigma && a == o.a && b == o.b;
    if (kind == "constant") return value == o.value;
    return true;
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
    require(obj.is_object(), where + " must be an object");
    for (const auto& [key, _] : obj.items())
        require(allowed.count(key) > 0, "unknown key '" + key + "' in " + where);
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
    const auto it = obj.find(key);
    require(it != obj.end(), where + "." + key + " is required");
    require(it->is_number(), where + "." + key + " must be a number");
    const double v = it->get<double>();
    require(std::isfinite(v), where + "." + key + " must be finite");
    return v;
}

void read_number(const json& obj, const std::string& key, const std::string& where, double& out) {
    if (obj.contains(key)) out = get_number(obj, key, where);
}

std::vector<double> get_list(const json& obj, const std::string& key, const std::string& where) {
    const auto it = obj.find(key);
    require(it != obj.end(), where + "." + key + " is required");
    require(it->is_array() && !it->empty(), where + "." + key + " must be a non-empty list");
    std::vector<double> out;
    for (const auto& v : *it) {
        require(v.is_number(), where + "." + key + " entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& name) {
    const auto colon = text.find(':');
    require(colon != std::string::npos, "sweep value for " + name + " must be a pair v1:v2");
    return {parse_number(text.substr(0, colon)), parse_number(text.substr(colon + 1))};
}

}  // namespace

double parse_number(const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v))
        throw ConfigError("not a finite decimal number: '" + text + "'");
    return v;
}

LognormalKernel SolveConfig::kernel() const { return LognormalKernel(market.r, market.theta, market.T); }

Claim SolveConfig::make_claim() const {
    if (claim.kind == "uniform") return Claim(UniformClaim{claim.y});
    if (claim.kind == "truncated_normal") return Claim(TruncatedNormalClaim{claim.mu, claim.sigma, claim.a, claim.b});
    if (claim.kind == "constant") return Claim(ConstantClaim{claim.value});
    throw ConfigError("claim.kind must be uniform, truncated_normal or constant");
}

UtilitySpec SolveConfig::make_utility() const { return UtilitySpec(utility.c, utility.gamma); }

RobustObjective SolveConfig::objective() const { return RobustObjective(alpha, make_claim(), make_utility()); }

SolverSettings SolveConfig::settings() const {
    SolverSettings s;
    s.intervals = numerics.grid_N;
    s.eps_p = numerics.eps_p;
    s.tolerance = numerics.tolerance;
    s.ode_tolerance = numerics.ode_tolerance;
    s.mode = parse_solve_mode(numerics.mode);
    s.refine = numerics.refine;
    return s;
}

void validate(const SolveConfig& cfg) {
    require(cfg.market.theta != 0.0, "market.theta must be non-zero");
    require(cfg.market.T > 0.0, "market.T must be positive");
    const auto& cl = cfg.claim;
    if (cl.kind == "uniform") {
        require(cl.y > 0.0, "claim.y must be positive");
    } else if (cl.kind == "truncated_normal") {
        require(cl.sigma > 0.0, "claim.sigma must be positive");
        require(cl.a < cl.b, "claim.a must be below claim.b");
    } else if (cl.kind != "constant") {
        throw ConfigError("claim.kind must be uniform, truncated_normal or constant");
    }
    require(cfg.utility.c.size() == cfg.utility.gamma.size(), "utility.c and utility.gamma must have equal length");
    require(!cfg.utility.c.empty(), "utility needs at least one term");
    for (double c : cfg.utility.c) require(c > 0.0 && std::isfinite(c), "utility.c entries must be positive");
    for (double g : cfg.utility.gamma) require(g > 0.0 && std::isfinite(g), "utility.gamma entries must be positive");
    require(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "alpha must lie in [0,1]");
    require(cfg.x.has_value() != cfg.lambda.has_value(),
            cfg.x ? "budget.x and budget.lambda are mutually exclusive; give exactly one"
                  : "budget needs exactly one of x or lambda");
    if (cfg.x) require(*cfg.x > 0.0, "budget.x must be positive");
    if (cfg.lambda) require(*cfg.lambda > 0.0, "budget.lambda must be positive");
    const auto& n = cfg.numerics;
    require(n.grid_N >= 2, "numerics.grid_N must be at least 2");
    require(n.eps_p > 0.0 && n.eps_p < 0.5, "numerics.eps_p must lie in (0, 0.5)");
    require(n.tolerance > 0.0, "numerics.tolerance must be positive");
    require(n.ode_tolerance > 0.0, "numerics.ode_tolerance must be positive");
    require(n.mode == "active-set" || n.mode == "penalized", "numerics.mode must be active-set or penalized");
    require(n.rho_points >= 2, "numerics.rho_points must be at least 2");
    require(cfg.output.format == "csv", "output.format must be csv");
}

SolveConfig parse_config(const json& doc) {
    reject_unknown(doc, "config", {"market", "claim", "utility", "alpha", "budget", "numerics", "output"});
    SolveConfig cfg;
    if (doc.contains("market")) {
        const json& m = doc["market"];
        reject_unknown(m, "market", {"r", "theta", "T"});
        read_number(m, "r", "market", cfg.market.r);
        read_number(m, "theta", "market", cfg.market.theta);
        read_number(m, "T", "market", cfg.market.T);
    }
    if (doc.contains("claim")) {
        const json& c = doc["claim"];
        reject_unknown(c, "claim", {"kind", "y", "mu", "sigma", "a", "b", "value"});
        if (c.contains("kind")) {
            require(c["kind"].is_string(), "claim.kind must be a string");
            cfg.claim.kind = c["kind"].get<std::string>();
        }
        read_number(c, "y", "claim", cfg.claim.y);
        read_number(c, "mu", "claim", cfg.claim.mu);
        read_number(c, "sigma", "claim", cfg.claim.sigma);
        read_number(c, "a", "claim", cfg.claim.a);
        read_number(c, "b", "claim", cfg.claim.b);
        read_number(c, "value", "claim", cfg.claim.value);
    }
    if (doc.contains("utility")) {
        const json& u = doc["utility"];
        reject_unknown(u, "utility", {"c", "gamma"});
        if (u.contains("c")) cfg.utility.c = get_list(u, "c", "utility");
        if (u.contains("gamma")) cfg.utility.gamma = get_list(u, "gamma", "utility");
    }
    read_number(doc, "alpha", "config", cfg.alpha);
    require(doc.contains("budget"), "budget section is required");
    {
        const json& b = doc["budget"];
        reject_unknown(b, "budget", {"x", "lambda"});
        if (b.contains("x")) cfg.x = get_number(b, "x", "budget");
        if (b.contains("lambda")) cfg.lambda = get_number(b, "lambda", "budget");
    }
    if (doc.contains("numerics")) {
        const json& n = doc["numerics"];
        reject_unknown(n, "numerics", {"grid_N", "eps_p", "tolerance", "ode_tolerance", "mode", "rho_points", "refine"});
        if (n.contains("grid_N")) {
            require(n["grid_N"].is_number_integer(), "numerics.grid_N must be an integer");
            cfg.numerics.grid_N = n["grid_N"].get<int>();
        }
        read_number(n, "eps_p", "numerics", cfg.numerics.eps_p);
        read_number(n, "tolerance", "numerics", cfg.numerics.tolerance);
        read_number(n, "ode_tolerance", "numerics", cfg.numerics.ode_tolerance);
        if (n.contains("mode")) {
            require(n["mode"].is_string(), "numerics.mode must be a string");
            cfg.numerics.mode = n["mode"].get<std::string>();
        }
        if (n.contains("rho_points")) {
            require(n["rho_points"].is_number_integer(), "numerics.rho_points must be an integer");
            cfg.numerics.rho_points = n["rho_points"].get<int>();
        }
        if (n.contains("refine")) {
            require(n["refine"].is_boolean(), "numerics.refine must be a boolean");
            cfg.numerics.refine = n["refine"].get<bool>();
        }
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        reject_unknown(o, "output", {"directory", "format"});
        if (o.contains("directory")) {
            require(o["directory"].is_string(), "output.directory must be a string");
            cfg.output.directory = o["directory"].get<std::string>();
        }
        if (o.contains("format")) {
            require(o["format"].is_string(), "output.format must be a string");
            cfg.output.format = o["format"].get<std::string>();
        }
    }
    validate(cfg);
    return cfg;
}

SolveConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

json to_json(const SolveConfig& cfg) {
    json claim = {{"kind", cfg.claim.kind}};
    if (cfg.claim.kind == "uniform") {
        claim["y"] = cfg.claim.y;
    } else if (cfg.claim.kind == "truncated_normal") {
        claim["mu"] = cfg.claim.mu;
        claim["sigma"] = cfg.claim.sigma;
        claim["a"] = cfg.claim.a;
        claim["b"] = cfg.claim.b;
    } else {
        claim["value"] = cfg.claim.value;
    }
    json budget = json::object();
    if (cfg.x) budget["x"] = *cfg.x;
    if (cfg.lambda) budget["lambda"] = *cfg.lambda;
    return {
        {"market", {{"r", cfg.market.r}, {"theta", cfg.market.theta}, {"T", cfg.market.T}}},
        {"claim", claim},
        {"utility", {{"c", cfg.utility.c}, {"gamma", cfg.utility.gamma}}},
        {"alpha", cfg.alpha},
        {"budget", budget},
        {"numerics",
         {{"grid_N", cfg.numerics.grid_N},
          {"eps_p", cfg.numerics.eps_p},
          {"tolerance", cfg.numerics.tolerance},
          {"ode_tolerance", cfg.numerics.ode_tolerance},
          {"mode", cfg.numerics.mode},
          {"rho_points", cfg.numerics.rho_points},
          {"refine", cfg.numerics.refine}}},
        {"output", {{"directory", cfg.output.directory}, {"format", cfg.output.format}}},
    };
}

void apply_parameter(SolveConfig& cfg, const std::string& name, const std::string& value) {
    if (name == "c" || name == "gamma") {
        const auto [v1, v2] = parse_pair(value, name);
        (name == "c" ? cfg.utility.c : cfg.utility.gamma) = {v1, v2};
        return;
    }
    const double v = parse_number(value);
    if (name == "r") cfg.market.r = v;
    else if (name == "theta") cfg.market.theta = v;
    else if (name == "T") cfg.market.T = v;
    else if (name == "alpha") cfg.alpha = v;
    else if (name == "x") {
        cfg.x = v;
        cfg.lambda.reset();
    } else if (name == "lambda") {
        cfg.lambda = v;
        cfg.x.reset();
    } else if (name == "y") cfg.claim.y = v;
    else if (name == "mu") cfg.claim.mu = v;
    else if (name == "sigma") cfg.claim.sigma = v;
    else if (name == "a") cfg.claim.a = v;
    else if (name == "b") cfg.claim.b = v;
    else if (name == "value") cfg.claim.value = v;
    else throw ConfigError("unknown sweep parameter '" + name + "'");
}

}  // namespace robustq
