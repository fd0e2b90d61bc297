#include "robustq/robust_objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustq/detail/exp_mixture.hpp"
#include "robustq/errors.hpp"

namespace robustq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double w) { return w > 0.0 ? std::log(w) : kNegInf; }

void require_open_probability(double p, const char* where) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(where) + ": p outside (0,1)");
}

}  // namespace

GridQuantile::GridQuantile(std::vector<double> grid, std::vector<double> values, Interpolation rule)
    : grid_(std::move(grid)), values_(std::move(values)), rule_(rule) {
    if (grid_.empty() || grid_.size() != values_.size())
        throw InvariantViolation("GridQuantile: grid and values must be non-empty and equally long");
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!(grid_[i] >= 0.0 && grid_[i] < 1.0) || (i > 0 && !(grid_[i] > grid_[i - 1])))
            throw InvariantViolation("GridQuantile: grid must be strictly increasing in [0,1)");
        const double slack = 1e-12 * std::max(1.0, std::abs(values_[i]));
        if (!std::isfinite(values_[i]) || values_[i] < -slack)
            throw InvariantViolation("GridQuantile: values must be finite and nonnegative");
        values_[i] = std::max(values_[i], 0.0);
        if (i > 0) {
            if (values_[i] < values_[i - 1] - slack)
                throw InvariantViolation("GridQuantile: values must be non-decreasing");
            values_[i] = std::max(values_[i], values_[i - 1]);
        }
    }
}

GridQuantile GridQuantile::from_atoms(std::vector<double> atoms) {
    std::sort(atoms.begin(), atoms.end());
    const std::size_t n = atoms.size();
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(k) / static_cast<double>(n);
    return GridQuantile(std::move(grid), std::move(atoms), Interpolation::Step);
}

double GridQuantile::operator()(double p) const {
    if (p <= grid_.front()) return values_.front();
    if (p >= grid_.back()) return values_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), p);
    const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
    const std::size_t lo = hi - 1;
    if (rule_ == Interpolation::Step) return values_[lo];
    const double t = (p - grid_[lo]) / (grid_[hi] - grid_[lo]);
    return values_[lo] + t * (values_[hi] - values_[lo]);
}

RobustObjective::RobustObjective(double alpha, Claim claim, UtilitySpec utility)
    : alpha_(alpha), claim_(std::move(claim)), utility_(std::move(utility)) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("RobustObjective: alpha must lie in [0,1]");
    for (std::size_t i = 0; i < utility_.size(); ++i)
        log_cg_.push_back(std::log(utility_.weights()[i] * utility_.rates()[i]));
}

double RobustObjective::V(double x, double p, double pc) const {
    double value = 0.0;
    if (alpha_ < 1.0) value += (1.0 - alpha_) * utility_.u(x + claim_.quantile(p));
    if (alpha_ > 0.0) value += alpha_ * utility_.u(x + claim_.quantile(pc));
    return value;
}

double RobustObjective::V_x(double x, double p, double pc, int k) const {
    double value = 0.0;
    if (alpha_ < 1.0) value += (1.0 - alpha_) * utility_.derivative(x + claim_.quantile(p), k);
    if (alpha_ > 0.0) value += alpha_ * utility_.derivative(x + claim_.quantile(pc), k);
    return value;
}

double RobustObjective::V(double x, double p) const {
    require_open_probability(p, "V");
    return V(x, p, 1.0 - p);
}

double RobustObjective::V_x(double x, double p, int k) const {
    require_open_probability(p, "V_x");
    return V_x(x, p, 1.0 - p, k);
}

double RobustObjective::V_xp(double x, double p) const {
    require_open_probability(p, "V_xp");
    const double pc = 1.0 - p;
    double value = 0.0;
    if (alpha_ < 1.0)
        value += (1.0 - alpha_) * utility_.derivative(x + claim_.quantile(p), 2) * claim_.quantile_derivative(p);
    if (alpha_ > 0.0)
        value -= alpha_ * utility_.derivative(x + claim_.quantile(pc), 2) * claim_.quantile_derivative(pc);
    return value;
}

double RobustObjective::S_inverse(double w, double p, double pc) const {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("S_inverse: w must be positive and finite");
    const std::size_t n = utility_.size();
    // dV/dx(xi,p) = sum_i c_i gamma_i [(1-a) e^{-gamma_i (xi + Q(p))} + a e^{-gamma_i (xi + Q(1-p))}].
    std::vector<double> lc(2 * n);
    std::vector<double> rt(2 * n);
    const double qp = claim_.quantile(p);
    const double qc = claim_.quantile(pc);
    const double la = safe_log(1.0 - alpha_);
    const double lb = safe_log(alpha_);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = utility_.rates()[i];
        lc[2 * i] = la == kNegInf ? kNegInf : log_cg_[i] + la - g * qp;
        lc[2 * i + 1] = lb == kNegInf ? kNegInf : log_cg_[i] + lb - g * qc;
        rt[2 * i] = g;
        rt[2 * i + 1] = g;
    }
    return detail::exp_mixture_root(lc, rt, std::log(w));
}

double RobustObjective::S_inverse(double w, double p) const {
    require_open_probability(p, "S_inverse");
    return S_inverse(w, p, 1.0 - p);
}

double RobustObjective::L_operator(double w, double p) const {
    if (!claim_.differentiable())
        throw UnsupportedOperation("L_operator: claim quantile is not differentiable");
    return V_xp(S_inverse(w, p), p);
}

double RobustObjective::marginal_bound() const { return utility_.derivative(claim_.lower(), 1); }

double RobustObjective::J_alpha(const GridQuantile& q) const {
    const auto& grid = q.grid();
    const auto& values = q.values();
    if (q.rule() == GridQuantile::Interpolation::Linear) {
        if (grid.front() <= 0.0) throw InvariantViolation("J_alpha: linear quantile grid must lie in (0,1)");
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double h = grid[i + 1] - grid[i];
            total += 0.5 * h * (V(values[i], grid[i]) + V(values[i + 1], grid[i + 1]));
        }
        return total;
    }

    // Step quantile: the integrand is piecewise constant between the breakpoints of
    // Q, Q_theta(p) and Q_theta(1-p) when the claim is discrete; otherwise each
    // piece is refined with a midpoint rule.
    std::vector<double> breaks(grid.begin(), grid.end());
    breaks.push_back(0.0);
    breaks.push_back(1.0);
    const bool discrete = std::holds_alternative<DiscreteDistribution>(claim_.model());
    if (discrete) {
        for (double c : std::get<DiscreteDistribution>(claim_.model()).cumulative()) {
            breaks.push_back(c);
            breaks.push_back(1.0 - c);
        }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const int panels = discrete ? 1 : 64;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i];
        const double b = breaks[i + 1];
        if (!(b > a)) continue;
        const double h = (b - a) / panels;
        for (int j = 0; j < panels; ++j) {
            const double mid = a + (j + 0.5) * h;
            total += h * V(q(mid), mid);
        }
    }
    return total;
}

}  // namespace robustq
