#include "robustq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustq/errors.hpp"

namespace robustq::oracle {

namespace {

void require_size(std::size_t n, std::size_t m) {
    if (n == 0 || n != m) throw SizeError("oracle: atom lists must be non-empty and equally long");
    if (n > kMaxAtoms) throw SizeError("oracle: at most 8 atoms can be enumerated");
}

// (1/n) sum x_i y_i, summed over the sorted products so that pairings producing
// the same multiset of products give bit-identical values.
double pairing_mean(const std::vector<double>& x, const std::vector<double>& y, std::vector<double>& buf) {
    for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i] * y[i];
    std::sort(buf.begin(), buf.end());
    double s = 0.0;
    for (double v : buf) s += v;
    return s / static_cast<double>(x.size());
}

double utility_mean(const UtilitySpec& u, const std::vector<double>& x, const std::vector<double>& y,
                    std::vector<double>& buf) {
    for (std::size_t i = 0; i < x.size(); ++i) buf[i] = u.u(x[i] + y[i]);
    std::sort(buf.begin(), buf.end());
    double s = 0.0;
    for (double v : buf) s += v;
    return s / static_cast<double>(x.size());
}

}  // namespace

RearrangementResult rearrangement_extremes(const std::vector<double>& x_atoms, const std::vector<double>& y_atoms) {
    require_size(x_atoms.size(), y_atoms.size());
    std::vector<double> x = x_atoms;
    std::vector<double> y = y_atoms;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::vector<double> buf(x.size());

    RearrangementResult out;
    out.sorted_max = pairing_mean(x, y, buf);
    std::vector<double> rev(y.rbegin(), y.rend());
    out.anti_min = pairing_mean(x, rev, buf);

    out.min = std::numeric_limits<double>::infinity();
    out.max = -std::numeric_limits<double>::infinity();
    std::vector<double> perm = y;
    do {
        const double v = pairing_mean(x, perm, buf);
        out.min = std::min(out.min, v);
        out.max = std::max(out.max, v);
        ++out.pairings;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

CouplingResult coupling_J_alpha(const RobustObjective& obj, const std::vector<double>& wealth_atoms) {
    const auto* claim = std::get_if<DiscreteDistribution>(&obj.claim().model());
    if (claim == nullptr) throw UnsupportedOperation("coupling_J_alpha: claim must be discrete");
    const std::size_t n = wealth_atoms.size();
    std::vector<double> y;
    for (std::size_t k = 0; k < claim->values().size(); ++k) {
        const double copies = claim->probabilities()[k] * static_cast<double>(n);
        const double rounded = std::round(copies);
        if (std::abs(copies - rounded) > 1e-9 || rounded < 1.0)
            throw InvariantViolation("coupling_J_alpha: claim probabilities must be multiples of 1/n");
        for (int c = 0; c < static_cast<int>(rounded); ++c) y.push_back(claim->values()[k]);
    }
    require_size(n, y.size());
    std::vector<double> x = wealth_atoms;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::vector<double> buf(n);
    const UtilitySpec& u = obj.utility();

    CouplingResult out;
    out.comonotone = utility_mean(u, x, y, buf);
    std::vector<double> rev(y.rbegin(), y.rend());
    out.anti_comonotone = utility_mean(u, x, rev, buf);
    out.worst = std::numeric_limits<double>::infinity();
    out.best = -std::numeric_limits<double>::infinity();
    std::vector<double> perm = y;
    do {
        const double v = utility_mean(u, x, perm, buf);
        out.worst = std::min(out.worst, v);
        out.best = std::max(out.best, v);
        ++out.couplings;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.J = (1.0 - obj.alpha()) * out.worst + obj.alpha() * out.best;
    return out;
}

std::vector<double> pava_project(const std::vector<double>& values, const std::vector<double>& weights) {
    const std::size_t n = values.size();
    if (!weights.empty() && weights.size() != n) throw SizeError("pava_project: weights length mismatch");
    struct Block {
        double sum_w;
        double sum_wv;
        std::size_t count;
        double mean() const { return sum_wv / sum_w; }
    };
    std::vector<Block> stack;
    stack.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w > 0.0)) throw DomainError("pava_project: weights must be positive");
        stack.push_back({w, w * values[i], 1});
        while (stack.size() >= 2 && stack[stack.size() - 2].mean() > stack.back().mean()) {
            const Block top = stack.back();
            stack.pop_back();
            stack.back().sum_w += top.sum_w;
            stack.back().sum_wv += top.sum_wv;
            stack.back().count += top.count;
        }
    }
    std::vector<double> out;
    out.reserve(n);
    for (const Block& b : stack) out.insert(out.end(), b.count, b.mean());
    return out;
}

namespace {

// Per-node data of the direct problem on the midpoint grid.
struct DirectGrid {
    std::vector<double> p, qa, qb, mass;  // mass = Q_rho(1-p_i) / M
};

class Evaluator {
public:
    Evaluator(const RobustObjective& obj, const DirectGrid& g) : obj_(obj), g_(g) {}

    double vx(std::size_t i, double x, int k) const {
        const auto& c = obj_.utility().weights();
        const auto& gm = obj_.utility().rates();
        const double a = obj_.alpha();
        double s = 0.0;
        for (std::size_t t = 0; t < c.size(); ++t) {
            double term = 0.0;
            if (a < 1.0) term += (1.0 - a) * std::exp(-gm[t] * (x + g_.qa[i]));
            if (a > 0.0) term += a * std::exp(-gm[t] * (x + g_.qb[i]));
            s += c[t] * std::pow(gm[t], k) * term;
        }
        return k % 2 == 1 ? s : -s;
    }

    // V(x + d) - V(x), free of cancellation.
    double dv(std::size_t i, double x, double d) const {
        const auto& c = obj_.utility().weights();
        const auto& gm = obj_.utility().rates();
        const double a = obj_.alpha();
        double s = 0.0;
        for (std::size_t t = 0; t < c.size(); ++t) {
            double term = 0.0;
            if (a < 1.0) term += (1.0 - a) * std::exp(-gm[t] * (x + g_.qa[i]));
            if (a > 0.0) term += a * std::exp(-gm[t] * (x + g_.qb[i]));
            s -= c[t] * term * std::expm1(-gm[t] * d);
        }
        return s;
    }

private:
    const RobustObjective& obj_;
    const DirectGrid& g_;
};

// Maximizes sum_i [V(Q_i,p_i)/M - lambda mass_i Q_i] over non-negative non-decreasing Q.
// Each step solves the separable quadratic model exactly by weighted PAVA and backtracks
// from the full step.
std::size_t maximize_fixed_lambda(const Evaluator& ev, const DirectGrid& g, double lambda, std::vector<double>& Q,
                                  std::size_t budget_left) {
    const std::size_t M = Q.size();
    const double inv_m = 1.0 / static_cast<double>(M);
    std::vector<double> target(M), weight(M), dir(M);
    std::size_t iters = 0;
    while (iters < budget_left) {
        ++iters;
        double qmax = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            const double grad = ev.vx(i, Q[i], 1) * inv_m - lambda * g.mass[i];
            const double curv = -ev.vx(i, Q[i], 2) * inv_m;
            weight[i] = curv;
            target[i] = Q[i] + grad / curv;
            qmax = std::max(qmax, std::abs(Q[i]));
        }
        std::vector<double> proj = pava_project(target, weight);
        double step_norm = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            dir[i] = std::max(0.0, proj[i]) - Q[i];
            step_norm = std::max(step_norm, std::abs(dir[i]));
        }
        if (step_norm <= 1e-12 * (1.0 + qmax)) break;
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            double gain = 0.0;
            for (std::size_t i = 0; i < M; ++i)
                gain += ev.dv(i, Q[i], t * dir[i]) * inv_m - lambda * g.mass[i] * t * dir[i];
            if (gain > 0.0) {
                for (std::size_t i = 0; i < M; ++i) Q[i] += t * dir[i];
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
        if (t * step_norm <= 1e-12 * (1.0 + qmax)) break;
    }
    return iters;
}

}  // namespace

DirectSolution direct_solve(const DirectProblem& prob) {
    if (prob.objective == nullptr || prob.kernel == nullptr) throw DomainError("direct_solve: missing model");
    if (prob.M < 50) throw DomainError("direct_solve: grid size must be at least 50");
    if (!(prob.x > 0.0)) throw DomainError("direct_solve: budget must be positive");
    const RobustObjective& obj = *prob.objective;
    const LognormalKernel& kernel = *prob.kernel;
    const std::size_t M = prob.M;
    const double Md = static_cast<double>(M);

    DirectGrid g;
    g.p.resize(M);
    g.qa.resize(M);
    g.qb.resize(M);
    g.mass.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        g.p[i] = (static_cast<double>(i) + 0.5) / Md;
        const double pc = (static_cast<double>(M - i) - 0.5) / Md;
        g.qa[i] = obj.claim().quantile(g.p[i]);
        g.qb[i] = obj.claim().quantile(pc);
        g.mass[i] = kernel.quantile_complement(g.p[i]) / Md;
    }
    const Evaluator ev(obj, g);

    DirectSolution sol;
    sol.p = g.p;
    std::vector<double> Q(M, 0.0);
    auto budget_of = [&](const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < M; ++i) s += q[i] * g.mass[i];
        return s;
    };
    constexpr std::size_t kCap = 100000;
    auto run = [&](double lambda, std::vector<double>& q) {
        const std::size_t left = kCap - std::min(kCap, sol.iterations);
        sol.iterations += maximize_fixed_lambda(ev, g, lambda, q, left);
        if (sol.iterations >= kCap) {
            sol.Q = q;
            sol.lambda = lambda;
            sol.budget = budget_of(q);
            throw OracleNonConvergence("direct_solve: iteration cap exceeded", sol);
        }
        return budget_of(q);
    };

    const double scale = obj.marginal_bound();
    double lo = std::log(1e-8 * scale);
    double hi = std::log(1e4 * scale);
    std::vector<double> q_lo(M, 0.0), q_hi(M, 0.0);
    if (run(std::exp(lo), q_lo) < prob.x) throw UnattainableBudget("direct_solve: budget beyond bracket");
    if (run(std::exp(hi), q_hi) > prob.x) throw UnattainableBudget("direct_solve: budget below bracket");
    double b = 0.0;
    double mid = lo;
    Q = q_hi;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        b = run(std::exp(mid), Q);
        if (std::abs(b - prob.x) < 1e-8 || !(mid > lo && mid < hi)) break;
        if (b > prob.x) lo = mid;
        else hi = mid;
    }
    sol.Q = Q;
    sol.lambda = std::exp(mid);
    sol.budget = b;
    double total = 0.0;
    for (std::size_t i = 0; i < M; ++i) total += obj.V(Q[i], g.p[i]) / Md;
    sol.objective = total;
    return sol;
}

}  // namespace robustq::oracle
