#include "robustq/vi_solver.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "robustq/detail/exp_mixture.hpp"
#include "robustq/errors.hpp"
#include "robustq/normal.hpp"
#include "robustq/quadrature.hpp"

namespace robustq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Width of the far tail integrated beyond the last grid node, in z units.
constexpr double kTailWidth = 12.0;

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// z = Phi^{-1}(1 - p), taking whichever of p, 1 - p is small.
double z_of(double p, double pc) { return p <= 0.5 ? -normal::quantile(p) : normal::quantile(pc); }

// V and its x-derivatives from precomputed claim quantiles qa = Q(p), qb = Q(1-p).
class Pointwise {
public:
    explicit Pointwise(const RobustObjective& obj)
        : alpha_(obj.alpha()), c_(obj.utility().weights()), g_(obj.utility().rates()) {}

    double vx(double x, double qa, double qb, int k) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            double term = 0.0;
            if (alpha_ < 1.0) term += (1.0 - alpha_) * std::exp(-g_[i] * (x + qa));
            if (alpha_ > 0.0) term += alpha_ * std::exp(-g_[i] * (x + qb));
            sum += c_[i] * std::pow(g_[i], k) * term;
        }
        return (k % 2 == 1) ? sum : -sum;
    }

    // V(x + d) - V(x) without cancellation.
    double dv(double x, double d, double qa, double qb) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            const double e = -std::expm1(-g_[i] * d);
            double term = 0.0;
            if (alpha_ < 1.0) term += (1.0 - alpha_) * std::exp(-g_[i] * (x + qa));
            if (alpha_ > 0.0) term += alpha_ * std::exp(-g_[i] * (x + qb));
            sum += c_[i] * term * e;
        }
        return sum;
    }

private:
    double alpha_;
    const std::vector<double>& c_;
    const std::vector<double>& g_;
};

struct Workspace {
    std::vector<double> p, pc, z, rho, qa, qb;
};

Workspace make_workspace(const RobustObjective& obj, const LognormalKernel& kernel, const SolverGrid& grid) {
    const std::size_t n = grid.size();
    Workspace ws;
    ws.p.resize(n);
    ws.pc.resize(n);
    ws.z.resize(n);
    ws.rho.resize(n);
    ws.qa.resize(n);
    ws.qb.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ws.p[i] = grid.p(i);
        ws.pc[i] = grid.reflected(i);
        ws.z[i] = z_of(ws.p[i], ws.pc[i]);
        ws.rho[i] = std::exp(kernel.mu_log() + kernel.sigma_log() * ws.z[i]);
        ws.qa[i] = obj.claim().quantile(ws.p[i]);
        ws.qb[i] = obj.claim().quantile(ws.pc[i]);
    }
    return ws;
}

// A point inside the grid parameterized by z; dp = phi(z) dz.
struct ZPoint {
    double p, pc, rho, density;
};

ZPoint z_point(const LognormalKernel& kernel, double z) {
    return {normal::cdf(-z), normal::cdf(z), std::exp(kernel.mu_log() + kernel.sigma_log() * z), normal::pdf(z)};
}

// Composite Gauss-Legendre on [a, b] in panels no wider than 0.25.
template <class F>
double integrate_z(double a, double b, F&& f) {
    if (!(b > a)) return 0.0;
    const double width = b - a;
    const int panels = std::max(1, static_cast<int>(std::ceil(width / 0.25)));
    const GaussLegendre& rule = gauss_legendre(width < 0.05 ? 6 : 8);
    const double h = width / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h;
        const double mid = lo + 0.5 * h;
        double panel = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) panel += rule.weights[j] * f(mid + 0.5 * h * rule.nodes[j]);
        total += 0.5 * h * panel;
    }
    return total;
}

double median3(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

struct TailTerms {
    double gap = 0.0;     // H(p_N) - lambda eta(p_N)
    double budget = 0.0;  // int_{p_N}^1 Q rho dp
};

// Beyond the last node Q is held at max(Q_N, candidate), which keeps Q continuous
// and non-decreasing and coincides with the candidate wherever that is larger.
TailTerms tail_terms(const RobustObjective& obj, const LognormalKernel& kernel, const Pointwise& pw, double lambda,
                     double q_last, double z_last) {
    TailTerms t;
    t.gap = -integrate_z(z_last - kTailWidth, z_last, [&](double z) {
        const ZPoint pt = z_point(kernel, z);
        const double cand = obj.S_inverse(lambda * pt.rho, pt.p, pt.pc);
        if (cand >= q_last) return 0.0;
        const double qa = obj.claim().quantile(pt.p);
        const double qb = obj.claim().quantile(pt.pc);
        return (pw.vx(q_last, qa, qb, 1) - lambda * pt.rho) * pt.density;
    });
    t.budget = integrate_z(z_last - kTailWidth, z_last, [&](double z) {
        const ZPoint pt = z_point(kernel, z);
        const double q = std::max(q_last, obj.S_inverse(lambda * pt.rho, pt.p, pt.pc));
        return q * pt.rho * pt.density;
    });
    return t;
}

// Trapezoid tables of H and lambda * eta anchored at the last node.
void fill_tables(const Workspace& ws, const Pointwise& pw, double lambda, double step, double eta_last,
                 double gap_last, const std::vector<double>& Q, std::vector<double>& H, std::vector<double>& eta_scaled) {
    const std::size_t n = Q.size();
    H.assign(n, 0.0);
    eta_scaled.assign(n, 0.0);
    eta_scaled[n - 1] = lambda * eta_last;
    H[n - 1] = eta_scaled[n - 1] + gap_last;
    double f_next = pw.vx(Q[n - 1], ws.qa[n - 1], ws.qb[n - 1], 1);
    for (std::size_t k = n - 1; k-- > 0;) {
        const double f = pw.vx(Q[k], ws.qa[k], ws.qb[k], 1);
        H[k] = H[k + 1] - 0.5 * step * (f + f_next);
        eta_scaled[k] = eta_scaled[k + 1] - 0.5 * step * lambda * (ws.rho[k] + ws.rho[k + 1]);
        f_next = f;
    }
}

double budget_integral(const RobustObjective& obj, const LognormalKernel& kernel, const Workspace& ws,
                       double lambda, const std::vector<double>& Q, double tail_budget) {
    const std::size_t n = Q.size();
    double total = tail_budget;
    // Head (0, p_0]: Q between 0 and Q_0.
    if (Q.front() > 0.0) {
        total += integrate_z(ws.z.front(), ws.z.front() + kTailWidth, [&](double z) {
            const ZPoint pt = z_point(kernel, z);
            const double q = median3(0.0, obj.S_inverse(lambda * pt.rho, pt.p, pt.pc), Q.front());
            return q * pt.rho * pt.density;
        });
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double lo = Q[i];
        const double hi = Q[i + 1];
        if (hi == 0.0) continue;
        if (lo == hi) {
            total += lo * integrate_z(ws.z[i + 1], ws.z[i], [&](double z) {
                const ZPoint pt = z_point(kernel, z);
                return pt.rho * pt.density;
            });
            continue;
        }
        auto cand_at = [&](double z) {
            const ZPoint pt = z_point(kernel, z);
            return obj.S_inverse(lambda * pt.rho, pt.p, pt.pc);
        };
        auto integrand = [&](double z) {
            const ZPoint pt = z_point(kernel, z);
            const double q = median3(lo, obj.S_inverse(lambda * pt.rho, pt.p, pt.pc), hi);
            return q * pt.rho * pt.density;
        };
        // The median has a kink where the candidate crosses a node value; split there.
        // z decreases as p increases, so the cell runs from z[i] (p_i) down to z[i+1].
        std::vector<double> cuts{ws.z[i + 1], ws.z[i]};
        const double c_left = cand_at(ws.z[i]);
        const double c_right = cand_at(ws.z[i + 1]);
        auto crossing = [&](double level) {
            double a = ws.z[i + 1];  // candidate above level
            double b = ws.z[i];      // candidate below level
            for (int it = 0; it < 60; ++it) {
                const double m = 0.5 * (a + b);
                if (cand_at(m) > level) a = m;
                else b = m;
            }
            return 0.5 * (a + b);
        };
        // Nodes where Q equals the candidate differ from it only by rounding; no kink there.
        const double margin = 1e-12 * std::max(1.0, std::abs(hi));
        if (c_left < lo - margin && c_right > lo + margin) cuts.push_back(crossing(lo));
        if (c_left < hi - margin && c_right > hi + margin) cuts.push_back(crossing(hi));
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) total += integrate_z(cuts[k], cuts[k + 1], integrand);
    }
    return total;
}

// Maximizes sum_i w_i [V(Q_i, p_i) - lambda rho_i Q_i] over non-decreasing Q by pooling
// adjacent violators. A pooled block takes the value q solving
// sum_{i in B} w_i V_x(q, p_i) = lambda sum_{i in B} w_i rho_i, which is again a root
// of an exponential mixture whose coefficients add under pooling.
std::vector<double> pooled_sweep(const RobustObjective& obj, const Workspace& ws, const std::vector<double>& w,
                                 double lambda) {
    const auto& c = obj.utility().weights();
    const auto& g = obj.utility().rates();
    const std::size_t K = c.size();
    const double la = safe_log(1.0 - obj.alpha());
    const double lb = safe_log(obj.alpha());

    struct Block {
        std::size_t start, end;  // inclusive
        std::vector<double> log_a;
        double log_r;
        double value;
    };
    std::vector<double> lc(K);
    auto block_value = [&](const Block& b) {
        for (std::size_t k = 0; k < K; ++k) lc[k] = std::log(c[k] * g[k]) + b.log_a[k];
        return detail::exp_mixture_root(lc, g, b.log_r);
    };

    std::vector<Block> stack;
    stack.reserve(ws.p.size());
    for (std::size_t i = 0; i < ws.p.size(); ++i) {
        Block b{i, i, std::vector<double>(K), std::log(w[i] * lambda * ws.rho[i]), 0.0};
        for (std::size_t k = 0; k < K; ++k) {
            const double ta = la == kNegInf ? kNegInf : la - g[k] * ws.qa[i];
            const double tb = lb == kNegInf ? kNegInf : lb - g[k] * ws.qb[i];
            b.log_a[k] = std::log(w[i]) + detail::log_add_exp(ta, tb);
        }
        b.value = block_value(b);
        stack.push_back(std::move(b));
        while (stack.size() >= 2 && stack[stack.size() - 2].value > stack.back().value) {
            Block top = std::move(stack.back());
            stack.pop_back();
            Block& prev = stack.back();
            prev.end = top.end;
            for (std::size_t k = 0; k < K; ++k) prev.log_a[k] = detail::log_add_exp(prev.log_a[k], top.log_a[k]);
            prev.log_r = detail::log_add_exp(prev.log_r, top.log_r);
            prev.value = block_value(prev);
        }
    }

    std::vector<double> Q(ws.p.size());
    for (const Block& b : stack)
        for (std::size_t i = b.start; i <= b.end; ++i) Q[i] = std::max(0.0, b.value);
    return Q;
}

// Solves (-A) d = g for the symmetric tridiagonal A with diagonal `diag` and
// off-diagonal `off` (off[i] couples i and i+1). -A is diagonally dominant.
std::vector<double> tridiagonal_solve(std::vector<double> diag, const std::vector<double>& off, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    std::vector<double> upper(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double d = -diag[i];
        if (i > 0) {
            d -= -off[i - 1] * upper[i - 1];
            rhs[i] -= -off[i - 1] * rhs[i - 1];
        }
        if (i + 1 < n) upper[i] = -off[i] / d;
        rhs[i] /= d;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper[i] * rhs[i + 1];
    return rhs;
}

// Discrete sum of (H - lambda eta) dQ. In the cell where Q leaves zero, Q increases only
// on the part where it is positive, so the gap is taken at the right node.
double complementarity_sum(const std::vector<double>& H, const std::vector<double>& eta_scaled,
                           const std::vector<double>& Q) {
    double comp = 0.0;
    for (std::size_t i = 0; i + 1 < Q.size(); ++i) {
        const double left = H[i] - eta_scaled[i];
        const double right = H[i + 1] - eta_scaled[i + 1];
        const double gap = Q[i] == 0.0 ? right : 0.5 * (left + right);
        comp += gap * (Q[i + 1] - Q[i]);
    }
    return comp;
}

// Penalized Lagrangian
//   sum_i w_i [V(Q_i) - lambda rho_i Q_i] - kappa/2 sum_i (Q_i - Q_{i+1})_+^2 - kappa/2 sum_i (-Q_i)_+^2
// maximized by semismooth Newton with Armijo backtracking, warm-started from Q.
void penalized_newton(const Workspace& ws, const Pointwise& pw, const std::vector<double>& w, double lambda,
                      double kappa, std::vector<double>& Q) {
    const std::size_t n = Q.size();
    auto penalty = [&](const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i + 1 < n && q[i] > q[i + 1]) s += (q[i] - q[i + 1]) * (q[i] - q[i + 1]);
            if (q[i] < 0.0) s += q[i] * q[i];
        }
        return 0.5 * kappa * s;
    };
    std::vector<double> gs(n), hs(n), grad(n), diag(n), off(n > 0 ? n - 1 : 0), trial(n);
    std::vector<std::uint8_t> neg(n), pair(n > 0 ? n - 1 : 0);
    // Model step: maximize the second-order expansion of the smooth part plus the exact penalty.
    // The penalty pieces are found by primal-dual active-set iteration on the model.
    auto model_step = [&]() {
        for (std::size_t i = 0; i < n; ++i) neg[i] = Q[i] < 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) pair[i] = Q[i] > Q[i + 1];
        std::vector<double> d;
        for (std::size_t pass = 0; pass < n + 10; ++pass) {
            grad = gs;
            diag = hs;
            std::fill(off.begin(), off.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (!neg[i]) continue;
                grad[i] -= kappa * Q[i];
                diag[i] -= kappa;
            }
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (!pair[i]) continue;
                const double v = Q[i] - Q[i + 1];
                grad[i] -= kappa * v;
                grad[i + 1] += kappa * v;
                diag[i] -= kappa;
                diag[i + 1] -= kappa;
                off[i] = kappa;
            }
            d = tridiagonal_solve(diag, off, grad);
            bool same = true;
            for (std::size_t i = 0; i < n; ++i) {
                const std::uint8_t f = Q[i] + d[i] < 0.0;
                same = same && f == neg[i];
                neg[i] = f;
            }
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const std::uint8_t f = Q[i] + d[i] > Q[i + 1] + d[i + 1];
                same = same && f == pair[i];
                pair[i] = f;
            }
            if (same) break;
        }
        return d;
    };
    for (int iter = 0; iter < 200; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            gs[i] = w[i] * (pw.vx(Q[i], ws.qa[i], ws.qb[i], 1) - lambda * ws.rho[i]);
            hs[i] = w[i] * pw.vx(Q[i], ws.qa[i], ws.qb[i], 2);
        }
        const std::vector<double> d = model_step();
        // Slope of the true objective along d.
        grad = gs;
        for (std::size_t i = 0; i < n; ++i) {
            if (Q[i] < 0.0) grad[i] -= kappa * Q[i];
            if (i + 1 < n && Q[i] > Q[i + 1]) {
                grad[i] -= kappa * (Q[i] - Q[i + 1]);
                grad[i + 1] += kappa * (Q[i] - Q[i + 1]);
            }
        }
        double slope = 0.0;
        double dmax = 0.0;
        double qmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            slope += grad[i] * d[i];
            dmax = std::max(dmax, std::abs(d[i]));
            qmax = std::max(qmax, std::abs(Q[i]));
        }
        if (dmax <= 1e-13 * (1.0 + qmax) || !(slope > 0.0)) return;

        const double base_penalty = penalty(Q);
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            double gain = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double step = t * d[i];
                trial[i] = Q[i] + step;
                gain += w[i] * (pw.dv(Q[i], step, ws.qa[i], ws.qb[i]) - lambda * ws.rho[i] * step);
            }
            gain -= penalty(trial) - base_penalty;
            if (gain >= 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) return;
        Q.swap(trial);
    }
}

void enforce_shape(std::vector<double>& Q, const Workspace& ws, double pbar_value) {
    double running = 0.0;
    for (std::size_t i = 0; i < Q.size(); ++i) {
        if (ws.p[i] <= pbar_value) {
            Q[i] = 0.0;
            continue;
        }
        running = std::max(running, Q[i]);
        Q[i] = running;
    }
}

void finish_result(SolveResult& r, const RobustObjective& obj, const LognormalKernel& kernel, const Workspace& ws,
                   const Pointwise& pw) {
    const std::size_t n = r.Q.size();
    const TailTerms tail = tail_terms(obj, kernel, pw, r.lambda, r.Q.back(), ws.z.back());
    fill_tables(ws, pw, r.lambda, r.grid.step(), eta(kernel, ws.p.back()), tail.gap, r.Q, r.H, r.eta_scaled);
    r.budget = r.degenerate ? 0.0 : budget_integral(obj, kernel, ws, r.lambda, r.Q, tail.budget);
    r.active.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double q = r.Q[i];
        r.active[i] = (q > 0.0 && std::abs(q - r.candidate[i]) <= 1e-9 * std::max(1.0, std::abs(q))) ? 1 : 0;
    }
    r.residuals = residuals(r, obj, kernel, r.lambda);
}

}  // namespace

std::string to_string(SolveMode mode) { return mode == SolveMode::ActiveSet ? "active-set" : "penalized"; }

SolveMode parse_solve_mode(const std::string& text) {
    if (text == "active-set") return SolveMode::ActiveSet;
    if (text == "penalized") return SolveMode::Penalized;
    throw ConfigError("unknown solver mode '" + text + "' (expected active-set or penalized)");
}

SolverGrid::SolverGrid(int intervals, double eps_p) : intervals_(intervals), eps_(eps_p) {
    if (intervals < 2) throw DomainError("SolverGrid: at least two intervals required");
    if (!(eps_p > 0.0 && eps_p < 0.5)) throw DomainError("SolverGrid: eps_p must lie in (0, 0.5)");
    step_ = (1.0 - 2.0 * eps_p) / intervals;
    p_.resize(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) p_[i] = eps_p + i * step_;
    // Make the reflection exact: p_{N-i} = 1 - p_i wherever 1 - p_i is representable.
    for (int i = 0; i <= intervals / 2; ++i) p_[intervals - i] = 1.0 - p_[i];
}

double pbar(const RobustObjective& obj, const LognormalKernel& kernel, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("pbar: lambda must be positive and finite");
    const double threshold = obj.marginal_bound() / lambda;
    const double hi = std::nextafter(1.0, 0.0);
    if (!std::isfinite(threshold)) return DBL_MIN;
    return std::clamp(kernel.survival(threshold), DBL_MIN, hi);
}

double eta(const LognormalKernel& kernel, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("eta: p outside [0,1]");
    if (p == 1.0) return 0.0;
    if (p >= 0.5) return -kernel.partial_mean(1.0 - p);
    return -(kernel.mean() - kernel.upper_partial_mean(p));
}

SolveResult solve_on_grid(const RobustObjective& obj, const LognormalKernel& kernel, double lambda,
                          const SolverSettings& settings) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("solve: lambda must be positive and finite");
    SolveResult r;
    r.grid = SolverGrid(settings.intervals, settings.eps_p);
    r.lambda = lambda;
    r.mode = settings.mode;
    r.settings = settings;
    r.pbar = pbar(obj, kernel, lambda);
    r.degenerate = r.pbar >= 1.0 - settings.eps_p;

    const Workspace ws = make_workspace(obj, kernel, r.grid);
    const Pointwise pw(obj);
    const std::size_t n = r.grid.size();
    r.candidate.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.candidate[i] = obj.S_inverse(lambda * ws.rho[i], ws.p[i], ws.pc[i]);

    const std::vector<double> w = trapezoid_weights(n, r.grid.step());
    if (r.degenerate) {
        r.Q.assign(n, 0.0);
    } else if (settings.mode == SolveMode::ActiveSet) {
        r.Q = pooled_sweep(obj, ws, w, lambda);
        enforce_shape(r.Q, ws, r.pbar);
    } else {
        std::vector<double> raw(n);
        for (std::size_t i = 0; i < n; ++i) raw[i] = std::max(0.0, r.candidate[i]);
        double kappa = 1e3;
        std::vector<double> previous;
        for (int round = 0; round < 48; ++round, kappa *= 2.0) {
            penalized_newton(ws, pw, w, lambda, kappa, raw);
            previous.swap(r.Q);
            r.Q = raw;
            enforce_shape(r.Q, ws, r.pbar);
            const TailTerms tail = tail_terms(obj, kernel, pw, lambda, r.Q.back(), ws.z.back());
            fill_tables(ws, pw, lambda, r.grid.step(), eta(kernel, ws.p.back()), tail.gap, r.Q, r.H, r.eta_scaled);
            double obstacle = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) obstacle = std::min(obstacle, r.H[i] - r.eta_scaled[i]);
            const double comp = complementarity_sum(r.H, r.eta_scaled, r.Q);
            // The soft pooling error falls like 1/kappa, so the change between rounds tracks it.
            double change = std::numeric_limits<double>::infinity();
            if (previous.size() == n) {
                change = 0.0;
                for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(r.Q[i] - previous[i]));
            }
            if (obstacle >= -settings.tolerance && std::abs(comp) <= settings.tolerance && change <= settings.tolerance)
                break;
        }
    }
    finish_result(r, obj, kernel, ws, pw);
    return r;
}

SolveResult solve(const RobustObjective& obj, const LognormalKernel& kernel, double lambda,
                  const SolverSettings& settings) {
    SolveResult r = solve_on_grid(obj, kernel, lambda, settings);
    if (r.residuals.ok()) return r;
    if (settings.refine) {
        SolverSettings finer = settings;
        finer.intervals = settings.intervals * 4;
        r = solve_on_grid(obj, kernel, lambda, finer);
        if (r.residuals.ok()) return r;
    }
    std::ostringstream msg;
    msg.precision(3);
    msg << "solver did not converge at lambda=" << lambda << ": obstacle=" << r.residuals.obstacle_min
        << " complementarity=" << r.residuals.complementarity << " ode=" << r.residuals.ode_max
        << " zero_region=" << (r.residuals.zero_region_ok ? "ok" : "violated")
        << " monotone=" << (r.residuals.monotone_ok ? "ok" : "violated");
    throw NonConvergence(msg.str(), std::move(r));
}

ResidualReport residuals(const SolveResult& result, const RobustObjective& obj, const LognormalKernel& kernel,
                         double lambda) {
    ResidualReport rep;
    rep.tolerance = result.settings.tolerance;
    rep.ode_tolerance = result.settings.ode_tolerance;
    const std::size_t n = result.grid.size();
    if (result.Q.size() != n || result.H.size() != n)
        throw InvariantViolation("residuals: result arrays do not match the grid");
    const Workspace ws = make_workspace(obj, kernel, result.grid);
    const Pointwise pw(obj);
    const double step = result.grid.step();
    const auto& Q = result.Q;

    for (std::size_t i = 0; i < n; ++i) {
        if (!(Q[i] >= 0.0) || (i > 0 && Q[i] < Q[i - 1])) rep.monotone_ok = false;
        if (ws.p[i] <= result.pbar && Q[i] != 0.0) rep.zero_region_ok = false;
    }

    // H implied by Q, anchored through the tail gap.
    std::vector<double> H, eta_scaled;
    const TailTerms tail = tail_terms(obj, kernel, pw, lambda, Q.back(), ws.z.back());
    fill_tables(ws, pw, lambda, step, eta(kernel, ws.p.back()), tail.gap, Q, H, eta_scaled);

    rep.obstacle_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) rep.obstacle_min = std::min(rep.obstacle_min, H[i] - eta_scaled[i]);
    rep.complementarity = complementarity_sum(H, eta_scaled, Q);

    double ode = 0.0;
    double f_prev = pw.vx(Q[0], ws.qa[0], ws.qb[0], 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double f_next = pw.vx(Q[i + 1], ws.qa[i + 1], ws.qb[i + 1], 1);
        const double slope = (result.H[i + 1] - result.H[i]) / step;
        ode = std::max(ode, std::abs(slope - 0.5 * (f_prev + f_next)));
        f_prev = f_next;
    }
    if (!std::isfinite(ode)) ode = std::numeric_limits<double>::infinity();
    rep.ode_max = ode;

    if (obj.claim().differentiable()) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (!(Q[i - 1] == Q[i] && Q[i] == Q[i + 1])) continue;
            const double d1 = (H[i + 1] - H[i - 1]) / (2.0 * step);
            const double d2 = (H[i + 1] - 2.0 * H[i] + H[i - 1]) / (step * step);
            if (!(d1 > 0.0)) continue;
            const double r = std::abs(-d2 + obj.L_operator(d1, ws.p[i]));
            rep.second_order_max = std::max(rep.second_order_max, r);
            ++rep.second_order_points;
        }
    }
    return rep;
}

double reconstruct_quantile(const SolveResult& result, const RobustObjective& obj, const LognormalKernel& kernel,
                            double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("reconstruct_quantile: p outside [0,1]");
    const auto& grid = result.grid;
    const auto& Q = result.Q;
    if (result.degenerate || p <= result.pbar) return 0.0;
    if (p >= 1.0) return Q.back();
    const double z = p <= 0.5 ? -normal::quantile(p) : normal::quantile(1.0 - p);
    const double cand = obj.S_inverse(result.lambda * std::exp(kernel.mu_log() + kernel.sigma_log() * z), p, 1.0 - p);
    if (p <= grid.p(0)) return median3(0.0, cand, Q.front());
    if (p >= grid.p(grid.size() - 1)) return std::max(Q.back(), cand);
    std::size_t i = static_cast<std::size_t>((p - grid.eps()) / grid.step());
    i = std::min(i, grid.size() - 2);
    while (i > 0 && grid.p(i) > p) --i;
    while (i + 2 < grid.size() && grid.p(i + 1) <= p) ++i;
    return median3(Q[i], cand, Q[i + 1]);
}

}  // namespace robustq
