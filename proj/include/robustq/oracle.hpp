#pragma once

#include <stdexcept>
#include <vector>

#include "robustq/distributions.hpp"
#include "robustq/robust_objective.hpp"

namespace robustq::oracle {

inline constexpr std::size_t kMaxAtoms = 8;

struct RearrangementResult {
    double min = 0.0;         // min over all pairings of E[XY]
    double max = 0.0;
    double sorted_max = 0.0;  // comonotone pairing
    double anti_min = 0.0;    // anti-comonotone pairing
    std::size_t pairings = 0;
};

// Enumerates all n! pairings of two n-atom uniform laws (n <= 8).
RearrangementResult rearrangement_extremes(const std::vector<double>& x_atoms, const std::vector<double>& y_atoms);

struct CouplingResult {
    double worst = 0.0;  // inf over couplings of E[u(X + Y)]
    double best = 0.0;   // sup
    double J = 0.0;      // (1 - alpha) worst + alpha best
    double comonotone = 0.0;       // E[u(X + Y)] under the sorted pairing
    double anti_comonotone = 0.0;  // under the reversed pairing
    std::size_t couplings = 0;
};

// Claim must be a discrete law whose atoms have probabilities in multiples of 1/n,
// n = wealth_atoms.size() <= 8.
CouplingResult coupling_J_alpha(const RobustObjective& obj, const std::vector<double>& wealth_atoms);

// Weighted least-squares projection onto non-decreasing sequences.
std::vector<double> pava_project(const std::vector<double>& values, const std::vector<double>& weights = {});

struct DirectProblem {
    const RobustObjective* objective;
    const LognormalKernel* kernel;
    double x;
    std::size_t M = 500;
};

struct DirectSolution {
    std::vector<double> p;  // midpoints (i + 1/2) / M
    std::vector<double> Q;
    double objective = 0.0;  // sum_i V(Q_i, p_i) / M
    double lambda = 0.0;
    double budget = 0.0;
    std::size_t iterations = 0;

    GridQuantile quantile() const { return GridQuantile(p, Q); }
};

class OracleNonConvergence : public std::runtime_error {
public:
    OracleNonConvergence(const std::string& what, DirectSolution last)
        : std::runtime_error(what), last_(std::move(last)) {}
    const DirectSolution& last() const { return last_; }

private:
    DirectSolution last_;
};

// Maximizes sum V(Q_i, p_i)/M over non-negative non-decreasing step quantiles with
// sum_i Q_i Q_rho(1-p_i) / M = x, by projected ascent for a fixed multiplier and bisection
// on the multiplier.
DirectSolution direct_solve(const DirectProblem& prob);

}  // namespace robustq::oracle
