#ifndef CSWM_RECON_HPP
#define CSWM_RECON_HPP

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cswm/sensing.hpp"
#include "cswm/wavelet.hpp"

namespace cswm {

// Basis-pursuit denoising instance: minimize 0.5*||A*x - y||^2 + lambda*||Psi*x||_1,
// optionally restricted to a per-pixel box. The operator is borrowed, not owned.
struct ReconProblem {
    const SensingOperator* op = nullptr;
    std::vector<double> measurements;
    int width = 0;
    int height = 0;
    SparsityBasis basis = SparsityBasis::Db4Wavelet;
    double lambda = 0.0;
    int max_iters = 500;
    double tolerance = 1e-6;
    std::optional<std::pair<double, double>> box;
    bool keep_trace = false;
};

struct ReconResult {
    std::vector<double> image;
    // Objective value of every accepted iterate, starting with the initial
    // point. Filled only when keep_trace is set.
    std::vector<double> objective;
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
    double final_objective = 0.0;
    double lipschitz = 0.0;
};

double soft_threshold(double value, double threshold);

// Largest eigenvalue of A^T*A by power iteration, padded by 5 percent so the
// proximal-gradient step starts with a valid majorizer. Falls back to 1.0 when
// the iteration collapses to zero.
double lipschitz_estimate(const SensingOperator& op, int sweeps = 20);

// Conventional default weight: 1 percent of the largest back-projected
// measurement magnitude.
double default_lambda(const SensingOperator& op, std::span<const double> measurements);

// Monotone FISTA with backtracking line search. The accepted objective never
// increases; `diverged` is set instead of throwing when the iteration produces
// non-finite values.
ReconResult solve(const ReconProblem& problem);

} // namespace cswm

#endif
