#pragma once

#include <functional>

#include <Eigen/Dense>

#include "qmc/rng.hpp"

namespace qmc {

enum class GapMethod { DenseSymmetric, PowerDeflated };

struct GapResult {
    double delta = 0.0;
    double lambda2_abs = 0.0;
    GapMethod method = GapMethod::DenseSymmetric;
    double asymmetry = 0.0;  // symmetry residual of L = D^{-1/2} P D^{1/2}
};

// max over (j,k) of |P_jk p_k - P_kj p_j|
double detailed_balance_check(const Eigen::MatrixXd& P, const Eigen::VectorXd& p);

// Similarity-transform to the symmetric L, full symmetric eigensolve,
// delta = 1 - second largest |lambda|.  Chains violating detailed balance
// beyond db_tolerance are rejected.
GapResult absolute_spectral_gap(const Eigen::MatrixXd& P, const Eigen::VectorXd& p,
                                double db_tolerance = 1e-6);

// Gap of a sampled transition-matrix estimate: skips the stationarity and
// detailed-balance gates (sampling noise violates both), symmetrizes
// L = D^{-1/2} P D^{1/2} and solves.  The residual asymmetry is reported.
GapResult estimated_spectral_gap(const Eigen::MatrixXd& P_hat,
                                 const Eigen::VectorXd& p);

// Gap of an exactly reversible chain without a reference distribution:
// the similarity-transformed operator has entries sqrt(P_jk P_kj), so the
// stationary weights never appear.  Safe at temperatures where Boltzmann
// weights underflow; only valid when detailed balance holds by construction.
GapResult reversible_spectral_gap(const Eigen::MatrixXd& P);

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// x -> Px - p * sum(x): same spectrum as P with the eigenvalue 1 zeroed out
LinearOperator deflated_action(const LinearOperator& P_action, const Eigen::VectorXd& p);

// x -> Lx - v (v.x) with L = D^{-1/2} P D^{1/2} and v = sqrt(p): symmetric
// operator whose dominant |eigenvalue| is |lambda_2| of P
LinearOperator symmetrized_deflated_action(const LinearOperator& P_action,
                                           const Eigen::VectorXd& p);

struct PowerIterationResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// power iteration with Rayleigh-quotient convergence checks; the operator
// must be symmetric so |Rayleigh quotient| -> |lambda_max|
PowerIterationResult dominant_abs_eigenvalue(const LinearOperator& op, int dim,
                                             double tolerance, int max_iters,
                                             Rng& rng);

// gap via the matrix-free route (symmetrize, deflate, power-iterate)
GapResult absolute_spectral_gap_power(const LinearOperator& P_action,
                                      const Eigen::VectorXd& p,
                                      double tolerance = 1e-8,
                                      int max_iters = 100000,
                                      Rng* rng = nullptr);

} // namespace qmc
