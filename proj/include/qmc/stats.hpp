#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmc/cache_io.hpp"
#include "qmc/chains.hpp"
#include "qmc/ising.hpp"
#include "qmc/rng.hpp"

namespace qmc {

enum class BowkerVariant { Traditional, Modified };

struct BowkerReport {
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int n_empty_pairs = 0;
    BowkerVariant variant = BowkerVariant::Traditional;
};

// chi-squared symmetry test on a square count matrix:
// chi2 = sum_{j>k} (m_jk - m_kj)^2 / (m_jk + m_kj), empty pairs contribute 0;
// traditional dof = C(d,2), modified dof = C(d,2) - n_empty_pairs
BowkerReport bowker(const Eigen::MatrixXd& count_matrix, BowkerVariant variant);

std::string bowker_report_json(const BowkerReport& rep);

// survival function of the chi-squared distribution: regularized upper
// incomplete gamma Q(dof/2, x/2)
double chi2_sf(double x, double dof);

struct BootstrapResult {
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

using Statistic = std::function<double(const std::vector<double>&)>;

// basic (reverse percentile) bootstrap:
// CI = [2 theta - q_{(1+level)/2}, 2 theta - q_{(1-level)/2}]
BootstrapResult bootstrap_basic(const std::vector<double>& data,
                                const Statistic& statistic, Rng& rng,
                                int n_resamples = 200, double level = 0.99);

// (1 / 2^{n+1}) sum |Qa - Qb|: mean TV distance across columns
double tv_error(const Eigen::MatrixXd& q_a, const Eigen::MatrixXd& q_b);

struct FitResult {
    double k = 0.0;         // decay exponent, base-2 per spin
    double k_sigma = 0.0;
    double prefactor = 0.0;
    double weighted_rss = 0.0;
    int iterations = 0;
};

// weighted least squares for mean = a * 2^{-k n}; weights 1/sem^2;
// Gauss-Newton seeded by a log2-space linear fit
FitResult fit_exponential(const std::vector<double>& ns,
                          const std::vector<double>& means,
                          const std::vector<double>& sems);

// Repeatedly draw (circuit, initial state) uniformly and pull one recorded
// final state without replacement; stop at the first empty list.  The
// returned matrix counts final j (row) vs initial k (column).
Eigen::MatrixXd iid_subsample(TransitionCache& cache, Rng& rng);
Eigen::MatrixXd iid_subsample(const TransitionCounts& counts, Rng& rng);

// Replay the propose/accept-reject chain offline against the recorded
// transitions (proposals drawn without replacement); terminates on the first
// empty list.  Successive calls on one cache keep depleting it.
Trajectory markov_chain_subsample(TransitionCache& cache, const IsingInstance& inst,
                                  double T, AcceptanceRule rule, Rng& rng);
Trajectory markov_chain_subsample(const TransitionCounts& counts,
                                  const IsingInstance& inst, double T,
                                  AcceptanceRule rule, Rng& rng);

} // namespace qmc
