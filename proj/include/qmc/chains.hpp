#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmc/ising.hpp"
#include "qmc/quantum.hpp"
#include "qmc/rng.hpp"

namespace qmc {

enum class AcceptanceRule { MetropolisHastings, Gibbs };

// min(1, e^{-dE/T} * q_ratio), overflow-safe
double mh_acceptance(double delta_E, double T, double q_ratio = 1.0);
// [1 + (e^{-dE/T} * q_ratio)^{-1}]^{-1}
double gibbs_acceptance(double delta_E, double T, double q_ratio = 1.0);
double acceptance(AcceptanceRule rule, double delta_E, double T, double q_ratio = 1.0);

enum class ProposalKind { Local, Uniform };

// local: 1/n on Hamming-1 pairs; uniform: 2^{-n} everywhere
Eigen::MatrixXd classical_proposal_matrix(ProposalKind kind, int n);

struct TransitionMatrix {
    Eigen::MatrixXd P;
    double max_asymmetry = 0.0;  // of the proposal Q before symmetrization
};

// off-diagonal P = A o Q (q_ratio = 1); diagonal soaks up the rejected mass.
// Q is symmetrized first when its asymmetry exceeds 1e-6 (noise from estimated
// proposals); the measured asymmetry is reported either way.
TransitionMatrix build_transition_matrix(const Eigen::MatrixXd& Q,
                                         const IsingInstance& inst, double T,
                                         AcceptanceRule rule);

TransitionMatrix lazy(const TransitionMatrix& P);

// ---- samplers -----------------------------------------------------------

struct ProposalSample {
    std::uint32_t code = 0;
    double q_ratio = 1.0;
};

using ProposalSampler = std::function<ProposalSample(std::uint32_t, Rng&)>;

ProposalSampler local_proposal_sampler(int n);
ProposalSampler uniform_proposal_sampler(int n);
// draw from a column of an explicit proposal matrix; q_ratio from the matrix
// unless force_symmetric is set
ProposalSampler matrix_proposal_sampler(std::shared_ptr<const Eigen::MatrixXd> Q,
                                        bool force_symmetric = true);

enum class TimeMode { Continuous, Grid };

struct QuantumProposalOptions {
    int gamma_subintervals = 20;
    double gamma_min = 0.25, gamma_max = 0.6;
    TimeMode time_mode = TimeMode::Continuous;
    double t_min = 2.0, t_max = 20.0;        // continuous mode
    std::vector<double> t_grid;              // grid mode; defaults to r*0.8, r=2..25
};

// draw (gamma, t) per call, evolve exactly, measure.  q_ratio is fixed at 1:
// the proposal density is symmetric by construction.
ProposalSampler quantum_proposal_sampler(const IsingInstance& inst,
                                         const QuantumProposalOptions& opts = {});

// ---- chain execution ----------------------------------------------------

struct Trajectory {
    std::vector<std::uint32_t> codes;  // length iterations + 1
    std::vector<char> accepted;        // length iterations
};

struct ChainOptions {
    double epsilon_uniform = 0.0;  // per-iteration uniform-proposal safeguard
};

Trajectory run_chain(const ProposalSampler& sampler, const IsingInstance& inst,
                     double T, int iterations, AcceptanceRule rule, Rng& rng,
                     const ChainOptions& opts = {});

// prefix means of observable over the trajectory, every step included
std::vector<double> running_average(const Trajectory& traj,
                                    const std::function<double(std::uint32_t)>& observable);

struct MixingTimeBounds {
    double lower = 0.0, upper = 0.0;
    bool infinite = false;  // delta == 0
};

// lower = (1/delta - 1) ln(1/2eps); upper = (1/delta) ln(1/(eps mu_min))
MixingTimeBounds mixing_time_bounds(double delta, double mu_min, double epsilon);

// CSV with columns iteration, config_code, energy, magnetization, accepted
void save_trajectory(const std::string& path, const Trajectory& traj,
                     const IsingInstance& inst);

} // namespace qmc
