#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "qmc/ising.hpp"
#include "qmc/rng.hpp"

namespace qmc {

enum class ClusterKind { SwendsenWang, Wolff };
enum class FieldMode { Ghost, AcceptReject };

// One MCMC step of the selected cluster algorithm.  Bonds with J s_j s_k > 0
// (satisfied) are activated with probability 1 - e^{-2|J|/T}; clusters are
// connected components of activated bonds.  Ghost mode folds fields into
// couplings to a pinned extra site whose cluster is never flipped;
// accept/reject mode forms clusters from couplings only and Metropolis-tests
// each flip against the field-energy change.
std::uint32_t cluster_move(ClusterKind kind, FieldMode field_mode,
                           const IsingInstance& inst, double T,
                           std::uint32_t config, Rng& rng);

struct ReplicaPair {
    std::uint32_t a = 0, b = 0;
};

// flip the connected q = -1 overlap component containing a uniformly chosen
// site, in both replicas; identity when the chosen site has q = +1
ReplicaPair houdayer_move(const IsingInstance& inst, ReplicaPair pair, Rng& rng);

// Exact transition kernel of the mixed two-replica chain: with weight
// n/(n+1) one local M-H flip attempt on each replica, with weight 1/(n+1)
// the site-averaged Houdayer flip.  State index is (a << n) | b.
class HoudayerKernel {
public:
    HoudayerKernel(const IsingInstance& inst, double T);
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::VectorXd stationary() const;  // mu (x) mu
    int pair_dim() const { return dim_ * dim_; }

private:
    const IsingInstance inst_;
    int n_;
    int dim_;
    Eigen::MatrixXd local_;       // single-replica local M-H kernel
    Eigen::VectorXd mu_;
};

Eigen::VectorXd houdayer_kernel_action(const IsingInstance& inst, double T,
                                       const Eigen::VectorXd& x);

struct EstimatedTransitionMatrix {
    Eigen::MatrixXd counts;          // counts(s', s)
    Eigen::MatrixXd phat;            // per-column normalized; zero columns left zero
    Eigen::VectorXd column_samples;  // totals per initial state
};

using MoveFn = std::function<std::uint32_t(const IsingInstance&, double,
                                           std::uint32_t, Rng&)>;

// uniform random initial states, one move each: i.i.d. transition samples
EstimatedTransitionMatrix estimate_transition_matrix(const MoveFn& move,
                                                     const IsingInstance& inst,
                                                     double T, long samples,
                                                     Rng& rng);

} // namespace qmc
