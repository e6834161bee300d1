#pragma once

#include <vector>

#include "qmc/cache_io.hpp"
#include "qmc/ising.hpp"
#include "qmc/quantum.hpp"
#include "qmc/rng.hpp"

namespace qmc {

// Synthetic replica of the grid experiment: every (gamma, t, twirl draw)
// triple is one circuit; each shot prepares a uniformly random initial
// state, runs the circuit, and measures.
struct SampleQOptions {
    std::vector<double> gammas;  // default: 10 midpoints of [0.25, 0.6]
    std::vector<double> ts;      // default: r * 0.8, r = 2..25
    double dt = 0.8;
    int n_twirl = 1;             // circuits per (gamma, t)
    long total_shots = 1000000;  // split evenly across circuits
    bool spam_twirl = false;     // random key per circuit + XOR post-processing
    bool gate_twirl = false;     // random Pauli sandwiches (gate-level path)
    bool fold_angles = false;
    double p01 = 0.0, p10 = 0.0; // readout flip probabilities
};

TransitionCounts sample_q_experiment(const IsingInstance& inst,
                                     const SampleQOptions& opts, Rng& rng);

// observed per-circuit transition matrix for one circuit of the experiment
// (twirl conjugation and readout noise already folded in); used by tests to
// compare pipelines without sampling noise
Eigen::MatrixXd observed_circuit_matrix(const IsingInstance& inst, double gamma,
                                        int r, double dt, const SampleQOptions& opts,
                                        Rng& rng);

} // namespace qmc
