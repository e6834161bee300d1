#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qmc/ising.hpp"
#include "qmc/rng.hpp"

namespace qmc {

// H = (1-gamma) * alpha * H_prob + gamma * H_mix, real symmetric, dimension 2^n.
// H_prob is diagonal with entries E(s); H_mix = sum_j X_j connects Hamming-1 pairs.
struct QuantumHamiltonian {
    double gamma = 0.0;
    double alpha = 0.0;
    Eigen::MatrixXd mat;
};

struct EigenBasis {
    Eigen::VectorXd evals;  // ascending
    Eigen::MatrixXd evecs;  // columns orthonormal
};

QuantumHamiltonian build_hamiltonian(const IsingInstance& inst, double gamma);
EigenBasis eigendecompose(const Eigen::MatrixXd& symmetric);

// |<s'|e^{-iHt}|s>|^2 for all s'
Eigen::VectorXd evolve_exact(const EigenBasis& basis, double t, std::uint32_t config);

// Proposal distribution of the measure-after-random-evolution channel:
// mean over gamma midpoints of the closed-form t-average of |<s'|e^{-iHt}|s>|^2.
Eigen::MatrixXd channel_q_matrix(const IsingInstance& inst,
                                 int gamma_subintervals = 20,
                                 double t_min = 2.0, double t_max = 20.0,
                                 double gamma_min = 0.25, double gamma_max = 0.6);

// plain average of |<s'|e^{-iHt}|s>|^2 over a discrete (gamma, t) grid
Eigen::MatrixXd exact_q_on_grid(const IsingInstance& inst,
                                const std::vector<double>& gammas,
                                const std::vector<double>& ts);

// midpoints of m equal subintervals of [lo, hi]
std::vector<double> midpoint_grid(double lo, double hi, int m);

// ---- Trotterized circuits ----------------------------------------------

// Second-order step for H = H1 + H2 with H1 the single-qubit part and H2 the
// coupling part: V~ = A (B A)^{r-1}, A = exp(-i H1 dt) (per-qubit rotations
// exp[-i(a_j X + b_j Z)]), B = exp(-i H2 dt) (diagonal Rzz phases).
struct TrotterCircuit {
    int n = 0;
    int r = 0;
    double dt = 0.0;
    double gamma = 0.0;
    std::vector<double> a;       // a_j = gamma * dt
    std::vector<double> b;       // b_j = -(1-gamma) * alpha * h_j * dt
    std::vector<Coupling> theta; // theta_jk = -2 J_jk (1-gamma) alpha dt
};

TrotterCircuit build_trotter_circuit(const IsingInstance& inst, double gamma,
                                     double dt, int r);

// |<s'|V~|s>|^2 columns for a single circuit
Eigen::MatrixXd trotter_circuit_probs(const TrotterCircuit& circ);

// Q averaged uniformly over gammas x ts; each t must be an integer multiple
// r*delta_t with r >= 2
Eigen::MatrixXd trotter_q_matrix(const IsingInstance& inst,
                                 const std::vector<double>& gammas,
                                 const std::vector<double>& ts,
                                 double delta_t);

std::vector<double> default_trotter_gammas();  // 10 midpoints of [0.25, 0.6]
std::vector<double> default_trotter_ts();      // r*0.8 for r = 2..25

// ---- gate-level representation (Rzx decomposition, folding, twirling) ---

Eigen::Matrix2cd pauli_1q(int p);             // 0..3 -> I, X, Y, Z
Eigen::Matrix4cd rzx_gate(double theta);      // exp(-i theta/2 Z(x)X)
Eigen::Matrix4cd rzz_gate(double theta);      // exp(-i theta/2 Z(x)Z)
Eigen::Matrix2cd xz_rotation(double a, double b);  // exp[-i(a X + b Z)]

struct FoldedRzx {
    double residual = 0.0;             // in [-pi/2, pi/2]
    bool zx_correction = false;        // multiply by Z(x)X
    std::complex<double> phase = 1.0;  // global phase
};

// Rzx(theta) = phase * (Z(x)X)^{zx} * Rzx(residual)
FoldedRzx fold_rzx_angle(double theta);

struct TwirledRzx {
    int p1 = 0, p2 = 0;  // Pauli indices
    double theta_eff = 0.0;
};

// (P1(x)P2) Rzx(theta_eff) (P1(x)P2) == Rzx(theta) up to global phase
TwirledRzx gate_twirl(double theta, int p1, int p2);
Eigen::Matrix4cd twirled_rzx_unitary(const TwirledRzx& tw);

// Ordered gate list acting on a 2^n statevector; entries are either 2x2
// single-qubit blocks or dense 4x4 two-qubit blocks.
struct GateOp {
    int q1 = 0;              // 1-indexed site
    int q2 = -1;             // second site, or -1 for single-qubit
    Eigen::Matrix4cd m4;     // valid when q2 > 0
    Eigen::Matrix2cd m2;     // valid when q2 < 0
};

struct GateCircuit {
    int n = 0;
    std::vector<GateOp> ops;
};

struct GateLevelOptions {
    bool use_rzx = true;       // Rzz -> (I(x)H) Rzx (I(x)H)
    bool fold_angles = false;
    Rng* twirl_rng = nullptr;  // draw random Pauli sandwiches when set
};

GateCircuit gate_level_circuit(const TrotterCircuit& circ, const GateLevelOptions& opts);
void apply_gate_circuit(const GateCircuit& circ, std::vector<std::complex<double>>& psi);
Eigen::MatrixXd gate_circuit_probs(const GateCircuit& circ);

// ---- SPAM twirling ------------------------------------------------------

struct SpamKey {
    std::vector<int> c;  // entries in {-1, +1}
};

SpamKey random_spam_key(int n, Rng& rng);
// J_jk -> J_jk c_j c_k, h_j -> h_j c_j
IsingInstance spam_twirl_instance(const IsingInstance& inst, const SpamKey& key);
// XOR with the key's flip mask; involution, used for both state prep and readout
std::uint32_t spam_apply_key(std::uint32_t code, const SpamKey& key);

// ---- synthetic readout noise -------------------------------------------

std::uint32_t apply_readout_noise(std::uint32_t code, int n, double p01,
                                  double p10, Rng& rng);
// 2^n x 2^n column-stochastic matrix of the same flip channel
Eigen::MatrixXd readout_noise_matrix(int n, double p01, double p10);

// ---- validation oracles -------------------------------------------------

// leading-order transition probability gamma^2 t^2 sinc^2(t alpha dE / 2)
double perturbative_transition(const IsingInstance& inst, double gamma, double t,
                               std::uint32_t j, std::uint32_t k);

// infinite-time average sum_l |<k|l><l|j>|^2
double longtime_transition(const EigenBasis& basis, std::uint32_t j, std::uint32_t k);

struct AnnealResult {
    Eigen::MatrixXcd U;
    bool palindromic = true;
};

// product of midpoint-sampled steps exp(-i H(f(t_k)) tau/steps); palindromic
// schedules give U^T = U exactly
AnnealResult reverse_anneal_propagator(const IsingInstance& inst,
                                       const std::function<double(double)>& schedule,
                                       double tau, int steps);

} // namespace qmc
