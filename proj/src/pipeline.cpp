#include "qmc/pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace qmc {

namespace {

// physical circuit probabilities with bit-flip noise on both the prepared
// input and the measured output (SPAM errors), then the key's XOR
// conjugation mapped back to logical indices
Eigen::MatrixXd logical_matrix(const Eigen::MatrixXd& circuit_probs,
                               std::uint32_t mask, double p01, double p10, int n) {
    Eigen::MatrixXd phys = circuit_probs;
    if (p01 > 0.0 || p10 > 0.0) {
        const Eigen::MatrixXd noise = readout_noise_matrix(n, p01, p10);
        phys = noise * phys * noise;
    }
    if (mask == 0) return phys;
    const std::uint32_t dim = std::uint32_t{1} << n;
    Eigen::MatrixXd logical(dim, dim);
    for (std::uint32_t k = 0; k < dim; ++k)
        for (std::uint32_t j = 0; j < dim; ++j)
            logical(j, k) = phys(j ^ mask, k ^ mask);
    return logical;
}

} // namespace

Eigen::MatrixXd observed_circuit_matrix(const IsingInstance& inst, double gamma,
                                        int r, double dt, const SampleQOptions& opts,
                                        Rng& rng) {
    const int n = inst.n();
    std::uint32_t mask = 0;
    const IsingInstance* run = &inst;
    IsingInstance twirled = inst;
    if (opts.spam_twirl) {
        const SpamKey key = random_spam_key(n, rng);
        twirled = spam_twirl_instance(inst, key);
        mask = spam_apply_key(0, key);
        run = &twirled;
    }
    const TrotterCircuit circ = build_trotter_circuit(*run, gamma, dt, r);
    Eigen::MatrixXd probs;
    if (opts.gate_twirl || opts.fold_angles) {
        GateLevelOptions gl;
        gl.fold_angles = opts.fold_angles;
        gl.twirl_rng = opts.gate_twirl ? &rng : nullptr;
        probs = gate_circuit_probs(gate_level_circuit(circ, gl));
    } else {
        probs = trotter_circuit_probs(circ);
    }
    return logical_matrix(probs, mask, opts.p01, opts.p10, n);
}

TransitionCounts sample_q_experiment(const IsingInstance& inst,
                                     const SampleQOptions& opts, Rng& rng) {
    const int n = inst.n();
    const std::uint32_t dim = std::uint32_t{1} << n;
    const std::vector<double> gammas =
        opts.gammas.empty() ? default_trotter_gammas() : opts.gammas;
    const std::vector<double> ts = opts.ts.empty() ? default_trotter_ts() : opts.ts;
    const long n_circ =
        static_cast<long>(gammas.size()) * static_cast<long>(ts.size()) * opts.n_twirl;
    if (n_circ < 1) throw std::invalid_argument("empty circuit grid");
    TransitionCounts counts;
    counts.n = n;
    counts.n_circuits = static_cast<int>(n_circ);
    const long base_shots = opts.total_shots / n_circ;
    long extra = opts.total_shots % n_circ;
    std::uint32_t l = 0;
    for (double g : gammas)
        for (double t : ts) {
            const double rf = t / opts.dt;
            const int r = static_cast<int>(std::lround(rf));
            if (std::fabs(rf - r) > 1e-9 || r < 2)
                throw std::invalid_argument("each t must be r*dt with r >= 2");
            for (int w = 0; w < opts.n_twirl; ++w, ++l) {
                const Eigen::MatrixXd q =
                    observed_circuit_matrix(inst, g, r, opts.dt, opts, rng);
                long shots = base_shots + (extra > 0 ? 1 : 0);
                if (extra > 0) --extra;
                for (long s = 0; s < shots; ++s) {
                    const std::uint32_t k =
                        static_cast<std::uint32_t>(rng.uniform_int(dim));
                    double u = rng.uniform();
                    std::uint32_t j = dim - 1;
                    for (std::uint32_t i = 0; i < dim; ++i) {
                        u -= q(i, k);
                        if (u <= 0.0) {
                            j = i;
                            break;
                        }
                    }
                    counts.record(j, k, l);
                }
            }
        }
    return counts;
}

} // namespace qmc
