#include "qmc/chains.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qmc {

namespace {

double log_ratio(double delta_E, double T, double q_ratio) {
    if (T <= 0.0) throw std::invalid_argument("temperature must be positive");
    if (q_ratio <= 0.0) throw std::invalid_argument("proposal ratio must be positive");
    return -delta_E / T + std::log(q_ratio);
}

} // namespace

double mh_acceptance(double delta_E, double T, double q_ratio) {
    const double x = log_ratio(delta_E, T, q_ratio);
    return x >= 0.0 ? 1.0 : std::exp(x);
}

double gibbs_acceptance(double delta_E, double T, double q_ratio) {
    const double x = log_ratio(delta_E, T, q_ratio);
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double acceptance(AcceptanceRule rule, double delta_E, double T, double q_ratio) {
    return rule == AcceptanceRule::MetropolisHastings
               ? mh_acceptance(delta_E, T, q_ratio)
               : gibbs_acceptance(delta_E, T, q_ratio);
}

Eigen::MatrixXd classical_proposal_matrix(ProposalKind kind, int n) {
    const std::uint32_t dim = 1u << n;
    if (kind == ProposalKind::Uniform)
        return Eigen::MatrixXd::Constant(dim, dim, 1.0 / dim);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint32_t s = 0; s < dim; ++s)
        for (int b = 0; b < n; ++b)
            q(s ^ (1u << b), s) = 1.0 / n;
    return q;
}

TransitionMatrix build_transition_matrix(const Eigen::MatrixXd& Q,
                                         const IsingInstance& inst, double T,
                                         AcceptanceRule rule) {
    if (T <= 0.0) throw std::invalid_argument("temperature must be positive");
    TransitionMatrix out;
    out.max_asymmetry = (Q - Q.transpose()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd qs =
        out.max_asymmetry > 1e-6 ? ((Q + Q.transpose()) / 2.0).eval() : Q;
    const std::uint32_t dim = static_cast<std::uint32_t>(Q.rows());
    const std::vector<double> etab = energy_table(inst);
    out.P.resize(dim, dim);
    for (std::uint32_t s = 0; s < dim; ++s) {
        double off = 0.0;
        for (std::uint32_t sp = 0; sp < dim; ++sp) {
            if (sp == s) continue;
            const double a = acceptance(rule, etab[sp] - etab[s], T, 1.0);
            out.P(sp, s) = a * qs(sp, s);
            off += out.P(sp, s);
        }
        const double diag = 1.0 - off;
        if (diag < -1e-12)
            throw std::runtime_error("negative rejection mass: proposal is not column-stochastic");
        out.P(s, s) = std::max(diag, 0.0);
    }
    return out;
}

TransitionMatrix lazy(const TransitionMatrix& P) {
    TransitionMatrix out;
    out.max_asymmetry = P.max_asymmetry;
    out.P = 0.5 * (P.P + Eigen::MatrixXd::Identity(P.P.rows(), P.P.cols()));
    return out;
}

ProposalSampler local_proposal_sampler(int n) {
    return [n](std::uint32_t code, Rng& rng) -> ProposalSample {
        const int b = static_cast<int>(rng.uniform_int(n));
        return {code ^ (std::uint32_t{1} << b), 1.0};
    };
}

ProposalSampler uniform_proposal_sampler(int n) {
    return [n](std::uint32_t, Rng& rng) -> ProposalSample {
        return {static_cast<std::uint32_t>(rng.uniform_int(std::uint64_t{1} << n)), 1.0};
    };
}

ProposalSampler matrix_proposal_sampler(std::shared_ptr<const Eigen::MatrixXd> Q,
                                        bool force_symmetric) {
    return [Q, force_symmetric](std::uint32_t code, Rng& rng) -> ProposalSample {
        const auto dim = Q->rows();
        double u = rng.uniform();
        Eigen::Index sp = dim - 1;
        for (Eigen::Index i = 0; i < dim; ++i) {
            u -= (*Q)(i, code);
            if (u <= 0.0) {
                sp = i;
                break;
            }
        }
        double ratio = 1.0;
        if (!force_symmetric) {
            const double fwd = (*Q)(sp, code);
            const double bwd = (*Q)(code, sp);
            ratio = (fwd > 0.0) ? bwd / fwd : 1.0;
        }
        return {static_cast<std::uint32_t>(sp), ratio};
    };
}

ProposalSampler quantum_proposal_sampler(const IsingInstance& inst,
                                         const QuantumProposalOptions& opts) {
    auto bases = std::make_shared<std::vector<EigenBasis>>();
    for (double g : midpoint_grid(opts.gamma_min, opts.gamma_max, opts.gamma_subintervals))
        bases->push_back(eigendecompose(build_hamiltonian(inst, g).mat));
    auto tgrid = std::make_shared<std::vector<double>>(
        opts.t_grid.empty() ? default_trotter_ts() : opts.t_grid);
    const TimeMode mode = opts.time_mode;
    const double t_min = opts.t_min, t_max = opts.t_max;
    return [bases, tgrid, mode, t_min, t_max](std::uint32_t code, Rng& rng) -> ProposalSample {
        const auto& basis = (*bases)[rng.uniform_int(bases->size())];
        const double t = (mode == TimeMode::Continuous)
                             ? rng.uniform(t_min, t_max)
                             : (*tgrid)[rng.uniform_int(tgrid->size())];
        const Eigen::VectorXd probs = evolve_exact(basis, t, code);
        double u = rng.uniform();
        Eigen::Index sp = probs.size() - 1;
        for (Eigen::Index i = 0; i < probs.size(); ++i) {
            u -= probs(i);
            if (u <= 0.0) {
                sp = i;
                break;
            }
        }
        return {static_cast<std::uint32_t>(sp), 1.0};
    };
}

Trajectory run_chain(const ProposalSampler& sampler, const IsingInstance& inst,
                     double T, int iterations, AcceptanceRule rule, Rng& rng,
                     const ChainOptions& opts) {
    if (T <= 0.0) throw std::invalid_argument("temperature must be positive");
    Trajectory traj;
    traj.codes.reserve(iterations + 1);
    traj.accepted.reserve(iterations);
    const std::uint32_t dim = std::uint32_t{1} << inst.n();
    std::uint32_t cur = static_cast<std::uint32_t>(rng.uniform_int(dim));
    traj.codes.push_back(cur);
    const std::vector<double> etab = energy_table(inst);
    for (int it = 0; it < iterations; ++it) {
        ProposalSample prop;
        if (opts.epsilon_uniform > 0.0 && rng.bernoulli(opts.epsilon_uniform))
            prop = {static_cast<std::uint32_t>(rng.uniform_int(dim)), 1.0};
        else
            prop = sampler(cur, rng);
        const double a =
            acceptance(rule, etab[prop.code] - etab[cur], T, prop.q_ratio);
        const bool accept = rng.bernoulli(a);
        if (accept) cur = prop.code;
        traj.codes.push_back(cur);
        traj.accepted.push_back(accept ? 1 : 0);
    }
    return traj;
}

std::vector<double> running_average(const Trajectory& traj,
                                    const std::function<double(std::uint32_t)>& observable) {
    if (traj.codes.empty()) throw std::invalid_argument("empty trajectory");
    std::vector<double> out(traj.codes.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < traj.codes.size(); ++j) {
        acc += observable(traj.codes[j]);
        out[j] = acc / static_cast<double>(j + 1);
    }
    return out;
}

MixingTimeBounds mixing_time_bounds(double delta, double mu_min, double epsilon) {
    if (delta < 0.0 || delta > 1.0 || mu_min <= 0.0 || mu_min > 1.0 ||
        epsilon <= 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("arguments outside valid ranges");
    MixingTimeBounds b;
    if (delta == 0.0) {
        b.infinite = true;
        return b;
    }
    b.lower = (1.0 / delta - 1.0) * std::log(1.0 / (2.0 * epsilon));
    b.upper = (1.0 / delta) * std::log(1.0 / (epsilon * mu_min));
    return b;
}

void save_trajectory(const std::string& path, const Trajectory& traj,
                     const IsingInstance& inst) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
    out << "iteration,config_code,energy,magnetization,accepted\n";
    for (std::size_t j = 0; j < traj.codes.size(); ++j) {
        const std::uint32_t c = traj.codes[j];
        out << j << ',' << c << ',' << energy(inst, c) << ','
            << magnetization(c, inst.n()) << ','
            << (j == 0 ? 1 : static_cast<int>(traj.accepted[j - 1])) << '\n';
    }
}

} // namespace qmc
