#include "qmc/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qmc/chains.hpp"

namespace qmc {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int m) : parent(m) {
        for (int i = 0; i < m; ++i) parent[i] = i;
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

double activation_probability(double J, double T) {
    return 1.0 - std::exp(-2.0 * std::fabs(J) / T);
}

// components of activated satisfied bonds, drawn in stored coupling order
std::vector<std::vector<int>> sw_clusters(const IsingInstance& work,
                                          std::uint32_t code, double T, Rng& rng) {
    const int m = work.n();
    UnionFind uf(m);
    for (const auto& c : work.couplings()) {
        const int prod = spin_of(code, m, c.j) * spin_of(code, m, c.k);
        if (c.val * prod > 0.0 && rng.bernoulli(activation_probability(c.val, T)))
            uf.unite(c.j - 1, c.k - 1);
    }
    // clusters ordered by smallest member site
    std::vector<int> slot(m, -1);
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < m; ++i) {
        const int r = uf.find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[slot[r]].push_back(i + 1);
    }
    return clusters;
}

// grow one cluster from seed over satisfied bonds; each adjacent bond is
// tested at most once
std::vector<int> wolff_cluster(const IsingInstance& work, std::uint32_t code,
                               double T, int seed, Rng& rng) {
    const int m = work.n();
    std::vector<char> in(m + 1, 0);
    std::vector<int> frontier{seed}, cluster{seed};
    in[seed] = 1;
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int j : frontier) {
            for (const auto& [k, J] : work.neighbors(j)) {
                if (in[k]) continue;
                const int prod = spin_of(code, m, j) * spin_of(code, m, k);
                if (J * prod > 0.0 && rng.bernoulli(activation_probability(J, T))) {
                    in[k] = 1;
                    cluster.push_back(k);
                    next.push_back(k);
                }
            }
        }
        frontier.swap(next);
    }
    return cluster;
}

double field_delta_energy(const IsingInstance& inst, std::uint32_t code,
                          const std::vector<int>& cluster) {
    double d = 0.0;
    for (int j : cluster)
        d += 2.0 * inst.fields()[j - 1] * spin_of(code, inst.n(), j);
    return d;
}

std::uint32_t flip_sites(std::uint32_t code, int m, const std::vector<int>& sites) {
    for (int j : sites) code = flip_code(code, m, j);
    return code;
}

} // namespace

std::uint32_t cluster_move(ClusterKind kind, FieldMode field_mode,
                           const IsingInstance& inst, double T,
                           std::uint32_t config, Rng& rng) {
    if (T <= 0.0) throw std::invalid_argument("temperature must be positive");
    const int n = inst.n();
    const bool ghost = field_mode == FieldMode::Ghost;
    const IsingInstance work = ghost ? ghost_spin_transform(inst) : inst;
    const int m = work.n();
    // ghost site m sits at the lowest bit (value +1) in the extended code
    std::uint32_t code = ghost ? (config << 1) : config;

    if (kind == ClusterKind::SwendsenWang) {
        const auto clusters = sw_clusters(work, code, T, rng);
        for (const auto& cl : clusters) {
            if (ghost && std::find(cl.begin(), cl.end(), m) != cl.end()) continue;
            if (!rng.bernoulli(0.5)) continue;
            if (!ghost) {
                const double d = field_delta_energy(work, code, cl);
                if (d > 0.0 && !rng.bernoulli(std::exp(-d / T))) continue;
            }
            code = flip_sites(code, m, cl);
        }
    } else {
        const int seed = 1 + static_cast<int>(rng.uniform_int(n));  // real sites only
        const auto cl = wolff_cluster(work, code, T, seed, rng);
        const bool contains_ghost =
            ghost && std::find(cl.begin(), cl.end(), m) != cl.end();
        if (!contains_ghost) {
            bool accept = true;
            if (!ghost) {
                const double d = field_delta_energy(work, code, cl);
                if (d > 0.0 && !rng.bernoulli(std::exp(-d / T))) accept = false;
            }
            if (accept) code = flip_sites(code, m, cl);
        }
    }
    return ghost ? (code >> 1) : code;
}

ReplicaPair houdayer_move(const IsingInstance& inst, ReplicaPair pair, Rng& rng) {
    const int n = inst.n();
    const int j = 1 + static_cast<int>(rng.uniform_int(n));
    const std::uint32_t qmask = pair.a ^ pair.b;  // bit set <=> q = -1
    if (!((qmask >> (n - j)) & 1u)) return pair;
    // connected q = -1 component containing j over the coupling graph
    std::vector<char> in(n + 1, 0);
    std::vector<int> frontier{j};
    std::uint32_t flip = std::uint32_t{1} << (n - j);
    in[j] = 1;
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int s : frontier)
            for (const auto& [k, J] : inst.neighbors(s)) {
                (void)J;
                if (in[k] || !((qmask >> (n - k)) & 1u)) continue;
                in[k] = 1;
                flip |= std::uint32_t{1} << (n - k);
                next.push_back(k);
            }
        frontier.swap(next);
    }
    return {pair.a ^ flip, pair.b ^ flip};
}

HoudayerKernel::HoudayerKernel(const IsingInstance& inst, double T)
    : inst_(inst), n_(inst.n()), dim_(1 << inst.n()) {
    local_ = build_transition_matrix(classical_proposal_matrix(ProposalKind::Local, n_),
                                     inst_, T, AcceptanceRule::MetropolisHastings)
                 .P;
    const BoltzmannTable tab = boltzmann(inst_, T);
    mu_ = Eigen::Map<const Eigen::VectorXd>(tab.probabilities.data(), dim_);
}

Eigen::VectorXd HoudayerKernel::apply(const Eigen::VectorXd& x) const {
    if (x.size() != pair_dim()) throw std::invalid_argument("dimension mismatch");
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMat> X(x.data(), dim_, dim_);
    // one independent local M-H flip attempt per replica
    RowMat Y = local_ * X * local_.transpose();
    Eigen::VectorXd out =
        (static_cast<double>(n_) / (n_ + 1)) *
        Eigen::Map<const Eigen::VectorXd>(Y.data(), pair_dim());
    // Houdayer part, averaged over the uniform site choice
    const double w = 1.0 / (n_ * (n_ + 1.0));
    for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(dim_); ++a)
        for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(dim_); ++b) {
            const double mass = x(static_cast<Eigen::Index>(a) * dim_ + b);
            if (mass == 0.0) continue;
            const std::uint32_t qmask = a ^ b;
            for (int j = 1; j <= n_; ++j) {
                std::uint32_t target_a = a, target_b = b;
                if ((qmask >> (n_ - j)) & 1u) {
                    // deterministic component flip given the site
                    std::vector<char> in(n_ + 1, 0);
                    std::vector<int> frontier{j};
                    std::uint32_t flip = std::uint32_t{1} << (n_ - j);
                    in[j] = 1;
                    while (!frontier.empty()) {
                        std::vector<int> next;
                        for (int s : frontier)
                            for (const auto& [k, J] : inst_.neighbors(s)) {
                                (void)J;
                                if (in[k] || !((qmask >> (n_ - k)) & 1u)) continue;
                                in[k] = 1;
                                flip |= std::uint32_t{1} << (n_ - k);
                                next.push_back(k);
                            }
                        frontier.swap(next);
                    }
                    target_a = a ^ flip;
                    target_b = b ^ flip;
                }
                out(static_cast<Eigen::Index>(target_a) * dim_ + target_b) += w * mass;
            }
        }
    return out;
}

Eigen::VectorXd HoudayerKernel::stationary() const {
    Eigen::VectorXd out(pair_dim());
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b)
            out(static_cast<Eigen::Index>(a) * dim_ + b) = mu_(a) * mu_(b);
    return out;
}

Eigen::VectorXd houdayer_kernel_action(const IsingInstance& inst, double T,
                                       const Eigen::VectorXd& x) {
    return HoudayerKernel(inst, T).apply(x);
}

EstimatedTransitionMatrix estimate_transition_matrix(const MoveFn& move,
                                                     const IsingInstance& inst,
                                                     double T, long samples,
                                                     Rng& rng) {
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    const std::uint32_t dim = std::uint32_t{1} << inst.n();
    EstimatedTransitionMatrix est;
    est.counts = Eigen::MatrixXd::Zero(dim, dim);
    for (long i = 0; i < samples; ++i) {
        const std::uint32_t s0 = static_cast<std::uint32_t>(rng.uniform_int(dim));
        const std::uint32_t s1 = move(inst, T, s0, rng);
        est.counts(s1, s0) += 1.0;
    }
    est.column_samples = est.counts.colwise().sum();
    est.phat = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint32_t s = 0; s < dim; ++s)
        if (est.column_samples(s) > 0)
            est.phat.col(s) = est.counts.col(s) / est.column_samples(s);
    return est;
}

} // namespace qmc
