#include "qmc/quantum.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "qmc/kernels.hpp"

namespace qmc {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
    if (std::fabs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// coupling-only part of the energy, -sum J s_j s_k
double coupling_energy(const IsingInstance& inst, std::uint32_t code) {
    double e = 0.0;
    for (const auto& c : inst.couplings())
        e -= c.val * spin_of(code, inst.n(), c.j) * spin_of(code, inst.n(), c.k);
    return e;
}

kernels::Gate2 to_gate2(const Eigen::Matrix2cd& m) {
    return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

void apply_2q(std::vector<std::complex<double>>& psi, int n, int q1, int q2,
              const Eigen::Matrix4cd& m) {
    const std::uint32_t b1 = std::uint32_t{1} << (n - q1);
    const std::uint32_t b2 = std::uint32_t{1} << (n - q2);
    const std::uint32_t dim = std::uint32_t{1} << n;
    for (std::uint32_t base = 0; base < dim; ++base) {
        if (base & (b1 | b2)) continue;
        std::uint32_t idx[4] = {base, base | b2, base | b1, base | b1 | b2};
        Eigen::Vector4cd v;
        for (int i = 0; i < 4; ++i) v(i) = psi[idx[i]];
        Eigen::Vector4cd w = m * v;
        for (int i = 0; i < 4; ++i) psi[idx[i]] = w(i);
    }
}

} // namespace

QuantumHamiltonian build_hamiltonian(const IsingInstance& inst, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma outside [0,1]");
    QuantumHamiltonian h;
    h.gamma = gamma;
    h.alpha = alpha(inst);
    const std::uint32_t dim = 1u << inst.n();
    h.mat = Eigen::MatrixXd::Zero(dim, dim);
    const std::vector<double> etab = energy_table(inst);
    for (std::uint32_t s = 0; s < dim; ++s) {
        h.mat(s, s) = (1.0 - gamma) * h.alpha * etab[s];
        for (int b = 0; b < inst.n(); ++b) {
            std::uint32_t t = s ^ (1u << b);
            h.mat(t, s) = gamma;
        }
    }
    return h;
}

EigenBasis eigendecompose(const Eigen::MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed to converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::VectorXd evolve_exact(const EigenBasis& basis, double t, std::uint32_t config) {
    const auto dim = basis.evals.size();
    Eigen::VectorXcd coef(dim);
    const std::complex<double> mi(0.0, -1.0);
    for (Eigen::Index l = 0; l < dim; ++l)
        coef(l) = basis.evecs(config, l) * std::exp(mi * basis.evals(l) * t);
    Eigen::VectorXcd amp = basis.evecs * coef;
    return amp.cwiseAbs2();
}

std::vector<double> midpoint_grid(double lo, double hi, int m) {
    std::vector<double> g(m);
    const double w = (hi - lo) / m;
    for (int i = 0; i < m; ++i) g[i] = lo + (i + 0.5) * w;
    return g;
}

Eigen::MatrixXd channel_q_matrix(const IsingInstance& inst, int gamma_subintervals,
                                 double t_min, double t_max, double gamma_min,
                                 double gamma_max) {
    if (t_max <= t_min) throw std::invalid_argument("empty time window");
    if (gamma_subintervals < 1) throw std::invalid_argument("need at least one gamma subinterval");
    const std::uint32_t dim = 1u << inst.n();
    const double tm = 0.5 * (t_min + t_max);  // window midpoint
    const double th = 0.5 * (t_max - t_min);  // window half-width
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    const auto gammas = midpoint_grid(gamma_min, gamma_max, gamma_subintervals);
    for (double g : gammas) {
        const EigenBasis basis = eigendecompose(build_hamiltonian(inst, g).mat);
        // time-average of cos((l_i - l_j) t) over the window
        Eigen::MatrixXd kern(dim, dim);
        for (std::uint32_t i = 0; i < dim; ++i)
            for (std::uint32_t j = 0; j <= i; ++j) {
                const double d = basis.evals(i) - basis.evals(j);
                const double v = std::cos(d * tm) * sinc(d * th);
                kern(i, j) = v;
                kern(j, i) = v;
            }
        // Q_g(s',s) = sum_{ij} kern_ij V_s'i V_s'j V_si V_sj.  kern is an
        // average of rank-2 PSD matrices, so expand it in its own eigenbasis
        // and drop numerically zero modes: Q_g = sum_k w_k (V diag(u_k) V^T)^{∘2}.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ks(kern);
        const Eigen::VectorXd& kw = ks.eigenvalues();
        const double cutoff = 1e-13 * std::max(1.0, kw.cwiseAbs().maxCoeff());
        Eigen::MatrixXd tmat(dim, dim);
        for (std::uint32_t k = 0; k < dim; ++k) {
            if (std::fabs(kw(k)) <= cutoff) continue;
            tmat.noalias() = basis.evecs * ks.eigenvectors().col(k).asDiagonal() *
                             basis.evecs.transpose();
            q.array() += (kw(k) / gamma_subintervals) * tmat.array().square();
        }
    }
    return q;
}

Eigen::MatrixXd exact_q_on_grid(const IsingInstance& inst,
                                const std::vector<double>& gammas,
                                const std::vector<double>& ts) {
    const std::uint32_t dim = 1u << inst.n();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    const std::complex<double> mi(0.0, -1.0);
    for (double g : gammas) {
        const EigenBasis basis = eigendecompose(build_hamiltonian(inst, g).mat);
        const Eigen::MatrixXcd vc = basis.evecs.cast<std::complex<double>>();
        for (double t : ts) {
            Eigen::VectorXcd ph(dim);
            for (std::uint32_t l = 0; l < dim; ++l)
                ph(l) = std::exp(mi * basis.evals(l) * t);
            Eigen::MatrixXcd u = vc * ph.asDiagonal() * vc.transpose();
            q += u.cwiseAbs2() / (static_cast<double>(gammas.size()) * ts.size());
        }
    }
    return q;
}

// ---- Trotter ------------------------------------------------------------

TrotterCircuit build_trotter_circuit(const IsingInstance& inst, double gamma,
                                     double dt, int r) {
    if (r < 2) throw std::invalid_argument("need at least two Trotter steps");
    TrotterCircuit c;
    c.n = inst.n();
    c.r = r;
    c.dt = dt;
    c.gamma = gamma;
    const double a = alpha(inst);
    c.a.assign(c.n, gamma * dt);
    c.b.resize(c.n);
    for (int j = 0; j < c.n; ++j)
        c.b[j] = -(1.0 - gamma) * a * inst.fields()[j] * dt;
    for (const auto& cp : inst.couplings())
        c.theta.push_back({cp.j, cp.k, -2.0 * cp.val * (1.0 - gamma) * a * dt});
    return c;
}

Eigen::Matrix2cd xz_rotation(double a, double b) {
    const double w = std::sqrt(a * a + b * b);
    const double c = std::cos(w);
    const double s = (w == 0.0) ? 1.0 : std::sin(w) / w;
    Eigen::Matrix2cd m;
    const std::complex<double> mi(0.0, -1.0);
    m << c + mi * b * s, mi * a * s, mi * a * s, c - mi * b * s;
    return m;
}

namespace {

// per-step data for fast statevector simulation of a TrotterCircuit
struct StepGates {
    std::vector<kernels::Gate2> oneq;              // per qubit j = 1..n
    std::vector<std::complex<double>> diag_phase;  // exp(-i H2 dt) entries
};

StepGates make_step_gates(const IsingInstance& inst, const TrotterCircuit& c) {
    StepGates sg;
    for (int j = 0; j < c.n; ++j)
        sg.oneq.push_back(to_gate2(xz_rotation(c.a[j], c.b[j])));
    const std::uint32_t dim = 1u << c.n;
    const double scale = (1.0 - c.gamma) * alpha(inst) * c.dt;
    sg.diag_phase.resize(dim);
    const std::complex<double> mi(0.0, -1.0);
    for (std::uint32_t s = 0; s < dim; ++s)
        sg.diag_phase[s] = std::exp(mi * scale * coupling_energy(inst, s));
    return sg;
}

void apply_oneq_layer(std::vector<std::complex<double>>& psi, int n,
                      const std::vector<kernels::Gate2>& gates) {
    for (int j = 1; j <= n; ++j)
        kernels::apply_1q(psi.data(), psi.size(), n - j, gates[j - 1]);
}

} // namespace

Eigen::MatrixXd trotter_q_matrix(const IsingInstance& inst,
                                 const std::vector<double>& gammas,
                                 const std::vector<double>& ts, double delta_t) {
    const int n = inst.n();
    const std::uint32_t dim = 1u << n;
    std::vector<int> rs;
    int rmax = 0;
    for (double t : ts) {
        const double rf = t / delta_t;
        const int r = static_cast<int>(std::lround(rf));
        if (std::fabs(rf - r) > 1e-9 || r < 2)
            throw std::invalid_argument("each t must be r*delta_t with r >= 2");
        rs.push_back(r);
        rmax = std::max(rmax, r);
    }
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    const double weight = 1.0 / (static_cast<double>(gammas.size()) * ts.size());
    std::vector<std::complex<double>> psi(dim);
    for (double g : gammas) {
        TrotterCircuit circ = build_trotter_circuit(inst, g, delta_t, rmax);
        const StepGates sg = make_step_gates(inst, circ);
        for (std::uint32_t s = 0; s < dim; ++s) {
            std::fill(psi.begin(), psi.end(), std::complex<double>(0.0, 0.0));
            psi[s] = 1.0;
            apply_oneq_layer(psi, n, sg.oneq);
            for (int r = 2; r <= rmax; ++r) {
                kernels::cmul_inplace(psi.data(), sg.diag_phase.data(), dim);
                apply_oneq_layer(psi, n, sg.oneq);
                for (int rwant : rs)
                    if (rwant == r)
                        kernels::abs2_accum(q.col(s).data(), psi.data(), dim);
            }
        }
    }
    return q * weight;
}

Eigen::MatrixXd trotter_circuit_probs(const TrotterCircuit& circ) {
    // rebuild the instance-independent step data from the stored parameters
    const std::uint32_t dim = 1u << circ.n;
    StepGates sg;
    for (int j = 0; j < circ.n; ++j)
        sg.oneq.push_back(to_gate2(xz_rotation(circ.a[j], circ.b[j])));
    sg.diag_phase.assign(dim, 1.0);
    const std::complex<double> mi(0.0, -1.0);
    for (const auto& th : circ.theta)
        for (std::uint32_t s = 0; s < dim; ++s) {
            const int zz = spin_of(s, circ.n, th.j) * spin_of(s, circ.n, th.k);
            sg.diag_phase[s] *= std::exp(mi * 0.5 * th.val * static_cast<double>(zz));
        }
    Eigen::MatrixXd q(dim, dim);
    std::vector<std::complex<double>> psi(dim);
    for (std::uint32_t s = 0; s < dim; ++s) {
        std::fill(psi.begin(), psi.end(), std::complex<double>(0.0, 0.0));
        psi[s] = 1.0;
        apply_oneq_layer(psi, circ.n, sg.oneq);
        for (int r = 2; r <= circ.r; ++r) {
            kernels::cmul_inplace(psi.data(), sg.diag_phase.data(), dim);
            apply_oneq_layer(psi, circ.n, sg.oneq);
        }
        for (std::uint32_t sp = 0; sp < dim; ++sp) q(sp, s) = std::norm(psi[sp]);
    }
    return q;
}

std::vector<double> default_trotter_gammas() { return midpoint_grid(0.25, 0.6, 10); }

std::vector<double> default_trotter_ts() {
    std::vector<double> ts;
    for (int r = 2; r <= 25; ++r) ts.push_back(r * 0.8);
    return ts;
}

// ---- gate-level ---------------------------------------------------------

Eigen::Matrix2cd pauli_1q(int p) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    const std::complex<double> i(0.0, 1.0);
    switch (p) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -i, i, 0; break;
        case 3: m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("Pauli index outside 0..3");
    }
    return m;
}

Eigen::Matrix4cd rzx_gate(double theta) {
    // exp(-i theta/2 Z(x)X) = cos(theta/2) I - i sin(theta/2) Z(x)X
    Eigen::Matrix4cd zx = Eigen::Matrix4cd::Zero();
    zx(0, 1) = zx(1, 0) = 1.0;
    zx(2, 3) = zx(3, 2) = -1.0;
    const std::complex<double> mi(0.0, -1.0);
    return std::cos(theta / 2) * Eigen::Matrix4cd::Identity() +
           mi * std::sin(theta / 2) * zx;
}

Eigen::Matrix4cd rzz_gate(double theta) {
    Eigen::Vector4cd d;
    const std::complex<double> mi(0.0, -1.0);
    d << std::exp(mi * theta / 2.0), std::exp(-mi * theta / 2.0),
         std::exp(-mi * theta / 2.0), std::exp(mi * theta / 2.0);
    return d.asDiagonal();
}

FoldedRzx fold_rzx_angle(double theta) {
    FoldedRzx f;
    // Rzx has 4pi period with Rzx(t + 2pi) = -Rzx(t); first reduce to [-pi, pi]
    const double k = std::round(theta / (2.0 * kPi));
    double r = theta - 2.0 * kPi * k;
    if (std::fmod(std::fabs(k), 2.0) == 1.0) f.phase = -f.phase;
    // Rzx(t + pi) = -i (Z(x)X) Rzx(t); Rzx(t - pi) = +i (Z(x)X) Rzx(t)
    if (r > kPi / 2) {
        r -= kPi;
        f.zx_correction = true;
        f.phase *= std::complex<double>(0.0, -1.0);
    } else if (r < -kPi / 2 || (r == -kPi)) {
        r += kPi;
        f.zx_correction = true;
        f.phase *= std::complex<double>(0.0, 1.0);
    }
    f.residual = r;
    return f;
}

TwirledRzx gate_twirl(double theta, int p1, int p2) {
    const bool p1_anti_z = (p1 == 1 || p1 == 2);
    const bool p2_anti_x = (p2 == 2 || p2 == 3);
    TwirledRzx tw;
    tw.p1 = p1;
    tw.p2 = p2;
    tw.theta_eff = (p1_anti_z != p2_anti_x) ? -theta : theta;
    return tw;
}

Eigen::Matrix4cd twirled_rzx_unitary(const TwirledRzx& tw) {
    Eigen::Matrix4cd pp = Eigen::Matrix4cd::Zero();
    const Eigen::Matrix2cd a = pauli_1q(tw.p1), b = pauli_1q(tw.p2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            pp.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return pp * rzx_gate(tw.theta_eff) * pp;
}

GateCircuit gate_level_circuit(const TrotterCircuit& circ, const GateLevelOptions& opts) {
    GateCircuit gc;
    gc.n = circ.n;
    const Eigen::Matrix2cd had = (Eigen::Matrix2cd() << 1, 1, 1, -1).finished() / std::sqrt(2.0);
    auto push_1q = [&](int q, const Eigen::Matrix2cd& m) {
        GateOp op;
        op.q1 = q;
        op.m2 = m;
        gc.ops.push_back(op);
    };
    auto push_2q = [&](int q1, int q2, const Eigen::Matrix4cd& m) {
        GateOp op;
        op.q1 = q1;
        op.q2 = q2;
        op.m4 = m;
        gc.ops.push_back(op);
    };
    auto oneq_layer = [&] {
        for (int j = 1; j <= circ.n; ++j)
            push_1q(j, xz_rotation(circ.a[j - 1], circ.b[j - 1]));
    };
    auto coupling_layer = [&] {
        for (const auto& th : circ.theta) {
            if (!opts.use_rzx) {
                push_2q(th.j, th.k, rzz_gate(th.val));
                continue;
            }
            push_1q(th.k, had);  // Rzz = (I(x)H) Rzx (I(x)H), X side on k
            double angle = th.val;
            std::complex<double> extra = 1.0;
            bool zx = false;
            if (opts.fold_angles) {
                FoldedRzx f = fold_rzx_angle(angle);
                angle = f.residual;
                extra = f.phase;
                zx = f.zx_correction;
            }
            if (opts.twirl_rng) {
                const int p1 = static_cast<int>(opts.twirl_rng->uniform_int(4));
                const int p2 = static_cast<int>(opts.twirl_rng->uniform_int(4));
                const TwirledRzx tw = gate_twirl(angle, p1, p2);
                push_1q(th.j, pauli_1q(p1));
                push_1q(th.k, pauli_1q(p2));
                push_2q(th.j, th.k, rzx_gate(tw.theta_eff));
                push_1q(th.j, pauli_1q(p1));
                push_1q(th.k, pauli_1q(p2));
            } else {
                push_2q(th.j, th.k, rzx_gate(angle));
            }
            if (zx) {
                push_1q(th.j, pauli_1q(3));
                push_1q(th.k, pauli_1q(1));
            }
            push_1q(th.k, extra * had);
        }
    };
    oneq_layer();
    for (int r = 2; r <= circ.r; ++r) {
        coupling_layer();
        oneq_layer();
    }
    return gc;
}

void apply_gate_circuit(const GateCircuit& circ, std::vector<std::complex<double>>& psi) {
    for (const auto& op : circ.ops) {
        if (op.q2 < 0)
            kernels::apply_1q(psi.data(), psi.size(), circ.n - op.q1, to_gate2(op.m2));
        else
            apply_2q(psi, circ.n, op.q1, op.q2, op.m4);
    }
}

Eigen::MatrixXd gate_circuit_probs(const GateCircuit& circ) {
    const std::uint32_t dim = 1u << circ.n;
    Eigen::MatrixXd q(dim, dim);
    std::vector<std::complex<double>> psi(dim);
    for (std::uint32_t s = 0; s < dim; ++s) {
        std::fill(psi.begin(), psi.end(), std::complex<double>(0.0, 0.0));
        psi[s] = 1.0;
        apply_gate_circuit(circ, psi);
        for (std::uint32_t sp = 0; sp < dim; ++sp) q(sp, s) = std::norm(psi[sp]);
    }
    return q;
}

// ---- SPAM ---------------------------------------------------------------

SpamKey random_spam_key(int n, Rng& rng) {
    SpamKey key;
    key.c.resize(n);
    for (int j = 0; j < n; ++j) key.c[j] = rng.bernoulli(0.5) ? 1 : -1;
    return key;
}

IsingInstance spam_twirl_instance(const IsingInstance& inst, const SpamKey& key) {
    if (static_cast<int>(key.c.size()) != inst.n())
        throw std::invalid_argument("key length != n");
    std::vector<Coupling> cs;
    for (const auto& c : inst.couplings())
        cs.push_back({c.j, c.k, c.val * key.c[c.j - 1] * key.c[c.k - 1]});
    std::vector<double> hs(inst.n());
    for (int j = 0; j < inst.n(); ++j) hs[j] = inst.fields()[j] * key.c[j];
    return IsingInstance(inst.n(), std::move(cs), std::move(hs),
                         inst.connectivity(), inst.seed());
}

std::uint32_t spam_apply_key(std::uint32_t code, const SpamKey& key) {
    const int n = static_cast<int>(key.c.size());
    std::uint32_t mask = 0;
    for (int j = 1; j <= n; ++j)
        if (key.c[j - 1] < 0) mask |= std::uint32_t{1} << (n - j);
    return code ^ mask;
}

// ---- readout noise ------------------------------------------------------

std::uint32_t apply_readout_noise(std::uint32_t code, int n, double p01,
                                  double p10, Rng& rng) {
    if (p01 < 0 || p01 >= 0.5 || p10 < 0 || p10 >= 0.5)
        throw std::invalid_argument("flip probabilities must be in [0, 0.5)");
    for (int b = 0; b < n; ++b) {
        const bool one = (code >> b) & 1u;
        const double p = one ? p10 : p01;
        if (rng.bernoulli(p)) code ^= std::uint32_t{1} << b;
    }
    return code;
}

Eigen::MatrixXd readout_noise_matrix(int n, double p01, double p10) {
    Eigen::Matrix2d m;
    m << 1.0 - p01, p10, p01, 1.0 - p10;
    Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
    for (int b = 0; b < n; ++b) {
        Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                next.block(i * out.rows(), j * out.cols(), out.rows(), out.cols()) =
                    m(i, j) * out;
        out.swap(next);
    }
    return out;
}

// ---- validation oracles -------------------------------------------------

double perturbative_transition(const IsingInstance& inst, double gamma, double t,
                               std::uint32_t j, std::uint32_t k) {
    if (j == k) throw std::invalid_argument("formula covers off-diagonal entries only");
    if (std::popcount(j ^ k) != 1) return 0.0;
    const double a = alpha(inst);
    const double de = energy(inst, k) - energy(inst, j);
    const double s = sinc(t * a * de / 2.0);
    return gamma * gamma * t * t * s * s;
}

double longtime_transition(const EigenBasis& basis, std::uint32_t j, std::uint32_t k) {
    double acc = 0.0;
    for (Eigen::Index l = 0; l < basis.evals.size(); ++l) {
        const double o = basis.evecs(k, l) * basis.evecs(j, l);
        acc += o * o;
    }
    return acc;
}

AnnealResult reverse_anneal_propagator(const IsingInstance& inst,
                                       const std::function<double(double)>& schedule,
                                       double tau, int steps) {
    if (steps < 1) throw std::invalid_argument("need at least one step");
    const std::uint32_t dim = 1u << inst.n();
    AnnealResult res;
    res.U = Eigen::MatrixXcd::Identity(dim, dim);
    const double dt = tau / steps;
    const std::complex<double> mi(0.0, -1.0);
    for (int k = 0; k < steps; ++k) {
        const double t = (k + 0.5) * dt;
        if (std::fabs(schedule(t) - schedule(tau - t)) > 1e-12) res.palindromic = false;
        const EigenBasis basis = eigendecompose(build_hamiltonian(inst, schedule(t)).mat);
        Eigen::VectorXcd ph(dim);
        for (std::uint32_t l = 0; l < dim; ++l)
            ph(l) = std::exp(mi * basis.evals(l) * dt);
        res.U = basis.evecs.cast<std::complex<double>>() * ph.asDiagonal() *
                basis.evecs.transpose().cast<std::complex<double>>() * res.U;
    }
    return res;
}

} // namespace qmc
