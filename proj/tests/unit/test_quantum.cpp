#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "qmc/quantum.hpp"

using namespace qmc;

namespace {

Eigen::MatrixXd single_qubit_part(const IsingInstance& inst, double gamma) {
    const int n = inst.n();
    const std::uint32_t dim = 1u << n;
    const double a = alpha(inst);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint32_t s = 0; s < dim; ++s) {
        double field = 0.0;
        for (int j = 1; j <= n; ++j)
            field -= inst.fields()[j - 1] * spin_of(s, n, j);
        h(s, s) = (1.0 - gamma) * a * field;
        for (int b = 0; b < n; ++b) h(s ^ (1u << b), s) = gamma;
    }
    return h;
}

Eigen::MatrixXd coupling_part(const IsingInstance& inst, double gamma) {
    const int n = inst.n();
    const std::uint32_t dim = 1u << n;
    const double a = alpha(inst);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint32_t s = 0; s < dim; ++s) {
        double e = 0.0;
        for (const auto& c : inst.couplings())
            e -= c.val * spin_of(s, n, c.j) * spin_of(s, n, c.k);
        h(s, s) = (1.0 - gamma) * a * e;
    }
    return h;
}

bool equal_up_to_phase(const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b,
                       double tol) {
    std::complex<double> phase(0, 0);
    double best = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (std::abs(b(i, j)) > best) {
                best = std::abs(b(i, j));
                phase = a(i, j) / b(i, j);
            }
    return (a - phase * b).cwiseAbs().maxCoeff() < tol &&
           std::fabs(std::abs(phase) - 1.0) < tol;
}

} // namespace

TEST_SUITE("quantum") {

TEST_CASE("hamiltonian structure at the interpolation endpoints") {
    Rng rng(21);
    const IsingInstance inst = gen_random_instance(4, Connectivity::Full, 1.0, rng);
    const QuantumHamiltonian h0 = build_hamiltonian(inst, 0.0);
    const double a = alpha(inst);
    for (std::uint32_t s = 0; s < 16; ++s)
        for (std::uint32_t t = 0; t < 16; ++t)
            CHECK(h0.mat(t, s) ==
                  doctest::Approx(s == t ? a * energy(inst, s) : 0.0).epsilon(1e-12));
    const QuantumHamiltonian h1 = build_hamiltonian(inst, 1.0);
    const EigenBasis basis = eigendecompose(h1.mat);
    std::map<int, int> mult;
    for (int i = 0; i < 16; ++i)
        mult[static_cast<int>(std::lround(basis.evals(i)))]++;
    CHECK(mult[4] == 1);
    CHECK(mult[2] == 4);
    CHECK(mult[0] == 6);
    CHECK(mult[-2] == 4);
    CHECK(mult[-4] == 1);
    const QuantumHamiltonian hm = build_hamiltonian(inst, 0.37);
    CHECK((hm.mat - hm.mat.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigendecomposition reconstructs and is orthonormal") {
    Rng rng(22);
    const IsingInstance inst = gen_random_instance(5, Connectivity::Chain, 1.0, rng);
    const QuantumHamiltonian h = build_hamiltonian(inst, 0.4);
    const EigenBasis b = eigendecompose(h.mat);
    const Eigen::MatrixXd recon =
        b.evecs * b.evals.asDiagonal() * b.evecs.transpose();
    CHECK((recon - h.mat).cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::MatrixXd gram = b.evecs.transpose() * b.evecs;
    CHECK((gram - Eigen::MatrixXd::Identity(32, 32)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("exact evolution: delta start, unitarity, matrix-exponential oracle") {
    Rng rng(23);
    const IsingInstance inst = gen_random_instance(4, Connectivity::Full, 1.0, rng);
    const QuantumHamiltonian h = build_hamiltonian(inst, 0.45);
    const EigenBasis b = eigendecompose(h.mat);
    const Eigen::VectorXd at0 = evolve_exact(b, 0.0, 5);
    for (int i = 0; i < 16; ++i)
        CHECK(at0(i) == doctest::Approx(i == 5 ? 1.0 : 0.0).epsilon(1e-12));
    for (double t : {0.7, 3.1, 11.0}) {
        const Eigen::VectorXd p = evolve_exact(b, t, 9);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-10));
        const std::complex<double> mi(0.0, -1.0);
        const Eigen::MatrixXcd u =
            oracles::expm_taylor(mi * t * h.mat.cast<std::complex<double>>());
        for (int i = 0; i < 16; ++i)
            CHECK(std::fabs(p(i) - std::norm(u(i, 9))) < 1e-8);
    }
}

TEST_CASE("channel is symmetric and column-stochastic") {
    Rng rng(24);
    for (int trial = 0; trial < 3; ++trial) {
        const IsingInstance inst =
            gen_random_instance(4, trial % 2 ? Connectivity::Chain : Connectivity::Full,
                                1.0, rng);
        const Eigen::MatrixXd q = channel_q_matrix(inst);
        CHECK((q - q.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        for (int c = 0; c < q.cols(); ++c)
            CHECK(q.col(c).sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(q.minCoeff() >= -1e-12);
    }
}

TEST_CASE("channel time-average matches dense trapezoid quadrature") {
    Rng rng(25);
    const IsingInstance inst = gen_random_instance(3, Connectivity::Chain, 1.0, rng);
    // same 20-point gamma grid; the t-average replaced by composite Simpson
    const Eigen::MatrixXd analytic = channel_q_matrix(inst);
    const auto gammas = midpoint_grid(0.25, 0.6, 20);
    Eigen::MatrixXd quad = Eigen::MatrixXd::Zero(8, 8);
    const int nt = 10000;  // intervals, even
    for (double g : gammas) {
        const EigenBasis b = eigendecompose(build_hamiltonian(inst, g).mat);
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(8, 8);
        for (int i = 0; i <= nt; ++i) {
            const double t = 2.0 + 18.0 * i / nt;
            const double w = (i == 0 || i == nt) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            for (std::uint32_t s = 0; s < 8; ++s)
                acc.col(s) += w * evolve_exact(b, t, s);
        }
        quad += acc / (3.0 * nt * static_cast<double>(gammas.size()));
    }
    CHECK((analytic - quad).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("trotter equals the exact channel when gamma = 0") {
    Rng rng(26);
    const IsingInstance inst = gen_random_instance(4, Connectivity::Full, 1.0, rng);
    const std::vector<double> ts = {1.6, 4.0, 8.0};
    const Eigen::MatrixXd qt = trotter_q_matrix(inst, {0.0}, ts, 0.8);
    const Eigen::MatrixXd qe = exact_q_on_grid(inst, {0.0}, ts);
    CHECK((qt - qe).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("outer diagonal half-layers do not change measurement statistics") {
    Rng rng(27);
    const IsingInstance inst = gen_random_instance(3, Connectivity::Chain, 1.0, rng);
    const double gamma = 0.4, dt = 0.8;
    const int r = 5;
    const std::complex<double> mi(0.0, -1.0);
    const Eigen::MatrixXcd a =
        oracles::expm_taylor(mi * dt * single_qubit_part(inst, gamma).cast<std::complex<double>>());
    const Eigen::MatrixXcd bfull =
        oracles::expm_taylor(mi * dt * coupling_part(inst, gamma).cast<std::complex<double>>());
    const Eigen::MatrixXcd bhalf =
        oracles::expm_taylor(mi * (dt / 2) * coupling_part(inst, gamma).cast<std::complex<double>>());
    // symmetric product with half-step diagonal layers outside
    Eigen::MatrixXcd sym = bhalf * a;
    for (int i = 1; i < r; ++i) sym = sym * bfull * a;
    sym = sym * bhalf;
    const Eigen::MatrixXd probs =
        trotter_circuit_probs(build_trotter_circuit(inst, gamma, dt, r));
    CHECK((sym.cwiseAbs2() - probs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trotter error shrinks at second order as the timestep halves") {
    Rng rng(28);
    const IsingInstance inst = gen_random_instance(4, Connectivity::Full, 1.0, rng);
    std::vector<double> ts;
    for (int i = 1; i <= 12; ++i) ts.push_back(1.6 * i);
    const std::vector<double> gammas = midpoint_grid(0.25, 0.6, 4);
    const Eigen::MatrixXd exact = exact_q_on_grid(inst, gammas, ts);
    std::vector<double> errs;
    for (double dt : {0.8, 0.4, 0.2}) {
        const Eigen::MatrixXd qt = trotter_q_matrix(inst, gammas, ts, dt);
        errs.push_back((qt - exact).cwiseAbs().sum() / (2.0 * 16.0));
    }
    CHECK(errs[0] / errs[1] > 3.0);
    CHECK(errs[0] / errs[1] < 5.0);
    CHECK(errs[1] / errs[2] > 3.0);
    CHECK(errs[1] / errs[2] < 5.0);
}

TEST_CASE("angle folding reconstructs the full rotation") {
    const FoldedRzx id = fold_rzx_angle(0.0);
    CHECK(id.residual == 0.0);
    CHECK_FALSE(id.zx_correction);
    CHECK(std::abs(id.phase - 1.0) < 1e-15);
    const FoldedRzx two_pi = fold_rzx_angle(2.0 * M_PI);
    CHECK(two_pi.residual == doctest::Approx(0.0));
    CHECK_FALSE(two_pi.zx_correction);
    CHECK(std::abs(two_pi.phase - std::complex<double>(-1.0)) < 1e-12);
    Rng rng(29);
    Eigen::Matrix4cd zx = Eigen::Matrix4cd::Zero();
    zx(0, 1) = zx(1, 0) = 1.0;
    zx(2, 3) = zx(3, 2) = -1.0;
    for (int i = 0; i < 100; ++i) {
        const double theta = rng.uniform(-10.0 * M_PI, 10.0 * M_PI);
        const FoldedRzx f = fold_rzx_angle(theta);
        CHECK(f.residual >= -M_PI / 2);
        CHECK(f.residual <= M_PI / 2);
        Eigen::Matrix4cd rebuilt = rzx_gate(f.residual);
        if (f.zx_correction) rebuilt = zx * rebuilt;
        rebuilt *= f.phase;
        CHECK((rebuilt - rzx_gate(theta)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pauli sandwiches reproduce the entangling rotation up to phase") {
    Rng rng(30);
    for (int p1 = 0; p1 < 4; ++p1)
        for (int p2 = 0; p2 < 4; ++p2) {
            const double theta = rng.uniform(-M_PI, M_PI);
            const TwirledRzx tw = gate_twirl(theta, p1, p2);
            CHECK(equal_up_to_phase(twirled_rzx_unitary(tw), rzx_gate(theta), 1e-12));
        }
    // commuting pair Z(x)X leaves the gate exactly invariant
    const TwirledRzx zx = gate_twirl(0.7, 3, 1);
    CHECK(zx.theta_eff == doctest::Approx(0.7));
    CHECK((twirled_rzx_unitary(zx) - rzx_gate(0.7)).cwiseAbs().maxCoeff() < 1e-12);
    // anticommuting pair X(x)I flips the angle
    CHECK(gate_twirl(0.7, 1, 0).theta_eff == doctest::Approx(-0.7));
    CHECK(gate_twirl(0.7, 0, 0).theta_eff == doctest::Approx(0.7));
}

TEST_CASE("gate-level circuit agrees with the fast diagonal path") {
    Rng rng(31);
    const IsingInstance inst = gen_random_instance(3, Connectivity::Full, 1.0, rng);
    const TrotterCircuit circ = build_trotter_circuit(inst, 0.35, 0.8, 4);
    const Eigen::MatrixXd fast = trotter_circuit_probs(circ);
    for (bool use_rzx : {false, true})
        for (bool fold : {false, true}) {
            GateLevelOptions opts;
            opts.use_rzx = use_rzx;
            opts.fold_angles = fold;
            const Eigen::MatrixXd probs = gate_circuit_probs(gate_level_circuit(circ, opts));
            CHECK((probs - fast).cwiseAbs().maxCoeff() < 1e-12);
        }
    GateLevelOptions tw;
    tw.twirl_rng = &rng;
    for (int draw = 0; draw < 5; ++draw) {
        const Eigen::MatrixXd probs = gate_circuit_probs(gate_level_circuit(circ, tw));
        CHECK((probs - fast).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("spam twirling identities") {
    Rng rng(32);
    const IsingInstance inst = gen_random_instance(4, Connectivity::Full, 1.0, rng);
    SpamKey all_plus;
    all_plus.c.assign(4, 1);
    const IsingInstance same = spam_twirl_instance(inst, all_plus);
    for (std::size_t i = 0; i < inst.couplings().size(); ++i)
        CHECK(same.couplings()[i].val == inst.couplings()[i].val);
    CHECK(spam_apply_key(11, all_plus) == 11);
    for (int trial = 0; trial < 10; ++trial) {
        const SpamKey key = random_spam_key(4, rng);
        // involution
        const IsingInstance twice =
            spam_twirl_instance(spam_twirl_instance(inst, key), key);
        for (std::size_t i = 0; i < inst.couplings().size(); ++i)
            CHECK(twice.couplings()[i].val == doctest::Approx(inst.couplings()[i].val));
        for (int j = 0; j < 4; ++j)
            CHECK(twice.fields()[j] == doctest::Approx(inst.fields()[j]));
        for (std::uint32_t s = 0; s < 16; ++s)
            CHECK(spam_apply_key(spam_apply_key(s, key), key) == s);
        // sign-flipped circuit + XOR conjugation = bare statistics
        const IsingInstance flipped = spam_twirl_instance(inst, key);
        const Eigen::MatrixXd bare =
            trotter_circuit_probs(build_trotter_circuit(inst, 0.4, 0.8, 3));
        const Eigen::MatrixXd conj =
            trotter_circuit_probs(build_trotter_circuit(flipped, 0.4, 0.8, 3));
        for (std::uint32_t sp = 0; sp < 16; ++sp)
            for (std::uint32_t s = 0; s < 16; ++s)
                CHECK(conj(spam_apply_key(sp, key), spam_apply_key(s, key)) ==
                      doctest::Approx(bare(sp, s)).epsilon(1e-12));
    }
}

TEST_CASE("readout noise statistics") {
    Rng rng(33);
    std::uint32_t clean = 0b1010;
    CHECK(apply_readout_noise(clean, 4, 0.0, 0.0, rng) == clean);
    CHECK_THROWS(apply_readout_noise(clean, 4, 0.5, 0.0, rng));
    long flips01 = 0, flips10 = 0, n01 = 0, n10 = 0;
    for (int i = 0; i < 250000; ++i) {
        const std::uint32_t noisy = apply_readout_noise(0b0011, 4, 0.05, 0.005, rng);
        for (int b = 0; b < 4; ++b) {
            const bool was = (0b0011 >> b) & 1, is = (noisy >> b) & 1;
            if (was) {
                ++n10;
                if (!is) ++flips10;
            } else {
                ++n01;
                if (is) ++flips01;
            }
        }
    }
    const double r01 = static_cast<double>(flips01) / n01;
    const double r10 = static_cast<double>(flips10) / n10;
    CHECK(std::fabs(r01 - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / n01));
    CHECK(std::fabs(r10 - 0.005) < 3.0 * std::sqrt(0.005 * 0.995 / n10));
    // dense channel matrix agrees with the per-bit definition
    const Eigen::MatrixXd noise = readout_noise_matrix(2, 0.1, 0.3);
    CHECK(noise(0, 0) == doctest::Approx(0.9 * 0.9));
    CHECK(noise(3, 0) == doctest::Approx(0.1 * 0.1));
    CHECK(noise(0, 3) == doctest::Approx(0.3 * 0.3));
    for (int c = 0; c < 4; ++c) CHECK(noise.col(c).sum() == doctest::Approx(1.0));
}

TEST_CASE("leading-order transition formula against exact evolution") {
    Rng rng(34);
    const IsingInstance inst = gen_random_instance(4, Connectivity::Full, 1.0, rng);
    CHECK(perturbative_transition(inst, 0.3, 2.0, 0, 3) == 0.0);
    CHECK_THROWS(perturbative_transition(inst, 0.3, 2.0, 2, 2));
    const double gamma = 1e-3, t = 3.0;
    const EigenBasis basis = eigendecompose(build_hamiltonian(inst, gamma).mat);
    for (std::uint32_t j = 0; j < 16; ++j) {
        const Eigen::VectorXd exact = evolve_exact(basis, t, j);
        for (int b = 0; b < 4; ++b) {
            const std::uint32_t k = j ^ (1u << b);
            const double approx = perturbative_transition(inst, gamma, t, j, k);
            CHECK(std::fabs(approx - exact(k)) / exact(k) < 5e-2);
        }
    }
}

TEST_CASE("long-time average formula") {
    Rng rng(35);
    const IsingInstance inst = gen_random_instance(3, Connectivity::Full, 1.0, rng);
    const EigenBasis basis = eigendecompose(build_hamiltonian(inst, 0.4).mat);
    for (std::uint32_t j = 0; j < 8; ++j) {
        double sum = 0.0;
        for (std::uint32_t kk = 0; kk < 8; ++kk) {
            sum += longtime_transition(basis, j, kk);
            CHECK(longtime_transition(basis, j, kk) ==
                  doctest::Approx(longtime_transition(basis, kk, j)).epsilon(1e-12));
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
    // long-window time average
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(8, 8);
    const int samples = 20000;
    Rng trng(36);
    for (int i = 0; i < samples; ++i) {
        const double t = trng.uniform(0.0, 1e4);
        for (std::uint32_t s = 0; s < 8; ++s) avg.col(s) += evolve_exact(basis, t, s);
    }
    avg /= samples;
    for (std::uint32_t j = 0; j < 8; ++j)
        for (std::uint32_t kk = 0; kk < 8; ++kk)
            CHECK(std::fabs(avg(kk, j) - longtime_transition(basis, j, kk)) < 1e-2);
}

TEST_CASE("reverse annealing symmetry") {
    Rng rng(37);
    const IsingInstance inst = gen_random_instance(3, Connectivity::Chain, 1.0, rng);
    const AnnealResult flat =
        reverse_anneal_propagator(inst, [](double) { return 0.0; }, 4.0, 10);
    CHECK(flat.palindromic);
    for (int s = 0; s < 8; ++s) CHECK(std::abs(flat.U(s, s)) == doctest::Approx(1.0));
    const double tau = 6.0;
    auto tri = [tau](double t) { return 0.5 * (1.0 - std::fabs(2.0 * t / tau - 1.0)); };
    const AnnealResult sym = reverse_anneal_propagator(inst, tri, tau, 50);
    CHECK(sym.palindromic);
    CHECK((sym.U - sym.U.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    const AnnealResult skew = reverse_anneal_propagator(
        inst, [tau](double t) { return 0.4 * t / tau; }, tau, 10);
    CHECK_FALSE(skew.palindromic);
    // weaker transverse-field peaks keep the state put more reliably
    double prev = -1.0;
    for (double peak : {0.3, 0.03, 0.003}) {
        auto sched = [peak, tau](double t) {
            return peak * (1.0 - std::fabs(2.0 * t / tau - 1.0));
        };
        const AnnealResult res = reverse_anneal_propagator(inst, sched, tau, 200);
        double diag = 0.0;
        for (int s = 0; s < 8; ++s) diag += std::norm(res.U(s, s)) / 8.0;
        CHECK(diag > prev);
        prev = diag;
    }
    CHECK(prev > 0.999);
}

}
