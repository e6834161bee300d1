#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"
#include "qmc/chains.hpp"
#include "qmc/spectral.hpp"

using namespace qmc;

namespace {

LinearOperator matrix_action(const Eigen::MatrixXd& m) {
    return [m](const Eigen::VectorXd& x) -> Eigen::VectorXd { return m * x; };
}

} // namespace

TEST_SUITE("spectral") {

TEST_CASE("detailed balance residual") {
    Eigen::MatrixXd p(2, 2);
    p << 0.9, 0.2, 0.1, 0.8;
    Eigen::VectorXd mu(2);
    mu << 2.0 / 3.0, 1.0 / 3.0;
    CHECK(detailed_balance_check(p, mu) < 1e-15);
    mu << 0.5, 0.5;
    CHECK(detailed_balance_check(p, mu) == doctest::Approx(0.05));
}

TEST_CASE("two-state chain has a closed-form gap") {
    // P = [[1-a, b], [a, 1-b]]: eigenvalues 1 and 1-a-b
    const double a = 0.3, b = 0.2;
    Eigen::MatrixXd p(2, 2);
    p << 1 - a, b, a, 1 - b;
    Eigen::VectorXd mu(2);
    mu << b / (a + b), a / (a + b);
    const GapResult g = absolute_spectral_gap(p, mu);
    CHECK(g.method == GapMethod::DenseSymmetric);
    CHECK(g.lambda2_abs == doctest::Approx(1 - a - b).epsilon(1e-12));
    CHECK(g.delta == doctest::Approx(a + b).epsilon(1e-12));
    CHECK(g.asymmetry < 1e-12);
}

TEST_CASE("gap of a reversible chain matches a general eigensolver") {
    Rng rng(51);
    for (int trial = 0; trial < 4; ++trial) {
        const IsingInstance inst =
            gen_random_instance(4, Connectivity::Full, 1.0, rng);
        const double T = 0.8 + 0.4 * trial;
        const TransitionMatrix tm = build_transition_matrix(
            classical_proposal_matrix(ProposalKind::Uniform, 4), inst, T,
            AcceptanceRule::MetropolisHastings);
        const Eigen::VectorXd mu = boltzmann_vec(inst, T);
        const GapResult g = absolute_spectral_gap(tm.P, mu);
        CHECK(g.lambda2_abs ==
              doctest::Approx(oracles::lambda2_abs_general(tm.P)).epsilon(1e-9));
        CHECK(g.delta >= 0.0);
        CHECK(g.delta <= 1.0);
        // the weight-free route sees the same spectrum on reversible chains
        const GapResult r = reversible_spectral_gap(tm.P);
        CHECK(r.lambda2_abs == doctest::Approx(g.lambda2_abs).epsilon(1e-10));
    }
}

TEST_CASE("chains violating detailed balance are rejected") {
    Eigen::MatrixXd p(3, 3);
    // doubly stochastic but not symmetric: stationary uniform, not reversible
    p << 0.1, 0.8, 0.1,
         0.1, 0.1, 0.8,
         0.8, 0.1, 0.1;
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    CHECK_THROWS(absolute_spectral_gap(p, mu));
}

TEST_CASE("deflated operators zero out the stationary mode") {
    Rng rng(52);
    const IsingInstance inst = gen_random_instance(3, Connectivity::Chain, 1.0, rng);
    const double T = 1.1;
    const TransitionMatrix tm = build_transition_matrix(
        classical_proposal_matrix(ProposalKind::Local, 3), inst, T,
        AcceptanceRule::Gibbs);
    const Eigen::VectorXd mu = boltzmann_vec(inst, T);
    const LinearOperator defl = deflated_action(matrix_action(tm.P), mu);
    // P mu = mu, so the deflated action annihilates mu
    CHECK(defl(mu).cwiseAbs().maxCoeff() < 1e-14);
    const Eigen::VectorXd sq = mu.cwiseSqrt();
    const LinearOperator sym = symmetrized_deflated_action(matrix_action(tm.P), mu);
    CHECK(sym(sq).cwiseAbs().maxCoeff() < 1e-14);
    // the symmetrized deflated operator is symmetric: check via random vectors
    Eigen::VectorXd x(8), y(8);
    for (int i = 0; i < 8; ++i) {
        x(i) = rng.normal();
        y(i) = rng.normal();
    }
    CHECK(y.dot(sym(x)) == doctest::Approx(x.dot(sym(y))).epsilon(1e-10));
}

TEST_CASE("power iteration on a known symmetric matrix") {
    Eigen::MatrixXd m(3, 3);
    m << 2.0, 1.0, 0.0,
         1.0, 3.0, 1.0,
         0.0, 1.0, 2.0;
    Rng rng(53);
    const PowerIterationResult r =
        dominant_abs_eigenvalue(matrix_action(m), 3, 1e-10, 100000, rng);
    CHECK(r.converged);
    // spectrum of this tridiagonal matrix is {1, 2, 4}
    CHECK(r.value == doctest::Approx(4.0).epsilon(1e-8));
    // dominant negative eigenvalue is found by absolute value
    const PowerIterationResult rn =
        dominant_abs_eigenvalue(matrix_action(-m), 3, 1e-10, 100000, rng);
    CHECK(rn.converged);
    CHECK(rn.value == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("matrix-free gap agrees with the dense route") {
    Rng rng(54);
    for (int trial = 0; trial < 3; ++trial) {
        const IsingInstance inst =
            gen_random_instance(5, trial % 2 ? Connectivity::Chain : Connectivity::Full,
                                1.0, rng);
        const double T = 1.0 + 0.5 * trial;
        const TransitionMatrix tm = build_transition_matrix(
            classical_proposal_matrix(ProposalKind::Local, 5), inst, T,
            AcceptanceRule::MetropolisHastings);
        const Eigen::VectorXd mu = boltzmann_vec(inst, T);
        const GapResult dense = absolute_spectral_gap(tm.P, mu);
        const GapResult power = absolute_spectral_gap_power(matrix_action(tm.P), mu);
        CHECK(power.method == GapMethod::PowerDeflated);
        CHECK(power.lambda2_abs == doctest::Approx(dense.lambda2_abs).epsilon(1e-6));
        CHECK(power.delta == doctest::Approx(dense.delta).epsilon(1e-6));
    }
}

TEST_CASE("gap bounds the exact worst-case mixing time") {
    Rng rng(55);
    const IsingInstance inst = gen_random_instance(4, Connectivity::Full, 1.0, rng);
    const double T = 1.5, eps = 0.01;
    const TransitionMatrix tm = lazy(build_transition_matrix(
        classical_proposal_matrix(ProposalKind::Uniform, 4), inst, T,
        AcceptanceRule::MetropolisHastings));
    const Eigen::VectorXd mu = boltzmann_vec(inst, T);
    const GapResult g = absolute_spectral_gap(tm.P, mu);
    const MixingTimeBounds b = mixing_time_bounds(g.delta, mu.minCoeff(), eps);
    const long exact = oracles::mixing_time_exact(tm.P, mu, eps, 1000000);
    CHECK(static_cast<double>(exact) >= std::floor(b.lower));
    CHECK(static_cast<double>(exact) <= std::ceil(b.upper));
}

}
