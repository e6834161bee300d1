#include "qmc/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace qmc {

double detailed_balance_check(const Eigen::MatrixXd& P, const Eigen::VectorXd& p) {
    if (P.rows() != p.size()) throw std::invalid_argument("shape mismatch");
    double worst = 0.0;
    for (Eigen::Index j = 0; j < P.rows(); ++j)
        for (Eigen::Index k = 0; k < P.cols(); ++k)
            worst = std::max(worst, std::fabs(P(j, k) * p(k) - P(k, j) * p(j)));
    return worst;
}

namespace {

GapResult symmetrize_and_solve(const Eigen::MatrixXd& P, const Eigen::VectorXd& p) {
    const Eigen::VectorXd sq = p.cwiseSqrt();
    Eigen::MatrixXd L = sq.cwiseInverse().asDiagonal() * P * sq.asDiagonal();
    GapResult res;
    res.method = GapMethod::DenseSymmetric;
    res.asymmetry = (L - L.transpose()).cwiseAbs().maxCoeff();
    L = 0.5 * (L + L.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();  // ascending
    // second-largest |lambda|: drop one eigenvalue closest to 1
    Eigen::Index top = ev.size() - 1;
    double second = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (i == top) continue;
        second = std::max(second, std::fabs(ev(i)));
    }
    res.lambda2_abs = std::min(second, 1.0);
    res.delta = 1.0 - res.lambda2_abs;
    return res;
}

} // namespace

GapResult absolute_spectral_gap(const Eigen::MatrixXd& P, const Eigen::VectorXd& p,
                                double db_tolerance) {
    if (p.minCoeff() <= 0.0)
        throw std::invalid_argument("stationary distribution must be strictly positive");
    if ((P * p - p).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("p is not stationary for P");
    const double db = detailed_balance_check(P, p);
    if (db > db_tolerance)
        throw std::invalid_argument("detailed balance violated beyond tolerance");
    return symmetrize_and_solve(P, p);
}

GapResult estimated_spectral_gap(const Eigen::MatrixXd& P_hat,
                                 const Eigen::VectorXd& p) {
    if (p.minCoeff() <= 0.0)
        throw std::invalid_argument("stationary distribution must be strictly positive");
    return symmetrize_and_solve(P_hat, p);
}

GapResult reversible_spectral_gap(const Eigen::MatrixXd& P) {
    if (P.rows() != P.cols()) throw std::invalid_argument("P must be square");
    // under detailed balance, D^{-1/2} P D^{1/2} = sqrt(P o P^T) entrywise
    const Eigen::MatrixXd L = P.cwiseProduct(P.transpose()).cwiseSqrt();
    GapResult res;
    res.method = GapMethod::DenseSymmetric;
    res.asymmetry = 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const Eigen::Index top = ev.size() - 1;
    double second = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (i == top) continue;
        second = std::max(second, std::fabs(ev(i)));
    }
    res.lambda2_abs = std::min(second, 1.0);
    res.delta = 1.0 - res.lambda2_abs;
    return res;
}

LinearOperator deflated_action(const LinearOperator& P_action, const Eigen::VectorXd& p) {
    return [P_action, p](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return P_action(x) - p * x.sum();
    };
}

LinearOperator symmetrized_deflated_action(const LinearOperator& P_action,
                                           const Eigen::VectorXd& p) {
    const Eigen::VectorXd sq = p.cwiseSqrt();
    const Eigen::VectorXd isq = sq.cwiseInverse();
    return [P_action, sq, isq](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd y = isq.cwiseProduct(P_action(sq.cwiseProduct(x)));
        y -= sq * sq.dot(x);
        return y;
    };
}

PowerIterationResult dominant_abs_eigenvalue(const LinearOperator& op, int dim,
                                             double tolerance, int max_iters,
                                             Rng& rng) {
    if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = rng.normal();
    x.normalize();
    PowerIterationResult res;
    double prev = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        Eigen::VectorXd y = op(x);
        const double norm = y.norm();
        res.iterations = it;
        if (norm == 0.0) {
            res.value = 0.0;
            res.converged = true;
            return res;
        }
        // for symmetric operators |x.y| is the |Rayleigh quotient|
        const double rq = std::fabs(x.dot(y));
        x = y / norm;
        if (it > 1 && std::fabs(rq - prev) <= tolerance * std::max(1.0, std::fabs(rq))) {
            res.value = rq;
            res.converged = true;
            return res;
        }
        prev = rq;
        res.value = rq;
    }
    return res;  // converged stays false; partial estimate
}

GapResult absolute_spectral_gap_power(const LinearOperator& P_action,
                                      const Eigen::VectorXd& p, double tolerance,
                                      int max_iters, Rng* rng) {
    Rng local(12345);
    Rng& r = rng ? *rng : local;
    const LinearOperator op = symmetrized_deflated_action(P_action, p);
    const PowerIterationResult pr =
        dominant_abs_eigenvalue(op, static_cast<int>(p.size()), tolerance, max_iters, r);
    GapResult res;
    res.method = GapMethod::PowerDeflated;
    res.lambda2_abs = std::min(pr.value, 1.0);
    res.delta = 1.0 - res.lambda2_abs;
    return res;
}

} // namespace qmc
