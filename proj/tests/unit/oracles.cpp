#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracles {

Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& a) {
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    const Eigen::MatrixXcd as = a * scale;
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    Eigen::MatrixXcd sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = (term * as) / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

double chi2_sf_quadrature(double x, double dof) {
    if (x <= 0.0) return 1.0;
    const long double a = static_cast<long double>(dof) / 2.0L;
    const long double lo = static_cast<long double>(x);
    // density decays like e^{-t/2}; beyond this cutoff the tail is < 1e-60
    const long double hi = std::max(static_cast<long double>(dof), lo) + 400.0L;
    const long double lognorm =
        a * std::log(2.0L) + std::lgamma(static_cast<double>(a));
    auto density = [&](long double t) -> long double {
        if (t <= 0.0L) return 0.0L;
        return std::exp(static_cast<double>((a - 1.0L) * std::log(t) - t / 2.0L -
                                            lognorm));
    };
    const long n = 2000000;  // composite Simpson, even interval count
    const long double h = (hi - lo) / n;
    long double sum = density(lo) + density(hi);
    for (long i = 1; i < n; ++i)
        sum += density(lo + h * i) * ((i % 2) ? 4.0L : 2.0L);
    return static_cast<double>(sum * h / 3.0L);
}

long mixing_time_exact(const Eigen::MatrixXd& P, const Eigen::VectorXd& mu,
                       double eps, long max_steps) {
    const Eigen::Index d = P.rows();
    Eigen::MatrixXd cols = Eigen::MatrixXd::Identity(d, d);
    for (long j = 0; j <= max_steps; ++j) {
        double worst = 0.0;
        for (Eigen::Index s = 0; s < d; ++s)
            worst = std::max(worst, 0.5 * (cols.col(s) - mu).cwiseAbs().sum());
        if (worst <= eps) return j;
        cols = P * cols;
    }
    return -1;
}

double lambda2_abs_general(const Eigen::MatrixXd& P) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(P);
    std::vector<double> mags;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        mags.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(mags.begin(), mags.end());
    return mags[mags.size() - 2];
}

} // namespace oracles
