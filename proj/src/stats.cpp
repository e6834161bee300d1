#include "qmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qmc/kernels.hpp"

namespace qmc {

namespace {

// regularized lower incomplete gamma P(a, x) by series, for x < a + 1
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < 10000; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// regularized upper incomplete gamma Q(a, x) by continued fraction (Lentz),
// for x >= a + 1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double quantile_linear(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

} // namespace

double chi2_sf(double x, double dof) {
    if (x < 0.0 || dof < 1.0) throw std::invalid_argument("chi2_sf domain error");
    if (x == 0.0) return 1.0;
    const double a = dof / 2.0;
    const double xx = x / 2.0;
    if (xx < a + 1.0) return 1.0 - gamma_p_series(a, xx);
    return gamma_q_cf(a, xx);
}

BowkerReport bowker(const Eigen::MatrixXd& count_matrix, BowkerVariant variant) {
    if (count_matrix.rows() != count_matrix.cols())
        throw std::invalid_argument("count matrix must be square");
    const Eigen::Index d = count_matrix.rows();
    BowkerReport rep;
    rep.variant = variant;
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < j; ++k) {
            const double mjk = count_matrix(j, k), mkj = count_matrix(k, j);
            const double tot = mjk + mkj;
            if (tot <= 0.0) {
                ++rep.n_empty_pairs;
                continue;
            }
            rep.chi2 += (mjk - mkj) * (mjk - mkj) / tot;
        }
    const int pairs = static_cast<int>(d * (d - 1) / 2);
    rep.dof = (variant == BowkerVariant::Traditional) ? pairs
                                                      : pairs - rep.n_empty_pairs;
    rep.p_value = rep.dof >= 1 ? chi2_sf(rep.chi2, rep.dof) : 1.0;
    return rep;
}

std::string bowker_report_json(const BowkerReport& rep) {
    std::ostringstream out;
    out.precision(12);
    out << "{\"chi2\": " << rep.chi2 << ", \"dof\": " << rep.dof
        << ", \"p\": " << rep.p_value << ", \"variant\": \""
        << (rep.variant == BowkerVariant::Traditional ? "traditional" : "modified")
        << "\", \"n_empty\": " << rep.n_empty_pairs << "}";
    return out.str();
}

BootstrapResult bootstrap_basic(const std::vector<double>& data,
                                const Statistic& statistic, Rng& rng,
                                int n_resamples, double level) {
    if (data.empty()) throw std::invalid_argument("empty data");
    if (level <= 0.0 || level >= 1.0) throw std::invalid_argument("level outside (0,1)");
    BootstrapResult res;
    res.point = statistic(data);
    std::vector<double> stats(n_resamples);
    std::vector<double> resample(data.size());
    for (int r = 0; r < n_resamples; ++r) {
        for (std::size_t i = 0; i < data.size(); ++i)
            resample[i] = data[rng.uniform_int(data.size())];
        stats[r] = statistic(resample);
    }
    const double qhi = quantile_linear(stats, (1.0 + level) / 2.0);
    const double qlo = quantile_linear(stats, (1.0 - level) / 2.0);
    res.ci_low = 2.0 * res.point - qhi;
    res.ci_high = 2.0 * res.point - qlo;
    return res;
}

double tv_error(const Eigen::MatrixXd& q_a, const Eigen::MatrixXd& q_b) {
    if (q_a.rows() != q_b.rows() || q_a.cols() != q_b.cols())
        throw std::invalid_argument("shape mismatch");
    const double l1 = kernels::l1_diff(q_a.data(), q_b.data(),
                                       static_cast<std::size_t>(q_a.size()));
    return l1 / (2.0 * static_cast<double>(q_a.rows()));
}

FitResult fit_exponential(const std::vector<double>& ns,
                          const std::vector<double>& means,
                          const std::vector<double>& sems) {
    const std::size_t m = ns.size();
    if (m < 3 || means.size() != m || sems.size() != m)
        throw std::invalid_argument("need at least three matching points");
    if (*std::max_element(ns.begin(), ns.end()) ==
        *std::min_element(ns.begin(), ns.end()))
        throw std::invalid_argument("degenerate design: all n equal");
    for (double s : sems)
        if (s <= 0.0) throw std::invalid_argument("standard errors must be positive");

    // seed from an unweighted straight-line fit of log2(mean) vs n
    double k0 = 0.5, loga0 = 0.0;
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (means[i] <= 0.0) continue;
            const double y = std::log2(means[i]);
            sx += ns[i];
            sy += y;
            sxx += ns[i] * ns[i];
            sxy += ns[i] * y;
            ++cnt;
        }
        if (cnt >= 2 && cnt * sxx - sx * sx > 0) {
            const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
            k0 = -slope;
            loga0 = (sy - slope * sx) / cnt;
        }
    }
    const double ln2 = std::log(2.0);
    double a = std::exp2(loga0), k = k0;

    auto rss = [&](double aa, double kk) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = aa * std::exp2(-kk * ns[i]) - means[i];
            s += r * r / (sems[i] * sems[i]);
        }
        return s;
    };

    FitResult res;
    Eigen::Matrix2d jtj;
    double cur = rss(a, k);
    for (int it = 1; it <= 200; ++it) {
        res.iterations = it;
        jtj.setZero();
        Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < m; ++i) {
            const double f = std::exp2(-k * ns[i]);
            const double r = a * f - means[i];
            const double w = 1.0 / (sems[i] * sems[i]);
            Eigen::Vector2d grad(f, -a * ns[i] * ln2 * f);
            jtj += w * grad * grad.transpose();
            jtr += w * grad * r;
        }
        Eigen::Vector2d step = jtj.ldlt().solve(-jtr);
        // step-halving line search
        double scale = 1.0;
        double na = a, nk = k, nrss = cur;
        for (int h = 0; h < 30; ++h) {
            const double ta = a + scale * step(0), tk = k + scale * step(1);
            const double trss = rss(ta, tk);
            if (trss <= cur) {
                na = ta;
                nk = tk;
                nrss = trss;
                break;
            }
            scale *= 0.5;
        }
        const bool done = std::fabs(na - a) <= 1e-14 * std::max(1.0, std::fabs(a)) &&
                          std::fabs(nk - k) <= 1e-14 * std::max(1.0, std::fabs(k));
        a = na;
        k = nk;
        cur = nrss;
        if (done) break;
    }
    res.prefactor = a;
    res.k = k;
    res.weighted_rss = cur;
    const Eigen::Matrix2d cov = jtj.inverse();
    res.k_sigma = std::sqrt(std::max(cov(1, 1), 0.0));
    return res;
}

Eigen::MatrixXd iid_subsample(TransitionCache& cache, Rng& rng) {
    const std::uint32_t dim = std::uint32_t{1} << cache.n();
    Eigen::MatrixXd mmat = Eigen::MatrixXd::Zero(dim, dim);
    if (cache.n_circuits() < 1) return mmat;
    for (;;) {
        const std::uint32_t l =
            static_cast<std::uint32_t>(rng.uniform_int(cache.n_circuits()));
        const std::uint32_t k = static_cast<std::uint32_t>(rng.uniform_int(dim));
        std::uint32_t j = 0;
        if (!cache.draw(l, k, rng, j)) break;
        mmat(j, k) += 1.0;
    }
    return mmat;
}

Eigen::MatrixXd iid_subsample(const TransitionCounts& counts, Rng& rng) {
    TransitionCache cache(counts);
    return iid_subsample(cache, rng);
}

Trajectory markov_chain_subsample(TransitionCache& cache, const IsingInstance& inst,
                                  double T, AcceptanceRule rule, Rng& rng) {
    if (T <= 0.0) throw std::invalid_argument("temperature must be positive");
    const std::uint32_t dim = std::uint32_t{1} << inst.n();
    const std::vector<double> etab = energy_table(inst);
    Trajectory traj;
    std::uint32_t cur = static_cast<std::uint32_t>(rng.uniform_int(dim));
    traj.codes.push_back(cur);
    for (;;) {
        const std::uint32_t l =
            static_cast<std::uint32_t>(rng.uniform_int(cache.n_circuits()));
        std::uint32_t prop = 0;
        if (!cache.draw(l, cur, rng, prop)) break;
        const double a = acceptance(rule, etab[prop] - etab[cur], T, 1.0);
        const bool accept = rng.bernoulli(a);
        if (accept) cur = prop;
        traj.codes.push_back(cur);
        traj.accepted.push_back(accept ? 1 : 0);
    }
    return traj;
}

Trajectory markov_chain_subsample(const TransitionCounts& counts,
                                  const IsingInstance& inst, double T,
                                  AcceptanceRule rule, Rng& rng) {
    TransitionCache cache(counts);
    return markov_chain_subsample(cache, inst, T, rule, rng);
}

} // namespace qmc
