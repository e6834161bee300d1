#include "qmc/ising.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qmc {

std::string to_string(Connectivity c) {
    switch (c) {
        case Connectivity::Full: return "full";
        case Connectivity::Chain: return "chain";
        default: return "custom";
    }
}

Connectivity connectivity_from_string(const std::string& s) {
    if (s == "full") return Connectivity::Full;
    if (s == "chain") return Connectivity::Chain;
    if (s == "custom") return Connectivity::Custom;
    throw std::invalid_argument("unknown connectivity: " + s);
}

IsingInstance::IsingInstance(int n, std::vector<Coupling> couplings,
                             std::vector<double> fields, Connectivity conn,
                             std::uint64_t seed)
    : n_(n), couplings_(std::move(couplings)), fields_(std::move(fields)),
      conn_(conn), seed_(seed) {
    if (n_ < 1 || n_ > 30) throw std::invalid_argument("bad spin count");
    if (static_cast<int>(fields_.size()) != n_)
        throw std::invalid_argument("fields length != n");
    std::set<std::pair<int, int>> seen;
    for (auto& c : couplings_) {
        if (c.k < 1 || c.j <= c.k || c.j > n_)
            throw std::invalid_argument("coupling indices must satisfy 1 <= k < j <= n");
        if (!seen.insert({c.j, c.k}).second)
            throw std::invalid_argument("duplicate coupling");
        if (conn_ == Connectivity::Chain && c.j - c.k != 1)
            throw std::invalid_argument("chain instance has a non-nearest-neighbor coupling");
    }
    adj_.resize(n_);
    for (auto& c : couplings_) {
        adj_[c.j - 1].push_back({c.k, c.val});
        adj_[c.k - 1].push_back({c.j, c.val});
    }
}

double energy(const IsingInstance& inst, std::uint32_t code) {
    const int n = inst.n();
    double e = 0.0;
    for (const auto& c : inst.couplings())
        e -= c.val * spin_of(code, n, c.j) * spin_of(code, n, c.k);
    for (int j = 1; j <= n; ++j)
        e -= inst.fields()[j - 1] * spin_of(code, n, j);
    return e;
}

std::vector<double> energy_table(const IsingInstance& inst) {
    const std::uint32_t dim = 1u << inst.n();
    std::vector<double> tab(dim);
    for (std::uint32_t s = 0; s < dim; ++s) tab[s] = energy(inst, s);
    return tab;
}

double delta_energy(const IsingInstance& inst, std::uint32_t code, int flip_index) {
    const int n = inst.n();
    if (flip_index < 1 || flip_index > n)
        throw std::out_of_range("flip index out of range");
    const int sj = spin_of(code, n, flip_index);
    double local = inst.fields()[flip_index - 1];
    for (const auto& [k, J] : inst.neighbors(flip_index))
        local += J * spin_of(code, n, k);
    // E depends on s_j as -s_j * local; flipping negates the contribution.
    return 2.0 * sj * local;
}

double magnetization(std::uint32_t code, int n) {
    double m = 0.0;
    for (int j = 1; j <= n; ++j) m += spin_of(code, n, j);
    return m / n;
}

double alpha(const IsingInstance& inst) {
    double ss = 0.0;
    for (const auto& c : inst.couplings()) ss += c.val * c.val;
    for (double h : inst.fields()) ss += h * h;
    if (ss == 0.0) throw std::invalid_argument("all-zero instance has undefined normalization");
    return std::sqrt(static_cast<double>(inst.n())) / std::sqrt(ss);
}

double expected_alpha(int n, Connectivity conn, double sigma) {
    const double N = (conn == Connectivity::Chain)
                         ? 2.0 * n - 1.0
                         : n + 0.5 * n * (n - 1.0);
    // E[1/chi_N] = Gamma((N-1)/2) / (sqrt(2) Gamma(N/2))
    const double lg = std::lgamma((N - 1.0) / 2.0) - std::lgamma(N / 2.0);
    return std::sqrt(static_cast<double>(n)) / (sigma * std::sqrt(2.0)) * std::exp(lg);
}

BoltzmannTable boltzmann(const IsingInstance& inst, double T) {
    if (T <= 0.0) throw std::invalid_argument("temperature must be positive");
    BoltzmannTable tab;
    tab.T = T;
    tab.energies = energy_table(inst);
    const double emin = *std::min_element(tab.energies.begin(), tab.energies.end());
    tab.probabilities.resize(tab.energies.size());
    double z = 0.0;
    for (std::size_t s = 0; s < tab.energies.size(); ++s) {
        tab.probabilities[s] = std::exp(-(tab.energies[s] - emin) / T);
        z += tab.probabilities[s];
    }
    for (double& p : tab.probabilities) p /= z;
    return tab;
}

double thermal_average(const IsingInstance& inst, double T,
                       const std::function<double(std::uint32_t)>& observable) {
    const BoltzmannTable tab = boltzmann(inst, T);
    double acc = 0.0;
    for (std::size_t s = 0; s < tab.probabilities.size(); ++s)
        acc += tab.probabilities[s] * observable(static_cast<std::uint32_t>(s));
    return acc;
}

IsingInstance gen_random_instance(int n, Connectivity conn, double sigma, Rng& rng) {
    if (conn == Connectivity::Custom)
        throw std::invalid_argument("random generation needs full or chain connectivity");
    std::vector<Coupling> cs;
    if (conn == Connectivity::Full) {
        for (int j = 2; j <= n; ++j)
            for (int k = 1; k < j; ++k)
                cs.push_back({j, k, rng.normal(0.0, sigma)});
    } else {
        for (int j = 2; j <= n; ++j)
            cs.push_back({j, j - 1, rng.normal(0.0, sigma)});
    }
    std::vector<double> hs(n);
    for (int j = 0; j < n; ++j) hs[j] = rng.normal(0.0, sigma);
    return IsingInstance(n, std::move(cs), std::move(hs), conn);
}

IsingInstance ghost_spin_transform(const IsingInstance& inst) {
    const int n = inst.n();
    std::vector<Coupling> cs = inst.couplings();
    for (int j = 1; j <= n; ++j)
        if (inst.fields()[j - 1] != 0.0)
            cs.push_back({n + 1, j, inst.fields()[j - 1]});
    return IsingInstance(n + 1, std::move(cs), std::vector<double>(n + 1, 0.0),
                         Connectivity::Custom, inst.seed());
}

IsingInstance instance_from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    const Connectivity conn =
        connectivity_from_string(j.at("connectivity").get<std::string>());
    std::vector<Coupling> cs;
    for (const auto& row : j.at("couplings"))
        cs.push_back({row.at(0).get<int>(), row.at(1).get<int>(), row.at(2).get<double>()});
    auto hs = j.at("fields").get<std::vector<double>>();
    std::uint64_t seed = j.value("seed", std::uint64_t{0});
    return IsingInstance(n, std::move(cs), std::move(hs), conn, seed);
}

std::string instance_to_json_text(const IsingInstance& inst) {
    nlohmann::json j;
    j["n"] = inst.n();
    j["connectivity"] = to_string(inst.connectivity());
    auto cs = nlohmann::json::array();
    for (const auto& c : inst.couplings())
        cs.push_back({c.j, c.k, c.val});
    j["couplings"] = cs;
    j["fields"] = inst.fields();
    j["seed"] = inst.seed();
    return j.dump(2) + "\n";
}

IsingInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return instance_from_json_text(ss.str());
}

void save_instance(const IsingInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << instance_to_json_text(inst);
}

} // namespace qmc
