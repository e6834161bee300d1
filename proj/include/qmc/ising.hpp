#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmc/rng.hpp"

namespace qmc {

// A spin configuration on n spins is an integer code in [0, 2^n).  Bit b
// (counting from the least significant) stores spin n-b: bit value 0 means
// s = +1 and bit value 1 means s = -1, so code 0 is the all-up state.
inline int spin_of(std::uint32_t code, int n, int j) {
    return 1 - 2 * static_cast<int>((code >> (n - j)) & 1u);
}

inline std::uint32_t flip_code(std::uint32_t code, int n, int j) {
    return code ^ (std::uint32_t{1} << (n - j));
}

enum class Connectivity { Full, Chain, Custom };

std::string to_string(Connectivity c);
Connectivity connectivity_from_string(const std::string& s);

struct Coupling {
    int j, k;   // 1-indexed, j > k
    double val;
};

class IsingInstance {
public:
    IsingInstance(int n, std::vector<Coupling> couplings,
                  std::vector<double> fields,
                  Connectivity conn = Connectivity::Custom,
                  std::uint64_t seed = 0);

    int n() const { return n_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }
    const std::vector<double>& fields() const { return fields_; }
    Connectivity connectivity() const { return conn_; }
    std::uint64_t seed() const { return seed_; }

    // couplings touching site j (1-indexed): list of (other site, J value)
    const std::vector<std::pair<int, double>>& neighbors(int j) const {
        return adj_[j - 1];
    }

private:
    int n_;
    std::vector<Coupling> couplings_;
    std::vector<double> fields_;
    Connectivity conn_;
    std::uint64_t seed_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
};

struct BoltzmannTable {
    double T = 0.0;
    std::vector<double> energies;       // length 2^n
    std::vector<double> probabilities;  // length 2^n, sums to 1
};

double energy(const IsingInstance& inst, std::uint32_t code);
std::vector<double> energy_table(const IsingInstance& inst);

// energy(code with spin flip_index flipped) - energy(code), in O(degree)
double delta_energy(const IsingInstance& inst, std::uint32_t code, int flip_index);

double magnetization(std::uint32_t code, int n);

// sqrt(n) / sqrt(sum J^2 + sum h^2)
double alpha(const IsingInstance& inst);

// exact ensemble mean of alpha over IID Normal(0, sigma^2) coefficients
double expected_alpha(int n, Connectivity conn, double sigma);

BoltzmannTable boltzmann(const IsingInstance& inst, double T);

double thermal_average(const IsingInstance& inst, double T,
                       const std::function<double(std::uint32_t)>& observable);

IsingInstance gen_random_instance(int n, Connectivity conn, double sigma, Rng& rng);

// (n+1)-spin zero-field instance; site n+1 couples to each j with J = h_j
IsingInstance ghost_spin_transform(const IsingInstance& inst);

IsingInstance load_instance(const std::string& path);
void save_instance(const IsingInstance& inst, const std::string& path);
IsingInstance instance_from_json_text(const std::string& text);
std::string instance_to_json_text(const IsingInstance& inst);

} // namespace qmc
