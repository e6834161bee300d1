#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qmc/ising.hpp"

using namespace qmc;

TEST_SUITE("ising") {

TEST_CASE("bit encoding round-trips and code 0 is all-up") {
    for (int n = 1; n <= 12; n += 11) {
        const std::uint32_t dim = 1u << n;
        for (std::uint32_t code = 0; code < dim; ++code) {
            std::uint32_t rebuilt = 0;
            for (int j = 1; j <= n; ++j) {
                const int s = spin_of(code, n, j);
                CHECK((s == 1 || s == -1));
                if (s == -1) rebuilt |= std::uint32_t{1} << (n - j);
            }
            CHECK(rebuilt == code);
        }
        for (int j = 1; j <= n; ++j) CHECK(spin_of(0, n, j) == 1);
    }
}

TEST_CASE("energy on tiny hand-checked cases") {
    IsingInstance two(2, {{2, 1, 1.0}}, {0.0, 0.0});
    CHECK(energy(two, 0) == doctest::Approx(-1.0));
    IsingInstance zero(3, {}, {0.0, 0.0, 0.0});
    for (std::uint32_t s = 0; s < 8; ++s) CHECK(energy(zero, s) == 0.0);
}

TEST_CASE("delta_energy matches full recomputation") {
    Rng rng(3);
    const IsingInstance inst = gen_random_instance(6, Connectivity::Full, 1.0, rng);
    for (std::uint32_t code = 0; code < 64; ++code)
        for (int j = 1; j <= 6; ++j) {
            const double direct =
                energy(inst, flip_code(code, 6, j)) - energy(inst, code);
            CHECK(delta_energy(inst, code, j) == doctest::Approx(direct).epsilon(1e-12));
            CHECK(delta_energy(inst, code, j) +
                      delta_energy(inst, flip_code(code, 6, j), j) ==
                  doctest::Approx(0.0));
        }
    IsingInstance one(1, {}, {1.0});
    CHECK(delta_energy(one, 0, 1) == doctest::Approx(2.0));
    CHECK_THROWS(delta_energy(one, 0, 2));
}

TEST_CASE("magnetization basics") {
    CHECK(magnetization(0, 4) == doctest::Approx(1.0));
    CHECK(magnetization(0b0011, 4) == doctest::Approx(0.0));
    CHECK(magnetization(0b011, 3) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("alpha closed forms") {
    CHECK(alpha(IsingInstance(1, {}, {1.0})) == doctest::Approx(1.0));
    CHECK(alpha(IsingInstance(2, {{2, 1, 1.0}}, {0.0, 0.0})) ==
          doctest::Approx(std::sqrt(2.0)));
    std::vector<Coupling> cs;
    for (int j = 2; j <= 4; ++j)
        for (int k = 1; k < j; ++k) cs.push_back({j, k, (j + k) % 2 ? 1.0 : -1.0});
    CHECK(alpha(IsingInstance(4, cs, {1.0, -1.0, 1.0, -1.0})) ==
          doctest::Approx(2.0 / std::sqrt(10.0)));
    CHECK_THROWS(alpha(IsingInstance(2, {}, {0.0, 0.0})));
}

TEST_CASE("expected_alpha asymptotics and Monte Carlo check") {
    // large-n limits
    CHECK(expected_alpha(400, Connectivity::Full, 1.0) ==
          doctest::Approx(std::sqrt(2.0 / 400.0)).epsilon(0.01));
    CHECK(expected_alpha(400, Connectivity::Chain, 1.0) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));
    // Monte Carlo oracle at two (n, connectivity) combinations
    for (auto conn : {Connectivity::Full, Connectivity::Chain}) {
        Rng rng(17);
        const int n = 5;
        const int trials = 100000;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < trials; ++i) {
            const double a = alpha(gen_random_instance(n, conn, 1.0, rng));
            sum += a;
            sumsq += a * a;
        }
        const double mean = sum / trials;
        const double sem =
            std::sqrt((sumsq / trials - mean * mean) / (trials - 1.0));
        CHECK(std::fabs(mean - expected_alpha(n, conn, 1.0)) < 3.0 * sem);
    }
}

TEST_CASE("boltzmann normalization and infinite-temperature limit") {
    Rng rng(5);
    const IsingInstance inst = gen_random_instance(5, Connectivity::Chain, 1.0, rng);
    for (double T : {0.01, 0.1, 1.0}) {
        const BoltzmannTable tab = boltzmann(inst, T);
        double sum = 0.0;
        for (double p : tab.probabilities) {
            // exp(-(E - Emin)/T) underflows to exactly 0 at very low T
            CHECK(p >= 0.0);
            if (T >= 0.5) CHECK(p > 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    const BoltzmannTable hot = boltzmann(inst, 1e9);
    for (double p : hot.probabilities)
        CHECK(p == doctest::Approx(1.0 / 32.0).epsilon(1e-6));
    CHECK_THROWS(boltzmann(inst, 0.0));
}

TEST_CASE("thermal average of m vanishes without fields") {
    Rng rng(6);
    IsingInstance nofield(4, gen_random_instance(4, Connectivity::Full, 1.0, rng).couplings(),
                          {0.0, 0.0, 0.0, 0.0});
    const double m = thermal_average(nofield, 0.7, [&](std::uint32_t c) {
        return magnetization(c, 4);
    });
    CHECK(m == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("random instance generation: coefficient counts and determinism") {
    Rng a(42), b(42);
    const IsingInstance f1 = gen_random_instance(6, Connectivity::Full, 1.0, a);
    const IsingInstance f2 = gen_random_instance(6, Connectivity::Full, 1.0, b);
    CHECK(f1.couplings().size() == 15);
    for (std::size_t i = 0; i < f1.couplings().size(); ++i)
        CHECK(f1.couplings()[i].val == f2.couplings()[i].val);
    Rng c(1);
    const IsingInstance ch = gen_random_instance(6, Connectivity::Chain, 1.0, c);
    CHECK(ch.couplings().size() + ch.fields().size() == 11);
}

TEST_CASE("sign-flip covariance under global spin inversion") {
    Rng rng(9);
    const IsingInstance inst = gen_random_instance(5, Connectivity::Full, 1.0, rng);
    // E(-s) flips the field term but leaves the pair term alone
    std::vector<double> negh = inst.fields();
    for (auto& h : negh) h = -h;
    const IsingInstance flipped(5, inst.couplings(), negh);
    for (std::uint32_t s = 0; s < 32; ++s)
        CHECK(energy(inst, s) == doctest::Approx(energy(flipped, ~s & 31u)));
}

TEST_CASE("ghost spin transform") {
    Rng rng(10);
    const IsingInstance inst = gen_random_instance(4, Connectivity::Full, 1.0, rng);
    const IsingInstance ghost = ghost_spin_transform(inst);
    CHECK(ghost.n() == 5);
    for (double h : ghost.fields()) CHECK(h == 0.0);
    // ghost fixed at +1 (low bit 0) reproduces the original energies
    for (std::uint32_t s = 0; s < 16; ++s)
        CHECK(energy(ghost, s << 1) == doctest::Approx(energy(inst, s)).epsilon(1e-12));
    // conditional Boltzmann distribution given ghost = +1 equals the original
    const BoltzmannTable big = boltzmann(ghost, 0.6);
    const BoltzmannTable small = boltzmann(inst, 0.6);
    double norm = 0.0;
    for (std::uint32_t s = 0; s < 16; ++s) norm += big.probabilities[s << 1];
    for (std::uint32_t s = 0; s < 16; ++s)
        CHECK(big.probabilities[s << 1] / norm ==
              doctest::Approx(small.probabilities[s]).epsilon(1e-12));
    // no fields -> decoupled ghost
    IsingInstance nofield(3, {{2, 1, 0.5}}, {0.0, 0.0, 0.0});
    CHECK(ghost_spin_transform(nofield).couplings().size() == 1);
}

TEST_CASE("instance JSON round-trip") {
    Rng rng(11);
    const IsingInstance inst = gen_random_instance(5, Connectivity::Chain, 1.3, rng);
    const IsingInstance back = instance_from_json_text(instance_to_json_text(inst));
    CHECK(back.n() == inst.n());
    REQUIRE(back.couplings().size() == inst.couplings().size());
    for (std::size_t i = 0; i < inst.couplings().size(); ++i) {
        CHECK(back.couplings()[i].j == inst.couplings()[i].j);
        CHECK(back.couplings()[i].k == inst.couplings()[i].k);
        CHECK(back.couplings()[i].val == inst.couplings()[i].val);
    }
    for (int j = 0; j < 5; ++j) CHECK(back.fields()[j] == inst.fields()[j]);
    CHECK(back.connectivity() == inst.connectivity());
}

TEST_CASE("instance validation rejects malformed input") {
    CHECK_THROWS(IsingInstance(3, {{2, 1, 1.0}, {2, 1, 0.5}}, {0, 0, 0}));
    CHECK_THROWS(IsingInstance(3, {{1, 2, 1.0}}, {0, 0, 0}));
    CHECK_THROWS(IsingInstance(3, {{3, 1, 1.0}}, {0, 0, 0}, Connectivity::Chain));
    CHECK_THROWS(IsingInstance(3, {}, {0, 0}));
}

}
