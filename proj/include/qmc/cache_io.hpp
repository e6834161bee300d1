#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "qmc/rng.hpp"

namespace qmc {

// Sparse 3-d array of observed transitions: key (final j, initial k,
// circuit l) -> count.  Ordered map so on-disk layout is deterministic.
struct TransitionCounts {
    int n = 0;
    int n_circuits = 0;
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, std::uint64_t> counts;

    void record(std::uint32_t j, std::uint32_t k, std::uint32_t l,
                std::uint64_t count = 1);
    std::uint64_t total() const;
};

// associative, commutative, count-conserving
TransitionCounts merge(const TransitionCounts& a, const TransitionCounts& b);

struct QEstimate {
    Eigen::MatrixXd q;               // column-stochastic on observed columns
    Eigen::VectorXd column_totals;
    std::vector<std::uint32_t> empty_columns;
};

// Q(j|k) = sum_l C[j,k,l] / sum_{j,l} C[j,k,l]
QEstimate estimate_q(const TransitionCounts& counts);

// binary format: magic "QEMC", u16 version=1, u8 n, u32 n_circuits,
// u64 n_records, records of (u32 j, u32 k, u32 l, u64 count), little-endian
void save_counts(const std::string& path, const TransitionCounts& counts);
TransitionCounts load_counts(const std::string& path);

// CSV, row-major, leading "# n rows cols" header comment
void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// Mutable per-(l,k) proposal lists built from counts; supports drawing
// recorded transitions without replacement so several offline analyses can
// deplete one shared cache.
class TransitionCache {
public:
    explicit TransitionCache(const TransitionCounts& counts);

    int n() const { return n_; }
    int n_circuits() const { return n_circuits_; }
    // remaining recorded finals for (l, k); -1 draw index means empty
    bool empty(std::uint32_t l, std::uint32_t k) const;
    // uniform draw without replacement; returns false when the list is empty
    bool draw(std::uint32_t l, std::uint32_t k, Rng& rng, std::uint32_t& out_j);
    std::uint64_t remaining() const { return remaining_; }

private:
    int n_ = 0;
    int n_circuits_ = 0;
    std::uint64_t remaining_ = 0;
    std::vector<std::vector<std::uint32_t>> lists_;  // index l * 2^n + k
};

} // namespace qmc
