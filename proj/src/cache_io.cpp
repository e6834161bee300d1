#include "qmc/cache_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qmc {

namespace {

constexpr char kMagic[4] = {'Q', 'E', 'M', 'C'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw std::runtime_error("truncated counts file");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return static_cast<T>(v);
}

} // namespace

void TransitionCounts::record(std::uint32_t j, std::uint32_t k, std::uint32_t l,
                              std::uint64_t count) {
    const std::uint32_t dim = std::uint32_t{1} << n;
    if (j >= dim || k >= dim || l >= static_cast<std::uint32_t>(n_circuits))
        throw std::out_of_range("transition index out of range");
    if (count > 0) counts[{j, k, l}] += count;
}

std::uint64_t TransitionCounts::total() const {
    std::uint64_t t = 0;
    for (const auto& [key, c] : counts) t += c;
    return t;
}

TransitionCounts merge(const TransitionCounts& a, const TransitionCounts& b) {
    if (a.n != b.n || a.n_circuits != b.n_circuits)
        throw std::invalid_argument("cannot merge counts with different shapes");
    TransitionCounts out = a;
    for (const auto& [key, c] : b.counts) out.counts[key] += c;
    return out;
}

QEstimate estimate_q(const TransitionCounts& counts) {
    const std::uint32_t dim = std::uint32_t{1} << counts.n;
    QEstimate est;
    est.q = Eigen::MatrixXd::Zero(dim, dim);
    est.column_totals = Eigen::VectorXd::Zero(dim);
    for (const auto& [key, c] : counts.counts) {
        const auto [j, k, l] = key;
        (void)l;
        est.q(j, k) += static_cast<double>(c);
        est.column_totals(k) += static_cast<double>(c);
    }
    for (std::uint32_t k = 0; k < dim; ++k) {
        if (est.column_totals(k) > 0.0)
            est.q.col(k) /= est.column_totals(k);
        else
            est.empty_columns.push_back(k);
    }
    return est;
}

void save_counts(const std::string& path, const TransitionCounts& counts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write counts file: " + path);
    out.write(kMagic, 4);
    write_le<std::uint16_t>(out, kVersion);
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(counts.n));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(counts.n_circuits));
    write_le<std::uint64_t>(out, counts.counts.size());
    for (const auto& [key, c] : counts.counts) {
        write_le<std::uint32_t>(out, std::get<0>(key));
        write_le<std::uint32_t>(out, std::get<1>(key));
        write_le<std::uint32_t>(out, std::get<2>(key));
        write_le<std::uint64_t>(out, c);
    }
}

TransitionCounts load_counts(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open counts file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad magic in counts file: " + path);
    const auto version = read_le<std::uint16_t>(in);
    if (version != kVersion)
        throw std::runtime_error("unsupported counts file version");
    TransitionCounts counts;
    counts.n = read_le<std::uint8_t>(in);
    counts.n_circuits = static_cast<int>(read_le<std::uint32_t>(in));
    const auto n_records = read_le<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < n_records; ++i) {
        const auto j = read_le<std::uint32_t>(in);
        const auto k = read_le<std::uint32_t>(in);
        const auto l = read_le<std::uint32_t>(in);
        const auto c = read_le<std::uint64_t>(in);
        counts.record(j, k, l, c);
    }
    return counts;
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file: " + path);
    out << "# " << m.rows() << ' ' << m.cols() << '\n';
    out.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out << m(r, c) << (c + 1 < m.cols() ? "," : "");
        out << '\n';
    }
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    std::string header;
    std::getline(in, header);
    if (header.size() < 2 || header[0] != '#')
        throw std::runtime_error("missing matrix header in " + path);
    Eigen::Index rows = 0, cols = 0;
    {
        std::istringstream hs(header.substr(1));
        hs >> rows >> cols;
    }
    Eigen::MatrixXd m(rows, cols);
    std::string line;
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated matrix file");
        std::istringstream ls(line);
        std::string cell;
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!std::getline(ls, cell, ',')) throw std::runtime_error("short matrix row");
            m(r, c) = std::stod(cell);
        }
    }
    return m;
}

TransitionCache::TransitionCache(const TransitionCounts& counts)
    : n_(counts.n), n_circuits_(counts.n_circuits) {
    const std::uint64_t dim = std::uint64_t{1} << n_;
    lists_.resize(dim * static_cast<std::uint64_t>(n_circuits_));
    for (const auto& [key, c] : counts.counts) {
        const auto [j, k, l] = key;
        auto& list = lists_[static_cast<std::uint64_t>(l) * dim + k];
        for (std::uint64_t i = 0; i < c; ++i) list.push_back(j);
        remaining_ += c;
    }
}

bool TransitionCache::empty(std::uint32_t l, std::uint32_t k) const {
    const std::uint64_t dim = std::uint64_t{1} << n_;
    return lists_[static_cast<std::uint64_t>(l) * dim + k].empty();
}

bool TransitionCache::draw(std::uint32_t l, std::uint32_t k, Rng& rng,
                           std::uint32_t& out_j) {
    const std::uint64_t dim = std::uint64_t{1} << n_;
    auto& list = lists_[static_cast<std::uint64_t>(l) * dim + k];
    if (list.empty()) return false;
    const std::size_t idx = static_cast<std::size_t>(rng.uniform_int(list.size()));
    out_j = list[idx];
    list[idx] = list.back();
    list.pop_back();
    --remaining_;
    return true;
}

} // namespace qmc
