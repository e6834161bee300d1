#include "qmc/kernels.hpp"

namespace qmc::kernels {

namespace {

struct Table {
    const char* name;
    void (*apply_1q)(cplx*, std::size_t, int, const Gate2&);
    void (*cmul_inplace)(cplx*, const cplx*, std::size_t);
    void (*abs2_accum)(double*, const cplx*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*l1_diff)(const double*, const double*, std::size_t);
    void (*axpy)(double*, double, const double*, std::size_t);
};

Table pick() {
    if (avx2::available())
        return {"avx2", avx2::apply_1q, avx2::cmul_inplace, avx2::abs2_accum,
                avx2::dot, avx2::l1_diff, avx2::axpy};
    return {"scalar", scalar::apply_1q, scalar::cmul_inplace, scalar::abs2_accum,
            scalar::dot, scalar::l1_diff, scalar::axpy};
}

const Table& table() {
    static const Table t = pick();
    return t;
}

} // namespace

const char* active_target() { return table().name; }

void apply_1q(cplx* psi, std::size_t dim, int bit, const Gate2& g) {
    table().apply_1q(psi, dim, bit, g);
}
void cmul_inplace(cplx* psi, const cplx* phase, std::size_t dim) {
    table().cmul_inplace(psi, phase, dim);
}
void abs2_accum(double* dst, const cplx* psi, std::size_t dim) {
    table().abs2_accum(dst, psi, dim);
}
double dot(const double* a, const double* b, std::size_t n) {
    return table().dot(a, b, n);
}
double l1_diff(const double* a, const double* b, std::size_t n) {
    return table().l1_diff(a, b, n);
}
void axpy(double* y, double a, const double* x, std::size_t n) {
    table().axpy(y, a, x, n);
}

} // namespace qmc::kernels
