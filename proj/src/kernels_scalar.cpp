#include "qmc/kernels.hpp"

#include <cmath>

namespace qmc::kernels::scalar {

void apply_1q(cplx* psi, std::size_t dim, int bit, const Gate2& g) {
    const std::size_t stride = std::size_t{1} << bit;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            cplx a = psi[i];
            cplx b = psi[i + stride];
            psi[i] = g.g00 * a + g.g01 * b;
            psi[i + stride] = g.g10 * a + g.g11 * b;
        }
    }
}

void cmul_inplace(cplx* psi, const cplx* phase, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i) psi[i] *= phase[i];
}

void abs2_accum(double* dst, const cplx* psi, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i)
        dst[i] += psi[i].real() * psi[i].real() + psi[i].imag() * psi[i].imag();
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double l1_diff(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

void axpy(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

} // namespace qmc::kernels::scalar
