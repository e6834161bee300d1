#pragma once

#include <complex>
#include <cstddef>

// Low-level vector kernels used in the statevector and reduction hot loops.
// Every kernel has a portable scalar implementation and (on x86) an AVX2+FMA
// variant; the top-level functions dispatch once at load time based on what
// the CPU reports.  Both variants stay callable so tests can check they agree.

namespace qmc::kernels {

using cplx = std::complex<double>;

struct Gate2 {
    // row-major 2x2: [g00 g01; g10 g11]
    cplx g00, g01, g10, g11;
};

namespace scalar {
void apply_1q(cplx* psi, std::size_t dim, int bit, const Gate2& g);
void cmul_inplace(cplx* psi, const cplx* phase, std::size_t dim);
void abs2_accum(double* dst, const cplx* psi, std::size_t dim);
double dot(const double* a, const double* b, std::size_t n);
double l1_diff(const double* a, const double* b, std::size_t n);
void axpy(double* y, double a, const double* x, std::size_t n);
} // namespace scalar

namespace avx2 {
bool available();
void apply_1q(cplx* psi, std::size_t dim, int bit, const Gate2& g);
void cmul_inplace(cplx* psi, const cplx* phase, std::size_t dim);
void abs2_accum(double* dst, const cplx* psi, std::size_t dim);
double dot(const double* a, const double* b, std::size_t n);
double l1_diff(const double* a, const double* b, std::size_t n);
void axpy(double* y, double a, const double* x, std::size_t n);
} // namespace avx2

// name of the variant the dispatcher picked ("avx2" or "scalar")
const char* active_target();

void apply_1q(cplx* psi, std::size_t dim, int bit, const Gate2& g);
void cmul_inplace(cplx* psi, const cplx* phase, std::size_t dim);
void abs2_accum(double* dst, const cplx* psi, std::size_t dim);
double dot(const double* a, const double* b, std::size_t n);
double l1_diff(const double* a, const double* b, std::size_t n);
void axpy(double* y, double a, const double* x, std::size_t n);

} // namespace qmc::kernels
