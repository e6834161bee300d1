#include "qmc/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(__i386__)
#define QMC_X86 1
#include <immintrin.h>
#endif

namespace qmc::kernels::avx2 {

#ifdef QMC_X86

bool available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

// two packed complex<double> per __m256d: [re0 im0 re1 im1]

inline __m256d bcast(const cplx& z) {
    return _mm256_broadcast_pd(reinterpret_cast<const __m128d*>(&z));
}

inline __m256d cmul(__m256d v, __m256d w) {
    __m256d wre = _mm256_movedup_pd(w);
    __m256d wim = _mm256_permute_pd(w, 0xF);
    __m256d vsw = _mm256_permute_pd(v, 0x5);
    return _mm256_fmaddsub_pd(v, wre, _mm256_mul_pd(vsw, wim));
}

// acc + v*w
inline __m256d cfma(__m256d acc, __m256d v, __m256d w) {
    return _mm256_add_pd(acc, cmul(v, w));
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_hadd_pd(lo, lo));
}

} // namespace

void apply_1q(cplx* psi, std::size_t dim, int bit, const Gate2& g) {
    const std::size_t stride = std::size_t{1} << bit;
    auto* p = reinterpret_cast<double*>(psi);
    const __m256d g00 = bcast(g.g00), g01 = bcast(g.g01);
    const __m256d g10 = bcast(g.g10), g11 = bcast(g.g11);
    if (bit == 0) {
        // amplitude pairs are adjacent; one pair per 256-bit lane pair
        const __m256d c0 = _mm256_setr_pd(g.g00.real(), g.g00.imag(),
                                          g.g10.real(), g.g10.imag());
        const __m256d c1 = _mm256_setr_pd(g.g01.real(), g.g01.imag(),
                                          g.g11.real(), g.g11.imag());
        for (std::size_t i = 0; i < dim; i += 2) {
            __m256d v = _mm256_loadu_pd(p + 2 * i);
            __m256d adup = _mm256_permute2f128_pd(v, v, 0x00);
            __m256d bdup = _mm256_permute2f128_pd(v, v, 0x11);
            __m256d r = cfma(cmul(adup, c0), bdup, c1);
            _mm256_storeu_pd(p + 2 * i, r);
        }
        return;
    }
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; i += 2) {
            __m256d a = _mm256_loadu_pd(p + 2 * i);
            __m256d b = _mm256_loadu_pd(p + 2 * (i + stride));
            __m256d na = cfma(cmul(a, g00), b, g01);
            __m256d nb = cfma(cmul(a, g10), b, g11);
            _mm256_storeu_pd(p + 2 * i, na);
            _mm256_storeu_pd(p + 2 * (i + stride), nb);
        }
    }
}

void cmul_inplace(cplx* psi, const cplx* phase, std::size_t dim) {
    auto* p = reinterpret_cast<double*>(psi);
    auto* q = reinterpret_cast<const double*>(phase);
    std::size_t i = 0;
    for (; i + 2 <= dim; i += 2) {
        __m256d v = _mm256_loadu_pd(p + 2 * i);
        __m256d w = _mm256_loadu_pd(q + 2 * i);
        _mm256_storeu_pd(p + 2 * i, cmul(v, w));
    }
    for (; i < dim; ++i) psi[i] *= phase[i];
}

void abs2_accum(double* dst, const cplx* psi, std::size_t dim) {
    auto* p = reinterpret_cast<const double*>(psi);
    std::size_t i = 0;
    for (; i + 2 <= dim; i += 2) {
        __m256d v = _mm256_loadu_pd(p + 2 * i);
        __m256d sq = _mm256_mul_pd(v, v);
        // [r0² i0² r1² i1²] -> hadd within 128-bit halves gives |z0|²,|z1|²
        __m128d lo = _mm256_castpd256_pd128(sq);
        __m128d hi = _mm256_extractf128_pd(sq, 1);
        __m128d s = _mm_hadd_pd(lo, hi);
        __m128d d = _mm_loadu_pd(dst + i);
        _mm_storeu_pd(dst + i, _mm_add_pd(d, s));
    }
    for (; i < dim; ++i)
        dst[i] += psi[i].real() * psi[i].real() + psi[i].imag() * psi[i].imag();
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double l1_diff(const double* a, const double* b, std::size_t n) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

void axpy(double* y, double a, const double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

#else // !QMC_X86: fall back to the scalar kernels

bool available() { return false; }
void apply_1q(cplx* psi, std::size_t dim, int bit, const Gate2& g) {
    scalar::apply_1q(psi, dim, bit, g);
}
void cmul_inplace(cplx* psi, const cplx* phase, std::size_t dim) {
    scalar::cmul_inplace(psi, phase, dim);
}
void abs2_accum(double* dst, const cplx* psi, std::size_t dim) {
    scalar::abs2_accum(dst, psi, dim);
}
double dot(const double* a, const double* b, std::size_t n) {
    return scalar::dot(a, b, n);
}
double l1_diff(const double* a, const double* b, std::size_t n) {
    return scalar::l1_diff(a, b, n);
}
void axpy(double* y, double a, const double* x, std::size_t n) {
    scalar::axpy(y, a, x, n);
}

#endif

} // namespace qmc::kernels::avx2
