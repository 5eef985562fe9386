// AVX2/FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; callers reach it through the dispatch table after the
// runtime CPU check, so no AVX2 instruction executes on unsupported parts.

#include "tcfp/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace tcfp::kernels {

static inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

double sumsq_avx2(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(a + i);
        const __m256d x1 = _mm256_loadu_pd(a + i + 4);
        acc0 = _mm256_fmadd_pd(x0, x0, acc0);
        acc1 = _mm256_fmadd_pd(x1, x1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(a + i);
        acc0 = _mm256_fmadd_pd(x, x, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i)
        acc += a[i] * a[i];
    return acc;
}

void multiply_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i)
        out[i] = a[i] * b[i];
}

void axpy_avx2(double* out, const double* a, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d acc = _mm256_fmadd_pd(vc, _mm256_loadu_pd(a + i), _mm256_loadu_pd(out + i));
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n; ++i)
        out[i] += c * a[i];
}

void complex_magnitude_avx2(const double* interleaved, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // two registers of re/im pairs -> one register of magnitudes
        const __m256d p0 = _mm256_loadu_pd(interleaved + 2 * i);      // r0 i0 r1 i1
        const __m256d p1 = _mm256_loadu_pd(interleaved + 2 * i + 4);  // r2 i2 r3 i3
        const __m256d re = _mm256_unpacklo_pd(p0, p1);                // r0 r2 r1 r3
        const __m256d im = _mm256_unpackhi_pd(p0, p1);                // i0 i2 i1 i3
        __m256d mag = _mm256_sqrt_pd(_mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im)));
        mag = _mm256_permute4x64_pd(mag, _MM_SHUFFLE(3, 1, 2, 0));    // back to 0 1 2 3
        _mm256_storeu_pd(out + i, mag);
    }
    for (; i < n; ++i) {
        const double re = interleaved[2 * i];
        const double im = interleaved[2 * i + 1];
        out[i] = std::sqrt(re * re + im * im);
    }
}

} // namespace tcfp::kernels
