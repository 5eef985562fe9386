// NEON (aarch64) variants; f64x2 lanes. Compiled only on aarch64 targets.

#include "tcfp/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>
#include <cmath>

namespace tcfp::kernels {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2)
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

double sumsq_neon(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t x = vld1q_f64(a + i);
        acc0 = vfmaq_f64(acc0, x, x);
    }
    double acc = vaddvq_f64(acc0);
    for (; i < n; ++i)
        acc += a[i] * a[i];
    return acc;
}

void multiply_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i)
        out[i] = a[i] * b[i];
}

void axpy_neon(double* out, const double* a, double c, std::size_t n) {
    const float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), vc, vld1q_f64(a + i)));
    for (; i < n; ++i)
        out[i] += c * a[i];
}

void complex_magnitude_neon(const double* interleaved, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2x2_t z = vld2q_f64(interleaved + 2 * i); // val[0]=re, val[1]=im
        const float64x2_t m2 = vfmaq_f64(vmulq_f64(z.val[1], z.val[1]), z.val[0], z.val[0]);
        vst1q_f64(out + i, vsqrtq_f64(m2));
    }
    for (; i < n; ++i) {
        const double re = interleaved[2 * i];
        const double im = interleaved[2 * i + 1];
        out[i] = std::sqrt(re * re + im * im);
    }
}

} // namespace tcfp::kernels

#endif // __aarch64__
