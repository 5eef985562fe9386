#include "tcfp/kernels.hpp"

#include <cmath>

namespace tcfp::kernels {

double dot_ref(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

double sumsq_ref(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * a[i];
    return acc;
}

void multiply_ref(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a[i] * b[i];
}

void axpy_ref(double* out, const double* a, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] += c * a[i];
}

void complex_magnitude_ref(const double* interleaved, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double re = interleaved[2 * i];
        const double im = interleaved[2 * i + 1];
        out[i] = std::sqrt(re * re + im * im);
    }
}

double (*dot)(const double*, const double*, std::size_t) = dot_ref;
double (*sumsq)(const double*, std::size_t) = sumsq_ref;
void (*multiply)(const double*, const double*, double*, std::size_t) = multiply_ref;
void (*axpy)(double*, const double*, double, std::size_t) = axpy_ref;
void (*complex_magnitude)(const double*, double*, std::size_t) = complex_magnitude_ref;

static const char* g_dispatch_name = "scalar";

const char* dispatch_name() {
    return g_dispatch_name;
}

static int bind_best_variant() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        dot = dot_avx2;
        sumsq = sumsq_avx2;
        multiply = multiply_avx2;
        axpy = axpy_avx2;
        complex_magnitude = complex_magnitude_avx2;
        g_dispatch_name = "avx2";
    }
#elif defined(__aarch64__)
    dot = dot_neon;
    sumsq = sumsq_neon;
    multiply = multiply_neon;
    axpy = axpy_neon;
    complex_magnitude = complex_magnitude_neon;
    g_dispatch_name = "neon";
#endif
    return 0;
}

static const int g_init = bind_best_variant();

} // namespace tcfp::kernels
