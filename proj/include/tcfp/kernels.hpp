#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the whole pipeline (windowing, filter
// energies, DCT projections, descriptor matching). Each kernel has a scalar
// reference implementation and, on capable CPUs, a vectorized variant; the
// function pointers below are bound once at startup to the best variant for
// the machine we are running on. The reference implementations stay exported
// so tests can check the dispatched variant against them.

namespace tcfp::kernels {

// dot(a, b, n) = sum a[i]*b[i]
extern double (*dot)(const double* a, const double* b, std::size_t n);
// sumsq(a, n) = sum a[i]^2
extern double (*sumsq)(const double* a, std::size_t n);
// out[i] = a[i] * b[i]
extern void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
// out[i] += c * a[i]
extern void (*axpy)(double* out, const double* a, double c, std::size_t n);
// interleaved re/im pairs -> out[i] = |z_i|
extern void (*complex_magnitude)(const double* interleaved, double* out, std::size_t n);

// name of the selected variant set: "avx2", "neon", or "scalar"
const char* dispatch_name();

double dot_ref(const double* a, const double* b, std::size_t n);
double sumsq_ref(const double* a, std::size_t n);
void multiply_ref(const double* a, const double* b, double* out, std::size_t n);
void axpy_ref(double* out, const double* a, double c, std::size_t n);
void complex_magnitude_ref(const double* interleaved, double* out, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
double sumsq_avx2(const double* a, std::size_t n);
void multiply_avx2(const double* a, const double* b, double* out, std::size_t n);
void axpy_avx2(double* out, const double* a, double c, std::size_t n);
void complex_magnitude_avx2(const double* interleaved, double* out, std::size_t n);
#endif

#if defined(__aarch64__)
double dot_neon(const double* a, const double* b, std::size_t n);
double sumsq_neon(const double* a, std::size_t n);
void multiply_neon(const double* a, const double* b, double* out, std::size_t n);
void axpy_neon(double* out, const double* a, double c, std::size_t n);
void complex_magnitude_neon(const double* interleaved, double* out, std::size_t n);
#endif

} // namespace tcfp::kernels
