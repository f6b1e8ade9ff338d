// Compiled with -mavx2 -mfma on x86_64 (see src/CMakeLists.txt); a stub
// elsewhere. Runtime selection still checks cpuid before using these.
#include "geoflow/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace geoflow::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_norm_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_add_avx2(double a, const double* x, double b, const double* y, double* out,
                    std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    const __m256d bv = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_mul_pd(bv, _mm256_loadu_pd(y + i));
        const __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), t);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void add_scaled_diff_avx2(double w, const double* mu, const double* x, double* acc,
                          std::size_t n) {
    const __m256d wv = _mm256_set1_pd(w);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(mu + i), _mm256_loadu_pd(x + i));
        const __m256d r = _mm256_fmadd_pd(wv, d, _mm256_loadu_pd(acc + i));
        _mm256_storeu_pd(acc + i, r);
    }
    for (; i < n; ++i) acc[i] += w * (mu[i] - x[i]);
}

}  // namespace

const Ops* avx2_ops() {
#if defined(__GNUC__) || defined(__clang__)
    if (!__builtin_cpu_supports("avx2")) return nullptr;
#endif
    static const Ops ops{dot_avx2,  squared_norm_avx2, squared_distance_avx2,
                         axpy_avx2, scale_add_avx2,    add_scaled_diff_avx2};
    return &ops;
}

}  // namespace geoflow::kernels

#else

namespace geoflow::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace geoflow::kernels

#endif
