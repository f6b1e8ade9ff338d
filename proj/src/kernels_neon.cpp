#include "geoflow/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace geoflow::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_norm_neon(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t v = vld1q_f64(a + i);
        acc = vfmaq_f64(acc, v, v);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_add_neon(double a, const double* x, double b, const double* y, double* out,
                    std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    const float64x2_t bv = vdupq_n_f64(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t t = vmulq_f64(bv, vld1q_f64(y + i));
        vst1q_f64(out + i, vfmaq_f64(t, av, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void add_scaled_diff_neon(double w, const double* mu, const double* x, double* acc,
                          std::size_t n) {
    const float64x2_t wv = vdupq_n_f64(w);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(mu + i), vld1q_f64(x + i));
        vst1q_f64(acc + i, vfmaq_f64(vld1q_f64(acc + i), wv, d));
    }
    for (; i < n; ++i) acc[i] += w * (mu[i] - x[i]);
}

}  // namespace

const Ops* neon_ops() {
    static const Ops ops{dot_neon,  squared_norm_neon, squared_distance_neon,
                         axpy_neon, scale_add_neon,    add_scaled_diff_neon};
    return &ops;
}

}  // namespace geoflow::kernels

#else

namespace geoflow::kernels {
const Ops* neon_ops() { return nullptr; }
}  // namespace geoflow::kernels

#endif
