#include "geoflow/kernels.hpp"

namespace geoflow::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_norm_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_add_scalar(double a, const double* x, double b, const double* y, double* out,
                      std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void add_scaled_diff_scalar(double w, const double* mu, const double* x, double* acc,
                            std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += w * (mu[i] - x[i]);
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{dot_scalar,  squared_norm_scalar, squared_distance_scalar,
                         axpy_scalar, scale_add_scalar,    add_scaled_diff_scalar};
    return ops;
}

}  // namespace geoflow::kernels
