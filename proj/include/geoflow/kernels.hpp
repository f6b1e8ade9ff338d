#pragma once

#include <cstddef>
#include <span>

// Vector arithmetic kernels used by the score and flow inner loops.
// A scalar reference implementation always exists; AVX2 (x86_64) and NEON
// (aarch64) variants are selected once at runtime. All variants must agree
// within floating-point reassociation tolerance (see tests/test_kernels.cpp).
namespace geoflow::kernels {

struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    double (*squared_norm)(const double*, std::size_t);
    double (*squared_distance)(const double*, const double*, std::size_t);
    // y += a*x
    void (*axpy)(double, const double*, double*, std::size_t);
    // out = a*x + b*y
    void (*scale_add)(double, const double*, double, const double*, double*, std::size_t);
    // acc += w*(mu - x)
    void (*add_scaled_diff)(double, const double*, const double*, double*, std::size_t);
};

enum class Backend { scalar, avx2, neon };

// Reference implementation; always available.
const Ops& scalar_ops();
// SIMD variants; nullptr when not compiled in or not supported by this CPU.
const Ops* avx2_ops();
const Ops* neon_ops();

Backend active_backend();
const char* backend_name();
// Test hook. Throws std::invalid_argument if the backend is unavailable.
void force_backend(Backend b);

const Ops& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double squared_norm(std::span<const double> a) {
    return active().squared_norm(a.data(), a.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    return active().squared_distance(a.data(), b.data(), a.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), x.size());
}
inline void scale_add(double a, std::span<const double> x, double b, std::span<const double> y,
                      std::span<double> out) {
    active().scale_add(a, x.data(), b, y.data(), out.data(), x.size());
}
inline void add_scaled_diff(double w, std::span<const double> mu, std::span<const double> x,
                            std::span<double> acc) {
    active().add_scaled_diff(w, mu.data(), x.data(), acc.data(), x.size());
}

}  // namespace geoflow::kernels
