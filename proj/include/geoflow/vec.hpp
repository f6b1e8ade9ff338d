#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "geoflow/kernels.hpp"

namespace geoflow {

using Vec = std::vector<double>;

inline void check_same_dim(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
}

inline double dot(const Vec& a, const Vec& b) {
    check_same_dim(a, b);
    return kernels::dot(a, b);
}

inline double squared_norm(const Vec& a) { return kernels::squared_norm(a); }

inline double norm(const Vec& a) { return std::sqrt(kernels::squared_norm(a)); }

inline double distance(const Vec& a, const Vec& b) {
    check_same_dim(a, b);
    return std::sqrt(kernels::squared_distance(a, b));
}

// a*x + b*y
inline Vec scale_add(double a, const Vec& x, double b, const Vec& y) {
    check_same_dim(x, y);
    Vec out(x.size());
    kernels::scale_add(a, x, b, y, out);
    return out;
}

inline Vec sub(const Vec& a, const Vec& b) { return scale_add(1.0, a, -1.0, b); }

inline Vec add(const Vec& a, const Vec& b) { return scale_add(1.0, a, 1.0, b); }

inline Vec scaled(double a, const Vec& x) {
    Vec out(x.size());
    kernels::scale_add(a, x, 0.0, x, out);
    return out;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace geoflow
