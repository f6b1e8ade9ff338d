#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "geoflow/kernels.hpp"

using namespace geoflow;

namespace {

std::vector<double> random_vec(std::mt19937_64& eng, std::size_t n) {
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(eng);
    return v;
}

// FMA and reassociated horizontal sums shift the last bits
bool close(double a, double b, double scale) {
    return std::abs(a - b) <= 1e-12 * (1.0 + scale);
}

void check_backend_matches_scalar(const kernels::Ops& simd) {
    const kernels::Ops& ref = kernels::scalar_ops();
    std::mt19937_64 eng(1234);
    // odd sizes exercise the tail loops
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 31u, 32u, 64u, 67u}) {
        for (int rep = 0; rep < 8; ++rep) {
            const auto a = random_vec(eng, n);
            const auto b = random_vec(eng, n);
            const double scale = 3.0 * 3.0 * static_cast<double>(n);

            CHECK(close(simd.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), scale));
            CHECK(close(simd.squared_norm(a.data(), n), ref.squared_norm(a.data(), n), scale));
            CHECK(close(simd.squared_distance(a.data(), b.data(), n),
                        ref.squared_distance(a.data(), b.data(), n), scale));

            auto y1 = b, y2 = b;
            simd.axpy(0.37, a.data(), y1.data(), n);
            ref.axpy(0.37, a.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], 10.0));

            std::vector<double> o1(n), o2(n);
            simd.scale_add(1.7, a.data(), -0.4, b.data(), o1.data(), n);
            ref.scale_add(1.7, a.data(), -0.4, b.data(), o2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(close(o1[i], o2[i], 10.0));

            auto acc1 = b, acc2 = b;
            simd.add_scaled_diff(0.81, a.data(), b.data(), acc1.data(), n);
            ref.add_scaled_diff(0.81, a.data(), b.data(), acc2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(close(acc1[i], acc2[i], 10.0));
        }
    }
}

}  // namespace

TEST_CASE("scalar reference basics") {
    const kernels::Ops& ops = kernels::scalar_ops();
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {-1.0, 0.5, 2.0};
    CHECK(ops.dot(a, b, 3) == doctest::Approx(6.0));
    CHECK(ops.squared_norm(a, 3) == doctest::Approx(14.0));
    CHECK(ops.squared_distance(a, b, 3) == doctest::Approx(4.0 + 2.25 + 1.0));
}

TEST_CASE("avx2 variant matches scalar reference") {
    const kernels::Ops* ops = kernels::avx2_ops();
    if (!ops) return;  // not available on this platform
    check_backend_matches_scalar(*ops);
}

TEST_CASE("neon variant matches scalar reference") {
    const kernels::Ops* ops = kernels::neon_ops();
    if (!ops) return;
    check_backend_matches_scalar(*ops);
}

TEST_CASE("active backend is forceable") {
    const kernels::Backend original = kernels::active_backend();
    kernels::force_backend(kernels::Backend::scalar);
    CHECK(kernels::active_backend() == kernels::Backend::scalar);
    std::vector<double> a{1.0, 2.0}, b{3.0, 4.0};
    CHECK(kernels::dot(a, b) == doctest::Approx(11.0));
    kernels::force_backend(original);
}
