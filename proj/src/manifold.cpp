#include "geoflow/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOnManifoldTol = 1e-8;

Eigen::Map<const Eigen::VectorXd> as_eigen(const Vec& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec to_vec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

}  // namespace

ManifoldOracle::ManifoldOracle(ManifoldKind kind, std::size_t n, std::size_t d)
    : kind_(kind), n_(n), d_(d) {
    if (!(d < n)) throw std::invalid_argument("manifold: intrinsic dim must be < ambient dim");
}

ManifoldOracle ManifoldOracle::line(std::size_t ambient_dim) {
    if (ambient_dim < 2) throw std::invalid_argument("manifold: ambient dim must be >= 2");
    return ManifoldOracle(ManifoldKind::line, ambient_dim, 1);
}

ManifoldOracle ManifoldOracle::parabola(double a, std::size_t ambient_dim) {
    if (ambient_dim < 2) throw std::invalid_argument("manifold: ambient dim must be >= 2");
    if (a < 0.0) throw std::invalid_argument("manifold: parabola coefficient must be >= 0");
    ManifoldOracle m(ManifoldKind::parabola, ambient_dim, 1);
    m.a_ = a;
    return m;
}

ManifoldOracle ManifoldOracle::circle(double r, std::size_t ambient_dim) {
    if (ambient_dim < 2) throw std::invalid_argument("manifold: ambient dim must be >= 2");
    if (!(r > 0.0)) throw std::invalid_argument("manifold: radius must be positive");
    ManifoldOracle m(ManifoldKind::circle, ambient_dim, 1);
    m.r_ = r;
    return m;
}

ManifoldOracle ManifoldOracle::sphere(double r, std::size_t block_dim, std::size_t ambient_dim) {
    if (!(r > 0.0)) throw std::invalid_argument("manifold: radius must be positive");
    if (block_dim < 2 || block_dim > ambient_dim)
        throw std::invalid_argument("manifold: sphere block dim out of range");
    ManifoldOracle m(ManifoldKind::sphere, ambient_dim, block_dim - 1);
    m.r_ = r;
    m.block_ = block_dim;
    return m;
}

ManifoldOracle ManifoldOracle::affine(Eigen::MatrixXd basis, Vec offset) {
    const auto n = static_cast<std::size_t>(basis.rows());
    const auto d = static_cast<std::size_t>(basis.cols());
    if (offset.size() != n) throw std::invalid_argument("manifold: offset dimension mismatch");
    if (d == 0) throw std::invalid_argument("manifold: affine basis must have >= 1 column");
    ManifoldOracle m(ManifoldKind::affine, n, d);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    m.basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
    m.offset_ = std::move(offset);
    return m;
}

double ManifoldOracle::reach() const {
    switch (kind_) {
        case ManifoldKind::line:
        case ManifoldKind::affine: return kInf;
        case ManifoldKind::circle:
        case ManifoldKind::sphere: return r_;
        case ManifoldKind::parabola: return a_ > 0.0 ? 0.5 / a_ : kInf;
    }
    return kInf;
}

double ManifoldOracle::project_parabola_param(const Vec& x) const {
    if (a_ == 0.0) return x[0];
    const double x1 = x[0], x2 = x[1];

    // squared distance in the leading plane and its stationarity condition
    const auto dist2 = [&](double u) {
        const double du = u - x1, dy = a_ * u * u - x2;
        return du * du + dy * dy;
    };
    const auto h = [&](double u) { return (u - x1) + 2.0 * a_ * u * (a_ * u * u - x2); };
    const auto hp = [&](double u) {
        return 1.0 + 2.0 * a_ * (a_ * u * u - x2) + 4.0 * a_ * a_ * u * u;
    };

    // the minimizer satisfies |u*| <= |x1| + sqrt(x1^2 + x2^2)
    const double radius = 1.0 + std::abs(x1) + std::hypot(x1, x2);
    constexpr int kGrid = 1024;
    const double step = 2.0 * radius / (kGrid - 1);

    std::vector<double> d(kGrid);
    for (int i = 0; i < kGrid; ++i) d[i] = dist2(-radius + i * step);

    struct Candidate {
        double u;
        double dist2;
    };
    std::vector<Candidate> candidates;
    for (int i = 1; i + 1 < kGrid; ++i) {
        if (d[i] <= d[i - 1] && d[i] <= d[i + 1]) {
            double lo = -radius + (i - 1) * step;
            double hi = -radius + (i + 1) * step;
            double u = -radius + i * step;
            double hlo = h(lo), hhi = h(hi);
            for (int it = 0; it < 40; ++it) {
                const double hu = h(u), hpu = hp(u);
                double next = (hpu != 0.0) ? u - hu / hpu : u;
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                if (hlo <= 0.0 && hhi >= 0.0) {
                    // keep the sign-change bracket tight
                    if (h(next) <= 0.0) {
                        lo = next;
                        hlo = h(next);
                    } else {
                        hi = next;
                        hhi = h(next);
                    }
                }
                u = next;
            }
            candidates.push_back({u, dist2(u)});
        }
    }
    if (candidates.empty()) {
        // minimizer pinned to an endpoint cell; bound above says this cannot
        // happen for finite input, keep a fallback for safety
        int best = 0;
        for (int i = 1; i < kGrid; ++i)
            if (d[i] < d[best]) best = i;
        return -radius + best * step;
    }

    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.dist2 < b.dist2; });
    const Candidate& best = candidates.front();
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const Candidate& c = candidates[i];
        if (std::abs(c.u - best.u) > 1e-6 * (1.0 + radius) &&
            c.dist2 - best.dist2 <= 1e-9 * std::max(1.0, best.dist2)) {
            throw std::domain_error("manifold: nearest-point projection not unique");
        }
    }
    return best.u;
}

Vec ManifoldOracle::nearest_point(const Vec& x) const {
    if (x.size() != n_) throw std::invalid_argument("dimension mismatch");
    Vec p(n_, 0.0);
    switch (kind_) {
        case ManifoldKind::line: p[0] = x[0]; break;
        case ManifoldKind::parabola: {
            const double u = project_parabola_param(x);
            p[0] = u;
            p[1] = a_ * u * u;
            break;
        }
        case ManifoldKind::circle: {
            const double nb = std::hypot(x[0], x[1]);
            if (nb < 1e-12)
                throw std::domain_error("manifold: nearest-point projection not unique");
            p[0] = r_ * x[0] / nb;
            p[1] = r_ * x[1] / nb;
            break;
        }
        case ManifoldKind::sphere: {
            double nb = 0.0;
            for (std::size_t i = 0; i < block_; ++i) nb += x[i] * x[i];
            nb = std::sqrt(nb);
            if (nb < 1e-12)
                throw std::domain_error("manifold: nearest-point projection not unique");
            for (std::size_t i = 0; i < block_; ++i) p[i] = r_ * x[i] / nb;
            break;
        }
        case ManifoldKind::affine: {
            const Eigen::VectorXd dx = as_eigen(x) - as_eigen(offset_);
            const Eigen::VectorXd proj = as_eigen(offset_) + basis_ * (basis_.transpose() * dx);
            return to_vec(proj);
        }
    }
    return p;
}

Slack ManifoldOracle::slack(const Vec& x) const {
    Slack s;
    s.footpoint = nearest_point(x);
    s.normal = sub(x, s.footpoint);
    s.distance = norm(s.normal);

    const Eigen::MatrixXd basis = tangent_basis(s.footpoint);
    const double tangential = (basis.transpose() * as_eigen(s.normal)).norm();
    if (tangential > kOnManifoldTol * (1.0 + s.distance))
        throw std::logic_error("manifold: slack not orthogonal to tangent");
    return s;
}

void ManifoldOracle::check_on_manifold(const Vec& p) const {
    const Vec q = nearest_point(p);
    if (distance(p, q) > kOnManifoldTol)
        throw std::invalid_argument("manifold: point is not on the manifold");
}

Eigen::MatrixXd ManifoldOracle::tangent_basis(const Vec& footpoint) const {
    check_on_manifold(footpoint);
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d_));
    switch (kind_) {
        case ManifoldKind::line: basis(0, 0) = 1.0; break;
        case ManifoldKind::parabola: {
            const double u = footpoint[0];
            const double s = std::sqrt(1.0 + 4.0 * a_ * a_ * u * u);
            basis(0, 0) = 1.0 / s;
            basis(1, 0) = 2.0 * a_ * u / s;
            break;
        }
        case ManifoldKind::circle: {
            const double theta = std::atan2(footpoint[1], footpoint[0]);
            basis(0, 0) = -std::sin(theta);
            basis(1, 0) = std::cos(theta);
            break;
        }
        case ManifoldKind::sphere: {
            const auto b = static_cast<Eigen::Index>(block_);
            Eigen::VectorXd p = as_eigen(footpoint).head(b);
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(p);
            const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(b, b);
            basis.topRows(b) = q.rightCols(b - 1);
            break;
        }
        case ManifoldKind::affine: basis = basis_; break;
    }
    return basis;
}

Eigen::MatrixXd ManifoldOracle::tangent_projector(const Vec& footpoint) const {
    const Eigen::MatrixXd basis = tangent_basis(footpoint);
    return basis * basis.transpose();
}

double ManifoldOracle::curvature(const Vec& footpoint) const {
    check_on_manifold(footpoint);
    switch (kind_) {
        case ManifoldKind::line:
        case ManifoldKind::affine: return 0.0;
        case ManifoldKind::circle:
        case ManifoldKind::sphere: return 1.0 / r_;
        case ManifoldKind::parabola: {
            const double u = footpoint[0];
            const double s = 1.0 + 4.0 * a_ * a_ * u * u;
            return 2.0 * a_ / (s * std::sqrt(s));
        }
    }
    return 0.0;
}

Eigen::MatrixXd ManifoldOracle::projection_differential(const Vec& x) const {
    if (x.size() != n_) throw std::invalid_argument("dimension mismatch");
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd dpi = Eigen::MatrixXd::Zero(n, n);
    switch (kind_) {
        case ManifoldKind::line: dpi(0, 0) = 1.0; break;
        case ManifoldKind::affine: dpi = basis_ * basis_.transpose(); break;
        case ManifoldKind::circle:
        case ManifoldKind::sphere: {
            const auto b = (kind_ == ManifoldKind::circle) ? 2 : static_cast<Eigen::Index>(block_);
            Eigen::VectorXd xb = as_eigen(x).head(b);
            const double nb = xb.norm();
            if (nb < 1e-12)
                throw std::domain_error("manifold: nearest-point projection not unique");
            const Eigen::VectorXd u = xb / nb;
            dpi.topLeftCorner(b, b) =
                (r_ / nb) * (Eigen::MatrixXd::Identity(b, b) - u * u.transpose());
            break;
        }
        case ManifoldKind::parabola: {
            if (a_ == 0.0) {
                dpi(0, 0) = 1.0;
                break;
            }
            const double u = project_parabola_param(x);
            // d(pi)/dx = p'(u) p'(u)^T / (|p'|^2 + (p - x).p'')
            const double denom =
                1.0 + 4.0 * a_ * a_ * u * u + 2.0 * a_ * (a_ * u * u - x[1]);
            if (denom <= 1e-12)
                throw std::domain_error("manifold: point at or beyond the evolute");
            Eigen::VectorXd tp = Eigen::VectorXd::Zero(n);
            tp(0) = 1.0;
            tp(1) = 2.0 * a_ * u;
            dpi = (tp * tp.transpose()) / denom;
            break;
        }
    }
    return dpi;
}

Vec ManifoldOracle::point_at(double u) const {
    Vec p(n_, 0.0);
    switch (kind_) {
        case ManifoldKind::line: p[0] = u; break;
        case ManifoldKind::parabola:
            p[0] = u;
            p[1] = a_ * u * u;
            break;
        case ManifoldKind::circle:
            p[0] = r_ * std::cos(u);
            p[1] = r_ * std::sin(u);
            break;
        default: throw std::invalid_argument("manifold: point_at requires a curve");
    }
    return p;
}

double ManifoldOracle::curve_param(const Vec& footpoint) const {
    switch (kind_) {
        case ManifoldKind::line:
        case ManifoldKind::parabola: return footpoint[0];
        case ManifoldKind::circle: return std::atan2(footpoint[1], footpoint[0]);
        default: throw std::invalid_argument("manifold: curve_param requires a curve");
    }
}

double ManifoldOracle::arc_length_between(double u0, double u1) const {
    switch (kind_) {
        case ManifoldKind::line: return std::abs(u1 - u0);
        case ManifoldKind::circle: return r_ * std::abs(u1 - u0);
        case ManifoldKind::parabola: {
            if (a_ == 0.0) return std::abs(u1 - u0);
            const auto antideriv = [&](double u) {
                const double c = 2.0 * a_;
                return 0.5 * u * std::sqrt(1.0 + c * c * u * u) + std::asinh(c * u) / (2.0 * c);
            };
            return std::abs(antideriv(u1) - antideriv(u0));
        }
        default: throw std::invalid_argument("manifold: arc length requires a curve");
    }
}

}  // namespace geoflow
