#pragma once

#include <Eigen/Dense>

#include "geoflow/vec.hpp"

namespace geoflow {

enum class ManifoldKind { line, parabola, circle, sphere, affine };

struct Slack {
    Vec footpoint;
    Vec normal;      // x - footpoint
    double distance;
};

// Analytic manifolds with exact nearest-point projection, tangent frames and
// curvature. Canonical curves live in the first two coordinates and are
// zero-padded into the ambient dimension; the padded directions are normal.
class ManifoldOracle {
  public:
    static ManifoldOracle line(std::size_t ambient_dim = 2);
    // y = a*x^2 in the leading plane; a = 0 degenerates to the line
    static ManifoldOracle parabola(double a, std::size_t ambient_dim = 2);
    static ManifoldOracle circle(double r, std::size_t ambient_dim = 2);
    // sphere S^{block_dim-1} of radius r in the first block_dim coordinates
    static ManifoldOracle sphere(double r, std::size_t block_dim, std::size_t ambient_dim);
    static ManifoldOracle affine(Eigen::MatrixXd basis, Vec offset);

    ManifoldKind kind() const { return kind_; }
    std::size_t ambient_dim() const { return n_; }
    std::size_t intrinsic_dim() const { return d_; }
    double reach() const;
    bool is_curve() const { return d_ == 1 && kind_ != ManifoldKind::affine; }

    Vec nearest_point(const Vec& x) const;
    Slack slack(const Vec& x) const;
    double distance_to(const Vec& x) const { return slack(x).distance; }

    // orthonormal tangent basis (n x d) at a point on the manifold
    Eigen::MatrixXd tangent_basis(const Vec& footpoint) const;
    Eigen::MatrixXd tangent_projector(const Vec& footpoint) const;
    double curvature(const Vec& footpoint) const;

    // differential of the nearest-point projection at x (inside the reach)
    Eigen::MatrixXd projection_differential(const Vec& x) const;

    // curve parameterization (kinds line, parabola, circle)
    Vec point_at(double u) const;
    double curve_param(const Vec& footpoint) const;
    double arc_length_between(double u0, double u1) const;

    double parabola_coeff() const { return a_; }
    double radius() const { return r_; }
    const Eigen::MatrixXd& affine_basis() const { return basis_; }
    const Vec& affine_offset() const { return offset_; }

  private:
    ManifoldOracle(ManifoldKind kind, std::size_t n, std::size_t d);
    void check_on_manifold(const Vec& p) const;
    double project_parabola_param(const Vec& x) const;

    ManifoldKind kind_;
    std::size_t n_;
    std::size_t d_;
    double a_ = 0.0;          // parabola coefficient
    double r_ = 0.0;          // circle/sphere radius
    std::size_t block_ = 2;   // sphere block dimension
    Eigen::MatrixXd basis_;   // affine: n x d orthonormal
    Vec offset_;              // affine offset
};

}  // namespace geoflow
