#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "geoflow/manifold.hpp"
#include "geoflow/schedule.hpp"
#include "geoflow/vec.hpp"

namespace geoflow {

struct GaussianComponent {
    double weight;
    Vec mean;
    double variance;  // isotropic
};

struct DiffusedComponent {
    double weight;
    Vec mean;       // alpha_t * mean
    double variance;  // variance * alpha_t^2 + sigma_t^2
};

// Exact score field s(x,t) of an isotropic Gaussian mixture diffused by a VP
// schedule. Immutable; evaluation is pure and reentrant.
class ScoreField {
  public:
    ScoreField(std::vector<GaussianComponent> components, Schedule schedule);

    static ScoreField standard_gaussian(std::size_t dim, Schedule schedule);

    std::size_t dimension() const { return dim_; }
    const Schedule& schedule() const { return schedule_; }
    const std::vector<GaussianComponent>& components() const { return components_; }

    std::vector<DiffusedComponent> diffused_params(double t) const;

    // exact gradient of log p_t at x
    Vec score(const Vec& x, double t) const;

    double log_density(const Vec& x, double t) const;

  private:
    std::vector<GaussianComponent> components_;
    Schedule schedule_;
    std::size_t dim_;
    std::vector<double> mean_sqnorm_;  // cached |mu_j|^2
};

// Equal-weight components with variance tube_rho^2 placed at uniformly spaced
// parameters of an analytic curve; the resulting data distribution
// concentrates in the radius-tube_rho neighbourhood of the curve.
// Default span: full turn for circles, [-1, 1] for line/parabola.
ScoreField make_curve_tube(const ManifoldOracle& curve, std::size_t n_centers, double tube_rho,
                           Schedule schedule,
                           std::optional<std::pair<double, double>> span = std::nullopt);

}  // namespace geoflow
