#include "geoflow/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace geoflow {

Schedule::Schedule(ScheduleKind kind, double beta0, double beta1, double horizon)
    : kind_(kind), beta0_(beta0), beta1_(beta1), horizon_(horizon) {
    if (!(beta0 > 0.0)) throw std::invalid_argument("schedule: beta0 must be positive");
    if (kind == ScheduleKind::linear && !(beta1 > 0.0))
        throw std::invalid_argument("schedule: beta1 must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("schedule: horizon must be positive");
}

void Schedule::check_time(double t) const {
    if (!(t >= 0.0 && t <= horizon_)) throw std::domain_error("schedule: t outside [0, T]");
}

double Schedule::beta(double t) const {
    check_time(t);
    if (kind_ == ScheduleKind::constant) return beta0_;
    return beta0_ + (beta1_ - beta0_) * t / horizon_;
}

double Schedule::beta_integral(double t) const {
    check_time(t);
    if (kind_ == ScheduleKind::constant) return beta0_ * t;
    return beta0_ * t + 0.5 * (beta1_ - beta0_) * t * t / horizon_;
}

AlphaSigma Schedule::alpha_sigma(double t) const {
    const double alpha = std::exp(-0.5 * beta_integral(t));
    const double sigma = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
    return {alpha, sigma};
}

Vec Schedule::forward_perturb(const Vec& x0, double t, const Vec& eps) const {
    check_same_dim(x0, eps);
    const auto [alpha, sigma] = alpha_sigma(t);
    return scale_add(alpha, x0, sigma, eps);
}

}  // namespace geoflow
