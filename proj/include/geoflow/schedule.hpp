#pragma once

#include "geoflow/vec.hpp"

namespace geoflow {

enum class ScheduleKind { constant, linear };

struct AlphaSigma {
    double alpha;
    double sigma;
};

// VP noise schedule: beta(t) >= 0 on [0, T], alpha_t = exp(-1/2 int_0^t beta),
// sigma_t = sqrt(1 - alpha_t^2). Immutable after construction.
class Schedule {
  public:
    Schedule(ScheduleKind kind, double beta0, double beta1 = 0.0, double horizon = 1.0);

    static Schedule constant(double beta0, double horizon = 1.0) {
        return Schedule(ScheduleKind::constant, beta0, beta0, horizon);
    }
    static Schedule linear(double beta0, double beta1, double horizon = 1.0) {
        return Schedule(ScheduleKind::linear, beta0, beta1, horizon);
    }

    double beta(double t) const;
    // int_0^t beta(s) ds, closed form per kind
    double beta_integral(double t) const;
    AlphaSigma alpha_sigma(double t) const;

    // alpha_t * x0 + sigma_t * eps
    Vec forward_perturb(const Vec& x0, double t, const Vec& eps) const;

    double horizon() const { return horizon_; }
    ScheduleKind kind() const { return kind_; }

  private:
    void check_time(double t) const;

    ScheduleKind kind_;
    double beta0_;
    double beta1_;
    double horizon_;
};

}  // namespace geoflow
