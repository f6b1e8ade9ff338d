#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "geoflow/rng.hpp"
#include "geoflow/score.hpp"
#include "geoflow/vec.hpp"

namespace geoflow {

// Scores of tight tubes stiffen as t -> 0 (component variance -> tube_rho^2);
// integration stops at this floor and the endpoint is treated as "x at t=0".
inline constexpr double kTimeFloor = 1e-3;

enum class IntegratorMethod { euler, heun };

struct FlowConfig {
    IntegratorMethod method = IntegratorMethod::heun;
    std::size_t n_steps = 100;
    double t_start = 1.0;
    double t_end = kTimeFloor;
};

enum class NoiseMode { shared, independent, deterministic };

struct RetractionConfig {
    double t_retract = 0.2;
    std::size_t n_steps = 5;
    NoiseMode noise_mode = NoiseMode::shared;
};

class IntegrationError : public std::runtime_error {
  public:
    IntegrationError(std::size_t step, const std::string& what)
        : std::runtime_error("integration error at step " + std::to_string(step) + ": " + what),
          step_(step) {}
    std::size_t step() const { return step_; }

  private:
    std::size_t step_;
};

// probability-flow drift: -1/2 beta(t) x - 1/2 beta(t) s(x,t)
Vec pf_drift(const ScoreField& field, const Vec& x, double t);

// Fixed-grid Euler/Heun between cfg.t_start and cfg.t_end; the direction is
// inferred from the endpoints. Deterministic given (field, x_init, cfg).
Vec integrate(const ScoreField& field, Vec x, const FlowConfig& cfg);

// backward PF map: integrate from t = T down to the time floor
Vec phi(const ScoreField& field, const Vec& z, std::size_t n_steps = 100);

struct RetractResult {
    Vec x;
    std::vector<Vec> ensemble;
};

// Noising-denoising retraction applied jointly to x and the ensemble.
// Shared mode draws one noise vector for all points (preserving pairwise
// differences through the noising half), independent draws one per point,
// deterministic uses zero noise.
RetractResult retract(const ScoreField& field, const Vec& x, const std::vector<Vec>& ensemble,
                      const RetractionConfig& cfg, const RngStream& rng);

}  // namespace geoflow
