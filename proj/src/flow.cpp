#include "geoflow/flow.hpp"

#include <cmath>

namespace geoflow {

Vec pf_drift(const ScoreField& field, const Vec& x, double t) {
    const double half_beta = 0.5 * field.schedule().beta(t);
    const Vec s = field.score(x, t);
    return scale_add(-half_beta, x, -half_beta, s);
}

Vec integrate(const ScoreField& field, Vec x, const FlowConfig& cfg) {
    if (cfg.n_steps < 1) throw std::invalid_argument("flow: n_steps must be >= 1");
    if (cfg.t_start == cfg.t_end) throw std::invalid_argument("flow: empty time interval");
    if (x.size() != field.dimension()) throw std::invalid_argument("flow: dimension mismatch");
    if (!all_finite(x)) throw IntegrationError(0, "non-finite initial state");

    const double dt = (cfg.t_end - cfg.t_start) / static_cast<double>(cfg.n_steps);
    Vec predictor(x.size());
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
        const double t = cfg.t_start + dt * static_cast<double>(k);
        const Vec f1 = pf_drift(field, x, t);
        if (cfg.method == IntegratorMethod::euler) {
            kernels::axpy(dt, f1, x);
        } else {
            kernels::scale_add(1.0, x, dt, f1, predictor);
            const Vec f2 = pf_drift(field, predictor, t + dt);
            kernels::axpy(0.5 * dt, f1, x);
            kernels::axpy(0.5 * dt, f2, x);
        }
        if (!all_finite(x)) throw IntegrationError(k, "state became non-finite");
    }
    return x;
}

Vec phi(const ScoreField& field, const Vec& z, std::size_t n_steps) {
    FlowConfig cfg;
    cfg.method = IntegratorMethod::heun;
    cfg.n_steps = n_steps;
    cfg.t_start = field.schedule().horizon();
    cfg.t_end = kTimeFloor;
    return integrate(field, z, cfg);
}

RetractResult retract(const ScoreField& field, const Vec& x, const std::vector<Vec>& ensemble,
                      const RetractionConfig& cfg, const RngStream& rng) {
    const double horizon = field.schedule().horizon();
    if (!(cfg.t_retract > 0.0 && cfg.t_retract <= horizon))
        throw std::invalid_argument("retract: t_retract outside (0, T]");
    const std::size_t n = x.size();
    for (const Vec& p : ensemble) {
        if (p.size() != n) throw std::invalid_argument("retract: dimension mismatch");
    }

    const auto [alpha, sigma] = field.schedule().alpha_sigma(cfg.t_retract);
    const Vec shared_eps =
        (cfg.noise_mode == NoiseMode::shared) ? rng.normal_vec(n) : Vec(n, 0.0);

    const auto noised = [&](const Vec& p, std::size_t index) {
        switch (cfg.noise_mode) {
            case NoiseMode::shared: return scale_add(alpha, p, sigma, shared_eps);
            case NoiseMode::independent: {
                const Vec eps = rng.derive(index).normal_vec(n);
                return scale_add(alpha, p, sigma, eps);
            }
            case NoiseMode::deterministic:
            default: return scaled(alpha, p);
        }
    };

    FlowConfig denoise;
    denoise.method = IntegratorMethod::heun;
    denoise.n_steps = cfg.n_steps;
    denoise.t_start = cfg.t_retract;
    denoise.t_end = kTimeFloor;

    RetractResult out;
    out.x = integrate(field, noised(x, 0), denoise);
    out.ensemble.reserve(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        out.ensemble.push_back(integrate(field, noised(ensemble[i], i + 1), denoise));
    }
    return out;
}

}  // namespace geoflow
