#include "geoflow/edit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace geoflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Map<const Eigen::VectorXd> as_eigen(const Vec& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void validate(const EditConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("edit: iterations must be >= 1");
    if (cfg.refresh_period < 1) throw std::invalid_argument("edit: refresh period must be >= 1");
    if (cfg.eta < 0.0) throw std::invalid_argument("edit: step size must be >= 0");
    if (cfg.frame_dim < 1) throw std::invalid_argument("edit: frame dimension must be >= 1");
}

double oracle_tube_distance(const ManifoldOracle* oracle, const Vec& x) {
    if (!oracle) return kNaN;
    try {
        return oracle->slack(x).distance;
    } catch (const std::exception&) {
        return kNaN;
    }
}

double oracle_frame_deviation(const ManifoldOracle* oracle, const Vec& x,
                              const TangentFrame& frame, bool has_frame) {
    if (!oracle || !has_frame) return kNaN;
    try {
        const Vec footpoint = oracle->nearest_point(x);
        return subspace_deviation(oracle->tangent_basis(footpoint), frame.basis());
    } catch (const std::exception&) {
        return kNaN;
    }
}

using DirectionFn = std::function<Vec(const Vec&, const TangentFrame&)>;
using LossFn = std::function<double(const Vec&)>;

EditResult run_loop(const ScoreField& field, EditState state, const EditConfig& cfg,
                    const RngStream& rng, const ManifoldOracle* oracle,
                    const DirectionFn& direction, const LossFn& loss, double step_sign) {
    validate(cfg);
    EditResult result;
    result.trace.records.reserve(cfg.iterations + 1);
    result.trace.records.push_back(
        {0, state.x, Vec(state.x.size(), 0.0), loss(state.x), oracle_tube_distance(oracle, state.x),
         oracle_frame_deviation(oracle, state.x, state.frame, state.has_frame), false,
         state.has_frame && state.frame.degenerate()});

    const RngStream retract_stream = rng.derive("retract");
    std::vector<Vec> secants(state.members.size());

    for (std::size_t k = 1; k <= cfg.iterations; ++k) {
        const bool refresh =
            (k == 1 && !state.has_frame) || (k % cfg.refresh_period == 0);
        if (refresh) {
            for (std::size_t i = 0; i < state.members.size(); ++i)
                secants[i] = sub(state.members[i], state.x);
            TangentFrame next = estimate_frame_from_secants(
                secants, state.x, cfg.frame_dim, state.centered_refresh, cfg.sigma_pert);
            if (state.has_frame) next.align_signs_with(state.frame);
            state.frame = std::move(next);
            state.has_frame = true;
        }

        Vec g = direction(state.x, state.frame);
        if (cfg.normalize == NormalizeMode::before_projection) {
            const double gn = norm(g);
            if (gn > 1e-300) g = scaled(1.0 / gn, g);
        }
        Vec v = cfg.project ? state.frame.project(g) : g;
        if (cfg.normalize == NormalizeMode::after_projection) {
            const double vn = norm(v);
            if (vn > 1e-300) v = scaled(1.0 / vn, v);
        }
        const Vec step = scaled(step_sign * cfg.eta, v);

        kernels::axpy(1.0, step, state.x);
        for (Vec& member : state.members) kernels::axpy(1.0, step, member);

        RetractResult retracted =
            retract(field, state.x, state.members, cfg.retraction, retract_stream.derive(k));
        state.x = std::move(retracted.x);
        state.members = std::move(retracted.ensemble);

        result.trace.records.push_back(
            {k, state.x, step, loss(state.x), oracle_tube_distance(oracle, state.x),
             oracle_frame_deviation(oracle, state.x, state.frame, state.has_frame), refresh,
             state.frame.degenerate()});
    }
    result.x = state.x;
    return result;
}

}  // namespace

GuidanceSpec GuidanceSpec::basis_direction(std::size_t index, double sign) {
    GuidanceSpec spec;
    spec.kind = GuidanceKind::basis_direction;
    spec.index = index;
    spec.sign = sign;
    return spec;
}

GuidanceSpec GuidanceSpec::toward_target(Vec target) {
    GuidanceSpec spec;
    spec.kind = GuidanceKind::toward_target;
    spec.target = std::move(target);
    return spec;
}

GuidanceSpec GuidanceSpec::linear(Vec direction) {
    GuidanceSpec spec;
    spec.kind = GuidanceKind::linear;
    spec.direction = std::move(direction);
    return spec;
}

GuidanceSpec GuidanceSpec::surrogate_cosine(Eigen::MatrixXd embed, Vec text) {
    if (!(norm(text) > 0.0))
        throw std::invalid_argument("guidance: text embedding must be nonzero");
    GuidanceSpec spec;
    spec.kind = GuidanceKind::surrogate_cosine;
    spec.embed = std::move(embed);
    spec.text = std::move(text);
    return spec;
}

Vec guidance_vector(const GuidanceSpec& spec, const Vec& x, const TangentFrame& frame) {
    switch (spec.kind) {
        case GuidanceKind::basis_direction: {
            if (spec.index >= frame.dim())
                throw std::invalid_argument("guidance: basis index out of range");
            const Eigen::VectorXd col = spec.sign * frame.basis().col(
                                            static_cast<Eigen::Index>(spec.index));
            return Vec(col.data(), col.data() + col.size());
        }
        case GuidanceKind::toward_target: return sub(spec.target, x);
        case GuidanceKind::linear: return spec.direction;
        case GuidanceKind::surrogate_cosine: {
            const Eigen::VectorXd u = spec.embed * as_eigen(x);
            const double un = u.norm();
            if (un < 1e-300) throw std::domain_error("guidance: embedded point is zero");
            const Eigen::VectorXd c = as_eigen(spec.text);
            const double cn = c.norm();
            const double cosv = u.dot(c) / (un * cn);
            const Eigen::VectorXd grad =
                spec.embed.transpose() * c / (un * cn) -
                cosv * (spec.embed.transpose() * u) / (un * un);
            return Vec(grad.data(), grad.data() + grad.size());
        }
    }
    throw std::logic_error("guidance: unknown kind");
}

double guidance_value(const GuidanceSpec& spec, const Vec& x) {
    switch (spec.kind) {
        case GuidanceKind::toward_target: return 0.5 * kernels::squared_distance(x, spec.target);
        case GuidanceKind::surrogate_cosine: {
            const Eigen::VectorXd u = spec.embed * as_eigen(x);
            const double un = u.norm();
            if (un < 1e-300) return kNaN;
            return u.dot(as_eigen(spec.text)) / (un * as_eigen(spec.text).norm());
        }
        default: return kNaN;
    }
}

EditResult geoedit_run(const ScoreField& field, const Vec& z, const EditConfig& cfg,
                       const RngStream& rng, const ManifoldOracle* oracle) {
    validate(cfg);
    FlowConfig flow_cfg;
    flow_cfg.method = IntegratorMethod::heun;
    flow_cfg.n_steps = cfg.flow_steps;
    flow_cfg.t_start = field.schedule().horizon();
    flow_cfg.t_end = kTimeFloor;

    SecantEnsemble ens = generate_ensemble(field, z, cfg.ensemble_m, cfg.sigma_pert, flow_cfg,
                                           rng.derive("ensemble"));
    EditState state;
    state.x = std::move(ens.base_x);
    state.members = std::move(ens.members);

    return run_loop(
        field, std::move(state), cfg, rng, oracle,
        [&cfg](const Vec& x, const TangentFrame& frame) {
            return guidance_vector(cfg.guidance, x, frame);
        },
        [&cfg](const Vec& x) { return guidance_value(cfg.guidance, x); }, +1.0);
}

EditState jacobian_start(const Vec& x, const Eigen::MatrixXd& u0, double eps_anchor,
                         const EditConfig& cfg) {
    if (static_cast<std::size_t>(u0.rows()) != x.size())
        throw std::invalid_argument("jacobian_start: basis dimension mismatch");
    if (static_cast<std::size_t>(u0.cols()) != cfg.frame_dim)
        throw std::invalid_argument("jacobian_start: basis width must equal frame_dim");
    const Eigen::MatrixXd gram = u0.transpose() * u0;
    if ((gram - Eigen::MatrixXd::Identity(u0.cols(), u0.cols())).cwiseAbs().maxCoeff() > 1e-6)
        throw std::invalid_argument("jacobian_start: basis not orthonormal");

    EditState state;
    state.x = x;
    state.members.reserve(u0.cols());
    for (Eigen::Index j = 0; j < u0.cols(); ++j) {
        Vec anchor = x;
        for (std::size_t i = 0; i < x.size(); ++i)
            anchor[i] += eps_anchor * u0(static_cast<Eigen::Index>(i), j);
        state.members.push_back(std::move(anchor));
    }
    state.frame = TangentFrame(x, u0, Eigen::VectorXd::Ones(u0.cols()), false, 0.0,
                               static_cast<std::size_t>(u0.cols()));
    state.has_frame = true;
    state.centered_refresh = false;
    return state;
}

EditResult run_edit_loop(const ScoreField& field, EditState state, const EditConfig& cfg,
                         const RngStream& rng, const ManifoldOracle* oracle) {
    return run_loop(
        field, std::move(state), cfg, rng, oracle,
        [&cfg](const Vec& x, const TangentFrame& frame) {
            return guidance_vector(cfg.guidance, x, frame);
        },
        [&cfg](const Vec& x) { return guidance_value(cfg.guidance, x); }, +1.0);
}

EditResult projected_gd(const ScoreField& field, const SmoothLoss& loss, const Vec& z,
                        const EditConfig& cfg, const RngStream& rng,
                        const ManifoldOracle* oracle) {
    validate(cfg);
    if (!loss.value) throw std::invalid_argument("projected_gd: loss value fn required");

    const auto gradient = [&loss](const Vec& x) -> Vec {
        if (loss.gradient) return loss.gradient(x);
        constexpr double h = 1e-5;
        Vec g(x.size());
        Vec xp = x, xm = x;
        for (std::size_t j = 0; j < x.size(); ++j) {
            xp[j] += h;
            xm[j] -= h;
            g[j] = (loss.value(xp) - loss.value(xm)) / (2.0 * h);
            xp[j] = x[j];
            xm[j] = x[j];
        }
        return g;
    };

    FlowConfig flow_cfg;
    flow_cfg.method = IntegratorMethod::heun;
    flow_cfg.n_steps = cfg.flow_steps;
    flow_cfg.t_start = field.schedule().horizon();
    flow_cfg.t_end = kTimeFloor;

    SecantEnsemble ens = generate_ensemble(field, z, cfg.ensemble_m, cfg.sigma_pert, flow_cfg,
                                           rng.derive("ensemble"));
    EditState state;
    state.x = std::move(ens.base_x);
    state.members = std::move(ens.members);

    return run_loop(
        field, std::move(state), cfg, rng, oracle,
        [&gradient](const Vec& x, const TangentFrame&) { return gradient(x); },
        [&loss](const Vec& x) { return loss.value(x); }, -1.0);
}

}  // namespace geoflow
