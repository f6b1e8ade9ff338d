#include "geoflow/config.hpp"

#include <algorithm>
#include <stdexcept>

#include "geoflow/rng.hpp"

namespace geoflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing field '") + key + "'");
    return *it;
}

double number(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) fail(std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_unsigned() && !it->is_number_integer())
        fail(std::string("field '") + key + "' must be a nonnegative integer");
    const auto v = it->get<long long>();
    if (v < 0) fail(std::string("field '") + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

std::string text_or(const json& j, const char* key, const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return it->get<std::string>();
}

Vec vec_field(const json& j) {
    if (!j.is_array()) fail("expected an array of numbers");
    Vec v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(e.get<double>());
    return v;
}

std::vector<double> grid_or(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) return {};
    return it->get<std::vector<double>>();
}

Schedule parse_schedule(const json& j) {
    const std::string kind = text_or(j, "kind", "linear");
    const double horizon = number_or(j, "horizon", 1.0);
    if (kind == "constant") return Schedule::constant(number(j, "beta0"), horizon);
    if (kind == "linear")
        return Schedule::linear(number_or(j, "beta0", 0.1), number_or(j, "beta1", 20.0), horizon);
    fail("unknown schedule kind '" + kind + "'");
}

ManifoldOracle parse_manifold(const json& j) {
    const std::string kind = require(j, "kind").get<std::string>();
    const auto ambient = count_or(j, "ambient_dim", 2);
    if (kind == "line") return ManifoldOracle::line(ambient);
    if (kind == "parabola") return ManifoldOracle::parabola(number(j, "a"), ambient);
    if (kind == "circle") return ManifoldOracle::circle(number(j, "r"), ambient);
    if (kind == "sphere")
        return ManifoldOracle::sphere(number(j, "r"), count_or(j, "block_dim", 3), ambient);
    if (kind == "affine") {
        const json& basis_json = require(j, "basis");
        if (!basis_json.is_array() || basis_json.empty()) fail("affine basis must be columns");
        const Vec offset = vec_field(require(j, "offset"));
        Eigen::MatrixXd basis(static_cast<Eigen::Index>(offset.size()),
                              static_cast<Eigen::Index>(basis_json.size()));
        for (std::size_t c = 0; c < basis_json.size(); ++c) {
            const Vec col = vec_field(basis_json[c]);
            if (col.size() != offset.size()) fail("affine basis column dimension mismatch");
            for (std::size_t r = 0; r < col.size(); ++r)
                basis(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
        }
        return ManifoldOracle::affine(basis, offset);
    }
    fail("unknown manifold kind '" + kind + "'");
}

NoiseMode parse_noise_mode(const std::string& s) {
    if (s == "shared") return NoiseMode::shared;
    if (s == "independent") return NoiseMode::independent;
    if (s == "deterministic") return NoiseMode::deterministic;
    fail("unknown noise mode '" + s + "'");
}

NormalizeMode parse_normalize(const std::string& s) {
    if (s == "off") return NormalizeMode::off;
    if (s == "before_projection") return NormalizeMode::before_projection;
    if (s == "after_projection") return NormalizeMode::after_projection;
    fail("unknown normalize mode '" + s + "'");
}

GuidanceSpec parse_guidance(const json& j, std::size_t ambient_dim) {
    const std::string kind = text_or(j, "kind", "basis_direction");
    if (kind == "basis_direction")
        return GuidanceSpec::basis_direction(count_or(j, "index", 0), number_or(j, "sign", 1.0));
    if (kind == "toward_target") return GuidanceSpec::toward_target(vec_field(require(j, "target")));
    if (kind == "linear") return GuidanceSpec::linear(vec_field(require(j, "direction")));
    if (kind == "surrogate_cosine") {
        const auto rows = count_or(j, "embed_rows", 8);
        const auto seed = static_cast<std::uint64_t>(count_or(j, "embed_seed", 0));
        const Vec text = vec_field(require(j, "text"));
        if (text.size() != rows) fail("surrogate text dimension must equal embed_rows");
        // fixed seeded random embedding standing in for an external encoder
        std::mt19937_64 eng = RngStream(seed).derive("embed").engine();
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd embed(static_cast<Eigen::Index>(rows),
                              static_cast<Eigen::Index>(ambient_dim));
        for (Eigen::Index r = 0; r < embed.rows(); ++r)
            for (Eigen::Index c = 0; c < embed.cols(); ++c)
                embed(r, c) = gauss(eng) / std::sqrt(static_cast<double>(rows));
        return GuidanceSpec::surrogate_cosine(std::move(embed), text);
    }
    fail("unknown guidance kind '" + kind + "'");
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "tangent_compare",  "theorem_sweep",     "rank_ratio_curve",
        "geoedit_traversal", "projected_gd",     "ablation_stepsize",
        "ablation_refresh", "ablation_projection"};
    return names;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.raw = j;

    cfg.experiment = require(j, "experiment").get<std::string>();
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
        fail("unknown experiment '" + cfg.experiment + "'");

    cfg.seeds = require(j, "seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) fail("seeds must be nonempty");
    cfg.output_dir = text_or(j, "output_dir", "out");
    cfg.jobs = static_cast<unsigned>(count_or(j, "jobs", 1));
    if (cfg.jobs < 1) fail("jobs must be >= 1");

    if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"));
    if (j.contains("manifold")) cfg.manifold = parse_manifold(j.at("manifold"));

    std::size_t ambient = cfg.manifold ? cfg.manifold->ambient_dim() : 2;
    if (j.contains("score")) {
        const json& s = j.at("score");
        const std::string type = text_or(s, "type", "curve_tube");
        if (type == "curve_tube") {
            cfg.score_type = ScoreSpecType::curve_tube;
            cfg.n_centers = count_or(s, "n_centers", 64);
            cfg.tube_rho = number_or(s, "tube_rho", 0.05);
            if (s.contains("span")) {
                const auto span = s.at("span").get<std::vector<double>>();
                if (span.size() != 2) fail("score span must be [lo, hi]");
                cfg.span = {span[0], span[1]};
            }
            if (!cfg.manifold) fail("curve_tube score requires a manifold spec");
        } else if (type == "gmm") {
            cfg.score_type = ScoreSpecType::gmm;
            for (const auto& c : require(s, "components")) {
                cfg.gmm_components.push_back(GaussianComponent{
                    number(c, "weight"), vec_field(require(c, "mean")), number(c, "variance")});
            }
            if (cfg.gmm_components.empty()) fail("gmm needs at least one component");
            ambient = cfg.gmm_components.front().mean.size();
        } else if (type == "standard_gaussian") {
            cfg.score_type = ScoreSpecType::standard_gaussian;
            cfg.gaussian_dim = count_or(s, "dim", ambient);
            ambient = cfg.gaussian_dim;
        } else {
            fail("unknown score type '" + type + "'");
        }
    } else if (!cfg.manifold) {
        fail("missing score/manifold specification");
    }

    cfg.flow.t_start = cfg.schedule.horizon();
    cfg.flow.t_end = kTimeFloor;
    if (j.contains("flow")) {
        const json& f = j.at("flow");
        const std::string method = text_or(f, "method", "heun");
        if (method == "euler")
            cfg.flow.method = IntegratorMethod::euler;
        else if (method == "heun")
            cfg.flow.method = IntegratorMethod::heun;
        else
            fail("unknown integrator '" + method + "'");
        cfg.flow.n_steps = count_or(f, "n_steps", 100);
        if (cfg.flow.n_steps < 1) fail("flow n_steps must be >= 1");
    }

    cfg.retraction.t_retract = 0.2 * cfg.schedule.horizon();
    if (j.contains("retraction")) {
        const json& r = j.at("retraction");
        cfg.retraction.t_retract = number_or(r, "t_retract", cfg.retraction.t_retract);
        cfg.retraction.n_steps = count_or(r, "n_steps", 5);
        cfg.retraction.noise_mode = parse_noise_mode(text_or(r, "noise_mode", "shared"));
        if (!(cfg.retraction.t_retract > 0.0 &&
              cfg.retraction.t_retract <= cfg.schedule.horizon()))
            fail("t_retract must lie in (0, T]");
        if (cfg.retraction.n_steps < 1) fail("retraction n_steps must be >= 1");
    }

    if (j.contains("estimator")) {
        const json& e = j.at("estimator");
        cfg.estimator.m = count_or(e, "m", 10);
        cfg.estimator.sigma_pert = number_or(e, "sigma_pert", 0.2);
        cfg.estimator.k = count_or(e, "k", 1);
        cfg.estimator.antithetic = e.value("antithetic", false);
        if (cfg.estimator.m < 1) fail("estimator m must be >= 1");
        if (!(cfg.estimator.sigma_pert > 0.0)) fail("estimator sigma_pert must be positive");
        if (cfg.estimator.k < 1) fail("estimator k must be >= 1");
    }

    if (j.contains("edit")) {
        const json& e = j.at("edit");
        cfg.edit.eta = number_or(e, "eta", 0.1);
        cfg.edit.iterations = count_or(e, "iterations", 64);
        cfg.edit.refresh_period = count_or(e, "refresh_period", 4);
        cfg.edit.normalize = parse_normalize(text_or(e, "normalize", "off"));
        cfg.edit.project = e.value("project", true);
        if (e.contains("guidance")) cfg.edit.guidance = parse_guidance(e.at("guidance"), ambient);
        if (cfg.edit.eta < 0.0) fail("edit eta must be >= 0");
        if (cfg.edit.iterations < 1) fail("edit iterations must be >= 1");
        if (cfg.edit.refresh_period < 1) fail("edit refresh_period must be >= 1");
    }

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        cfg.sweep.sigma = grid_or(s, "sigma");
        cfg.sweep.rho = grid_or(s, "rho");
        cfg.sweep.kappa_a = grid_or(s, "kappa_a");
        cfg.sweep.eta = grid_or(s, "eta");
        cfg.sweep.t_grid = grid_or(s, "t_grid");
        if (s.contains("k")) cfg.sweep.k = s.at("k").get<std::vector<std::size_t>>();
        if (s.contains("q")) cfg.sweep.q = s.at("q").get<std::vector<std::size_t>>();
        cfg.sweep.n_samples = count_or(s, "n_samples", 64);
        cfg.sweep.eta_var = number_or(s, "eta_var", 0.99);
        cfg.sweep.z_scale = number_or(s, "z_scale", 1.0);
        cfg.sweep.baseline_t = number_or(s, "baseline_t", 0.1 * cfg.schedule.horizon());
        cfg.sweep.target_arc = number_or(s, "target_arc", 1.5);
    }

    return cfg;
}

std::vector<std::string> validate_config(const nlohmann::json& j) {
    std::vector<std::string> diags;
    ExperimentConfig cfg;
    try {
        cfg = parse_config(j);
    } catch (const std::exception& e) {
        diags.push_back(e.what());
        return diags;
    }

    if (cfg.score_type == ScoreSpecType::curve_tube && cfg.manifold) {
        if (!cfg.manifold->is_curve())
            diags.push_back("score: curve_tube requires a curve manifold (line/parabola/circle)");
        else if (cfg.tube_rho >= cfg.manifold->reach())
            diags.push_back("score: tube_rho must be below the manifold reach (" +
                            std::to_string(cfg.manifold->reach()) + ")");
        if (!(cfg.tube_rho > 0.0)) diags.push_back("score: tube_rho must be positive");
        if (cfg.n_centers < 2) diags.push_back("score: n_centers must be >= 2");
    }

    const std::size_t members =
        cfg.estimator.antithetic ? 2 * cfg.estimator.m : cfg.estimator.m;
    if (cfg.estimator.k > members - 1)
        diags.push_back("estimator: k must be <= m-1 (centering consumes one secant)");

    if (!(cfg.retraction.t_retract > 0.0 && cfg.retraction.t_retract <= cfg.schedule.horizon()))
        diags.push_back("retraction: t_retract must lie in (0, T]");

    if (cfg.experiment == "theorem_sweep" && cfg.sweep.sigma.empty() && cfg.sweep.rho.empty() &&
        cfg.sweep.kappa_a.empty() && cfg.sweep.k.empty())
        diags.push_back("sweep: theorem_sweep needs at least one of sigma/rho/kappa_a/k grids");
    if (cfg.experiment == "rank_ratio_curve") {
        if (cfg.sweep.t_grid.empty()) diags.push_back("sweep: rank_ratio_curve needs t_grid");
        if (cfg.sweep.n_samples < 2) diags.push_back("sweep: n_samples must be >= 2");
        if (!(cfg.sweep.eta_var > 0.0 && cfg.sweep.eta_var < 1.0))
            diags.push_back("sweep: eta_var must lie in (0,1)");
        for (double t : cfg.sweep.t_grid)
            if (!(t >= kTimeFloor && t <= cfg.schedule.horizon()))
                diags.push_back("sweep: t_grid values must lie in [t_min, T]");
    }
    if (cfg.experiment == "ablation_stepsize" && cfg.sweep.eta.empty())
        diags.push_back("sweep: ablation_stepsize needs an eta grid");
    if (cfg.experiment == "ablation_refresh" && cfg.sweep.q.empty())
        diags.push_back("sweep: ablation_refresh needs a q grid");

    const bool needs_oracle = cfg.experiment != "rank_ratio_curve";
    if (needs_oracle && !cfg.manifold)
        diags.push_back("manifold: experiment '" + cfg.experiment + "' needs a manifold oracle");

    return diags;
}

ScoreField build_field(const ExperimentConfig& cfg) {
    switch (cfg.score_type) {
        case ScoreSpecType::curve_tube:
            return make_curve_tube(*cfg.manifold, cfg.n_centers, cfg.tube_rho, cfg.schedule,
                                   cfg.span);
        case ScoreSpecType::gmm: return ScoreField(cfg.gmm_components, cfg.schedule);
        case ScoreSpecType::standard_gaussian:
        default: return ScoreField::standard_gaussian(cfg.gaussian_dim, cfg.schedule);
    }
}

}  // namespace geoflow
