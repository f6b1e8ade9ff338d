#include "geoflow/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>

#include "geoflow/serialize.hpp"

namespace geoflow {

namespace {

using Cell = ResultTable::Cell;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kToolVersion = "geoflow 0.1.0";

double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double angle_deg(double deviation) {
    return std::asin(std::clamp(deviation, 0.0, 1.0)) * 180.0 / std::numbers::pi;
}

Vec col_to_vec(const Eigen::MatrixXd& m, Eigen::Index c) {
    Vec v(m.rows());
    for (Eigen::Index r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m(r, c);
    return v;
}

void parallel_cells(std::size_t n_cells, unsigned jobs,
                    const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n_cells <= 1) {
        for (std::size_t i = 0; i < n_cells; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const unsigned n_threads = std::min<unsigned>(jobs, static_cast<unsigned>(n_cells));
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n_cells; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

// Tracks the footpoint curve parameter along a trajectory, unwrapping circle
// angles so displacements accumulate continuously.
class ParamTracker {
  public:
    explicit ParamTracker(const ManifoldOracle& oracle) : oracle_(oracle) {}

    double update(const Vec& x) {
        const double raw = oracle_.curve_param(oracle_.nearest_point(x));
        if (oracle_.kind() != ManifoldKind::circle) {
            unwrapped_ = raw;
        } else if (first_) {
            unwrapped_ = raw;
        } else {
            double d = raw - prev_raw_;
            while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
            while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
            unwrapped_ += d;
        }
        prev_raw_ = raw;
        first_ = false;
        return unwrapped_;
    }

  private:
    const ManifoldOracle& oracle_;
    bool first_ = true;
    double prev_raw_ = 0.0;
    double unwrapped_ = 0.0;
};

EditConfig edit_config_from(const ExperimentConfig& cfg) {
    EditConfig e;
    e.eta = cfg.edit.eta;
    e.iterations = cfg.edit.iterations;
    e.refresh_period = cfg.edit.refresh_period;
    e.ensemble_m = cfg.estimator.m;
    e.sigma_pert = cfg.estimator.sigma_pert;
    e.frame_dim = cfg.estimator.k;
    e.retraction = cfg.retraction;
    e.guidance = cfg.edit.guidance;
    e.normalize = cfg.edit.normalize;
    e.project = cfg.edit.project;
    e.flow_steps = cfg.flow.n_steps;
    return e;
}

ResultTable trace_table(const std::string& name, const EditTrace& trace, std::uint64_t seed) {
    ResultTable t;
    t.name = name;
    t.metadata.emplace_back("seed", std::to_string(seed));
    t.columns = {"iter", "loss", "tube_dist", "deviation", "refresh_flag"};
    const std::size_t dim = trace.records.empty() ? 0 : trace.records.front().x.size();
    for (std::size_t i = 0; i < dim; ++i) t.columns.push_back("x" + std::to_string(i));
    for (const EditRecord& rec : trace.records) {
        std::vector<Cell> row;
        row.reserve(5 + dim);
        row.emplace_back(static_cast<long long>(rec.iteration));
        row.emplace_back(rec.loss);
        row.emplace_back(rec.tube_distance);
        row.emplace_back(rec.frame_deviation);
        row.emplace_back(static_cast<long long>(rec.refreshed ? 1 : 0));
        for (double xi : rec.x) row.emplace_back(xi);
        t.rows.push_back(std::move(row));
    }
    return t;
}

Vec draw_latent(const RngStream& rng, std::size_t dim, double scale) {
    Vec z = rng.normal_vec(dim);
    if (scale != 1.0) z = scaled(scale, z);
    return z;
}

// ---------------------------------------------------------------- tangent_compare

RunOutput run_tangent_compare(const ExperimentConfig& cfg) {
    const ScoreField field = build_field(cfg);
    const ManifoldOracle& oracle = *cfg.manifold;

    ResultTable table;
    table.name = "tangent_compare";
    table.columns = {"seed", "method", "deviation", "angle_deg", "error"};

    std::vector<std::vector<std::vector<Cell>>> slots(cfg.seeds.size());
    parallel_cells(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        const RngStream rng = RngStream(seed).derive("tangent_compare");
        try {
            const Vec z = draw_latent(rng.derive("z"), field.dimension(), cfg.sweep.z_scale);
            SecantEnsemble ens =
                generate_ensemble(field, z, cfg.estimator.m, cfg.estimator.sigma_pert, cfg.flow,
                                  rng.derive("ensemble"), cfg.estimator.antithetic);
            const Eigen::MatrixXd truth = oracle.tangent_basis(oracle.nearest_point(ens.base_x));

            const TangentFrame secant = estimate_frame(ens, cfg.estimator.k);
            const double dev_secant = subspace_deviation(truth, secant.basis());

            const double tb = cfg.sweep.baseline_t;
            const auto [alpha, sigma_t] = field.schedule().alpha_sigma(tb);
            (void)sigma_t;
            const Vec x_t = scaled(alpha, ens.base_x);
            const TangentFrame loco =
                loco_baseline_frame(field, x_t, tb, cfg.estimator.k, fd_step(x_t));
            const double dev_loco = subspace_deviation(truth, loco.basis());

            slots[i].push_back({static_cast<long long>(seed), std::string("secant_pca"),
                                dev_secant, angle_deg(dev_secant), std::string()});
            slots[i].push_back({static_cast<long long>(seed), std::string("posterior_jacobian"),
                                dev_loco, angle_deg(dev_loco), std::string()});
        } catch (const std::exception& e) {
            slots[i].push_back({static_cast<long long>(seed), std::string("error"), kNaN, kNaN,
                                std::string(e.what())});
        }
    });
    for (auto& s : slots)
        for (auto& r : s) table.rows.push_back(std::move(r));
    return {{std::move(table)}};
}

// ---------------------------------------------------------------- theorem_sweep

struct SweepCell {
    std::string sweep;
    double sigma;
    double rho;
    double parabola_a;
    std::size_t k;
    std::uint64_t seed;
};

RunOutput run_theorem_sweep(const ExperimentConfig& cfg) {
    const double base_a =
        (cfg.manifold && cfg.manifold->kind() == ManifoldKind::parabola)
            ? cfg.manifold->parabola_coeff()
            : 1.0;
    const std::size_t ambient = cfg.manifold ? cfg.manifold->ambient_dim() : 2;

    std::vector<SweepCell> cells;
    const auto push_grid = [&](const std::string& name, auto&& values, auto&& make) {
        for (const auto& v : values)
            for (std::uint64_t seed : cfg.seeds) cells.push_back(make(name, v, seed));
    };
    push_grid("sigma", cfg.sweep.sigma, [&](const std::string& n, double v, std::uint64_t s) {
        return SweepCell{n, v, cfg.tube_rho, base_a, cfg.estimator.k, s};
    });
    push_grid("rho", cfg.sweep.rho, [&](const std::string& n, double v, std::uint64_t s) {
        return SweepCell{n, cfg.estimator.sigma_pert, v, base_a, cfg.estimator.k, s};
    });
    push_grid("kappa", cfg.sweep.kappa_a, [&](const std::string& n, double v, std::uint64_t s) {
        return SweepCell{n, cfg.estimator.sigma_pert, cfg.tube_rho, v, cfg.estimator.k, s};
    });
    push_grid("k", cfg.sweep.k, [&](const std::string& n, std::size_t v, std::uint64_t s) {
        return SweepCell{n, cfg.estimator.sigma_pert, cfg.tube_rho, base_a, v, s};
    });

    ResultTable table;
    table.name = "theorem_sweep";
    table.columns = {"sweep", "seed", "sigma", "rho", "kappa", "k", "deviation", "error"};

    std::vector<std::vector<Cell>> slots(cells.size());
    parallel_cells(cells.size(), cfg.jobs, [&](std::size_t i) {
        const SweepCell& cell = cells[i];
        const double kappa = 2.0 * cell.parabola_a;
        try {
            const ManifoldOracle manifold = ManifoldOracle::parabola(cell.parabola_a, ambient);
            const ScoreField field =
                make_curve_tube(manifold, cfg.n_centers, cell.rho, cfg.schedule, cfg.span);
            // one stream per (seed, sweep): grid points share z and probes
            const RngStream rng =
                RngStream(cell.seed).derive("theorem_sweep").derive(cell.sweep);
            const Vec z = draw_latent(rng.derive("z"), ambient, cfg.sweep.z_scale);
            SecantEnsemble ens =
                generate_ensemble(field, z, cfg.estimator.m, cell.sigma, cfg.flow,
                                  rng.derive("ensemble"), cfg.estimator.antithetic);
            const TangentFrame frame = estimate_frame(ens, cell.k);
            const Eigen::MatrixXd truth =
                manifold.tangent_basis(manifold.nearest_point(ens.base_x));
            const double dev = subspace_deviation(truth, frame.basis());
            slots[i] = {cell.sweep,
                        static_cast<long long>(cell.seed),
                        cell.sigma,
                        cell.rho,
                        kappa,
                        static_cast<long long>(cell.k),
                        dev,
                        std::string()};
        } catch (const std::exception& e) {
            slots[i] = {cell.sweep,  static_cast<long long>(cell.seed),
                        cell.sigma,  cell.rho,
                        kappa,       static_cast<long long>(cell.k),
                        kNaN,        std::string(e.what())};
        }
    });

    for (auto& r : slots) table.rows.push_back(std::move(r));
    return {{std::move(table)}};
}

// ---------------------------------------------------------------- rank_ratio_curve

RunOutput run_rank_ratio(const ExperimentConfig& cfg) {
    const ScoreField field = build_field(cfg);
    const std::size_t n = field.dimension();
    const double horizon = cfg.schedule.horizon();

    std::vector<double> t_grid = cfg.sweep.t_grid;
    std::sort(t_grid.begin(), t_grid.end(), std::greater<>());

    ResultTable table;
    table.name = "rank_ratio_curve";
    table.columns = {"seed", "t", "rank_ratio", "error"};

    std::vector<std::vector<std::vector<Cell>>> slots(cfg.seeds.size());
    parallel_cells(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        const RngStream rng = RngStream(seed).derive("rank_ratio");
        try {
            const std::size_t n_samples = cfg.sweep.n_samples;
            std::vector<Vec> states(n_samples);
            for (std::size_t j = 0; j < n_samples; ++j)
                states[j] = rng.derive("samples").derive(j).normal_vec(n);

            double current_t = horizon;
            for (double t : t_grid) {
                if (t < current_t - 1e-15) {
                    FlowConfig seg = cfg.flow;
                    seg.t_start = current_t;
                    seg.t_end = t;
                    const double frac = (current_t - t) / (horizon - kTimeFloor);
                    seg.n_steps = std::max<std::size_t>(
                        1, static_cast<std::size_t>(
                               std::lround(static_cast<double>(cfg.flow.n_steps) * frac)));
                    for (Vec& s : states) s = integrate(field, std::move(s), seg);
                    current_t = t;
                }
                Eigen::MatrixXd stacked(static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(n_samples));
                for (std::size_t j = 0; j < n_samples; ++j)
                    for (std::size_t r = 0; r < n; ++r)
                        stacked(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                            states[j][r];
                const double ratio = rank_ratio(stacked, cfg.sweep.eta_var);
                slots[i].push_back(
                    {static_cast<long long>(seed), t, ratio, std::string()});
            }
        } catch (const std::exception& e) {
            slots[i].push_back({static_cast<long long>(seed), kNaN, kNaN,
                                std::string(e.what())});
        }
    });
    for (auto& s : slots)
        for (auto& r : s) table.rows.push_back(std::move(r));
    return {{std::move(table)}};
}

// ---------------------------------------------------------------- geoedit_traversal

struct TraversalOutcome {
    EditResult result;
    double initial_param = kNaN;
    double final_param = kNaN;
    double max_tube_dist = kNaN;
    double monotone_frac = kNaN;
};

TraversalOutcome traversal_metrics(const ManifoldOracle& oracle, EditResult result) {
    TraversalOutcome out;
    ParamTracker tracker(oracle);
    std::vector<double> params;
    params.reserve(result.trace.records.size());
    double max_dist = 0.0;
    for (const EditRecord& rec : result.trace.records) {
        params.push_back(tracker.update(rec.x));
        if (std::isfinite(rec.tube_distance)) max_dist = std::max(max_dist, rec.tube_distance);
    }
    out.initial_param = params.front();
    out.final_param = params.back();
    out.max_tube_dist = max_dist;

    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 1; i < params.size(); ++i) {
        const double d = params[i] - params[i - 1];
        if (d > 0.0)
            ++pos;
        else if (d < 0.0)
            ++neg;
    }
    const std::size_t total = params.size() - 1;
    out.monotone_frac = total ? static_cast<double>(std::max(pos, neg)) /
                                    static_cast<double>(total)
                              : kNaN;
    out.result = std::move(result);
    return out;
}

RunOutput run_traversal(const ExperimentConfig& cfg) {
    const ScoreField field = build_field(cfg);
    const ManifoldOracle& oracle = *cfg.manifold;
    const EditConfig edit_cfg = edit_config_from(cfg);

    ResultTable summary;
    summary.name = "traversal_summary";
    summary.columns = {"seed",          "final_param",  "net_displacement",
                       "max_tube_dist", "monotone_frac", "error"};

    std::vector<std::vector<Cell>> slots(cfg.seeds.size());
    std::vector<ResultTable> traces(cfg.seeds.size());
    parallel_cells(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        const RngStream rng = RngStream(seed).derive("traversal");
        try {
            const Vec z = draw_latent(rng.derive("z"), field.dimension(), cfg.sweep.z_scale);
            TraversalOutcome out =
                traversal_metrics(oracle, geoedit_run(field, z, edit_cfg, rng.derive("edit"),
                                                      &oracle));
            traces[i] = trace_table("trace_seed" + std::to_string(seed), out.result.trace, seed);
            slots[i] = {static_cast<long long>(seed),
                        out.final_param,
                        out.final_param - out.initial_param,
                        out.max_tube_dist,
                        out.monotone_frac,
                        std::string()};
        } catch (const std::exception& e) {
            slots[i] = {static_cast<long long>(seed), kNaN, kNaN, kNaN, kNaN,
                        std::string(e.what())};
        }
    });

    RunOutput out;
    for (auto& r : slots) summary.rows.push_back(std::move(r));
    out.tables.push_back(std::move(summary));
    for (auto& t : traces)
        if (!t.columns.empty()) out.tables.push_back(std::move(t));
    return out;
}

// ---------------------------------------------------------------- projected_gd

RunOutput run_projected_gd(const ExperimentConfig& cfg) {
    const ScoreField field = build_field(cfg);
    const ManifoldOracle& oracle = *cfg.manifold;
    const EditConfig edit_cfg = edit_config_from(cfg);

    ResultTable summary;
    summary.name = "projected_gd_summary";
    summary.columns = {"seed",       "loss_initial", "loss_final",
                       "loss_ratio", "final_tube_dist", "error"};

    std::vector<std::vector<Cell>> slots(cfg.seeds.size());
    std::vector<ResultTable> traces(cfg.seeds.size());
    parallel_cells(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        const RngStream rng = RngStream(seed).derive("projected_gd");
        try {
            const Vec z = draw_latent(rng.derive("z"), field.dimension(), cfg.sweep.z_scale);
            const Vec x0 = integrate(field, z, cfg.flow);
            const double param0 = oracle.curve_param(oracle.nearest_point(x0));
            const Vec target = oracle.point_at(param0 + cfg.sweep.target_arc);

            SmoothLoss loss;
            loss.value = [target](const Vec& x) {
                return 0.5 * kernels::squared_distance(x, target);
            };
            loss.gradient = [target](const Vec& x) { return sub(x, target); };

            EditResult result = projected_gd(field, loss, z, edit_cfg, rng.derive("run"), &oracle);
            traces[i] =
                trace_table("trace_seed" + std::to_string(seed), result.trace, seed);
            const double l0 = result.trace.records.front().loss;
            const double lk = result.trace.records.back().loss;
            const double tube = result.trace.records.back().tube_distance;
            slots[i] = {static_cast<long long>(seed), l0, lk, lk > 0.0 ? l0 / lk : kNaN, tube,
                        std::string()};
        } catch (const std::exception& e) {
            slots[i] = {static_cast<long long>(seed), kNaN, kNaN, kNaN, kNaN,
                        std::string(e.what())};
        }
    });

    RunOutput out;
    for (auto& r : slots) summary.rows.push_back(std::move(r));
    out.tables.push_back(std::move(summary));
    for (auto& t : traces)
        if (!t.columns.empty()) out.tables.push_back(std::move(t));
    return out;
}

// ---------------------------------------------------------------- ablation_stepsize

RunOutput run_stepsize(const ExperimentConfig& cfg) {
    const ScoreField field = build_field(cfg);
    const ManifoldOracle& oracle = *cfg.manifold;
    const double threshold = 2.0 * cfg.tube_rho;

    EditConfig edit_cfg = edit_config_from(cfg);
    edit_cfg.iterations = 1;  // one-step edits, varying eta

    const auto run_once = [&](std::uint64_t seed, double eta) {
        const RngStream rng = RngStream(seed).derive("stepsize");
        const Vec z = draw_latent(rng.derive("z"), field.dimension(), cfg.sweep.z_scale);
        EditConfig local = edit_cfg;
        local.eta = eta;
        const EditResult result = geoedit_run(field, z, local, rng.derive("edit"), &oracle);
        return result.trace.records.back().tube_distance;
    };

    ResultTable sweep_table;
    sweep_table.name = "stepsize_sweep";
    sweep_table.columns = {"seed", "eta", "post_retraction_dist", "error"};

    const std::size_t n_eta = cfg.sweep.eta.size();
    const std::size_t n_cells = n_eta * cfg.seeds.size();
    std::vector<std::vector<Cell>> slots(n_cells);
    std::vector<double> dists(n_cells, kNaN);
    parallel_cells(n_cells, cfg.jobs, [&](std::size_t i) {
        const double eta = cfg.sweep.eta[i / cfg.seeds.size()];
        const std::uint64_t seed = cfg.seeds[i % cfg.seeds.size()];
        try {
            const double dist = run_once(seed, eta);
            dists[i] = dist;
            slots[i] = {static_cast<long long>(seed), eta, dist, std::string()};
        } catch (const std::exception& e) {
            dists[i] = std::numeric_limits<double>::infinity();  // blow-up counts as failure
            slots[i] = {static_cast<long long>(seed), eta, kNaN, std::string(e.what())};
        }
    });
    for (auto& r : slots) sweep_table.rows.push_back(std::move(r));

    // first grid eta whose median post-retraction distance exceeds 2*rho
    double eta_star = kNaN;
    for (std::size_t g = 0; g < n_eta; ++g) {
        std::vector<double> per_seed(dists.begin() + g * cfg.seeds.size(),
                                     dists.begin() + (g + 1) * cfg.seeds.size());
        if (median(std::move(per_seed)) > threshold) {
            eta_star = cfg.sweep.eta[g];
            break;
        }
    }

    ResultTable summary;
    summary.name = "stepsize_summary";
    summary.columns = {"eta_star", "threshold", "median_at_half", "median_at_double", "error"};
    if (std::isnan(eta_star)) {
        summary.rows.push_back({kNaN, threshold, kNaN, kNaN,
                                std::string("no failure point inside the eta grid")});
    } else {
        const auto median_at = [&](double eta) {
            std::vector<double> vals;
            vals.reserve(cfg.seeds.size());
            for (std::uint64_t seed : cfg.seeds) {
                try {
                    vals.push_back(run_once(seed, eta));
                } catch (const std::exception&) {
                    vals.push_back(std::numeric_limits<double>::infinity());
                }
            }
            return median(std::move(vals));
        };
        summary.rows.push_back({eta_star, threshold, median_at(0.5 * eta_star),
                                median_at(2.0 * eta_star), std::string()});
    }
    return {{std::move(sweep_table), std::move(summary)}};
}

// ---------------------------------------------------------------- ablation_refresh

RunOutput run_refresh(const ExperimentConfig& cfg) {
    const ScoreField field = build_field(cfg);
    const ManifoldOracle& oracle = *cfg.manifold;

    ResultTable table;
    table.name = "refresh_sweep";
    table.columns = {"seed", "q", "final_param", "net_displacement", "error"};

    const std::size_t n_cells = cfg.sweep.q.size() * cfg.seeds.size();
    std::vector<std::vector<Cell>> slots(n_cells);
    parallel_cells(n_cells, cfg.jobs, [&](std::size_t i) {
        const std::size_t q = cfg.sweep.q[i / cfg.seeds.size()];
        const std::uint64_t seed = cfg.seeds[i % cfg.seeds.size()];
        // same stream for every q: runs differ only by the refresh period
        const RngStream rng = RngStream(seed).derive("refresh");
        try {
            const Vec z = draw_latent(rng.derive("z"), field.dimension(), cfg.sweep.z_scale);
            EditConfig local = edit_config_from(cfg);
            local.refresh_period = q;
            TraversalOutcome out = traversal_metrics(
                oracle, geoedit_run(field, z, local, rng.derive("edit"), &oracle));
            slots[i] = {static_cast<long long>(seed), static_cast<long long>(q), out.final_param,
                        out.final_param - out.initial_param, std::string()};
        } catch (const std::exception& e) {
            slots[i] = {static_cast<long long>(seed), static_cast<long long>(q), kNaN, kNaN,
                        std::string(e.what())};
        }
    });
    for (auto& r : slots) table.rows.push_back(std::move(r));
    return {{std::move(table)}};
}

// ---------------------------------------------------------------- ablation_projection

RunOutput run_projection_ablation(const ExperimentConfig& cfg) {
    const ScoreField field = build_field(cfg);
    const ManifoldOracle& oracle = *cfg.manifold;

    ResultTable table;
    table.name = "projection_ablation";
    table.columns = {"seed", "variant", "tangential_arc", "median_normal_step", "error"};

    std::vector<std::vector<std::vector<Cell>>> slots(cfg.seeds.size());
    parallel_cells(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        const RngStream rng = RngStream(seed).derive("projection_ablation");
        try {
            const Vec z = draw_latent(rng.derive("z"), field.dimension(), cfg.sweep.z_scale);
            const Vec x0 = integrate(field, z, cfg.flow);
            const Vec p0 = oracle.nearest_point(x0);
            const Eigen::MatrixXd tangent = oracle.tangent_basis(p0);
            const Vec tau = col_to_vec(tangent, 0);

            // unit normal at the start footpoint: deterministic axis choice
            // projected off the tangent
            Vec normal;
            for (const std::size_t axis : {std::size_t{1}, std::size_t{0}}) {
                Vec cand(x0.size(), 0.0);
                cand[axis] = 1.0;
                Vec res = sub(cand, scaled(dot(cand, tau), tau));
                if (norm(res) > 1e-6) {
                    normal = scaled(1.0 / norm(res), res);
                    break;
                }
            }
            if (normal.empty()) throw std::runtime_error("no normal direction found");

            // normal-dominant fixed guidance; the minus sign makes the
            // unprojected arm stall instead of accelerating along the curve
            const Vec w = scale_add(1.0, tau, -3.0, normal);

            EditConfig base = edit_config_from(cfg);
            base.guidance = GuidanceSpec::linear(w);
            base.normalize = NormalizeMode::after_projection;

            for (const bool project : {true, false}) {
                EditConfig local = base;
                local.project = project;
                const EditResult result =
                    geoedit_run(field, z, local, rng.derive("edit"), &oracle);

                ParamTracker tracker(oracle);
                std::vector<double> params;
                params.reserve(result.trace.records.size());
                std::vector<double> normal_steps;
                for (std::size_t r = 0; r < result.trace.records.size(); ++r) {
                    const EditRecord& rec = result.trace.records[r];
                    params.push_back(tracker.update(rec.x));
                    if (r == 0) continue;
                    const Vec& x_prev = result.trace.records[r - 1].x;
                    const Eigen::MatrixXd t_prev =
                        oracle.tangent_basis(oracle.nearest_point(x_prev));
                    const Eigen::Map<const Eigen::VectorXd> step(
                        rec.step.data(), static_cast<Eigen::Index>(rec.step.size()));
                    const Eigen::VectorXd normal_part =
                        step - t_prev * (t_prev.transpose() * step);
                    normal_steps.push_back(normal_part.norm());
                }
                const double arc = oracle.arc_length_between(params.front(), params.back());
                slots[i].push_back({static_cast<long long>(seed),
                                    std::string(project ? "projected" : "unprojected"), arc,
                                    median(std::move(normal_steps)), std::string()});
            }
        } catch (const std::exception& e) {
            slots[i].push_back({static_cast<long long>(seed), std::string("error"), kNaN, kNaN,
                                std::string(e.what())});
        }
    });
    for (auto& s : slots)
        for (auto& r : s) table.rows.push_back(std::move(r));
    return {{std::move(table)}};
}

}  // namespace

std::string table_to_csv(const ResultTable& table) {
    std::string out;
    for (const auto& [key, value] : table.metadata) out += "# " + key + "=" + value + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::visit(
                [&out](const auto& cell) {
                    using T = std::decay_t<decltype(cell)>;
                    if constexpr (std::is_same_v<T, long long>) {
                        out += std::to_string(cell);
                    } else if constexpr (std::is_same_v<T, double>) {
                        out += format_double(cell);
                    } else {
                        std::string s = cell;
                        for (char& c : s)
                            if (c == ',' || c == '\n') c = ';';
                        out += s;
                    }
                },
                row[i]);
        }
        out += '\n';
    }
    return out;
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
    RunOutput out;
    if (cfg.experiment == "tangent_compare")
        out = run_tangent_compare(cfg);
    else if (cfg.experiment == "theorem_sweep")
        out = run_theorem_sweep(cfg);
    else if (cfg.experiment == "rank_ratio_curve")
        out = run_rank_ratio(cfg);
    else if (cfg.experiment == "geoedit_traversal")
        out = run_traversal(cfg);
    else if (cfg.experiment == "projected_gd")
        out = run_projected_gd(cfg);
    else if (cfg.experiment == "ablation_stepsize")
        out = run_stepsize(cfg);
    else if (cfg.experiment == "ablation_refresh")
        out = run_refresh(cfg);
    else if (cfg.experiment == "ablation_projection")
        out = run_projection_ablation(cfg);
    else
        throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");

    const std::string hash = config_hash(cfg.raw);
    for (ResultTable& t : out.tables) {
        t.metadata.emplace_back("config_hash", hash);
        t.metadata.emplace_back("tool_version", kToolVersion);
        std::sort(t.metadata.begin(), t.metadata.end());
    }
    return out;
}

std::vector<std::string> run_and_write(const ExperimentConfig& cfg) {
    const RunOutput out = run_experiment(cfg);
    const std::filesystem::path dir =
        std::filesystem::path(cfg.output_dir) / cfg.experiment / config_hash(cfg.raw);
    std::filesystem::create_directories(dir);

    std::vector<std::string> paths;
    paths.reserve(out.tables.size());
    for (const ResultTable& t : out.tables) {
        const std::filesystem::path path = dir / (t.name + ".csv");
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << table_to_csv(t);
        paths.push_back(path.string());
    }
    return paths;
}

}  // namespace geoflow
