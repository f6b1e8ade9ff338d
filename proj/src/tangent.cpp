#include "geoflow/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geoflow {

namespace {

Eigen::Map<const Eigen::VectorXd> as_eigen(const Vec& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void apply_sign_convention(Eigen::MatrixXd& basis) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        Eigen::Index imax = 0;
        basis.col(j).cwiseAbs().maxCoeff(&imax);
        if (basis(imax, j) < 0.0) basis.col(j) = -basis.col(j);
    }
}

void check_orthonormal(const Eigen::MatrixXd& basis, const char* what) {
    const Eigen::MatrixXd gram = basis.transpose() * basis;
    const double dev =
        (gram - Eigen::MatrixXd::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-6) throw std::invalid_argument(std::string(what) + ": basis not orthonormal");
}

TangentFrame frame_from_svd(const Eigen::MatrixXd& matrix, const Vec& footpoint, std::size_t k,
                            double sigma_pert, std::size_t ensemble_size) {
    const auto max_rank = static_cast<std::size_t>(std::min(matrix.cols(), matrix.rows()));
    if (k < 1 || k > max_rank)
        throw std::invalid_argument("tangent: frame dimension out of range");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (!(sv(0) > 1e-300)) throw std::invalid_argument("tangent: zero secant matrix");

    Eigen::MatrixXd basis = svd.matrixU().leftCols(static_cast<Eigen::Index>(k));
    apply_sign_convention(basis);

    bool degenerate = sv(static_cast<Eigen::Index>(k - 1)) / sv(0) < 1e-10;
    if (k < max_rank) {
        const double sk = sv(static_cast<Eigen::Index>(k - 1));
        const double sk1 = sv(static_cast<Eigen::Index>(k));
        if (sk - sk1 <= 1e-6 * sk) degenerate = true;  // tie at the cut
    }
    return TangentFrame(footpoint, std::move(basis), sv.head(static_cast<Eigen::Index>(k)),
                        degenerate, sigma_pert, ensemble_size);
}

}  // namespace

TangentFrame::TangentFrame(Vec footpoint, Eigen::MatrixXd basis, Eigen::VectorXd singular_values,
                           bool degenerate, double sigma_pert, std::size_t ensemble_size)
    : footpoint_(std::move(footpoint)),
      basis_(std::move(basis)),
      singular_values_(std::move(singular_values)),
      degenerate_(degenerate),
      sigma_pert_(sigma_pert),
      ensemble_size_(ensemble_size) {}

const Eigen::MatrixXd& TangentFrame::projector() const {
    if (!projector_) projector_ = basis_ * basis_.transpose();
    return *projector_;
}

Vec TangentFrame::project(const Vec& g) const {
    if (g.size() != ambient_dim()) throw std::invalid_argument("frame: dimension mismatch");
    const Eigen::VectorXd p = basis_ * (basis_.transpose() * as_eigen(g));
    return Vec(p.data(), p.data() + p.size());
}

void TangentFrame::align_signs_with(const TangentFrame& previous) {
    if (previous.basis_.rows() != basis_.rows() || previous.basis_.cols() != basis_.cols())
        return;
    bool flipped = false;
    for (Eigen::Index j = 0; j < basis_.cols(); ++j) {
        if (previous.basis_.col(j).dot(basis_.col(j)) < 0.0) {
            basis_.col(j) = -basis_.col(j);
            flipped = true;
        }
    }
    if (flipped) projector_.reset();
}

SecantEnsemble generate_ensemble(const ScoreField& field, const Vec& z, std::size_t m,
                                 double sigma_pert, const FlowConfig& flow_cfg,
                                 const RngStream& rng, bool antithetic) {
    if (m < 1) throw std::invalid_argument("ensemble: m must be >= 1");
    if (!(sigma_pert > 0.0)) throw std::invalid_argument("ensemble: sigma_pert must be positive");

    SecantEnsemble ens;
    ens.base_latent = z;
    ens.sigma_pert = sigma_pert;
    ens.base_x = integrate(field, z, flow_cfg);

    std::mt19937_64 eng = rng.engine();
    std::normal_distribution<double> gauss(0.0, 1.0);
    ens.probes.reserve(antithetic ? 2 * m : m);
    for (std::size_t i = 0; i < m; ++i) {
        Vec xi(z.size());
        for (double& v : xi) v = gauss(eng);
        ens.probes.push_back(std::move(xi));
    }
    if (antithetic) {
        for (std::size_t i = 0; i < m; ++i) ens.probes.push_back(scaled(-1.0, ens.probes[i]));
    }

    ens.members.reserve(ens.probes.size());
    ens.secants.reserve(ens.probes.size());
    for (const Vec& xi : ens.probes) {
        const Vec zi = scale_add(1.0, z, sigma_pert, xi);
        Vec xi_flow = integrate(field, zi, flow_cfg);
        ens.secants.push_back(sub(xi_flow, ens.base_x));
        ens.members.push_back(std::move(xi_flow));
    }
    return ens;
}

TangentFrame estimate_frame_from_secants(const std::vector<Vec>& secants, const Vec& base_x,
                                         std::size_t k, bool center, double sigma_pert) {
    const std::size_t m = secants.size();
    if (m < 1) throw std::invalid_argument("tangent: empty secant set");
    const std::size_t budget = center ? m - 1 : m;
    if (k < 1 || k > budget)
        throw std::invalid_argument("tangent: k exceeds the secant rank budget");

    const auto n = static_cast<Eigen::Index>(base_x.size());
    Eigen::MatrixXd d_mat(n, static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        if (secants[i].size() != base_x.size())
            throw std::invalid_argument("tangent: secant dimension mismatch");
        d_mat.col(static_cast<Eigen::Index>(i)) = as_eigen(secants[i]);
    }
    if (center) {
        const Eigen::VectorXd mean = d_mat.rowwise().mean();
        d_mat.colwise() -= mean;
    }
    return frame_from_svd(d_mat, base_x, k, sigma_pert, m);
}

TangentFrame estimate_frame(const SecantEnsemble& ens, std::size_t k) {
    return estimate_frame_from_secants(ens.secants, ens.base_x, k, /*center=*/true,
                                       ens.sigma_pert);
}

Eigen::MatrixXd fd_jacobian(const PointMap& map, const Vec& z, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("fd_jacobian: step must be positive");
    const std::size_t n = z.size();
    Eigen::MatrixXd jac;
    Vec zp = z, zm = z;
    for (std::size_t j = 0; j < n; ++j) {
        zp[j] += h;
        zm[j] -= h;
        const Vec col = scale_add(0.5 / h, map(zp), -0.5 / h, map(zm));
        zp[j] = z[j];
        zm[j] = z[j];
        if (jac.size() == 0) jac.resize(static_cast<Eigen::Index>(col.size()),
                                        static_cast<Eigen::Index>(n));
        jac.col(static_cast<Eigen::Index>(j)) = as_eigen(col);
    }
    if (!jac.allFinite()) throw std::runtime_error("fd_jacobian: non-finite entries");
    return jac;
}

Vec posterior_mean(const ScoreField& field, const Vec& x, double t) {
    const auto [alpha, sigma] = field.schedule().alpha_sigma(t);
    if (alpha < 1e-8) throw std::domain_error("posterior_mean: alpha too small at this t");
    const Vec s = field.score(x, t);
    return scale_add(1.0 / alpha, x, sigma * sigma / alpha, s);
}

TangentFrame loco_baseline_frame(const ScoreField& field, const Vec& x_t, double t, std::size_t k,
                                 double h) {
    const Eigen::MatrixXd jac =
        fd_jacobian([&](const Vec& y) { return posterior_mean(field, y, t); }, x_t, h);
    return frame_from_svd(jac, posterior_mean(field, x_t, t), k, 0.0, 0);
}

double subspace_deviation(const Eigen::MatrixXd& t_basis, const Eigen::MatrixXd& s_basis) {
    if (t_basis.rows() != s_basis.rows())
        throw std::invalid_argument("subspace_deviation: ambient dimension mismatch");
    check_orthonormal(t_basis, "subspace_deviation");
    check_orthonormal(s_basis, "subspace_deviation");
    const Eigen::MatrixXd residual = s_basis - t_basis * (t_basis.transpose() * s_basis);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
    const double dev = svd.singularValues()(0);
    return std::clamp(dev, 0.0, 1.0);
}

TruncationFit truncation_order(const PointMap& map, const Vec& z, const Vec& xi,
                               const std::vector<double>& sigmas, double fd_h) {
    if (sigmas.size() < 3)
        throw std::invalid_argument("truncation_order: need at least 3 sigma values");
    for (double s : sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("truncation_order: sigmas must be positive");

    const auto along = [&](double s) { return map(scale_add(1.0, z, s, xi)); };

    const Vec g0 = map(z);
    const Vec gp1 = along(fd_h), gm1 = along(-fd_h);
    const Vec gp2 = along(2.0 * fd_h), gm2 = along(-2.0 * fd_h);

    // fourth-order central stencils for the first two directional derivatives
    Vec d1(z.size(), 0.0);
    kernels::axpy(-1.0 / (12.0 * fd_h), gp2, d1);
    kernels::axpy(8.0 / (12.0 * fd_h), gp1, d1);
    kernels::axpy(-8.0 / (12.0 * fd_h), gm1, d1);
    kernels::axpy(1.0 / (12.0 * fd_h), gm2, d1);

    const double h2 = fd_h * fd_h;
    Vec d2(z.size(), 0.0);
    kernels::axpy(-1.0 / (12.0 * h2), gp2, d2);
    kernels::axpy(16.0 / (12.0 * h2), gp1, d2);
    kernels::axpy(-30.0 / (12.0 * h2), g0, d2);
    kernels::axpy(16.0 / (12.0 * h2), gm1, d2);
    kernels::axpy(-1.0 / (12.0 * h2), gm2, d2);

    TruncationFit fit;
    fit.residual_norms.reserve(sigmas.size());
    bool too_linear = false;
    for (double s : sigmas) {
        Vec r = along(s);
        kernels::axpy(-1.0, g0, r);
        kernels::axpy(-s, d1, r);
        kernels::axpy(-0.5 * s * s, d2, r);
        const double rn = norm(r);
        fit.residual_norms.push_back(rn);
        if (rn < 1e-12) too_linear = true;
    }
    if (too_linear) return fit;  // slope undefined

    // least-squares slope of log|r| against log sigma
    const std::size_t n = sigmas.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += std::log(sigmas[i]);
        mean_y += std::log(fit.residual_norms[i]);
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(sigmas[i]) - mean_x;
        sxx += dx * dx;
        sxy += dx * (std::log(fit.residual_norms[i]) - mean_y);
    }
    fit.slope = sxy / sxx;
    return fit;
}

TruncationFit truncation_order(const ScoreField& field, const Vec& z, const Vec& xi,
                               const std::vector<double>& sigmas, std::size_t n_steps,
                               double fd_h) {
    return truncation_order([&](const Vec& zz) { return phi(field, zz, n_steps); }, z, xi, sigmas,
                            fd_h);
}

double rank_ratio(const Eigen::MatrixXd& samples, double eta_var) {
    if (samples.cols() < 2) throw std::invalid_argument("rank_ratio: need at least 2 samples");
    if (!(eta_var > 0.0 && eta_var < 1.0))
        throw std::invalid_argument("rank_ratio: eta_var must lie in (0,1)");

    Eigen::MatrixXd centered = samples;
    const Eigen::VectorXd mean = centered.rowwise().mean();
    centered.colwise() -= mean;
    if (centered.cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("rank_ratio: all-zero matrix");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const Eigen::VectorXd& sv = svd.singularValues();
    const auto d_max = static_cast<double>(std::min(samples.rows(), samples.cols()));

    double total = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) total += sv(i) * sv(i);
    double cum = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        cum += sv(i) * sv(i);
        if (cum / total >= eta_var - 1e-12)
            return static_cast<double>(i + 1) / d_max;
    }
    return 1.0;
}

DifferentialTarget differential_target(const ScoreField& field, const ManifoldOracle& oracle,
                                       const Vec& z, std::size_t d, std::size_t n_steps) {
    const Vec x = phi(field, z, n_steps);
    const Eigen::MatrixXd dphi =
        fd_jacobian([&](const Vec& zz) { return phi(field, zz, n_steps); }, z, fd_step(z));
    DifferentialTarget out;
    out.dpi = oracle.projection_differential(x) * dphi;
    const Eigen::MatrixXd m_star = out.dpi * out.dpi.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m_star);
    // SelfAdjointEigenSolver sorts ascending; flip to descending
    out.eigenvalues = eig.eigenvalues().reverse();
    const Eigen::MatrixXd vecs = eig.eigenvectors();
    out.basis.resize(vecs.rows(), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j)
        out.basis.col(static_cast<Eigen::Index>(j)) =
            vecs.col(vecs.cols() - 1 - static_cast<Eigen::Index>(j));
    apply_sign_convention(out.basis);
    return out;
}

double secant_signal_min(const Eigen::MatrixXd& dpi, const Eigen::MatrixXd& probes) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dpi * probes);
    return svd.singularValues().tail(1)(0);
}

}  // namespace geoflow
