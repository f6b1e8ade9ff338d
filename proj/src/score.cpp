#include "geoflow/score.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geoflow {

namespace {
constexpr double kWeightTol = 1e-10;
}

ScoreField::ScoreField(std::vector<GaussianComponent> components, Schedule schedule)
    : components_(std::move(components)), schedule_(std::move(schedule)) {
    if (components_.empty()) throw std::invalid_argument("score: no components");
    dim_ = components_.front().mean.size();
    double total = 0.0;
    for (const auto& c : components_) {
        if (c.mean.size() != dim_) throw std::invalid_argument("score: component dim mismatch");
        if (!(c.variance > 0.0)) throw std::invalid_argument("score: variance must be positive");
        if (!(c.weight > 0.0)) throw std::invalid_argument("score: weight must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > kWeightTol)
        throw std::invalid_argument("score: weights must sum to 1");
    mean_sqnorm_.reserve(components_.size());
    for (const auto& c : components_) mean_sqnorm_.push_back(squared_norm(c.mean));
}

ScoreField ScoreField::standard_gaussian(std::size_t dim, Schedule schedule) {
    return ScoreField({GaussianComponent{1.0, Vec(dim, 0.0), 1.0}}, std::move(schedule));
}

std::vector<DiffusedComponent> ScoreField::diffused_params(double t) const {
    const auto [alpha, sigma] = schedule_.alpha_sigma(t);
    std::vector<DiffusedComponent> out;
    out.reserve(components_.size());
    for (const auto& c : components_) {
        out.push_back({c.weight, scaled(alpha, c.mean),
                       c.variance * alpha * alpha + sigma * sigma});
    }
    return out;
}

Vec ScoreField::score(const Vec& x, double t) const {
    if (x.size() != dim_) throw std::invalid_argument("score: dimension mismatch");
    const auto [alpha, sigma] = schedule_.alpha_sigma(t);
    const double sigma2 = sigma * sigma;
    const double x_sqnorm = squared_norm(x);
    const std::size_t m = components_.size();

    // log responsibilities, stabilized by the running maximum
    std::vector<double> loglik(m);
    std::vector<double> xdotmu(m);
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        const auto& c = components_[j];
        const double vt = c.variance * alpha * alpha + sigma2;
        xdotmu[j] = kernels::dot(x, c.mean);
        const double sqdist = x_sqnorm - 2.0 * alpha * xdotmu[j] + alpha * alpha * mean_sqnorm_[j];
        loglik[j] = std::log(c.weight) -
                    0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi * vt) -
                    0.5 * sqdist / vt;
        lmax = std::max(lmax, loglik[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < m; ++j) denom += std::exp(loglik[j] - lmax);

    // s(x,t) = sum_j r_j (alpha mu_j - x) / v_jt, accumulated as
    // [sum_j r_j alpha / v_jt mu_j] - [sum_j r_j / v_jt] x
    Vec acc(dim_, 0.0);
    double xcoef = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const auto& c = components_[j];
        const double vt = c.variance * alpha * alpha + sigma2;
        const double r = std::exp(loglik[j] - lmax) / denom;
        kernels::axpy(r * alpha / vt, c.mean, acc);
        xcoef += r / vt;
    }
    Vec s = scale_add(1.0, acc, -xcoef, x);
    if (!all_finite(s)) throw std::runtime_error("score: non-finite score value");
    return s;
}

double ScoreField::log_density(const Vec& x, double t) const {
    if (x.size() != dim_) throw std::invalid_argument("score: dimension mismatch");
    const auto [alpha, sigma] = schedule_.alpha_sigma(t);
    const double sigma2 = sigma * sigma;
    const double x_sqnorm = squared_norm(x);
    double lmax = -std::numeric_limits<double>::infinity();
    std::vector<double> loglik(components_.size());
    for (std::size_t j = 0; j < components_.size(); ++j) {
        const auto& c = components_[j];
        const double vt = c.variance * alpha * alpha + sigma2;
        const double sqdist =
            x_sqnorm - 2.0 * alpha * kernels::dot(x, c.mean) + alpha * alpha * mean_sqnorm_[j];
        loglik[j] = std::log(c.weight) -
                    0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi * vt) -
                    0.5 * sqdist / vt;
        lmax = std::max(lmax, loglik[j]);
    }
    double acc = 0.0;
    for (double l : loglik) acc += std::exp(l - lmax);
    return lmax + std::log(acc);
}

ScoreField make_curve_tube(const ManifoldOracle& curve, std::size_t n_centers, double tube_rho,
                           Schedule schedule, std::optional<std::pair<double, double>> span) {
    if (!curve.is_curve()) throw std::invalid_argument("curve tube: manifold is not a curve");
    if (n_centers < 2) throw std::invalid_argument("curve tube: need at least 2 centers");
    if (!(tube_rho > 0.0)) throw std::invalid_argument("curve tube: tube radius must be positive");
    if (tube_rho >= curve.reach())
        throw std::invalid_argument("curve tube: tube radius must be below the curve reach");

    std::vector<GaussianComponent> comps;
    comps.reserve(n_centers);
    const double w = 1.0 / static_cast<double>(n_centers);
    if (curve.kind() == ManifoldKind::circle && !span) {
        // full turn, endpoint excluded
        for (std::size_t i = 0; i < n_centers; ++i) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n_centers);
            comps.push_back({w, curve.point_at(theta), tube_rho * tube_rho});
        }
    } else {
        const auto [lo, hi] = span.value_or(std::pair<double, double>{-1.0, 1.0});
        if (!(hi > lo)) throw std::invalid_argument("curve tube: empty parameter span");
        for (std::size_t i = 0; i < n_centers; ++i) {
            const double u =
                lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_centers - 1);
            comps.push_back({w, curve.point_at(u), tube_rho * tube_rho});
        }
    }
    return ScoreField(std::move(comps), std::move(schedule));
}

}  // namespace geoflow
