#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "geoflow/flow.hpp"
#include "geoflow/manifold.hpp"
#include "geoflow/rng.hpp"
#include "geoflow/score.hpp"
#include "geoflow/vec.hpp"

namespace geoflow {

using PointMap = std::function<Vec(const Vec&)>;

// Flow-propagated probe ensemble: z_i = z + sigma*xi_i, x_i = Phi(z_i),
// secants Delta_i = x_i - Phi(z).
struct SecantEnsemble {
    Vec base_latent;
    Vec base_x;
    std::vector<Vec> probes;   // xi_i (includes the mirrored probes in antithetic mode)
    double sigma_pert = 0.0;
    std::vector<Vec> members;  // x_i
    std::vector<Vec> secants;  // x_i - base_x
};

// Orthonormal tangent frame at a footpoint. Column signs follow the
// largest-magnitude-entry-positive convention so traversal directions are
// reproducible across runs.
class TangentFrame {
  public:
    TangentFrame() = default;
    TangentFrame(Vec footpoint, Eigen::MatrixXd basis, Eigen::VectorXd singular_values,
                 bool degenerate, double sigma_pert, std::size_t ensemble_size);

    const Vec& footpoint() const { return footpoint_; }
    const Eigen::MatrixXd& basis() const { return basis_; }
    const Eigen::VectorXd& singular_values() const { return singular_values_; }
    std::size_t dim() const { return static_cast<std::size_t>(basis_.cols()); }
    std::size_t ambient_dim() const { return static_cast<std::size_t>(basis_.rows()); }
    bool degenerate() const { return degenerate_; }
    double sigma_pert() const { return sigma_pert_; }
    std::size_t ensemble_size() const { return ensemble_size_; }

    // U U^T, materialized on first use
    const Eigen::MatrixXd& projector() const;
    // U (U^T g) without materializing the projector
    Vec project(const Vec& g) const;

    // flip column signs to align with a previous frame (direction continuity
    // across refreshes inside an edit run)
    void align_signs_with(const TangentFrame& previous);

  private:
    Vec footpoint_;
    Eigen::MatrixXd basis_;
    Eigen::VectorXd singular_values_;
    bool degenerate_ = false;
    double sigma_pert_ = 0.0;
    std::size_t ensemble_size_ = 0;
    mutable std::optional<Eigen::MatrixXd> projector_;
};

// FD step heuristic balancing truncation and roundoff at double precision.
inline double fd_step(const Vec& z) { return 1e-4 * (1.0 + norm(z)); }

SecantEnsemble generate_ensemble(const ScoreField& field, const Vec& z, std::size_t m,
                                 double sigma_pert, const FlowConfig& flow_cfg,
                                 const RngStream& rng, bool antithetic = false);

// Centered-secant SVD estimator. center=false skips the mean subtraction
// (used by anchor-based refreshes, whose secants are already taken about the
// footpoint); centering costs one degree of freedom, so k <= m-1 when
// centered and k <= m otherwise.
TangentFrame estimate_frame_from_secants(const std::vector<Vec>& secants, const Vec& base_x,
                                         std::size_t k, bool center, double sigma_pert = 0.0);

TangentFrame estimate_frame(const SecantEnsemble& ens, std::size_t k);

// column-by-column central differences
Eigen::MatrixXd fd_jacobian(const PointMap& map, const Vec& z, double h);

// Tweedie posterior mean: (x + sigma_t^2 s(x,t)) / alpha_t
Vec posterior_mean(const ScoreField& field, const Vec& x, double t);

// Baseline frame from the FD Jacobian of the posterior-mean predictor at
// diffusion time t; footpoint is the posterior mean itself.
TangentFrame loco_baseline_frame(const ScoreField& field, const Vec& x_t, double t, std::size_t k,
                                 double h);

// sigma_max((I - T T^T) S): sine of the largest principal angle between the
// spans; both inputs must have orthonormal columns.
double subspace_deviation(const Eigen::MatrixXd& t_basis, const Eigen::MatrixXd& s_basis);

struct TruncationFit {
    std::optional<double> slope;          // unset when the map is too linear
    std::vector<double> residual_norms;   // |r(sigma)| per requested sigma
};

// Order of the Taylor remainder r(sigma) = F(z+sigma*xi) - F(z)
// - sigma DF xi - sigma^2/2 D2F[xi,xi], with the first two directional
// derivatives taken by fourth-order central differences.
TruncationFit truncation_order(const PointMap& map, const Vec& z, const Vec& xi,
                               const std::vector<double>& sigmas, double fd_h = 1e-2);

TruncationFit truncation_order(const ScoreField& field, const Vec& z, const Vec& xi,
                               const std::vector<double>& sigmas, std::size_t n_steps = 100,
                               double fd_h = 1e-2);

// Minimal PCA dimension capturing an eta_var fraction of variance, normalized
// by min(n, N). Columns are mean-centered internally.
double rank_ratio(const Eigen::MatrixXd& samples, double eta_var);

// Oracle-path diagnostic: DPi(z) = Dpi(Phi(z)) DPhi(z) with DPhi by finite
// differences, M* = DPi DPi^T and its top-d eigenbasis.
struct DifferentialTarget {
    Eigen::MatrixXd dpi;          // n x n Jacobian of Pi = pi . Phi
    Eigen::MatrixXd basis;        // top-d eigenvectors of M*
    Eigen::VectorXd eigenvalues;  // all eigenvalues of M*, descending
};

DifferentialTarget differential_target(const ScoreField& field, const ManifoldOracle& oracle,
                                       const Vec& z, std::size_t d, std::size_t n_steps = 100);

// s_min = sigma_min(DPi(z) Xi) for a probe matrix Xi (n x k)
double secant_signal_min(const Eigen::MatrixXd& dpi, const Eigen::MatrixXd& probes);

}  // namespace geoflow
