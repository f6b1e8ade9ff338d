#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "geoflow/flow.hpp"
#include "geoflow/manifold.hpp"
#include "geoflow/rng.hpp"
#include "geoflow/score.hpp"
#include "geoflow/tangent.hpp"
#include "geoflow/vec.hpp"

namespace geoflow {

enum class GuidanceKind { basis_direction, toward_target, linear, surrogate_cosine };

// Ambient edit direction g(x). surrogate_cosine scores cos(Ex, c) through a
// fixed linear embedding, standing in for an external text-image encoder.
struct GuidanceSpec {
    GuidanceKind kind = GuidanceKind::basis_direction;
    std::size_t index = 0;
    double sign = 1.0;
    Vec target;            // toward_target
    Vec direction;         // linear
    Eigen::MatrixXd embed; // surrogate_cosine
    Vec text;              // surrogate_cosine

    static GuidanceSpec basis_direction(std::size_t index, double sign = 1.0);
    static GuidanceSpec toward_target(Vec target);
    static GuidanceSpec linear(Vec direction);
    static GuidanceSpec surrogate_cosine(Eigen::MatrixXd embed, Vec text);
};

enum class NormalizeMode {
    off,
    before_projection,  // x + eta * P(g/|g|)
    after_projection    // x + eta * Pg/|Pg|
};

struct EditConfig {
    double eta = 0.1;
    std::size_t iterations = 64;
    std::size_t refresh_period = 4;
    std::size_t ensemble_m = 10;
    double sigma_pert = 0.2;
    std::size_t frame_dim = 1;
    RetractionConfig retraction;
    GuidanceSpec guidance;
    NormalizeMode normalize = NormalizeMode::off;
    // ablation switch: false applies the raw ambient direction (no tangent
    // projection); the frame is still estimated so traces stay comparable
    bool project = true;
    std::size_t flow_steps = 100;
};

struct EditRecord {
    std::size_t iteration;
    Vec x;
    Vec step;               // eta * v applied this iteration (zero at record 0)
    double loss;            // NaN when the guidance defines no scalar
    double tube_distance;   // NaN without an oracle
    double frame_deviation; // NaN without an oracle or before the first frame
    bool refreshed;
    bool degenerate_frame;
};

struct EditTrace {
    std::vector<EditRecord> records;
    std::size_t size() const { return records.size(); }
};

struct EditResult {
    Vec x;
    EditTrace trace;
};

// Loop state shared by the secant-ensemble and Jacobian-based starts.
struct EditState {
    Vec x;
    std::vector<Vec> members;
    TangentFrame frame;
    bool has_frame = false;
    // anchor secants are taken about the footpoint itself, so refreshes skip
    // the mean subtraction (centering d anchors is rank-defective)
    bool centered_refresh = true;
};

Vec guidance_vector(const GuidanceSpec& spec, const Vec& x, const TangentFrame& frame);
// scalar objective when the guidance defines one (NaN otherwise)
double guidance_value(const GuidanceSpec& spec, const Vec& x);

// Alternating projected tangent steps and noising-denoising retractions,
// starting from x = Phi(z) with a flow-propagated probe ensemble.
EditResult geoedit_run(const ScoreField& field, const Vec& z, const EditConfig& cfg,
                       const RngStream& rng, const ManifoldOracle* oracle = nullptr);

// Initialize from an externally supplied basis (e.g. a Jacobian SVD): the
// frame is u0 and the ensemble is d small anchors x + eps_anchor * u_j.
EditState jacobian_start(const Vec& x, const Eigen::MatrixXd& u0, double eps_anchor,
                         const EditConfig& cfg);

EditResult run_edit_loop(const ScoreField& field, EditState state, const EditConfig& cfg,
                         const RngStream& rng, const ManifoldOracle* oracle = nullptr);

struct SmoothLoss {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;  // empty -> FD fallback, h = 1e-5
};

// Riemannian-style descent: v = P grad f(x), x <- Retract(x - eta v).
EditResult projected_gd(const ScoreField& field, const SmoothLoss& loss, const Vec& z,
                        const EditConfig& cfg, const RngStream& rng,
                        const ManifoldOracle* oracle = nullptr);

}  // namespace geoflow
