#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/edit.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/manifold.hpp"
#include "geoflow/schedule.hpp"
#include "geoflow/score.hpp"

namespace geoflow {

enum class ScoreSpecType { curve_tube, gmm, standard_gaussian };

struct EstimatorParams {
    std::size_t m = 10;
    double sigma_pert = 0.2;
    std::size_t k = 1;
    bool antithetic = false;
};

struct SweepParams {
    std::vector<double> sigma;
    std::vector<double> rho;
    std::vector<double> kappa_a;
    std::vector<double> eta;
    std::vector<double> t_grid;
    std::vector<std::size_t> k;
    std::vector<std::size_t> q;
    std::size_t n_samples = 64;
    double eta_var = 0.99;
    double z_scale = 1.0;
    double baseline_t = 0.1;   // diffusion time for the posterior-mean baseline
    double target_arc = 1.5;   // arc offset of the descent target along the curve
};

struct EditParams {
    double eta = 0.1;
    std::size_t iterations = 64;
    std::size_t refresh_period = 4;
    NormalizeMode normalize = NormalizeMode::off;
    bool project = true;
    GuidanceSpec guidance = GuidanceSpec::basis_direction(0, 1.0);
};

struct ExperimentConfig {
    std::string experiment;
    std::vector<std::uint64_t> seeds;
    std::string output_dir = "out";
    unsigned jobs = 1;

    Schedule schedule = Schedule::linear(0.1, 20.0, 1.0);
    std::optional<ManifoldOracle> manifold;

    ScoreSpecType score_type = ScoreSpecType::curve_tube;
    std::size_t n_centers = 64;
    double tube_rho = 0.05;
    std::optional<std::pair<double, double>> span;
    std::vector<GaussianComponent> gmm_components;
    std::size_t gaussian_dim = 2;

    FlowConfig flow;
    RetractionConfig retraction;
    EstimatorParams estimator;
    EditParams edit;
    SweepParams sweep;

    nlohmann::json raw;  // canonicalized for hashing
};

const std::vector<std::string>& experiment_names();

// Throws std::invalid_argument with a descriptive message on malformed input.
ExperimentConfig parse_config(const nlohmann::json& j);

// Returns one diagnostic per failing field; empty iff run would accept.
std::vector<std::string> validate_config(const nlohmann::json& j);

// Builds the score field declared by the config (curve tubes need the
// manifold spec).
ScoreField build_field(const ExperimentConfig& cfg);

}  // namespace geoflow
