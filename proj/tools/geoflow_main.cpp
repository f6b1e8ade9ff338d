#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "geoflow/config.hpp"
#include "geoflow/experiments.hpp"
#include "geoflow/kernels.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

bool load_json(const std::string& path, nlohmann::json& out, std::string& error) {
    std::ifstream f(path);
    if (!f) {
        error = "cannot open config file: " + path;
        return false;
    }
    try {
        f >> out;
    } catch (const std::exception& e) {
        error = std::string("config parse error: ") + e.what();
        return false;
    }
    return true;
}

void apply_overrides(nlohmann::json& config, const std::vector<std::uint64_t>& seeds,
                     const std::string& output_dir, unsigned jobs) {
    if (!seeds.empty()) config["seeds"] = seeds;
    if (!output_dir.empty()) config["output_dir"] = output_dir;
    if (jobs > 0) config["jobs"] = jobs;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geoflow: tangent-frame estimation and on-manifold editing experiments"};
    app.set_version_flag("--version", std::string("geoflow 0.1.0 (kernels: ") +
                                          geoflow::kernels::backend_name() + ")");
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::uint64_t> seed_override;
    std::string output_dir;
    unsigned jobs = 0;

    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--seed-override", seed_override, "replace the config seed list")
        ->delimiter(',');
    run->add_option("--output-dir", output_dir, "override the output directory");
    run->add_option("--jobs", jobs, "parallel workers over seeds/grid cells");

    CLI::App* validate = app.add_subcommand("validate", "validate a config without running");
    validate->add_option("config", config_path, "experiment config (JSON)")->required();

    CLI::App* list = app.add_subcommand("list-experiments", "list available experiments");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const std::string& name : geoflow::experiment_names()) std::cout << name << "\n";
        return kExitOk;
    }

    nlohmann::json config;
    std::string error;
    if (!load_json(config_path, config, error)) {
        std::cerr << error << "\n";
        return kExitValidation;
    }

    if (validate->parsed()) {
        const auto diags = geoflow::validate_config(config);
        for (const std::string& d : diags) std::cout << d << "\n";
        if (diags.empty()) {
            std::cout << "config ok\n";
            return kExitOk;
        }
        return kExitValidation;
    }

    apply_overrides(config, seed_override, output_dir, jobs);
    const auto diags = geoflow::validate_config(config);
    if (!diags.empty()) {
        for (const std::string& d : diags) std::cerr << d << "\n";
        return kExitValidation;
    }

    try {
        const auto cfg = geoflow::parse_config(config);
        const auto paths = geoflow::run_and_write(cfg);
        for (const std::string& p : paths) std::cout << p << "\n";
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
