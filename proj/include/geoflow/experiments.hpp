#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "geoflow/config.hpp"

namespace geoflow {

struct ResultTable {
    using Cell = std::variant<long long, double, std::string>;
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;
};

// '#'-prefixed metadata lines, a header row, then one line per row;
// UTF-8, '.' decimal separator, %.17g floats.
std::string table_to_csv(const ResultTable& table);

struct RunOutput {
    std::vector<ResultTable> tables;
};

RunOutput run_experiment(const ExperimentConfig& cfg);

// Runs the experiment and writes every table under
// output_dir/<experiment>/<config hash>/<table>.csv. Returns written paths.
std::vector<std::string> run_and_write(const ExperimentConfig& cfg);

}  // namespace geoflow
