#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlab/network.hpp"

namespace mixlab {

using json = nlohmann::json;

/// One assertion of an experiment with the values it was judged on.
struct Check {
    std::string criterion;  // acceptance tag, e.g. "A3"
    std::string name;
    bool pass = false;
    json measured;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
    std::string name;
    json config;  // defaults merged with the caller's overrides
    std::vector<Check> checks;
    std::map<std::string, Table> tables;  // written as <key>.csv
    double seconds = 0.0;

    bool pass() const;
    /// Report without timing, so reruns compare equal.
    json to_json() const;
};

using ExperimentFn = std::function<ExperimentResult(const json& config)>;

struct ExperimentEntry {
    std::vector<std::string> criteria;
    json defaults;
    ExperimentFn run;
};

const std::map<std::string, ExperimentEntry>& experiment_registry();
std::vector<std::string> experiment_names();

/// Rejects unknown names with the list of registered ones. Unknown config
/// keys are rejected too.
ExperimentResult run_experiment(const std::string& name, const json& overrides = json::object());

/// Connected network on n vertices: random spanning tree plus each other pair
/// with probability `extra`; weights uniform on [0.1, 1].
WeightedNetwork random_network(std::size_t n, std::mt19937_64& rng, double extra = 0.3);

}  // namespace mixlab
