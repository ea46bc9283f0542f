#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcrd/asymptotics.hpp"
#include "mcrd/io.hpp"
#include "mcrd/model.hpp"
#include "mcrd/spectrum.hpp"
#include "mcrd/stationary.hpp"

namespace mcrd {

// Declarative run description. One JSON document drives every subcommand;
// unknown keys are rejected and the fully resolved form (defaults filled in)
// is emitted next to the results.
struct RunConfig {
    std::string model_name;  // "cubic" | "hill"
    double alpha = 0.2;      // cubic
    double beta = 0.5;       // cubic
    double kappa = 0.067;    // hill

    double d = 1.0;
    double xi = 0.35;
    std::vector<double> eps_list;  // one entry for single-eps commands
    int grid_n = 0;                // 0: resolution rule ceil(4/eps) + 1
    JumpDirection direction = JumpDirection::Up;
    std::optional<int> maxwell_index;

    ModelTolerances tolerances;
    StationaryOptions stationary;
    AsymptoticsOptions asymptotics;

    struct Spectrum {
        double re_min = -1.0;
        int count = 16;
        std::string method = "auto";  // auto | dense | shift-invert
    } spectrum;

    struct Simulate {
        double t_end = 100.0;
        double dt = 0.0;  // 0: automatic
        double snapshot_every = 0.0;
        double record_every = 0.0;
        std::string initial = "stationary";  // stationary | displaced | ignition
        double displacement = 0.05;
        double seed_width = 0.15;
        double fit_t_begin = 10.0;
        bool freeze_v = false;
    } simulate;

    struct Sweep {
        // axis parameter path -> values; cartesian product of all axes
        std::vector<std::pair<std::string, std::vector<double>>> axes;
        std::string command = "analyze";
    } sweep;

    BistableModel make_model() const;
    double eps() const;  // single-eps accessor; throws when a list was given
    int grid_for(double eps) const;
    EigMethod eig_method() const;
    json resolved() const;
};

RunConfig parse_config(const json& j);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace mcrd
