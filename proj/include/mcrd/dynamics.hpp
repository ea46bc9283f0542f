#pragma once

#include <optional>
#include <vector>

#include "mcrd/asymptotics.hpp"
#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"
#include "mcrd/stationary.hpp"

namespace mcrd {

struct DecayFit {
    double rate = 0.0;
    double r2 = 0.0;
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

struct SimulationTrace {
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> layer_x;
    std::vector<Snapshot> snapshots;
    std::optional<DecayFit> decay_fit;
};

struct SimOptions {
    double t_end = 100.0;
    double dt = 0.0;            // <= 0: automatic, 0.5 / max |f_u|, capped at 0.1
    double snapshot_every = 0.0;  // time between stored snapshots; 0 = endpoints only
    double record_every = 0.0;    // time between trace records; 0 = every step
    double blowup_bound = 1e6;
    int dt_reeval_steps = 100;
    bool freeze_v = false;  // scalar comparison run: v held fixed
};

// One conservation-exact semi-implicit step: diffusion implicit, the shared
// reaction term explicit in both components so the weighted sums cancel.
void step(std::vector<double>& u, std::vector<double>& v, const BistableModel& model, double eps,
          double d, double dt, const Grid& grid);

SimulationTrace simulate(std::vector<double> u0, std::vector<double> v0, const BistableModel& model,
                         double eps, double d, const Grid& grid, const SimOptions& opt);

// Least-squares fit of log |layer_x(t) - layer_inf| over [t_begin, t_end].
DecayFit decay_rate_fit(const SimulationTrace& trace, double t_begin, double t_end,
                        double layer_inf);

// Composite profile with the jump moved by `shift`, second field constant so
// the discrete mass equals xi exactly.
std::pair<std::vector<double>, std::vector<double>> displaced_initial_state(
    const LayerAsymptotics& asym, double eps, const Grid& grid, double shift);

// Plateau seed of the upper state near x = 1 with uniform second field sized
// so the discrete mass equals xi.
std::pair<std::vector<double>, std::vector<double>> ignition_initial_state(
    const LayerAsymptotics& asym, const Grid& grid, double seed_width);

}  // namespace mcrd
