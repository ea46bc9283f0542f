#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcrd/asymptotics.hpp"
#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"

namespace mcrd {

struct StationaryOptions {
    double newton_tol = 1e-11;  // residual inf-norm
    int max_iters = 50;
    double min_step = 9.5367431640625e-7;  // 2^-20 damping floor
    bool enforce_resolution = true;        // h <= eps/2 hard, h <= eps/4 advisory
};

struct StationaryProblem {
    const BistableModel& model;
    double eps;
    double d;
    double xi;
    const Grid& grid;
};

// One converged stationary solution of the reduced single-field system; the
// second field is reconstructed from the conserved combination c = eps^2 u + d v.
struct StationaryState {
    std::vector<double> u;
    std::vector<double> v;
    double c = 0.0;
    double eps = 0.0;
    double d = 0.0;
    double xi = 0.0;
    double residual_norm = 0.0;
    int newton_iters = 0;
    double layer_x = 0.0;
    double mass_error = 0.0;
    std::string warning;  // set when h exceeds the advised eps/4
};

// Residual of the (u, c) system: n interior rows (diffusion + reaction with the
// second field eliminated) followed by the mass-constraint row.
std::vector<double> assemble_residual(const std::vector<double>& u, double c,
                                      const StationaryProblem& prob);

StationaryState newton_solve(std::vector<double> u0, double c0, const StationaryProblem& prob,
                             const StationaryOptions& opt = {});

// Builds the composite asymptotic guess and solves.
StationaryState solve_stationary(const LayerAsymptotics& asym, const StationaryProblem& prob,
                                 const StationaryOptions& opt = {});

// Sequential solves over a descending eps list, warm-starting each entry from
// the previous solution (linearly interpolated when the grid changes).
std::vector<StationaryState> continuation_in_eps(const BistableModel& model,
                                                 const LayerAsymptotics& asym, double d, double xi,
                                                 const std::vector<double>& eps_desc,
                                                 const std::function<int(double)>& n_for_eps,
                                                 const StationaryOptions& opt = {});

struct AsymptoticDistance {
    double sup_all = 0.0;    // max |u - u0| over the grid
    double sup_outer = 0.0;  // same restricted to the outer region
    double layer_offset = 0.0;
};

AsymptoticDistance distance_to_asymptotics(const StationaryState& state,
                                           const LayerAsymptotics& asym, const Grid& grid,
                                           double sigma = 0.1);

}  // namespace mcrd
